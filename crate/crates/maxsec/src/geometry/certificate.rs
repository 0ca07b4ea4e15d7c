//! Convexity, unimodality and asymmetry checks on a body of revolution.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::body::{BodyOfRevolution, Direction};
use crate::geometry::profile::ProfileFunction;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityReport<T> {
    pub pass: bool,
    /// Largest second derivative found on the scan.
    pub worst: T,
    pub at: T,
}

/// Scans f'' on n interior points; passes iff f'' ≤ -margin throughout.
pub fn convexity_check<T: Real>(profile: &ProfileFunction<T>, margin: T, n: usize) -> ConvexityReport<T> {
    let (lo, hi) = profile.domain();
    let mut worst = -T::infinity();
    let mut at = lo;
    for i in 1..n {
        let x = lo + (hi - lo) * T::lit(i as f64) / T::lit(n as f64);
        let d2 = profile.eval(x).2;
        if d2 > worst || d2.is_nan() {
            worst = d2;
            at = x;
        }
    }
    ConvexityReport { pass: worst <= -margin, worst, at }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymmetryReport<T> {
    /// Root-mean-square misfit of t*(u) by ⟨u, c⟩.
    pub residual: T,
    /// Least-squares centre (c₁, c₂).
    pub center: (T, T),
}

/// Least-squares fit t*(u) ≈ ⟨u, c⟩ over the given directions.
pub fn asymmetry_fit<T: Real>(dirs: &[Direction<T>], t_stars: &[T]) -> Result<AsymmetryReport<T>> {
    if dirs.len() != t_stars.len() || dirs.len() < 3 {
        return Err(Error::DegenerateDirections);
    }
    let mut a = Matrix2::<f64>::zeros();
    let mut b = Vector2::<f64>::zeros();
    for (d, &t) in dirs.iter().zip(t_stars) {
        let (n1, n2) = d.normal();
        let u = Vector2::new(n1.as_f64(), n2.as_f64());
        a += u * u.transpose();
        b += u * t.as_f64();
    }
    let eig = a.symmetric_eigenvalues();
    let (emin, emax) = (eig.min(), eig.max());
    if !(emin > 1e-10 * emax) {
        return Err(Error::DegenerateDirections);
    }
    let c = a.lu().solve(&b).ok_or(Error::DegenerateDirections)?;
    let mut ss = 0.0;
    for (d, &t) in dirs.iter().zip(t_stars) {
        let (n1, n2) = d.normal();
        let e = n1.as_f64() * c[0] + n2.as_f64() * c[1] - t.as_f64();
        ss += e * e;
    }
    Ok(AsymmetryReport {
        residual: T::lit((ss / dirs.len() as f64).sqrt()),
        center: (T::lit(c[0]), T::lit(c[1])),
    })
}

/// Computes t*(u) per direction and fits a common point.
pub fn asymmetry_certificate<T: Real>(body: &BodyOfRevolution<T>, dirs: &[Direction<T>]) -> Result<AsymmetryReport<T>> {
    if dirs.len() < body.dim + 1 {
        return Err(Error::DegenerateDirections);
    }
    let t: Vec<T> = dirs
        .iter()
        .map(|&d| body.max_section(d).map(|m| m.t_star))
        .collect::<Result<_>>()?;
    asymmetry_fit(dirs, &t)
}

/// Largest second difference of t ↦ V(t)^{1/(d-1)} on n interior offsets,
/// relative to the peak value. Non-positive up to rounding for convex bodies.
pub fn brunn_defect<T: Real>(body: &BodyOfRevolution<T>, dir: Direction<T>, n: usize) -> T {
    let (n1, n2) = dir.normal();
    let hi = body.support((n1, n2));
    let lo = -body.support((-n1, n2));
    let e = T::one() / T::lit(body.dim as f64 - 1.0);
    let vals: Vec<T> = (1..n)
        .map(|i| {
            let t = lo + (hi - lo) * T::lit(i as f64) / T::lit(n as f64);
            body.section_volume_by_direction(dir, t).unwrap_or(T::zero()).powf(e)
        })
        .collect();
    let peak = vals.iter().cloned().fold(T::zero(), T::max);
    vals.windows(3)
        .map(|w| (w[0] - T::lit(2.0) * w[1] + w[2]) / peak)
        .fold(-T::infinity(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::profile::Arc;
    use crate::spline::{CubicSpline, EndCondition};
    use approx::assert_relative_eq;

    fn dirs(n: usize) -> Vec<Direction<f64>> {
        (0..n)
            .map(|i| Direction::new(std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64, if i % 2 == 0 { 1 } else { -1 }))
            .collect()
    }

    #[test]
    fn semicircle_is_strictly_concave() {
        let r = convexity_check(&ProfileFunction::<f64>::unit_circle(), 0.5, 1000);
        assert!(r.pass);
        assert_relative_eq!(r.worst, -1.0, epsilon = 1e-12);
        assert!(r.at.abs() < 1e-12);
    }

    #[test]
    fn quartic_fails_near_zero() {
        let xi: Vec<f64> = (0..401).map(|i| -1.0 + 2.0 * i as f64 / 400.0).collect();
        let f: Vec<f64> = xi.iter().map(|x| 1.0 - x.powi(4)).collect();
        let arc = Arc::Cartesian { spline: CubicSpline::new(xi, f, EndCondition::NotAKnot), end: EndCondition::NotAKnot };
        let p = ProfileFunction::new(vec![arc]).unwrap();
        let r = convexity_check(&p, 1e-3, 1000);
        assert!(!r.pass);
        assert!(r.at.abs() < 0.05);
    }

    #[test]
    fn ball_has_no_asymmetry() {
        let b = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        let r = asymmetry_certificate(&b, &dirs(7)).unwrap();
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn translated_ball_recovers_center() {
        let b = BodyOfRevolution::<f64>::unit_ball(4).unwrap().translated(0.2);
        let r = asymmetry_certificate(&b, &dirs(9)).unwrap();
        assert!(r.residual < 1e-11);
        assert_relative_eq!(r.center.0, 0.2, epsilon = 1e-11);
        assert!(r.center.1.abs() < 1e-11);
    }

    #[test]
    fn parallel_directions_are_degenerate() {
        let d = vec![Direction::new(0.3, 1); 5];
        assert!(matches!(asymmetry_fit(&d, &[0.0; 5]), Err(Error::DegenerateDirections)));
    }

    #[test]
    fn ball_sections_satisfy_brunn() {
        let b = BodyOfRevolution::<f64>::unit_ball(5).unwrap();
        assert!(brunn_defect(&b, Direction::new(0.7, 1), 60) < 1e-12);
    }
}
