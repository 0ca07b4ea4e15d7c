//! Hyperplane sections of a body of revolution
//! K_f = { x : x₁ ∈ [-λ, μ], |x'| ≤ f(x₁) }.
//!
//! A hyperplane is described by a unit normal n = (side·cos α, sin α) in the
//! (x₁, x₂) plane and an offset t, or by a chord line x₂ = sξ + h. Along the
//! line p(τ) = t·n + τ·(-n₂, n₁) the section is a (d-2)-ball bundle, so
//! vol = v_{d-2} ∫ (f(p₁)² - p₂²)^{(d-2)/2} dτ.

use crate::error::{Error, Result};
use crate::geometry::profile::ProfileFunction;
use crate::quadrature::{gauss_legendre, Rule};
use crate::scalar::Real;
use crate::solve1d::{brent_root, golden_max};

/// Volume of the unit n-ball.
pub fn unit_ball_volume<T: Real>(n: usize) -> T {
    let mut v = if n % 2 == 0 { T::one() } else { T::lit(2.0) };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v = v * T::lit(2.0) * T::PI() / T::lit(k as f64);
        k += 2;
    }
    v
}

/// Surface measure of the unit sphere S^{n-1} in Rⁿ.
pub fn sphere_area<T: Real>(n: usize) -> T {
    T::lit(n as f64) * unit_ball_volume::<T>(n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordLine<T> {
    pub s: T,
    pub hval: T,
}

impl<T: Real> ChordLine<T> {
    pub fn eval(&self, xi: T) -> T {
        self.s * xi + self.hval
    }
}

/// A direction u = (side·cos α, sin α, 0, …) with α ∈ [0, π/2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction<T> {
    pub alpha: T,
    pub side: i8,
}

impl<T: Real> Direction<T> {
    pub fn new(alpha: T, side: i8) -> Self {
        Self { alpha, side: if side < 0 { -1 } else { 1 } }
    }

    pub fn normal(&self) -> (T, T) {
        let (s, c) = self.alpha.sin_cos();
        (T::lit(self.side as f64) * c, s)
    }

    /// Direction and offset of the chord plane x₂ = sξ + h.
    pub fn from_chord(chord: ChordLine<T>) -> (Self, T) {
        let r = (T::one() + chord.s * chord.s).sqrt();
        let alpha = (T::one() / r).atan2(chord.s.abs() / r);
        let side = if chord.s >= T::zero() { -1 } else { 1 };
        (Self::new(alpha, side), chord.hval / r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxSection<T> {
    pub t_star: T,
    pub volume: T,
    /// |dV/dt| at t_star relative to max(absolute integrand mass, volume).
    pub residual: T,
}

#[derive(Clone, Debug)]
pub struct BodyOfRevolution<T> {
    pub dim: usize,
    pub profile: ProfileFunction<T>,
    rule: Rule<T>,
}

impl<T: Real> BodyOfRevolution<T> {
    pub fn new(dim: usize, profile: ProfileFunction<T>) -> Result<Self> {
        if dim < 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self { dim, profile, rule: gauss_legendre(64) })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::new(dim, ProfileFunction::unit_circle())
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.rule = gauss_legendre(n);
        self
    }

    pub fn translated(&self, tau: T) -> Self {
        Self { dim: self.dim, profile: self.profile.translated(tau), rule: self.rule.clone() }
    }

    fn reach(&self, t: T) -> T {
        let (lo, hi) = self.profile.domain();
        lo.abs().max(hi.abs()) + self.profile.max_value() + t.abs() + T::one()
    }

    /// Parameter interval [τa, τb] of the line inside the body.
    pub fn line_interval(&self, n: (T, T), t: T) -> Result<(T, T)> {
        let (n1, n2) = n;
        let g = |tau: T| {
            let p1 = t * n1 - tau * n2;
            let p2 = t * n2 + tau * n1;
            self.profile.extended(p1) - p2.abs()
        };
        let reach = self.reach(t);
        let mut tau0 = None;
        if n1.abs() > T::lit(1e-12) {
            let cand = -t * n2 / n1;
            if g(cand) > T::zero() {
                tau0 = Some(cand);
            }
        }
        let tau0 = match tau0 {
            Some(x) => x,
            None => {
                let (x, v) = golden_max(g, -reach, reach, T::lit(1e-12));
                if v <= T::zero() {
                    return Err(Error::EmptySection);
                }
                x
            }
        };
        let tol = T::lit(1e-15);
        let a = brent_root(g, tau0 - T::lit(2.0) * reach, tau0, tol, 200)
            .ok_or_else(|| Error::RootBracketFailure("left endpoint".into()))?;
        let b = brent_root(g, tau0, tau0 + T::lit(2.0) * reach, tol, 200)
            .ok_or_else(|| Error::RootBracketFailure("right endpoint".into()))?;
        Ok((a, b))
    }

    /// ∫ (f(p₁)² - p₂²)^power · weight(p₁, p₂) dτ over the chord, with the
    /// endpoint substitutions that absorb half-power behaviour.
    fn line_integral<W: Fn(T, T) -> T>(&self, n: (T, T), t: T, power: T, weight: W) -> Result<T> {
        let (n1, n2) = n;
        let (ta, tb) = self.line_interval(n, t)?;
        let mut cuts = vec![ta];
        if n2.abs() > T::lit(1e-14) {
            let mut inner: Vec<T> = self
                .profile
                .breakpoints()
                .map(|xb| (t * n1 - xb) / n2)
                .filter(|&tau| tau > ta && tau < tb)
                .collect();
            inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.extend(inner);
        }
        cuts.push(tb);
        let integrand = |tau: T| {
            let p1 = t * n1 - tau * n2;
            let p2 = t * n2 + tau * n1;
            let q = self.profile.value_sq(p1) - p2 * p2;
            if q <= T::zero() {
                T::zero()
            } else {
                q.powf(power) * weight(p1, p2)
            }
        };
        let half_pi = T::FRAC_PI_2();
        let k = cuts.len() - 1;
        let mut acc = T::zero();
        if k == 1 {
            // τ = m + w sin θ
            let m = (ta + tb) * T::lit(0.5);
            let w = (tb - ta) * T::lit(0.5);
            for (th, wt) in self.rule.mapped(-half_pi, half_pi) {
                acc += wt * integrand(m + w * th.sin()) * w * th.cos();
            }
            return Ok(acc);
        }
        for i in 0..k {
            let (a, b) = (cuts[i], cuts[i + 1]);
            if i == 0 {
                // τ = a + (b-a)(1 - cos φ)
                for (ph, wt) in self.rule.mapped(T::zero(), half_pi) {
                    acc += wt * integrand(a + (b - a) * (T::one() - ph.cos())) * (b - a) * ph.sin();
                }
            } else if i == k - 1 {
                for (ph, wt) in self.rule.mapped(T::zero(), half_pi) {
                    acc += wt * integrand(b - (b - a) * (T::one() - ph.cos())) * (b - a) * ph.sin();
                }
            } else {
                for (x, wt) in self.rule.mapped(a, b) {
                    acc += wt * integrand(x);
                }
            }
        }
        Ok(acc)
    }

    pub fn section_volume_by_direction(&self, dir: Direction<T>, t: T) -> Result<T> {
        let n = dir.normal();
        let p = T::lit((self.dim as f64 - 2.0) * 0.5);
        let v = self.line_integral(n, t, p, |_, _| T::one())?;
        Ok(unit_ball_volume::<T>(self.dim - 2) * v)
    }

    /// Volume of the section by the plane x₂ = sξ + h (rotated about the axis).
    pub fn section_volume(&self, chord: ChordLine<T>) -> Result<T> {
        let (dir, t) = Direction::from_chord(chord);
        self.section_volume_by_direction(dir, t)
    }

    /// (dV/dt, scale) where scale bounds the absolute integrand of dV/dt.
    pub fn section_derivative(&self, dir: Direction<T>, t: T) -> Result<(T, T)> {
        let (n1, n2) = dir.normal();
        let p = T::lit((self.dim as f64 - 4.0) * 0.5);
        let c = unit_ball_volume::<T>(self.dim - 2) * T::lit(self.dim as f64 - 2.0);
        let prof = &self.profile;
        let d = self.line_integral((n1, n2), t, p, |p1, p2| {
            let (f, f1, _) = prof.eval(p1);
            f * f1 * n1 - p2 * n2
        })?;
        let s = self.line_integral((n1, n2), t, p, |p1, p2| {
            let (f, f1, _) = prof.eval(p1);
            (f * f1 * n1).abs() + (p2 * n2).abs()
        })?;
        Ok((c * d, c * s))
    }

    /// Support value max_{x ∈ K} ⟨x, n⟩ for n = (n₁, n₂), n₂ ≥ 0.
    pub fn support(&self, n: (T, T)) -> T {
        let (lo, hi) = self.profile.domain();
        golden_max(|x| x * n.0 + self.profile.value(x) * n.1, lo, hi, T::lit(1e-12)).1
    }

    pub fn max_section(&self, dir: Direction<T>) -> Result<MaxSection<T>> {
        let (n1, n2) = dir.normal();
        let t_hi = self.support((n1, n2));
        let t_lo = -self.support((-n1, n2));
        let vol = |t: T| self.section_volume_by_direction(dir, t).unwrap_or(T::zero());
        let (t0, _) = golden_max(vol, t_lo, t_hi, T::lit(1e-6) * (t_hi - t_lo));
        let res = |t: T| self.section_derivative(dir, t).map(|x| x.0).unwrap_or(T::zero());
        let mut w = T::lit(4e-6) * (t_hi - t_lo);
        let mut t_star = t0;
        for _ in 0..8 {
            let (a, b) = (t0 - w, t0 + w);
            if res(a).signum() != res(b).signum() {
                t_star = brent_root(res, a, b, T::lit(1e-15), 100).unwrap_or(t0);
                break;
            }
            w *= T::lit(4.0);
        }
        let volume = self.section_volume_by_direction(dir, t_star)?;
        let (d, scale) = self.section_derivative(dir, t_star)?;
        let residual = d.abs() / scale.max(volume);
        if residual > T::lit(1e-9) {
            return Err(Error::ConvergenceFailure(format!(
                "first-order residual {:.3e} at alpha {}",
                residual.as_f64(),
                dir.alpha.as_f64()
            )));
        }
        Ok(MaxSection { t_star, volume, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume::<f64>(0), 1.0);
        assert_relative_eq!(unit_ball_volume::<f64>(1), 2.0);
        assert_relative_eq!(unit_ball_volume::<f64>(2), PI, epsilon = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(3), 4.0 * PI / 3.0, epsilon = 1e-15);
        assert_relative_eq!(sphere_area::<f64>(4), 2.0 * PI * PI, epsilon = 1e-14);
    }

    #[test]
    fn ball_chord_sections() {
        let b3 = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        assert_relative_eq!(b3.section_volume(ChordLine { s: 0.0, hval: 0.0 }).unwrap(), PI, epsilon = 1e-13);
        assert_relative_eq!(b3.section_volume(ChordLine { s: 1.0, hval: 0.0 }).unwrap(), PI, epsilon = 1e-13);
        let b4 = BodyOfRevolution::<f64>::unit_ball(4).unwrap();
        let v = b4.section_volume(ChordLine { s: 0.5, hval: 0.0 }).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn ball_direction_sections() {
        let b3 = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        let v = b3.section_volume_by_direction(Direction::new(PI / 2.0, 1), 0.0).unwrap();
        assert_relative_eq!(v, PI, epsilon = 1e-13);
        let v = b3.section_volume_by_direction(Direction::new(0.0, 1), 0.6).unwrap();
        assert_relative_eq!(v, 0.64 * PI, epsilon = 1e-13);
        let b5 = BodyOfRevolution::<f64>::unit_ball(5).unwrap();
        let v = b5.section_volume_by_direction(Direction::new(0.3, -1), 0.5).unwrap();
        assert_relative_eq!(v, unit_ball_volume::<f64>(4) * 0.75f64.powi(2), epsilon = 1e-13);
    }

    #[test]
    fn empty_section_reported() {
        let b = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        assert!(matches!(
            b.section_volume_by_direction(Direction::new(0.4, 1), 1.2),
            Err(Error::EmptySection)
        ));
    }

    #[test]
    fn ball_max_section_is_central() {
        for d in 3..=6 {
            let b = BodyOfRevolution::<f64>::unit_ball(d).unwrap();
            for &a in &[0.0, 0.4, 1.1, PI / 2.0] {
                let m = b.max_section(Direction::new(a, 1)).unwrap();
                assert!(m.t_star.abs() < 1e-12, "d={d} a={a} t={}", m.t_star);
                assert_relative_eq!(m.volume, unit_ball_volume::<f64>(d - 1), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn translation_shifts_t_star_along_axis() {
        let b = BodyOfRevolution::<f64>::unit_ball(3).unwrap().translated(0.15);
        let m = b.max_section(Direction::new(0.0, 1)).unwrap();
        assert_relative_eq!(m.t_star, 0.15, epsilon = 1e-12);
        let m = b.max_section(Direction::new(0.0, -1)).unwrap();
        assert_relative_eq!(m.t_star, -0.15, epsilon = 1e-12);
    }

    #[test]
    fn f32_ball_section() {
        let b = BodyOfRevolution::<f32>::unit_ball(3).unwrap().with_nodes(24);
        let v = b.section_volume_by_direction(Direction::new(0.7, 1), 0.3).unwrap();
        assert!((v - 0.91 * std::f32::consts::PI).abs() < 1e-4);
    }
}
