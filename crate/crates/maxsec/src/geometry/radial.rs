//! Radial description of a body of revolution: R(α) = ρ_K(cos α, sin α) and
//! r(α) = ρ_K(-cos α, sin α) for α ∈ [0, π/2].

use crate::error::{Error, Result};
use crate::geometry::profile::{Arc, PolarArc, ProfileFunction, Side};
use crate::scalar::Real;
use crate::spline::{CubicSpline, EndCondition};

#[derive(Clone, Debug)]
pub struct RadialPair<T> {
    big: CubicSpline<T>,
    small: CubicSpline<T>,
}

impl<T: Real> RadialPair<T> {
    pub fn new(alpha: Vec<T>, big: Vec<T>, small: Vec<T>) -> Result<Self> {
        if alpha.len() < 4 || big.len() != alpha.len() || small.len() != alpha.len() {
            return Err(Error::InvalidInput("radial pair needs matching grids of at least 4 points".into()));
        }
        if big.iter().chain(small.iter()).any(|&v| !(v > T::zero())) {
            return Err(Error::InvalidInput("radial functions must be positive".into()));
        }
        let (rb, rs) = (*big.last().unwrap(), *small.last().unwrap());
        if (rb - rs).abs() > T::lit(1e-8) * rb {
            return Err(Error::InvalidInput("R(π/2) and r(π/2) disagree".into()));
        }
        Ok(Self {
            big: CubicSpline::new(alpha.clone(), big, EndCondition::NotAKnot),
            small: CubicSpline::new(alpha, small, EndCondition::NotAKnot),
        })
    }

    pub fn alpha(&self) -> &[T] {
        self.big.knots()
    }

    pub fn big_values(&self) -> &[T] {
        self.big.values()
    }

    pub fn small_values(&self) -> &[T] {
        self.small.values()
    }

    /// (R(α), R'(α)).
    pub fn big(&self, alpha: T) -> (T, T) {
        let (v, d, _) = self.big.eval(alpha);
        (v, d)
    }

    /// (r(α), r'(α)).
    pub fn small(&self, alpha: T) -> (T, T) {
        let (v, d, _) = self.small.eval(alpha);
        (v, d)
    }
}

/// Samples R and r on n uniform angles in [0, π/2].
pub fn radial_from_profile<T: Real>(profile: &ProfileFunction<T>, n: usize) -> Result<RadialPair<T>> {
    let alpha: Vec<T> = (0..n)
        .map(|i| T::FRAC_PI_2() * T::lit(i as f64) / T::lit((n - 1) as f64))
        .collect();
    let big = alpha.iter().map(|&a| profile.radial(a, Side::Right)).collect();
    let small = alpha.iter().map(|&a| profile.radial(a, Side::Left)).collect();
    RadialPair::new(alpha, big, small)
}

/// Profile made of two polar arcs meeting on the x₂-axis. The dimension does
/// not enter the generator; it is accepted for symmetry with the body type.
pub fn profile_from_radial<T: Real>(pair: &RadialPair<T>, dim: usize) -> Result<ProfileFunction<T>> {
    if dim < 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let alpha = pair.alpha().to_vec();
    let right = PolarArc::new(Side::Right, alpha.clone(), pair.big_values().to_vec(), EndCondition::NotAKnot);
    let left = PolarArc::new(Side::Left, alpha, pair.small_values().to_vec(), EndCondition::NotAKnot);
    ProfileFunction::new(vec![Arc::Polar(left), Arc::Polar(right)])
}
