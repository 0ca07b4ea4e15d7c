//! The compactly supported perturbation h(s) = eps * sum_j x_j h_j(s) built
//! from exponential bumps with pairwise disjoint supports in [1-2δ, 1-δ].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Rule};
use crate::scalar::Real;
use crate::taylor::Taylor;

/// Largest derivative order served by [`Perturbation::h_eval`].
pub const MAX_ORDER: usize = 23;
const JET_LEN: usize = MAX_ORDER + 1;

/// Switch to the integral form of the divided difference below this gap.
pub const COINCIDENCE_GAP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpBasis {
    pub delta: f64,
    pub count: usize,
    /// Fraction of each cell left empty on either side of its bump.
    pub gap: f64,
}

impl BumpBasis {
    pub fn new(delta: f64, count: usize) -> Result<Self> {
        Self::with_gap(delta, count, 0.02)
    }

    pub fn with_gap(delta: f64, count: usize, gap: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.125) {
            return Err(Error::InvalidInput(format!("delta {delta} outside (0, 1/8]")));
        }
        if count == 0 || !(0.0..0.5).contains(&gap) {
            return Err(Error::InvalidInput("bump basis needs count >= 1 and gap in [0, 1/2)".into()));
        }
        Ok(Self { delta, count, gap })
    }

    fn cell_width(&self) -> f64 {
        self.delta / self.count as f64
    }

    /// Closed support [lo, hi] of bump j.
    pub fn support(&self, j: usize) -> (f64, f64) {
        let w = self.cell_width();
        let lo = 1.0 - 2.0 * self.delta + j as f64 * w;
        (lo + self.gap * w, lo + w - self.gap * w)
    }

    pub fn supports(&self) -> Vec<(f64, f64)> {
        (0..self.count).map(|j| self.support(j)).collect()
    }

    /// Index of the bump whose open support contains s.
    pub fn locate(&self, s: f64) -> Option<usize> {
        let w = self.cell_width();
        let u = (s - (1.0 - 2.0 * self.delta)) / w;
        if !(u > 0.0) || u >= self.count as f64 {
            return None;
        }
        let j = u.floor() as usize;
        let (lo, hi) = self.support(j);
        (s > lo && s < hi).then_some(j)
    }

    /// Breakpoints separating smooth pieces: the support ends and interval ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![1.0 - 2.0 * self.delta];
        for (lo, hi) in self.supports() {
            b.push(lo);
            b.push(hi);
        }
        b.push(1.0 - self.delta);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        b
    }
}

/// Taylor jet of exp(-1/(1-τ²)) in τ, zero when the value underflows.
fn bump_jet<T: Real, const N: usize>(tau: T) -> Taylor<T, N> {
    let one_minus = T::one() - tau * tau;
    if one_minus <= T::lit(1.0 / 700.0) {
        return Taylor::zero();
    }
    let t = Taylor::<T, N>::variable(tau);
    let q = -(t * t) + T::one();
    (-q.recip()).exp()
}

#[derive(Clone, Debug)]
pub struct Perturbation<T> {
    pub basis: BumpBasis,
    pub coeffs: Vec<T>,
    pub scale: T,
    gl16: Rule<T>,
}

/// Serializable description from which a perturbation is rebuilt exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub basis: BumpBasis,
    pub coeffs: Vec<f64>,
    pub scale: f64,
}

impl<T: Real> Perturbation<T> {
    pub fn new(basis: BumpBasis, coeffs: Vec<T>, scale: T) -> Result<Self> {
        if coeffs.len() != basis.count {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for {} bumps",
                coeffs.len(),
                basis.count
            )));
        }
        Ok(Self { basis, coeffs, scale, gl16: gauss_legendre(16) })
    }

    pub fn zero(basis: BumpBasis) -> Self {
        let n = basis.count;
        Self::new(basis, vec![T::zero(); n], T::zero()).expect("matching sizes")
    }

    pub fn from_spec(spec: &PerturbationSpec) -> Result<Self> {
        Self::new(spec.basis.clone(), spec.coeffs.iter().map(|&c| T::lit(c)).collect(), T::lit(spec.scale))
    }

    pub fn spec(&self) -> PerturbationSpec {
        PerturbationSpec {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c.as_f64()).collect(),
            scale: self.scale.as_f64(),
        }
    }

    pub fn delta(&self) -> f64 {
        self.basis.delta
    }

    pub fn is_zero(&self) -> bool {
        self.scale == T::zero() || self.coeffs.iter().all(|c| *c == T::zero())
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        for c in p.coeffs.iter_mut() {
            *c = -*c;
        }
        p
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut p = self.clone();
        p.scale *= factor;
        p
    }

    /// Taylor jet of h at s through order N-1.
    pub fn jet<const N: usize>(&self, s: T) -> Taylor<T, N> {
        let Some(j) = self.basis.locate(s.as_f64()) else {
            return Taylor::zero();
        };
        let amp = self.scale * self.coeffs[j];
        if amp == T::zero() {
            return Taylor::zero();
        }
        let (lo, hi) = self.basis.support(j);
        let half = T::lit(0.5 * (hi - lo));
        let tau = (s - T::lit(0.5 * (lo + hi))) / half;
        let mut b = bump_jet::<T, N>(tau);
        // chain rule for the affine map: coefficient k picks up half^-k
        let inv = T::one() / half;
        let mut f = amp;
        for c in b.coeffs.iter_mut() {
            *c *= f;
            f *= inv;
        }
        b
    }

    /// h^{(order)}(s); exactly 0 outside the supports.
    pub fn h_eval(&self, s: T, order: usize) -> Result<T> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh { order, max: MAX_ORDER });
        }
        Ok(self.jet::<JET_LEN>(s).derivative(order))
    }

    pub fn value(&self, s: T) -> T {
        self.jet::<1>(s).coeffs[0]
    }

    /// max_{j<=k} sup |h^{(j)}| on a dense grid over the supports.
    pub fn ck_norm(&self, k: usize) -> Result<T> {
        if k > MAX_ORDER {
            return Err(Error::OrderTooHigh { order: k, max: MAX_ORDER });
        }
        let mut best = T::zero();
        for (lo, hi) in self.basis.supports() {
            let n = 400;
            for i in 1..n {
                let s = T::lit(lo + (hi - lo) * i as f64 / n as f64);
                let jet = self.jet::<JET_LEN>(s);
                for j in 0..=k {
                    best = best.max(jet.derivative(j).abs());
                }
            }
        }
        Ok(best)
    }

    /// H(s,σ) = (h(σ) - h(s)) / (σ - s), with H(s,s) = h'(s).
    pub fn divided_difference(&self, s: T, sigma: T) -> T {
        self.divided_difference_jet::<1>(s, sigma).coeffs[0]
    }

    /// Jet of H(s + ε, σ) in ε.
    pub fn divided_difference_jet<const M: usize>(&self, s: T, sigma: T) -> Taylor<T, M> {
        if self.is_zero() {
            return Taylor::zero();
        }
        let gap = sigma - s;
        if gap.abs() >= T::lit(COINCIDENCE_GAP) {
            let hs = self.jet::<M>(s);
            let num = -(hs - self.value(sigma));
            let mut den = Taylor::<T, M>::constant(gap);
            if M > 1 {
                den.coeffs[1] = -T::one();
            }
            return num / den;
        }
        // H(s+ε,σ) = ∫₀¹ h'(s + (σ-s)τ + ε(1-τ)) dτ
        let mut out = Taylor::<T, M>::zero();
        for (x, w) in self.gl16.mapped(T::zero(), T::one()) {
            let p = s + gap * x;
            let jet = self.jet_shifted_derivative::<M>(p);
            let mut f = w;
            for m in 0..M {
                out.coeffs[m] += f * jet[m];
                f *= T::one() - x;
            }
        }
        out
    }

    /// Taylor coefficients of h' at p: h^{(m+1)}(p)/m!, m < M.
    fn jet_shifted_derivative<const M: usize>(&self, p: T) -> [T; M] {
        let mut out = [T::zero(); M];
        if M < 4 {
            let short = self.jet::<4>(p);
            for (m, o) in out.iter_mut().enumerate() {
                *o = short.coeffs[m + 1] * T::lit((m + 1) as f64);
            }
            return out;
        }
        let full = self.jet::<JET_LEN>(p);
        for (m, o) in out.iter_mut().enumerate() {
            *o = full.coeffs[m + 1] * T::lit((m + 1) as f64);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(delta: f64, m: usize) -> Perturbation<f64> {
        let basis = BumpBasis::new(delta, m).unwrap();
        let coeffs = (0..m).map(|j| ((j * 7 + 3) % 5) as f64 - 2.0 + 0.3).collect();
        Perturbation::new(basis, coeffs, 1e-3).unwrap()
    }

    #[test]
    fn zero_outside_supports() {
        let p = sample(0.05, 6);
        for order in 0..8 {
            assert_eq!(p.h_eval(1.0 - 0.025, order).unwrap(), 0.0);
            assert_eq!(p.h_eval(0.85, order).unwrap(), 0.0);
        }
    }

    #[test]
    fn odd_derivative_vanishes_at_center() {
        let basis = BumpBasis::new(0.05, 1).unwrap();
        let p = Perturbation::new(basis.clone(), vec![1.0], 1.0).unwrap();
        let (lo, hi) = basis.support(0);
        let c = 0.5 * (lo + hi);
        assert!(p.h_eval(c, 1).unwrap().abs() < 1e-12);
        assert_relative_eq!(p.h_eval(c, 0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = sample(0.05, 3);
        let s = 0.912;
        let e = 1e-6;
        for order in 0..5 {
            let fd = (p.h_eval(s + e, order).unwrap() - p.h_eval(s - e, order).unwrap()) / (2.0 * e);
            let an = p.h_eval(s, order + 1).unwrap();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "order {order}: {fd} vs {an}");
        }
    }

    #[test]
    fn divided_difference_quotient_and_coincidence() {
        let p = sample(0.05, 2);
        let (s, sg) = (0.905, 0.921);
        let q = (p.value(sg) - p.value(s)) / (sg - s);
        assert_relative_eq!(p.divided_difference(s, sg), q, epsilon = 1e-14);
        assert_relative_eq!(p.divided_difference(s, s), p.h_eval(s, 1).unwrap(), epsilon = 1e-12);
        // continuity across the switch
        let a = p.divided_difference(s, s + 0.99e-4);
        let b = p.divided_difference(s, s + 1.01e-4);
        assert!((a - b).abs() < 1e-6 * p.ck_norm(2).unwrap());
    }

    #[test]
    fn divided_difference_jet_derivative() {
        let p = sample(0.05, 2);
        let (s, sg) = (0.905, 0.9052);
        let e = 1e-7;
        for sig in [sg, s + 3e-5] {
            let j = p.divided_difference_jet::<2>(s, sig);
            let fd = (p.divided_difference(s + e, sig) - p.divided_difference(s - e, sig)) / (2.0 * e);
            assert!((j.coeffs[1] - fd).abs() < 1e-5 * p.ck_norm(3).unwrap(), "{} {}", j.coeffs[1], fd);
        }
    }

    #[test]
    fn ck_norm_homogeneous_and_even() {
        let p = sample(0.05, 4);
        let n = p.ck_norm(3).unwrap();
        assert_relative_eq!(p.scaled(2.0).ck_norm(3).unwrap(), 2.0 * n, epsilon = 1e-12 * n);
        assert_eq!(p.negated().ck_norm(3).unwrap(), n);
    }

    #[test]
    fn supports_disjoint_and_inside() {
        let b = BumpBasis::new(0.05, 6).unwrap();
        let s = b.supports();
        assert!(s[0].0 > 0.9 && s[5].1 < 0.95);
        for w in s.windows(2) {
            assert!(w[0].1 < w[1].0);
        }
    }
}
