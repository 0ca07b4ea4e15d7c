//! Abel-type transforms on [s, b] evaluated with the substitution
//! σ = s + (b - s) sin²θ, which turns (σ - s)^{-1/2} dσ into 2√(b-s) cos θ dθ.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_chebyshev, gauss_jacobi, gauss_legendre, Rule};

use super::Accum;

#[derive(Clone, Debug)]
pub struct AbelOps {
    gl: Rule<f64>,
    jacobi: Rule<f64>,
    cheb: Rule<f64>,
}

impl Default for AbelOps {
    fn default() -> Self {
        Self::new(48)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invert22Report {
    /// max |∫_s^b U(s,σ)/√(σ-s) dσ - R(s)|.
    pub direct: f64,
    /// max |-V(s,s) + ∫_s^b ∂_s V(s,σ) dσ - R̃(s)|.
    pub transformed: f64,
    /// max |tilde(direct residual) - transformed residual|.
    pub discrepancy: f64,
}

impl AbelOps {
    pub fn new(n: usize) -> Self {
        Self { gl: gauss_legendre(n), jacobi: gauss_jacobi(n, 0.0, -0.5), cheb: gauss_chebyshev(n) }
    }

    /// θ-panels for the substitution, split where σ crosses a breakpoint.
    pub(crate) fn theta_panels(s: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
        let mut th = vec![0.0];
        let mut inner: Vec<f64> = breaks
            .iter()
            .filter(|&&c| c > s && c < b)
            .map(|&c| ((c - s) / (b - s)).sqrt().asin())
            .collect();
        inner.sort_by(f64::total_cmp);
        th.extend(inner);
        th.push(std::f64::consts::FRAC_PI_2);
        th
    }

    /// Σ over θ-panels of w(θ) g(σ(θ)).
    fn theta_sum<V: Accum>(&self, s: f64, b: f64, breaks: &[f64], mut g: impl FnMut(f64, f64) -> V) -> V {
        let th = Self::theta_panels(s, b, breaks);
        let mut acc = V::zero();
        for w in th.windows(2) {
            for (t, wt) in self.gl.mapped(w[0], w[1]) {
                let sn = t.sin();
                acc += g(s + (b - s) * sn * sn, t.cos()) * wt;
            }
        }
        acc
    }

    /// ∫_s^b U(σ)/√(σ - s) dσ, with panels split at the given breakpoints.
    pub fn forward<V: Accum>(&self, u: impl Fn(f64) -> V, s: f64, b: f64, breaks: &[f64]) -> V {
        if s >= b {
            return V::zero();
        }
        self.theta_sum(s, b, breaks, |sig, c| u(sig) * c) * (2.0 * (b - s).sqrt())
    }

    /// The same operator by Gauss–Jacobi quadrature for the weight (1+x)^{-1/2}.
    pub fn forward_jacobi<V: Accum>(&self, u: impl Fn(f64) -> V, s: f64, b: f64) -> V {
        if s >= b {
            return V::zero();
        }
        let mut acc = V::zero();
        for (x, w) in self.jacobi.nodes.iter().zip(&self.jacobi.weights) {
            acc += u(s + (b - s) * (1.0 + x) * 0.5) * *w;
        }
        acc * ((b - s) * 0.5).sqrt()
    }

    /// R̃(s) = d/ds ∫_s^b R(σ)/√(σ - s) dσ from values and derivatives (R, R') of R.
    pub fn tilde<V: Accum>(&self, r: impl Fn(f64) -> (V, V), s: f64, b: f64, breaks: &[f64]) -> Result<V> {
        if s >= b {
            return Err(Error::EndpointSingular);
        }
        let rt = (b - s).sqrt();
        Ok(self.theta_sum(s, b, breaks, |sig, c| {
            let (v, d) = r(sig);
            v * (-c / rt) + d * (2.0 * rt * c * c * c)
        }))
    }

    /// V(s,σ) = ∫₀¹ U(s + τ(σ - s), σ)/√(τ(1-τ)) dτ.
    pub fn v_kernel<V: Accum>(&self, u: impl Fn(f64, f64) -> V, s: f64, sigma: f64) -> V {
        let mut acc = V::zero();
        for (x, w) in self.cheb.nodes.iter().zip(&self.cheb.weights) {
            let tau = 0.5 * (1.0 + x);
            acc += u(s + tau * (sigma - s), sigma) * *w;
        }
        acc
    }

    /// ∂_s V(s,σ) from the first-argument derivative ∂₁U.
    pub fn v_kernel_ds<V: Accum>(&self, u1: impl Fn(f64, f64) -> V, s: f64, sigma: f64) -> V {
        let mut acc = V::zero();
        for (x, w) in self.cheb.nodes.iter().zip(&self.cheb.weights) {
            let tau = 0.5 * (1.0 + x);
            acc += u1(s + tau * (sigma - s), sigma) * (*w * (1.0 - tau));
        }
        acc
    }

    /// Evaluates ∫_s^b U(s,σ)/√(σ-s) dσ = R(s) and its transformed form on the
    /// grid. `u` returns (U, ∂₁U, ∂₂U), `r` returns (R, R').
    pub fn invert22_check(
        &self,
        u: impl Fn(f64, f64) -> (f64, f64, f64),
        r: impl Fn(f64) -> (f64, f64),
        b: f64,
        grid: &[f64],
    ) -> Invert22Report {
        let pi = std::f64::consts::PI;
        let direct = |s: f64| -> (f64, f64) {
            if s >= b {
                return (-r(s).0, -r(s).1);
            }
            let rt = (b - s).sqrt();
            let mut i0 = 0.0;
            let mut i1 = 0.0;
            for (t, wt) in self.gl.mapped(0.0, std::f64::consts::FRAC_PI_2) {
                let (sn, c) = t.sin_cos();
                let w = sn * sn;
                let (v, v1, v2) = u(s, s + (b - s) * w);
                i0 += wt * 2.0 * c * v;
                i1 += wt * 2.0 * c * (v1 + (1.0 - w) * v2);
            }
            let (rv, rd) = r(s);
            (rt * i0 - rv, -i0 / (2.0 * rt) + rt * i1 - rd)
        };
        let transformed = |s: f64| -> f64 {
            let vss = pi * u(s, s).0;
            let mut integral = 0.0;
            for (sig, wt) in self.gl.mapped(s, b) {
                integral += wt * self.v_kernel_ds(|a, c| u(a, c).1, s, sig);
            }
            let rt = self.tilde(|x| r(x), s, b, &[]).unwrap_or(f64::NAN);
            -vss + integral - rt
        };
        let mut rep = Invert22Report { direct: 0.0, transformed: 0.0, discrepancy: 0.0 };
        for &s in grid.iter().filter(|&&s| s < b) {
            let d = direct(s).0;
            let t = transformed(s);
            let mapped = self.tilde(direct, s, b, &[]).unwrap_or(f64::NAN);
            rep.direct = rep.direct.max(d.abs());
            rep.transformed = rep.transformed.max(t.abs());
            rep.discrepancy = rep.discrepancy.max((mapped - t).abs());
        }
        rep
    }
}
