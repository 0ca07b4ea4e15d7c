//! The chord system for odd d = 2q + 3. Differentiating the constancy and
//! maximality conditions q+1 and q times gives Abel-type equations with the
//! kernels K₁, K₂; the equivalence transform turns them into a Volterra
//! system for Z = (x, y, x', y') on [1-3δ, 1].

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::abel::{consistent_xi, jacobian_fd, picard_solve, AbelOps, ChordState, PanelGrid, PicardDiagnostics, PicardOptions, SingularSystem};
use crate::chord::{chord_grid, dx_o, x_o};
use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;
use crate::perturbation::BumpBasis;
use crate::quadrature::{gauss_legendre, Rule};
use crate::taylor::factorial;
use crate::{Bump, Jet};

/// Jet length in s; supports q ≤ 1.
pub const JL: usize = 4;
type J2 = Jet<2>;
type Jl = Jet<JL>;
pub type V4 = Vector4<f64>;

/// q = (d-3)/2 for the supported odd dimensions.
pub fn half_order(dim: usize) -> Result<usize> {
    match dim {
        3 => Ok(0),
        5 => Ok(1),
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

/// Generalised binomial coefficient C(a, k).
fn gbinom(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64)
}

/// (J₁, J₂) as jets in a shift of s, where `l` is the jet of L(s + t, ξ) and
/// `f2` = f(ξ)² is independent of s.
///
/// With u = f² - L² = u₀ + v(τ), v(0) = 0, the half-power factors out as
/// J₁ = (q+1)! Σ_k C(q+½, k) u₀^{q+1-k} [v^k]_{q+1} and
/// J₂ = q! Σ_k C(q-½, k) u₀^{q-k} [v^k L]_q, both polynomial in u₀.
pub fn j_jets(q: usize, f2: f64, l: &Jl) -> (J2, J2) {
    let p = *l * *l;
    let psh = p.shifted::<2>();
    let lsh = l.shifted::<2>();
    let u0 = J2::constant(f2) - psh[0];
    let n = q + 2;
    let mut v = [J2::zero(); JL];
    for j in 1..n.min(JL) {
        v[j] = -psh[j];
    }
    let mut u0p = [J2::constant(1.0); JL];
    for i in 1..JL {
        u0p[i] = u0p[i - 1] * u0;
    }
    let mut pow = [J2::zero(); JL];
    pow[0] = J2::constant(1.0);
    let mut j1 = J2::zero();
    let mut j2 = J2::zero();
    for k in 0..=q + 1 {
        if k > 0 {
            let mut next = [J2::zero(); JL];
            for a in 0..n {
                for b in 1..n - a {
                    next[a + b] += pow[a] * v[b];
                }
            }
            pow = next;
            j1 += pow[q + 1] * u0p[q + 1 - k] * gbinom(q as f64 + 0.5, k);
        }
        if k <= q {
            let mut c = J2::zero();
            for a in 0..=q {
                c += pow[a] * lsh[q - a];
            }
            j2 += c * u0p[q - k] * gbinom(q as f64 - 0.5, k);
        }
    }
    (j1 * factorial(q + 1), j2 * factorial(q))
}

/// (J₁, J₂)(s, ξ, L(σ, ξ)) for the perturbation h.
pub fn j_factors(q: usize, s: f64, sigma: f64, xi: f64, h: &Bump) -> (f64, f64) {
    let l_sigma = sigma * xi + h.value(sigma);
    let (a, b) = j_jets(q, l_sigma * l_sigma, &l_jet(h, s, xi));
    (a.value(), b.value())
}

/// L(s + t, ξ) as a jet in t.
fn l_jet(h: &Bump, s: f64, xi: f64) -> Jl {
    let mut l = h.jet::<JL>(s);
    l.coeffs[0] += s * xi;
    l.coeffs[1] += xi;
    l
}

/// Quadrature settings of the chord system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OddDiscretization {
    pub panels_per_interval: usize,
    pub order: usize,
    /// Gauss–Legendre nodes per θ-panel of the τ-integral in ∂_s G₂.
    pub tau_nodes: usize,
    /// θ-panels lying inside a bump support are split this many times.
    pub bump_subpanels: usize,
    /// Gauss–Legendre nodes per θ-panel of the R̃ transform.
    pub tilde_nodes: usize,
}

impl Default for OddDiscretization {
    fn default() -> Self {
        Self { panels_per_interval: 1, order: 24, tau_nodes: 8, bump_subpanels: 2, tilde_nodes: 24 }
    }
}

/// G, Θ and Ξ of the odd system for a given perturbation.
#[derive(Clone, Debug)]
pub struct OddSystem {
    pub dim: usize,
    pub q: usize,
    /// v_{d-1}/v_{d-2}.
    pub konst: f64,
    pub h: Bump,
    pub box_radius: f64,
    breaks: Vec<f64>,
    tau: Rule<f64>,
    sub: usize,
    xi_rule: Vec<(f64, f64)>,
    abel: AbelOps,
}

impl OddSystem {
    pub fn new(dim: usize, h: Bump, disc: &OddDiscretization) -> Result<Self> {
        let q = half_order(dim)?;
        let e = x_o(1.0);
        let gl = gauss_legendre::<f64>(32);
        let cuts = [-e, -0.6, 0.6, e];
        let xi_rule = cuts.windows(2).flat_map(|w| gl.mapped(w[0], w[1]).collect::<Vec<_>>()).collect();
        Ok(Self {
            dim,
            q,
            konst: unit_ball_volume::<f64>(dim - 1) / unit_ball_volume::<f64>(dim - 2),
            breaks: h.basis.breakpoints(),
            h,
            box_radius: 0.1,
            tau: gauss_legendre(disc.tau_nodes),
            sub: disc.bump_subpanels.max(1),
            xi_rule,
            abel: AbelOps::new(disc.tilde_nodes),
        })
    }

    pub fn z_o(s: f64) -> V4 {
        V4::new(x_o(s), x_o(s), dx_o(s), dx_o(s))
    }

    /// (K₁, K₂)(s + t, σ, ξ) as jets in t, or None outside the kernel domain.
    fn kernel_jets(&self, s: f64, sigma: f64, xi: f64, hj: &Jl, h_sigma: f64, hdd: J2) -> Option<(J2, J2)> {
        let mut l = *hj;
        l.coeffs[0] += s * xi;
        l.coeffs[1] += xi;
        let l_sigma = sigma * xi + h_sigma;
        let (j1, j2) = j_jets(self.q, l_sigma * l_sigma, &l);
        let l2 = J2::from_coeffs([l.coeffs[0], l.coeffs[1]]);
        let d = (hdd + xi) * (l2 + l_sigma);
        if !(d.value() > 0.0) {
            return None;
        }
        let r = d.powf(-0.5);
        Some((j1 * r, j2 * r))
    }

    /// (K₁, K₂)(s, σ, ξ) = J_i / √((ξ + H(s,σ))(L(σ,ξ) + L(s,ξ))).
    pub fn kernels(&self, s: f64, sigma: f64, xi: f64) -> Result<(f64, f64)> {
        let hj = self.h.jet::<JL>(s);
        let hdd = self.h.divided_difference_jet::<2>(s, sigma);
        self.kernel_jets(s, sigma, xi, &hj, self.h.value(sigma), hdd)
            .map(|(a, b)| (a.value(), b.value()))
            .ok_or(Error::KernelDomainViolation { s, sigma, xi })
    }

    /// E(s, x, y) with rows (K₁, K₂) and columns ξ = -x, ξ = y at σ = s.
    pub fn e_matrix(&self, s: f64, x: f64, y: f64) -> Matrix2<f64> {
        let kx = self.kernels(s, s, -x).unwrap_or((f64::NAN, f64::NAN));
        let ky = self.kernels(s, s, y).unwrap_or((f64::NAN, f64::NAN));
        Matrix2::new(kx.0, ky.0, kx.1, ky.1)
    }

    /// A = C·E with C = ∫₀¹ dτ/√(τ(1-τ)) = π.
    pub fn a_matrix(&self, s: f64, x: f64, y: f64) -> Matrix2<f64> {
        self.e_matrix(s, x, y) * PI
    }

    /// θ-panels of τ = sin²θ ∈ [0, 1] for s' = s + τ(σ - s), split where s'
    /// crosses a bump breakpoint and refined inside supports.
    fn tau_panels(&self, s: f64, sigma: f64) -> Vec<(f64, f64)> {
        let mut th = vec![0.0];
        let gap = sigma - s;
        if gap != 0.0 {
            let mut inner: Vec<f64> = self
                .breaks
                .iter()
                .map(|&b| (b - s) / gap)
                .filter(|&t| t > 0.0 && t < 1.0)
                .map(|t| t.sqrt().asin())
                .collect();
            inner.sort_by(f64::total_cmp);
            th.extend(inner);
        }
        th.push(FRAC_PI_2);
        let mut out = Vec::with_capacity(th.len() * self.sub);
        for w in th.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let sm = s + gap * mid.sin().powi(2);
            let pieces = if self.h.basis.locate(sm).is_some() { self.sub } else { 1 };
            for k in 0..pieces {
                let a = w[0] + (w[1] - w[0]) * k as f64 / pieces as f64;
                let b = w[0] + (w[1] - w[0]) * (k + 1) as f64 / pieces as f64;
                out.push((a, b));
            }
        }
        out
    }

    /// ∂_s G₂ integrands for ξ = -x and ξ = y:
    /// ∫₀¹ (1-τ) ∂₁K_i(s + τ(σ-s), σ, ξ) / √(τ(1-τ)) dτ.
    pub fn dg2(&self, s: f64, sigma: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
        let h_sigma = self.h.value(sigma);
        let mut out = [[0.0; 2]; 2];
        for (a, b) in self.tau_panels(s, sigma) {
            for (th, w) in self.tau.mapped(a, b) {
                let (sn, c) = th.sin_cos();
                let sp = s + (sigma - s) * sn * sn;
                let hj = self.h.jet::<JL>(sp);
                let hdd = self.h.divided_difference_jet::<2>(sp, sigma);
                let wt = 2.0 * c * c * w;
                for (k, xi) in [-x, y].into_iter().enumerate() {
                    match self.kernel_jets(sp, sigma, xi, &hj, h_sigma, hdd) {
                        Some((k1, k2)) => {
                            out[k][0] += wt * k1.coeffs[1];
                            out[k][1] += wt * k2.coeffs[1];
                        }
                        None => return [[f64::NAN; 2]; 2],
                    }
                }
            }
        }
        out
    }

    /// Jets in s of (f_o² - L²)^{q+½} and (f_o² - L²)^{q-½} L integrated over
    /// [-x_o(1), x_o(1)], minus the same for h = 0. Returns (ΔV, ΔV').
    pub fn v_delta(&self, s: f64) -> (Vector2<f64>, Vector2<f64>) {
        let hj = self.h.jet::<JL>(s);
        if hj.coeffs.iter().all(|&c| c == 0.0) {
            return (Vector2::zeros(), Vector2::zeros());
        }
        let (mut v, mut dv) = (Vector2::zeros(), Vector2::zeros());
        for &(xi, w) in &self.xi_rule {
            let (a, b) = self.v_integrands(s, xi, &hj);
            let (ao, bo) = self.v_integrands(s, xi, &Jl::zero());
            v += Vector2::new(a.0 - ao.0, b.0 - bo.0) * w;
            dv += Vector2::new(a.1 - ao.1, b.1 - bo.1) * w;
        }
        (v, dv)
    }

    /// (V₁, V₂)(s) for the current perturbation.
    pub fn v_integrals(&self, s: f64) -> (f64, f64) {
        let hj = self.h.jet::<JL>(s);
        let mut v = (0.0, 0.0);
        for &(xi, w) in &self.xi_rule {
            let (a, b) = self.v_integrands(s, xi, &hj);
            v.0 += w * a.0;
            v.1 += w * b.0;
        }
        v
    }

    /// ((∂^{q+1}, ∂^{q+2}) of (f_o²-L²)^{q+½}, (∂^q, ∂^{q+1}) of (f_o²-L²)^{q-½}L).
    fn v_integrands(&self, s: f64, xi: f64, hj: &Jl) -> ((f64, f64), (f64, f64)) {
        let q = self.q;
        let mut l = *hj;
        l.coeffs[0] += s * xi;
        l.coeffs[1] += xi;
        let u = -(l * l) + (1.0 - xi * xi);
        let w1 = u.powf(q as f64 + 0.5);
        let w2 = u.powf(q as f64 - 0.5) * l;
        ((w1.derivative(q + 1), w1.derivative(q + 2)), (w2.derivative(q), w2.derivative(q + 1)))
    }

    /// ((d/ds)^{q+1}, (d/ds)^{q+2}) of (v_{d-1}/v_{d-2})/√(1+s²).
    pub fn rhs(&self, s: f64) -> (f64, f64) {
        let t = Jl::variable(s);
        let g = (t * t + 1.0).powf(-0.5) * self.konst;
        (g.derivative(self.q + 1), g.derivative(self.q + 2))
    }

    /// R(s) = (-V₁ + (d/ds)^{q+1} const/√(1+s²), -V₂).
    pub fn r_vector(&self, s: f64) -> Vector2<f64> {
        let (v1, v2) = self.v_integrals(s);
        Vector2::new(-v1 + self.rhs(s).0, -v2)
    }

    /// Perturbation part of Ξ: (0, 0, R̃(h) - R̃(0)).
    pub fn xi_delta(&self, s: f64) -> Result<V4> {
        if s >= 1.0 - self.h.delta() || self.h.is_zero() {
            return Ok(V4::zeros());
        }
        let r = self.abel.tilde(
            |sig| {
                let (v, dv) = self.v_delta(sig);
                (-v, -dv)
            },
            s,
            1.0,
            &self.breaks,
        )?;
        Ok(V4::new(0.0, 0.0, r[0], r[1]))
    }
}

impl SingularSystem<4> for OddSystem {
    fn g(&self, s: f64, z: &V4) -> V4 {
        let a = self.a_matrix(s, z[0], z[1]);
        let r = a * Vector2::new(z[2], z[3]);
        V4::new(z[0], z[1], r[0], r[1])
    }

    fn theta(&self, s: f64, sigma: f64, z: &V4) -> V4 {
        let [kx, ky] = self.dg2(s, sigma, z[0], z[1]);
        V4::new(-z[2], -z[3], kx[0] * z[2] + ky[0] * z[3], kx[1] * z[2] + ky[1] * z[3])
    }

    fn in_domain(&self, s: f64, z: &V4) -> bool {
        (z - Self::z_o(s)).amax() <= self.box_radius
    }
}

/// Everything of the chord solve that does not depend on the perturbation
/// coefficients: grid, unperturbed system, consistent free term and Q.
#[derive(Clone, Debug)]
pub struct OddChordSolver {
    pub dim: usize,
    pub disc: OddDiscretization,
    pub grid: PanelGrid,
    pub box_radius: f64,
    pub picard_tol: f64,
    sys_o: OddSystem,
    xi_o: Vec<V4>,
    z_o: Vec<V4>,
    q: Matrix4<f64>,
}

impl OddChordSolver {
    pub fn new(dim: usize, basis: &BumpBasis, disc: OddDiscretization) -> Result<Self> {
        let h0 = Bump::zero(basis.clone());
        let grid = chord_grid(&h0, disc.panels_per_interval, disc.order)?;
        let sys_o = OddSystem::new(dim, h0, &disc)?;
        let z_o: Vec<V4> = grid.nodes.iter().map(|&s| OddSystem::z_o(s)).collect();
        let xi_o = consistent_xi(&sys_o, &grid, &z_o);
        let q = jacobian_fd(&sys_o, 1.0, &OddSystem::z_o(1.0));
        Ok(Self { dim, disc, grid, box_radius: 0.1, picard_tol: 1e-14, sys_o, xi_o, z_o, q })
    }

    pub fn unperturbed(&self) -> &OddSystem {
        &self.sys_o
    }

    pub fn system(&self, h: &Bump) -> Result<OddSystem> {
        if h.basis != self.sys_o.h.basis {
            return Err(Error::InvalidInput("perturbation basis differs from the solver basis".into()));
        }
        let mut sys = OddSystem::new(self.dim, h.clone(), &self.disc)?;
        sys.box_radius = self.box_radius;
        Ok(sys)
    }

    /// Solves the chord system for h, starting from `init` (or Z_o).
    pub fn solve(&self, h: &Bump, init: Option<Vec<V4>>) -> Result<(ChordState<V4>, PicardDiagnostics)> {
        let sys = self.system(h)?;
        let mut xi = self.xi_o.clone();
        for (i, &s) in self.grid.nodes.iter().enumerate() {
            xi[i] += sys.xi_delta(s)?;
        }
        let opts = PicardOptions { tol: self.picard_tol, frozen_from: Some(1.0 - h.delta()), ..Default::default() };
        let z0 = init.unwrap_or_else(|| self.z_o.clone());
        picard_solve(&sys, &self.grid, &xi, &self.q, z0, &opts)
    }
}

/// Composite θ-rule on [0, π/2] for σ = s + (1-s)sin²θ, independent of the
/// solver quadrature: each breakpoint panel is split in four, 32 nodes each.
fn oracle_theta_rule(s: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let gl = gauss_legendre::<f64>(32);
    let th = AbelOps::theta_panels(s, 1.0, breaks);
    let mut out = Vec::new();
    for win in th.windows(2) {
        let w = (win[1] - win[0]) / 4.0;
        for k in 0..4 {
            let a = win[0] + k as f64 * w;
            out.extend(gl.mapped(a, a + w));
        }
    }
    out
}

/// Relative residual of the constancy condition ∫_{-x}^{y}(f²-L²)^{q+½} =
/// const/√(1+s²) and absolute residual of ∫(f²-L²)^{q-½}L = 0 at s, by
/// direct quadrature over the profile implied by the chord functions.
pub fn raw_condition_residuals(sys: &OddSystem, state: &ChordState<V4>, s: f64) -> (f64, f64) {
    let q = sys.q as f64;
    let h = &sys.h;
    let ls = |xi: f64| s * xi + h.value(s);
    // middle: f = f_o on [-e, e]
    let (mut plus, mut minus) = (0.0, 0.0);
    for &(xi, w) in &sys.xi_rule {
        let u = 1.0 - xi * xi - ls(xi).powi(2);
        plus += w * u.max(0.0).powf(q + 0.5);
        minus += w * u.max(0.0).powf(q - 0.5) * ls(xi);
    }
    // outer parts: ξ = y(σ) and ξ = -x(σ) for σ ∈ [s, 1], σ = s + (1-s) sin²θ
    let b = 1.0 - s;
    for (t, w) in oracle_theta_rule(s, &sys.breaks) {
        {
            let (sn, c) = t.sin_cos();
            let sig = s + b * sn * sn;
            let z = state.eval(sig);
            let hs = h.value(sig);
            for (xi, dxi) in [(z[1], -z[3]), (-z[0], -z[2])] {
                let lsig = sig * xi + hs;
                let gap = (lsig * lsig - ls(xi).powi(2)).max(0.0);
                // dσ = 2b sinθ cosθ dθ; (σ-s)^{1/2} = √b sinθ
                let ratio = if sn > 0.0 { gap / (b * sn * sn) } else { 0.0 };
                plus += w * 2.0 * b * sn * c * gap.powf(q + 0.5) * dxi;
                minus += w * 2.0 * b.sqrt() * c * ratio.powf(q - 0.5) * sn.powf(2.0 * q) * b.powf(q) * ls(xi) * dxi;
            }
        }
    }
    let target = sys.konst / (1.0 + s * s).sqrt();
    ((plus - target).abs() / target, minus.abs())
}

/// Residual of the Abel form ∫_s^1 K(s,σ,z,z')/√(σ-s) dσ = R(s) at the
/// solved state, for s ≤ 1-δ where R is smooth.
pub fn abel_form_residual(sys: &OddSystem, state: &ChordState<V4>, s: f64) -> f64 {
    let b = 1.0 - s;
    let mut acc = Vector2::zeros();
    for (t, w) in oracle_theta_rule(s, &sys.breaks) {
        {
            let (sn, c) = t.sin_cos();
            let sig = s + b * sn * sn;
            let z = state.eval(sig);
            let kx = sys.kernels(s, sig, -z[0]).unwrap_or((f64::NAN, f64::NAN));
            let ky = sys.kernels(s, sig, z[1]).unwrap_or((f64::NAN, f64::NAN));
            let k = -Vector2::new(kx.0 * z[2] + ky.0 * z[3], kx.1 * z[2] + ky.1 * z[3]);
            acc += k * (w * 2.0 * b.sqrt() * c);
        }
    }
    (acc - sys.r_vector(s)).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::factorial;
    use approx::assert_relative_eq;

    fn bump(scale: f64, m: usize) -> Bump {
        let coeffs = (0..m).map(|j| [0.7, -1.0, 0.4, 0.9, -0.3, 0.5, -0.8, 0.2][j % 8]).collect();
        Bump::new(BumpBasis::new(0.05, m).unwrap(), coeffs, scale).unwrap()
    }

    fn double_factorial(n: i64) -> f64 {
        if n <= 0 {
            1.0
        } else {
            n as f64 * double_factorial(n - 2)
        }
    }

    #[test]
    fn j_factors_coincidence_closed_form() {
        let h = bump(1e-3, 3);
        for q in 0..=1usize {
            for &(s, xi) in &[(0.91, 0.72), (0.93, -0.74), (0.97, 0.71), (0.905, -0.7)] {
                let lj = l_jet(&h, s, xi);
                let (l, dl) = (lj.coeffs[0], lj.coeffs[1]);
                let (j1, j2) = j_factors(q, s, s, xi, &h);
                let want1 = double_factorial(2 * q as i64 + 1) * (-l * dl).powi(q as i32 + 1);
                let want2 = double_factorial(2 * q as i64 - 1) * (-l * dl).powi(q as i32) * l;
                assert_relative_eq!(j1, want1, max_relative = 1e-12);
                assert_relative_eq!(j2, want2, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn j_factors_unperturbed_q0() {
        let h = bump(0.0, 1);
        let (s, xi) = (0.9, 0.8);
        let (j1, j2) = j_factors(0, s, s, xi, &h);
        assert_relative_eq!(j1, -s * xi * xi, epsilon = 1e-15);
        assert_relative_eq!(j2, s * xi, epsilon = 1e-15);
        assert!(j_factors(0, 1.0, 1.0, 0.8, &h).0 < 0.0 && j_factors(0, 1.0, 1.0, -0.8, &h).0 < 0.0);
    }

    #[test]
    fn j_factors_match_direct_derivative_off_coincidence() {
        // J₁/√u = ∂_s^{q+1} u^{q+½} with u = L(σ)² - L(s)²
        let h = bump(1e-3, 2);
        for q in 0..=1usize {
            let (s, sigma, xi) = (0.912, 0.94, 0.73);
            let ls = sigma * xi + h.value(sigma);
            let l = l_jet(&h, s, xi);
            let u = -(l * l) + ls * ls;
            let want = u.powf(q as f64 + 0.5).derivative(q + 1) * u.value().sqrt();
            let want2 = (u.powf(q as f64 - 0.5) * l).derivative(q) * u.value().sqrt();
            let (j1, j2) = j_factors(q, s, sigma, xi, &h);
            assert_relative_eq!(j1, want, max_relative = 1e-11);
            assert_relative_eq!(j2, want2, max_relative = 1e-11);
        }
    }

    #[test]
    fn j_jet_derivative_matches_finite_difference() {
        let h = bump(1e-3, 2);
        let (sigma, xi) = (0.94, -0.74);
        let ls = sigma * xi + h.value(sigma);
        for q in 0..=1usize {
            let s = 0.913;
            let (a, b) = j_jets(q, ls * ls, &l_jet(&h, s, xi));
            let e = 1e-6;
            let fp = j_jets(q, ls * ls, &l_jet(&h, s + e, xi));
            let fm = j_jets(q, ls * ls, &l_jet(&h, s - e, xi));
            assert_relative_eq!(a.coeffs[1], (fp.0.value() - fm.0.value()) / (2.0 * e), max_relative = 1e-6);
            assert_relative_eq!(b.coeffs[1], (fp.1.value() - fm.1.value()) / (2.0 * e), max_relative = 1e-6);
        }
    }

    #[test]
    fn kernels_unperturbed_closed_form() {
        let sys = OddSystem::new(3, bump(0.0, 1), &OddDiscretization::default()).unwrap();
        for &s in &[0.85, 0.9, 1.0] {
            for &xi in &[0.7, -0.72] {
                let (k1, k2) = sys.kernels(s, s, xi).unwrap();
                assert_relative_eq!(k1, -(s / 2.0).sqrt() * xi.abs(), epsilon = 1e-14);
                assert_relative_eq!(k2, xi.signum() * (s / 2.0).sqrt(), epsilon = 1e-14);
            }
        }
        let (a, b) = (sys.kernels(1.0, 1.0, -x_o(1.0)).unwrap().1, sys.kernels(1.0, 1.0, x_o(1.0)).unwrap().1);
        assert!(a * b < 0.0);
    }

    #[test]
    fn kernel_domain_violation_reported() {
        let sys = OddSystem::new(3, bump(0.0, 1), &OddDiscretization::default()).unwrap();
        assert!(matches!(sys.kernels(0.9, 0.95, 0.0), Err(Error::KernelDomainViolation { .. })));
    }

    #[test]
    fn sign_pattern_of_a() {
        for (d, sign) in [(3usize, -1.0), (5, 1.0)] {
            let sys = OddSystem::new(d, bump(0.0, 1), &OddDiscretization::default()).unwrap();
            for &s in &[0.5, 0.75, 1.0] {
                let a = sys.a_matrix(s, x_o(s), x_o(s));
                assert!(sign * a[(0, 0)] > 0.0 && sign * a[(0, 1)] > 0.0, "d={d} s={s}");
                assert!(a[(1, 0)] * a[(1, 1)] < 0.0);
                assert!(a.determinant().abs() > 1e-3);
            }
        }
    }

    #[test]
    fn dg2_matches_finite_difference_of_g2() {
        let sys = OddSystem::new(3, bump(1e-3, 3), &OddDiscretization { tau_nodes: 32, bump_subpanels: 4, ..Default::default() }).unwrap();
        let g2 = |s: f64, sigma: f64, xi: f64| -> (f64, f64) {
            let gl = gauss_legendre::<f64>(3000);
            let mut acc = (0.0, 0.0);
            for (th, w) in gl.mapped(0.0, FRAC_PI_2) {
                let sp = s + (sigma - s) * th.sin().powi(2);
                let k = sys.kernels(sp, sigma, xi).unwrap();
                acc.0 += 2.0 * w * k.0;
                acc.1 += 2.0 * w * k.1;
            }
            acc
        };
        let (s, sigma, x, y) = (0.89, 0.96, 0.74, 0.725);
        let d = sys.dg2(s, sigma, x, y);
        let e = 1e-5;
        for (k, xi) in [-x, y].into_iter().enumerate() {
            let p = g2(s + e, sigma, xi);
            let m = g2(s - e, sigma, xi);
            assert_relative_eq!(d[k][0], (p.0 - m.0) / (2.0 * e), max_relative = 1e-6, epsilon = 1e-8);
            assert_relative_eq!(d[k][1], (p.1 - m.1) / (2.0 * e), max_relative = 1e-6, epsilon = 1e-8);
        }
    }

    #[test]
    fn v_integrals_match_finite_differences_q0() {
        // V₁ = d/ds ∫(1-ξ²-s²ξ²)^{1/2}, V₂ = ∫ sξ/√(1-ξ²-s²ξ²) over the fixed interval
        let sys = OddSystem::new(3, bump(0.0, 1), &OddDiscretization::default()).unwrap();
        let e = x_o(1.0);
        let gl = gauss_legendre::<f64>(200);
        let w = |s: f64| gl.integrate(-e, e, |xi| (1.0 - xi * xi - s * s * xi * xi).sqrt());
        let s = 0.9;
        let st = 1e-5;
        let (v1, v2) = sys.v_integrals(s);
        assert_relative_eq!(v1, (w(s + st) - w(s - st)) / (2.0 * st), epsilon = 1e-7);
        let v2d = gl.integrate(-e, e, |xi| s * xi * xi / (1.0 - xi * xi - s * s * xi * xi).sqrt());
        let _ = v2d;
        // the unperturbed V₂ integrand is odd in ξ
        assert!(v2.abs() < 1e-14);
    }

    #[test]
    fn v_integrals_continuous_towards_one() {
        let sys = OddSystem::new(3, bump(0.0, 1), &OddDiscretization::default()).unwrap();
        let vals: Vec<f64> = (8..14).map(|j| sys.v_integrals(1.0 - 2f64.powi(-j)).0).collect();
        for w in vals.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.05);
        }
        let gaps: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(gaps.last().unwrap() < &gaps[0]);
    }

    #[test]
    fn rhs_first_derivative() {
        let sys = OddSystem::new(3, bump(0.0, 1), &OddDiscretization::default()).unwrap();
        let s = 0.9;
        assert_relative_eq!(sys.rhs(s).0, -sys.konst * s / (1.0 + s * s).powf(1.5), epsilon = 1e-14);
        assert_relative_eq!(sys.konst, std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
        let _ = factorial(2);
    }

    #[test]
    fn unperturbed_solve_is_exact_ball() {
        let basis = BumpBasis::with_gap(0.05, 3, 0.0).unwrap();
        let solver = OddChordSolver::new(3, &basis, OddDiscretization::default()).unwrap();
        let (st, d) = solver.solve(&Bump::zero(basis), None).unwrap();
        assert!(st.values.iter().zip(&solver.grid.nodes).all(|(z, &s)| *z == OddSystem::z_o(s)));
        assert_eq!(d.locality_ok, Some(true));
    }

    #[test]
    fn perturbed_solve_satisfies_raw_constancy() {
        let basis = BumpBasis::with_gap(0.05, 3, 0.0).unwrap();
        let solver = OddChordSolver::new(3, &basis, OddDiscretization::default()).unwrap();
        let h = Bump::new(basis, vec![0.7, -1.0, 0.4], 1e-3).unwrap();
        let (st, d) = solver.solve(&h, None).unwrap();
        assert_eq!(d.locality_ok, Some(true));
        let sys = solver.system(&h).unwrap();
        for s in [0.86, 0.9, 0.915, 0.93, 0.94, 0.96] {
            let (plus, _) = raw_condition_residuals(&sys, &st, s);
            assert!(plus <= 1e-6, "s={s} {plus:e}");
        }
        let dev = st.values.iter().zip(&solver.grid.nodes).map(|(z, &s)| (z - OddSystem::z_o(s)).amax()).fold(0.0, f64::max);
        assert!(dev > 1e-6);
    }
}
