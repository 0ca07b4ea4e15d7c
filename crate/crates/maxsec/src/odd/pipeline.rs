//! From a chord solution to the radial pair: cap radii, the central-section
//! data φ, ψ and their extensions, Φ = 2 + ΔΦ and Ψ by inverse Radon
//! transform, Θ with its endpoint jet B, and the pointwise radial solve.
//! Everything is carried as a deviation from the unit ball.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::abel::ChordState;
use crate::chord::x_o;
use crate::error::{Error, Result};
use crate::geometry::{chord_polar, RadialPair, Side};
use crate::quadrature::gauss_legendre;
use crate::taylor::factorial;
use crate::Bump;

use super::system::V4;
use super::zonal::{radon_at, radon_inverse_at, roundtrip_error_strided, ZonalFunction, ZonalGrid};

/// Every this many knots the inverse transform is checked by a forward one.
const ROUNDTRIP_STRIDE: usize = 8;

/// (1+a)^n - 1 without cancellation.
pub fn pow_m1(a: f64, n: usize) -> f64 {
    (n as f64 * a.ln_1p()).exp_m1()
}

/// C∞ step equal to 1 for w ≤ a and 0 for w ≥ b.
pub fn smooth_cutoff(w: f64, a: f64, b: f64) -> f64 {
    if w <= a {
        return 1.0;
    }
    if w >= b {
        return 0.0;
    }
    let u = (b - w) / (b - a);
    let (p, q) = ((-1.0 / u).exp(), (-1.0 / (1.0 - u)).exp());
    p / (p + q)
}

/// Knot layout of the zonal grid for a given δ.
#[derive(Clone, Debug)]
pub struct CapLayout {
    pub grid: ZonalGrid,
    pub delta: f64,
    /// Knots with index ≤ i1 have tan α ≥ 1-δ (radii exactly 1).
    pub i1: usize,
    /// Knot at tan α = 1-2δ.
    pub i2: usize,
    /// Knot at tan α = 1-3δ; knots 0..=i3 form the cap.
    pub i3: usize,
    /// Knot at α = cheb_radius.
    pub i_series: usize,
}

impl CapLayout {
    pub fn new(delta: f64, fine: f64, coarse: f64, growth: f64, cheb_radius: f64) -> Result<Self> {
        let a = |k: f64| (1.0 - k * delta).atan();
        let grid = ZonalGrid::graded((a(3.0), a(1.0)), fine, coarse, growth, &[cheb_radius, a(1.0), a(2.0), a(3.0)])?;
        let idx = |al: f64| grid.nearest(al.cos().powi(2));
        Ok(Self { i1: idx(a(1.0)), i2: idx(a(2.0)), i3: idx(a(3.0)), i_series: idx(cheb_radius), grid, delta })
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.grid.alpha(i)
    }
}

/// Radius deviation ρ - 1 and dρ/dα of the chord boundary point with polar
/// angle α on the given side.
pub fn chord_radius(state: &ChordState<V4>, h: &Bump, side: Side, alpha: f64) -> Result<(f64, f64)> {
    let k = if side == Side::Right { 1 } else { 0 };
    let sg = if side == Side::Right { 1.0 } else { -1.0 };
    let eval = |sigma: f64| {
        let z = state.eval(sigma);
        let hj = h.jet::<2>(sigma);
        (z, hj.coeffs[0], hj.coeffs[1])
    };
    let mut sigma = alpha.tan();
    let mut converged = false;
    for _ in 0..60 {
        let (z, hv, dh) = eval(sigma);
        let (a, _, da, _) = chord_polar(side, sigma, z[k], z[k + 2], hv, dh);
        let step = (a - alpha) / da;
        sigma -= step;
        if !step.is_finite() {
            break;
        }
        if step.abs() <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NewtonDivergence(alpha));
    }
    let (z, hv, dh) = eval(sigma);
    let e = z[k];
    let (_, rho, da, drho) = chord_polar(side, sigma, e, z[k + 2], hv, dh);
    let eo = x_o(sigma);
    let r2m1 = (1.0 + sigma * sigma) * (e - eo) * (e + eo) + 2.0 * sigma * e * sg * hv + hv * hv;
    Ok((r2m1 / (rho + 1.0), drho / da))
}

/// Radius deviations and slopes (R-1, R', r-1, r') on the cap knots 0..=i3.
#[derive(Clone, Debug, Default)]
pub struct CapRadii {
    pub big: Vec<(f64, f64)>,
    pub small: Vec<(f64, f64)>,
}

pub fn cap_radii(layout: &CapLayout, state: &ChordState<V4>, h: &Bump) -> Result<CapRadii> {
    let mut out = CapRadii::default();
    for i in 0..=layout.i3 {
        if i <= layout.i1 || h.is_zero() {
            out.big.push((0.0, 0.0));
            out.small.push((0.0, 0.0));
            continue;
        }
        let al = layout.alpha(i);
        out.big.push(chord_radius(state, h, Side::Right, al)?);
        out.small.push(chord_radius(state, h, Side::Left, al)?);
    }
    Ok(out)
}

/// -[R^{d-3}(R sin α)' - r^{d-3}(r sin α)'] from deviations a = R-1, b = r-1.
pub fn trum_from_deviation(dim: usize, alpha: f64, big: (f64, f64), small: (f64, f64)) -> f64 {
    let (s, c) = alpha.sin_cos();
    let (a, da) = big;
    let (b, db) = small;
    let p3 = |x: f64| (1.0 + x).powi(dim as i32 - 3);
    -(s * (p3(a) * da - p3(b) * db) + c * (pow_m1(a, dim - 2) - pow_m1(b, dim - 2)))
}

/// The boundary form of the derivative of the central-section radial data
/// under translation along the axis, evaluated from a radial pair.
pub fn lemma_trum_form(pair: &RadialPair<f64>, dim: usize, alpha: f64) -> f64 {
    let (r_big, dr_big) = pair.big(alpha);
    let (r_small, dr_small) = pair.small(alpha);
    trum_from_deviation(dim, alpha, (r_big - 1.0, dr_big), (r_small - 1.0, dr_small))
}

/// Settings of the zonal stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZonalSettings {
    pub dim: usize,
    /// Relative tolerance of the cap data against the extension on [W₂, W₃].
    pub extension_tol: f64,
    /// Relative roundtrip tolerance of the inverse transform.
    pub inverse_tol: f64,
    pub cheb_degree: usize,
    pub cheb_radius: f64,
    /// Chebyshev sample count on [0, cheb_radius].
    pub cheb_samples: usize,
    /// Components of B: Θ and its first `b_len - 1` derivatives at 0.
    pub b_len: usize,
}

/// Zonal data of one perturbation.
#[derive(Clone, Debug)]
pub struct ZonalStage {
    pub cap: CapRadii,
    /// ΔE = (R^{d-1} + r^{d-1})/2 - 1 and the boundary form on the cap.
    pub delta_e: Vec<f64>,
    pub trum: Vec<f64>,
    /// max |Δφ|, |ψ| on [W₂, W₃] and the scale they are compared with.
    pub extension_mismatch: f64,
    pub extension_scale: f64,
    /// ΔΦ = Φ - 2 and Ψ on all knots.
    pub delta_phi: ZonalFunction,
    pub psi: ZonalFunction,
    /// Extended ψ, kept for direct evaluation of Ψ.
    psi_data: ZonalFunction,
    pub roundtrip: f64,
    /// Θ at all knots (cumulative from α = π/2).
    pub theta: Vec<f64>,
    /// Taylor coefficients of Θ at α = 0.
    pub theta_series: Vec<f64>,
    pub b: Vec<f64>,
}

impl ZonalStage {
    /// Ψ(w) by direct inverse transform (no spline).
    pub fn psi_direct(&self, dim: usize, w: f64) -> Result<f64> {
        Ok(2.0 * radon_inverse_at(&self.psi_data, dim, w)?)
    }
}

/// Taylor coefficients at 0 of an even function from a least-squares fit by
/// T₀, T₂, …, T_deg on [-radius, radius].
pub fn even_chebyshev_taylor(f: impl Fn(f64) -> f64, radius: f64, degree: usize, samples: usize) -> Vec<f64> {
    let m = degree / 2 + 1;
    let n = samples.max(m + 1);
    let nodes: Vec<f64> = (0..n).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / (2 * n) as f64).cos()).collect();
    let mut mat = DMatrix::zeros(n, m);
    let mut rhs = DVector::zeros(n);
    for (r, &x) in nodes.iter().enumerate() {
        let (mut t0, mut t1) = (1.0, x);
        for j in 0..=degree {
            let tj = if j == 0 { t0 } else { t1 };
            if j % 2 == 0 {
                mat[(r, j / 2)] = tj;
            }
            if j > 0 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
        }
        rhs[r] = f(radius * x);
    }
    let coef = mat.svd(true, true).solve(&rhs, 1e-14).expect("SVD solve");
    // monomial coefficients of T_j
    let mut mono = vec![0.0; degree + 1];
    let mut prev = vec![0.0; degree + 1];
    let mut cur = vec![0.0; degree + 1];
    prev[0] = 1.0;
    if degree >= 1 {
        cur[1] = 1.0;
    }
    mono[0] += coef[0];
    for j in 1..=degree {
        if j % 2 == 0 {
            for (o, c) in mono.iter_mut().zip(&cur) {
                *o += coef[j / 2] * c;
            }
        }
        let mut next = vec![0.0; degree + 1];
        for i in 0..degree {
            next[i + 1] += 2.0 * cur[i];
        }
        for i in 0..=degree {
            next[i] -= prev[i];
        }
        prev = std::mem::replace(&mut cur, next);
    }
    mono.iter().enumerate().map(|(i, c)| c / radius.powi(i as i32)).collect()
}

/// Θ(α) = (d-2) ∫_α^{π/2} Ψ(β) sin^{d-3}β dβ on the knots, cumulative from π/2.
pub fn theta_cumulative(layout: &CapLayout, psi: &ZonalFunction, dim: usize) -> Vec<f64> {
    let gl = gauss_legendre::<f64>(4);
    let p = dim as i32 - 3;
    let mut theta = vec![0.0; layout.grid.len()];
    for i in 1..layout.grid.len() {
        let (a, b) = (layout.alpha(i), layout.alpha(i - 1));
        let piece = gl.integrate(a, b, |t| psi.at_alpha(t) * t.sin().powi(p));
        theta[i] = theta[i - 1] + (dim - 2) as f64 * piece;
    }
    theta
}

pub fn zonal_stage(layout: &CapLayout, set: &ZonalSettings, state: &ChordState<V4>, h: &Bump) -> Result<ZonalStage> {
    let d = set.dim;
    if h.is_zero() {
        return zero_stage(layout, set);
    }
    let cap = cap_radii(layout, state, h)?;
    let n_cap = layout.i3 + 1;
    let w_cap = layout.grid.w[..n_cap].to_vec();
    let mut delta_e = Vec::with_capacity(n_cap);
    let mut trum = Vec::with_capacity(n_cap);
    for i in 0..n_cap {
        let (a, b) = (cap.big[i], cap.small[i]);
        delta_e.push(0.5 * (pow_m1(a.0, d - 1) + pow_m1(b.0, d - 1)));
        trum.push(trum_from_deviation(d, layout.alpha(i), a, b));
    }
    let e_fun = ZonalFunction::new(w_cap.clone(), delta_e.clone())?;
    let t_fun = ZonalFunction::new(w_cap.clone(), trum.iter().map(|t| 0.5 * t).collect())?;
    let mut dphi = vec![0.0; layout.grid.len()];
    let mut psi = vec![0.0; layout.grid.len()];
    let (mut mismatch, mut scale) = (0.0f64, 0.0f64);
    let (w2, w3) = (layout.grid.w[layout.i2], layout.grid.w[layout.i3]);
    for i in 0..n_cap {
        let w = layout.grid.w[i];
        let p = radon_at(&e_fun, d, w)? / (d - 1) as f64;
        let q = radon_at(&t_fun, d, w)?;
        scale = scale.max(p.abs()).max(q.abs());
        if i >= layout.i2 {
            mismatch = mismatch.max(p.abs()).max(q.abs());
        }
        let chi = smooth_cutoff(w, w2, w3);
        dphi[i] = chi * p;
        psi[i] = chi * q;
    }
    if mismatch > set.extension_tol * scale {
        return Err(Error::ExtensionMismatch(mismatch / scale));
    }
    let dphi_fun = ZonalFunction::new(layout.grid.w.clone(), dphi)?;
    let psi_data = ZonalFunction::new(layout.grid.w.clone(), psi)?;
    let c_phi = 2.0 * (d - 1) as f64;
    let mut big_phi = Vec::with_capacity(layout.grid.len());
    let mut big_psi = Vec::with_capacity(layout.grid.len());
    for &w in &layout.grid.w {
        big_phi.push(c_phi * radon_inverse_at(&dphi_fun, d, w)?);
        big_psi.push(2.0 * radon_inverse_at(&psi_data, d, w)?);
    }
    let delta_phi = ZonalFunction::new(layout.grid.w.clone(), big_phi)?;
    let psi_fun = ZonalFunction::new(layout.grid.w.clone(), big_psi)?;
    let sc_phi = dphi_fun.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sc_psi = psi_data.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let unscaled = |f: &ZonalFunction, c: f64| ZonalFunction::new(f.knots().to_vec(), f.values().iter().map(|v| v / c).collect());
    let rt_phi = roundtrip_error_strided(&dphi_fun, &unscaled(&delta_phi, c_phi)?, d, ROUNDTRIP_STRIDE)?;
    let rt_psi = roundtrip_error_strided(&psi_data, &unscaled(&psi_fun, 2.0)?, d, ROUNDTRIP_STRIDE)?;
    let sc = sc_phi.max(sc_psi);
    let roundtrip = if sc > 0.0 { rt_phi.max(rt_psi) / sc } else { 0.0 };
    if roundtrip > set.inverse_tol {
        return Err(Error::IllConditioned(roundtrip));
    }
    let theta = theta_cumulative(layout, &psi_fun, d);

    // F = Θ' = -(d-2) Ψ sin^{d-3}, even in α
    let f = |al: f64| -> f64 {
        let v = 2.0 * radon_inverse_at(&psi_data, d, al.cos().powi(2)).unwrap_or(f64::NAN);
        -((d - 2) as f64) * v * al.sin().powi(d as i32 - 3)
    };
    let a = even_chebyshev_taylor(f, set.cheb_radius, set.cheb_degree, set.cheb_samples);
    let mut series = vec![0.0; a.len() + 1];
    for (n, an) in a.iter().enumerate() {
        series[n + 1] = an / (n + 1) as f64;
    }
    let r = layout.alpha(layout.i_series);
    series[0] = theta[layout.i_series] - series.iter().enumerate().skip(1).map(|(n, c)| c * r.powi(n as i32)).sum::<f64>();
    let b = (0..set.b_len).map(|j| factorial(j) * series.get(j).copied().unwrap_or(0.0)).collect();
    Ok(ZonalStage {
        cap,
        delta_e,
        trum,
        extension_mismatch: mismatch,
        extension_scale: scale,
        delta_phi,
        psi: psi_fun,
        psi_data,
        roundtrip,
        theta,
        theta_series: series,
        b,
    })
}

/// Zonal data of the ball.
fn zero_stage(layout: &CapLayout, set: &ZonalSettings) -> Result<ZonalStage> {
    let n = layout.grid.len();
    let n_cap = layout.i3 + 1;
    let zero = ZonalFunction::new(layout.grid.w.clone(), vec![0.0; n])?;
    Ok(ZonalStage {
        cap: CapRadii { big: vec![(0.0, 0.0); n_cap], small: vec![(0.0, 0.0); n_cap] },
        delta_e: vec![0.0; n_cap],
        trum: vec![0.0; n_cap],
        extension_mismatch: 0.0,
        extension_scale: 0.0,
        delta_phi: zero.clone(),
        psi: zero.clone(),
        psi_data: zero,
        roundtrip: 0.0,
        theta: vec![0.0; n],
        theta_series: vec![0.0; set.cheb_degree + 2],
        b: vec![0.0; set.b_len],
    })
}

/// Solves (1+a)^{d-1} + (1+b)^{d-1} = 2 + dphi and (1+a)^{d-2} - (1+b)^{d-2} = t
/// for the deviations (a, b) by Newton's method from `start`.
pub fn solve_radial_point(dim: usize, dphi: f64, t: f64, start: (f64, f64)) -> Option<(f64, f64)> {
    let (n1, n2) = (dim - 1, dim - 2);
    let mut x = Vector2::new(start.0, start.1);
    for _ in 0..60 {
        let (a, b) = (x[0], x[1]);
        if !(a > -1.0 && b > -1.0) {
            return None;
        }
        let f = Vector2::new(pow_m1(a, n1) + pow_m1(b, n1) - dphi, pow_m1(a, n2) - pow_m1(b, n2) - t);
        let j = Matrix2::new(
            n1 as f64 * (1.0 + a).powi(n1 as i32 - 1),
            n1 as f64 * (1.0 + b).powi(n1 as i32 - 1),
            n2 as f64 * (1.0 + a).powi(n2 as i32 - 1),
            -(n2 as f64) * (1.0 + b).powi(n2 as i32 - 1),
        );
        let step = j.lu().solve(&f)?;
        x -= step;
        if step.amax() <= 1e-17 + 1e-15 * x.amax() {
            let (a, b) = (x[0], x[1]);
            return (a > -1.0 && b > -1.0).then_some((a, b));
        }
    }
    None
}

/// Result of the radial stage.
#[derive(Clone, Debug)]
pub struct RadialStage {
    pub pair: RadialPair<f64>,
    /// Deviations R-1 and r-1 on the knots (w-order).
    pub big: Vec<f64>,
    pub small: Vec<f64>,
    /// max |R - R_h|, |r - r_h| over the cap knots.
    pub cap_mismatch: f64,
    /// |dropped series terms| / sin^{d-2} at the first positive knot.
    pub dropped: f64,
    /// max over knots of |Θ/sin^{d-2}|.
    pub rhs_scale: f64,
}

/// Right side T = Θ/sin^{d-2}α on all knots, with the series below the
/// fit radius; returns (T, dropped, scale).
pub fn radial_rhs(layout: &CapLayout, stage: &ZonalStage, dim: usize) -> (Vec<f64>, f64, f64) {
    let m = dim - 2;
    let n = layout.grid.len();
    let mut t = vec![0.0; n];
    let mut dropped = 0.0;
    let mut scale = 0.0f64;
    let sp = |al: f64, range: std::ops::Range<usize>| -> f64 {
        stage.theta_series[range].iter().enumerate().map(|(k, c)| c * al.powi(k as i32)).sum()
    };
    let first_positive = n - 2;
    for i in 0..n {
        let al = layout.alpha(i);
        t[i] = if i > layout.i_series {
            let kept: f64 = stage.theta_series.iter().enumerate().skip(m).map(|(k, c)| c * al.powi((k - m) as i32)).sum();
            let ratio = if al > 0.0 { (al / al.sin()).powi(m as i32) } else { 1.0 };
            if i == first_positive {
                dropped = sp(al, 0..m).abs() / al.sin().powi(m as i32);
            }
            kept * ratio
        } else if i == 0 {
            0.0
        } else {
            stage.theta[i] / al.sin().powi(m as i32)
        };
        scale = scale.max(t[i].abs());
    }
    (t, dropped, scale)
}

pub fn radial_stage(layout: &CapLayout, stage: &ZonalStage, dim: usize, singular_tol: f64, cap_tol: f64) -> Result<RadialStage> {
    let (t, dropped, scale) = radial_rhs(layout, stage, dim);
    if dropped > singular_tol * scale.max(1e-300) && dropped > 0.0 {
        return Err(Error::SingularRhs(dropped));
    }
    let n = layout.grid.len();
    let (mut big, mut small) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let dphi = stage.delta_phi.values()[i];
        let (a, b) = solve_radial_point(dim, dphi, t[i], (0.0, 0.0)).ok_or(Error::NewtonDivergence(layout.alpha(i)))?;
        big[i] = a;
        small[i] = b;
    }
    let mut cap_mismatch = 0.0f64;
    for i in 0..=layout.i3 {
        cap_mismatch = cap_mismatch.max((big[i] - stage.cap.big[i].0).abs()).max((small[i] - stage.cap.small[i].0).abs());
    }
    if cap_mismatch > cap_tol {
        return Err(Error::CapMismatch(cap_mismatch));
    }
    let alpha: Vec<f64> = (0..n).rev().map(|i| if i == 0 { FRAC_PI_2 } else { layout.alpha(i) }).collect();
    let pair = RadialPair::new(alpha, big.iter().rev().map(|a| 1.0 + a).collect(), small.iter().rev().map(|b| 1.0 + b).collect())?;
    Ok(RadialStage { pair, big, small, cap_mismatch, dropped, rhs_scale: scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radial_point_ball_and_closed_form() {
        assert_eq!(solve_radial_point(3, 0.0, 0.0, (0.0, 0.0)), Some((0.0, 0.0)));
        let c = 0.01;
        let (a, b) = solve_radial_point(3, 0.0, 2.0 * c, (0.0, 0.0)).unwrap();
        assert_relative_eq!(1.0 + a, c + (1.0 - c * c).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(1.0 + b, -c + (1.0 - c * c).sqrt(), epsilon = 1e-15);
        let again = solve_radial_point(3, 0.0, 2.0 * c, (0.2, -0.2)).unwrap();
        assert_relative_eq!(again.0, a, epsilon = 1e-15);
        assert_relative_eq!(again.1, b, epsilon = 1e-15);
    }

    #[test]
    fn radial_point_d5_residual() {
        let (a, b) = solve_radial_point(5, 1e-3, -2e-3, (0.0, 0.0)).unwrap();
        assert_relative_eq!((1.0 + a).powi(4) + (1.0 + b).powi(4), 2.0 + 1e-3, epsilon = 1e-14);
        assert_relative_eq!((1.0 + a).powi(3) - (1.0 + b).powi(3), -2e-3, epsilon = 1e-14);
    }

    #[test]
    fn even_fit_recovers_cosine_jet() {
        let a = even_chebyshev_taylor(|x| x.cos(), 0.2, 12, 40);
        for (n, c) in a.iter().enumerate() {
            let want = if n % 2 == 1 { 0.0 } else { (-1f64).powi(n as i32 / 2) / factorial(n) };
            // rounding in the scaled variable grows like radius^-n
            assert!((c - want).abs() <= 1e-12 * 0.2f64.powi(-(n as i32)), "n={n} {c} {want}");
            if n % 2 == 1 {
                assert_eq!(*c, 0.0);
            }
        }
    }

    #[test]
    fn theta_of_unit_psi() {
        let layout = CapLayout::new(0.05, 1e-3, 5e-3, 0.05, 0.2).unwrap();
        let one = ZonalFunction::from_fn(&layout.grid, |_| 1.0).unwrap();
        let th = theta_cumulative(&layout, &one, 3);
        for i in (0..layout.grid.len()).step_by(37) {
            assert_relative_eq!(th[i], FRAC_PI_2 - layout.alpha(i), epsilon = 1e-13);
        }
    }

    #[test]
    fn trum_vanishes_for_ball_and_flips_under_swap() {
        assert_eq!(trum_from_deviation(3, 0.4, (0.0, 0.0), (0.0, 0.0)), 0.0);
        let t = trum_from_deviation(5, 0.4, (1e-3, 2e-2), (-4e-3, 1e-2));
        let u = trum_from_deviation(5, 0.4, (-4e-3, 1e-2), (1e-3, 2e-2));
        assert_relative_eq!(t, -u, epsilon = 1e-17);
    }
}
