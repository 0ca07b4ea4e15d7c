//! Even zonal functions on S^{d-1} and their spherical Radon transform.
//!
//! A zonal g is stored as a function of w = cos²α, where α is the angle of the
//! direction from the axis. The transform is indexed by W = cos²β, where β is
//! the angle of the hyperplane's meridian line from the axis (a chord of slope
//! s has tan β = s), so (Rg)(W) = 2|S^{d-3}| ∫₀^{π/2} g(W sin²φ) cos^{d-3}φ dφ
//! depends only on g over [0, W].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::quadrature::{gauss_legendre, Rule};
use crate::spline::{CubicSpline, EndCondition};

/// Knots beyond the last nonzero value kept in the quadrature of a compactly
/// supported function, so that the spline tail is not cut too early.
const SUPPORT_MARGIN: usize = 24;

/// Knots in w = cos²α, strictly increasing from 0 (α = π/2) to 1 (α = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct ZonalGrid {
    pub w: Vec<f64>,
}

impl ZonalGrid {
    /// n knots uniform in α.
    pub fn uniform_alpha(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput("zonal grid needs at least 4 knots".into()));
        }
        let alpha: Vec<f64> = (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect();
        Self::from_alpha(&alpha, &[])
    }

    /// Knots marching in α from π/2 to 0 with spacing fine + growth·dist(α, band),
    /// capped at coarse; the extra angles are inserted exactly.
    pub fn graded(band: (f64, f64), fine: f64, coarse: f64, growth: f64, extra: &[f64]) -> Result<Self> {
        if !(fine > 0.0 && coarse >= fine && growth >= 0.0) || band.0 > band.1 {
            return Err(Error::InvalidInput("graded zonal grid needs 0 < fine ≤ coarse and an ordered band".into()));
        }
        let spacing = |a: f64| {
            let dist = if a > band.1 { a - band.1 } else if a < band.0 { band.0 - a } else { 0.0 };
            (fine + growth * dist).min(coarse)
        };
        let mut alpha = vec![];
        let mut a = FRAC_PI_2;
        while a > 0.0 {
            alpha.push(a);
            a -= spacing(a);
        }
        alpha.push(0.0);
        alpha.retain(|&a| extra.iter().all(|&e| (a - e).abs() >= 0.3 * spacing(e)) || a == 0.0 || a == FRAC_PI_2);
        Self::from_alpha(&alpha, extra)
    }

    fn from_alpha(alpha: &[f64], extra: &[f64]) -> Result<Self> {
        let mut a: Vec<f64> = alpha.iter().chain(extra).copied().filter(|x| (0.0..=FRAC_PI_2).contains(x)).collect();
        a.push(0.0);
        a.push(FRAC_PI_2);
        a.sort_by(|x, y| y.total_cmp(x));
        let mut kept: Vec<f64> = vec![];
        for x in a {
            match kept.last() {
                Some(&l) if l - x < 1e-12 => {}
                _ => kept.push(x),
            }
        }
        let w: Vec<f64> = kept
            .iter()
            .map(|&x| if x == FRAC_PI_2 { 0.0 } else if x == 0.0 { 1.0 } else { x.cos().powi(2) })
            .collect();
        if w.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidInput("zonal knots collide in w".into()));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// α at knot i.
    pub fn alpha(&self, i: usize) -> f64 {
        w_to_alpha(self.w[i])
    }

    /// Index of the knot nearest to w.
    pub fn nearest(&self, w: f64) -> usize {
        let i = self.w.partition_point(|&x| x < w);
        if i == 0 {
            0
        } else if i == self.w.len() || w - self.w[i - 1] < self.w[i] - w {
            i - 1
        } else {
            i
        }
    }
}

pub fn w_to_alpha(w: f64) -> f64 {
    w.clamp(0.0, 1.0).sqrt().acos()
}

/// Zonal function given by knot values in w, interpolated by a not-a-knot
/// cubic spline. Values outside the knot range that contains the nonzero data
/// (widened by a margin) are exactly zero.
#[derive(Clone, Debug)]
pub struct ZonalFunction {
    spline: CubicSpline<f64>,
    support: (usize, usize),
}

impl ZonalFunction {
    pub fn new(w: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if w.len() < 4 || w.len() != values.len() {
            return Err(Error::InvalidInput("zonal function needs matching knots and values (≥ 4)".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("zonal values must be finite".into()));
        }
        let n = w.len();
        let first = values.iter().position(|&v| v != 0.0);
        let support = match first {
            None => (0, 0),
            Some(lo) => {
                let hi = values.iter().rposition(|&v| v != 0.0).unwrap_or(lo);
                (lo.saturating_sub(SUPPORT_MARGIN), (hi + SUPPORT_MARGIN).min(n - 1))
            }
        };
        Ok(Self { spline: CubicSpline::new(w, values, EndCondition::NotAKnot), support })
    }

    pub fn from_fn(grid: &ZonalGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.w.clone(), grid.w.iter().map(|&w| f(w)).collect())
    }

    pub fn knots(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn is_zero(&self) -> bool {
        self.values().iter().all(|&v| v == 0.0)
    }

    /// [w_lo, w_hi] outside which the function vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.is_zero() {
            return None;
        }
        let k = self.knots();
        Some((k[self.support.0], k[self.support.1]))
    }

    /// (g, dg/dw, d²g/dw²).
    pub fn eval(&self, w: f64) -> (f64, f64, f64) {
        match self.support() {
            Some((lo, hi)) if w >= lo && w <= hi => self.spline.eval(w),
            _ => (0.0, 0.0, 0.0),
        }
    }

    pub fn value(&self, w: f64) -> f64 {
        self.eval(w).0
    }

    pub fn at_alpha(&self, alpha: f64) -> f64 {
        self.value(alpha.cos().powi(2))
    }

    fn interval(&self, w: f64) -> usize {
        self.spline.interval(w)
    }

    /// Spline evaluation on a known knot interval inside the support.
    fn eval_in(&self, i: usize, w: f64) -> (f64, f64, f64) {
        self.spline.eval_in(i, w)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// Widest θ-panel of the Radon quadratures.
const MAX_THETA_PANEL: f64 = std::f64::consts::PI / 32.0;

/// Σ over panels of x = w sin²θ ∈ [a, b], one per knot interval of g, of
/// the rule mapped in θ; `f` receives (θ, x, interval index).
fn theta_sum(g: &ZonalFunction, w: f64, rule: &Rule<f64>, mut f: impl FnMut(f64, f64, usize) -> f64) -> f64 {
    let Some((lo, hi)) = g.support() else {
        return 0.0;
    };
    let (a, b) = (lo.max(0.0), hi.min(w));
    if b <= a {
        return 0.0;
    }
    let k = g.knots();
    let theta = |x: f64| (x / w).clamp(0.0, 1.0).sqrt().asin();
    let mut acc = 0.0;
    let mut i = g.interval(a);
    let mut t0 = theta(a);
    loop {
        let right = k[i + 1].min(b);
        let t1 = theta(right);
        if t1 > t0 {
            let parts = ((t1 - t0) / MAX_THETA_PANEL).ceil().max(1.0) as usize;
            let step = (t1 - t0) / parts as f64;
            for p in 0..parts {
                let lo = t0 + p as f64 * step;
                let hi = if p + 1 == parts { t1 } else { lo + step };
                for (t, wt) in rule.mapped(lo, hi) {
                    let sn = t.sin();
                    acc += wt * f(t, w * sn * sn, i);
                }
            }
        }
        if right >= b || i + 2 >= k.len() {
            break;
        }
        t0 = t1;
        i += 1;
    }
    acc
}

/// (Rg)(W) for a zonal g on S^{d-1}.
pub fn radon_at(g: &ZonalFunction, dim: usize, big_w: f64) -> Result<f64> {
    check_dim(dim)?;
    let c = 2.0 * sphere_area::<f64>(dim - 2);
    let p = (dim - 3) as i32;
    if big_w <= 0.0 {
        let gl = gauss_legendre::<f64>(16);
        return Ok(c * g.value(0.0) * gl.integrate(0.0, FRAC_PI_2, |t| t.cos().powi(p)));
    }
    let gl = gauss_legendre::<f64>(4);
    Ok(c * theta_sum(g, big_w, &gl, |t, x, i| g.eval_in(i, x).0 * t.cos().powi(p)))
}

/// (Rg) on the knots of g.
pub fn zonal_radon(g: &ZonalFunction, dim: usize) -> Result<ZonalFunction> {
    let w = g.knots().to_vec();
    let values = w.iter().map(|&x| radon_at(g, dim, x)).collect::<Result<Vec<_>>>()?;
    ZonalFunction::new(w, values)
}

/// (A, A') with A(W) the Abel-type datum of the inversion formula.
fn inversion_datum(gbar: &ZonalFunction, dim: usize, w: f64) -> Result<(f64, f64)> {
    datum_from(gbar.eval(w), dim, w)
}

fn datum_from((g, d1, d2): (f64, f64, f64), dim: usize, w: f64) -> Result<(f64, f64)> {
    match dim {
        3 => Ok((g / 2.0, d1 / 2.0)),
        5 => Ok(((g + w * d1) / (2.0 * PI), (2.0 * d1 + w * d2) / (2.0 * PI))),
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

/// (R⁻¹ḡ)(w) = (1/π)[∫₀^{π/2} A(w sin²θ) sin θ dθ + 2w ∫₀^{π/2} A'(w sin²θ) sin³θ dθ]
/// for d ∈ {3, 5}.
pub fn radon_inverse_at(gbar: &ZonalFunction, dim: usize, w: f64) -> Result<f64> {
    inversion_datum(gbar, dim, 0.0)?;
    if w <= 0.0 {
        return Ok(inversion_datum(gbar, dim, 0.0)?.0 / PI);
    }
    let gl = gauss_legendre::<f64>(4);
    let s = theta_sum(gbar, w, &gl, |t, x, i| {
        let (a, da) = datum_from(gbar.eval_in(i, x), dim, x).unwrap_or((f64::NAN, f64::NAN));
        let sn = t.sin();
        a * sn + 2.0 * w * da * sn * sn * sn
    });
    Ok(s / PI)
}

/// R⁻¹ḡ on the knots of ḡ; fails with IllConditioned when the forward
/// transform of the result misses ḡ by more than `tol` (relative to max |ḡ|).
pub fn zonal_radon_inverse(gbar: &ZonalFunction, dim: usize, tol: f64) -> Result<ZonalFunction> {
    let w = gbar.knots().to_vec();
    let values = w.iter().map(|&x| radon_inverse_at(gbar, dim, x)).collect::<Result<Vec<_>>>()?;
    let g = ZonalFunction::new(w, values)?;
    let scale = gbar.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        let err = roundtrip_error(gbar, &g, dim)?;
        if err > tol * scale {
            return Err(Error::IllConditioned(err / scale));
        }
    }
    Ok(g)
}

/// max over knots of |R g - ḡ|.
pub fn roundtrip_error(gbar: &ZonalFunction, g: &ZonalFunction, dim: usize) -> Result<f64> {
    roundtrip_error_strided(gbar, g, dim, 1)
}

/// max over every `stride`-th knot (and the last) of |R g - ḡ|.
pub fn roundtrip_error_strided(gbar: &ZonalFunction, g: &ZonalFunction, dim: usize, stride: usize) -> Result<f64> {
    let mut err = 0.0f64;
    let n = gbar.knots().len();
    let picked = (0..n).filter(|i| i % stride.max(1) == 0 || *i == n - 1);
    for (w, v) in picked.map(|i| (gbar.knots()[i], gbar.values()[i])) {
        err = err.max((radon_at(g, dim, w)? - v).abs());
    }
    Ok(err)
}
