//! Boundary points of the profile from the chord-endpoint functions x(σ), y(σ).
//! The chord x₂ = σξ + h(σ) meets the graph of f at ξ = y(σ) and the graph of
//! -f at ξ = -x(σ), so the boundary points are (y, σy + h) and (-x, σx - h).

use crate::error::{Error, Result};
use crate::geometry::profile::Side;
use crate::Bump;

/// Boundary point at σ on the given side.
pub fn chord_point(side: Side, sigma: f64, endpoint: f64, h: f64) -> (f64, f64) {
    match side {
        Side::Right => (endpoint, sigma * endpoint + h),
        Side::Left => (-endpoint, sigma * endpoint - h),
    }
}

/// Polar angle (from +e₁ on the right, from -e₁ on the left) and radius of a
/// chord boundary point, with their σ-derivatives given x' (or y') and h'.
pub fn chord_polar(side: Side, sigma: f64, e: f64, de: f64, h: f64, dh: f64) -> (f64, f64, f64, f64) {
    let sg = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    // point (±e, σe ± h) with |ξ| = e and height w = σe + sg·h
    let w = sigma * e + sg * h;
    let dw = e + sigma * de + sg * dh;
    let r2 = e * e + w * w;
    let rho = r2.sqrt();
    let alpha = w.atan2(e);
    let dalpha = (e * dw - w * de) / r2;
    let drho = (e * de + w * dw) / rho;
    (alpha, rho, dalpha, drho)
}

/// Merged boundary samples ordered by ξ: left points for increasing σ, then
/// right points for decreasing σ.
pub fn profile_from_chords(
    x: impl Fn(f64) -> f64,
    y: impl Fn(f64) -> f64,
    h: &Bump,
    sigmas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = sigmas
        .iter()
        .map(|&s| chord_point(Side::Left, s, x(s), h.value(s)))
        .collect();
    pts.extend(sigmas.iter().rev().map(|&s| chord_point(Side::Right, s, y(s), h.value(s))));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
    if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::NonMonotone);
    }
    Ok(pts)
}
