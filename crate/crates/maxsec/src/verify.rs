//! Independent verification of M_K constancy on a serialized body. Uses only
//! the profile geometry, never builder internals.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{asymmetry_fit, convexity_check, profile_from_radial, radial_from_profile, BodyOfRevolution, Direction, ProfileFunction, RadialPair};
use crate::io::BodyFile;

pub const DEFAULT_DIRECTIONS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-5;

/// Directions u = (side cos α, sin α): the axis directions α = 0 on both
/// sides, α = π/2, and the rest in ± pairs on a half-step grid in (0, π/2).
pub fn scan_directions(n: usize) -> Vec<Direction<f64>> {
    let mut dirs = vec![Direction::new(0.0, 1), Direction::new(0.0, -1), Direction::new(FRAC_PI_2, 1)];
    let rest = n.saturating_sub(3);
    let m = rest.div_ceil(2).max(1);
    for i in 0..rest {
        let alpha = FRAC_PI_2 * ((i / 2) as f64 + 0.5) / m as f64;
        dirs.push(Direction::new(alpha, if i % 2 == 0 { 1 } else { -1 }));
    }
    dirs.truncate(n.max(3));
    dirs
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct DirectionSample {
    pub alpha: f64,
    pub side: i8,
    pub t_star: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Verdict {
    pub spread_ok: bool,
    pub concavity_ok: bool,
    /// None for unperturbed bodies.
    pub asymmetry_ok: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerificationReport {
    pub directions: usize,
    pub samples: Vec<DirectionSample>,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// (max - min) / mean.
    pub spread: f64,
    /// -max f'' over the profile scan.
    pub concavity_margin: f64,
    pub asymmetry_residual: f64,
    pub perturbed: bool,
    pub tol: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
}

/// M_K over the scan directions.
pub fn scan(body: &BodyOfRevolution<f64>, dirs: &[Direction<f64>]) -> Result<Vec<DirectionSample>> {
    dirs.par_iter()
        .map(|&d| {
            let m = body.max_section(d)?;
            Ok(DirectionSample { alpha: d.alpha, side: d.side, t_star: m.t_star, value: m.volume })
        })
        .collect()
}

pub fn verify_body(body: &BodyOfRevolution<f64>, perturbed: bool, n: usize, tol: f64) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let dirs = scan_directions(n);
    let samples = scan(body, &dirs)?;
    let vals: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = (max - min) / mean;
    let conv = convexity_check(&body.profile, 0.0, 20000);
    let t: Vec<f64> = samples.iter().map(|s| s.t_star).collect();
    let asymmetry_residual = asymmetry_fit(&dirs, &t)?.residual;
    let spread_ok = spread <= tol;
    let concavity_ok = -conv.worst > 0.0;
    let asymmetry_ok = perturbed.then_some(asymmetry_residual > 10.0 * tol);
    let mut notes = Vec::new();
    if !perturbed {
        notes.push("symmetric reference".to_string());
    }
    if asymmetry_ok == Some(false) {
        notes.push(format!("asymmetry residual {asymmetry_residual:.3e} does not exceed 10 x tol"));
    }
    Ok(VerificationReport {
        directions: dirs.len(),
        samples,
        max,
        min,
        mean,
        spread,
        concavity_margin: -conv.worst,
        asymmetry_residual,
        perturbed,
        tol,
        verdict: Verdict { spread_ok, concavity_ok, asymmetry_ok, pass: spread_ok && concavity_ok && asymmetry_ok != Some(false) },
        notes,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn verify_file(file: &BodyFile, n: usize, tol: f64) -> Result<VerificationReport> {
    verify_body(&file.body()?, file.is_perturbed(), n, tol)
}

/// The profile with R(α) raised by amplitude·exp(-1/(1-u²)), u = (α - center)/width,
/// a defect that does not come from the construction.
pub fn corrupted_profile(profile: &ProfileFunction<f64>, amplitude: f64, center: f64, width: f64) -> Result<ProfileFunction<f64>> {
    let pair = radial_from_profile(profile, 2001)?;
    let bump = |a: f64| {
        let u = (a - center) / width;
        if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 }
    };
    let big = pair.alpha().iter().zip(pair.big_values()).map(|(&a, &r)| r + amplitude * bump(a)).collect();
    profile_from_radial(&RadialPair::new(pair.alpha().to_vec(), big, pair.small_values().to_vec())?, 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_cover_endpoints_and_both_sides() {
        let d = scan_directions(200);
        assert_eq!(d.len(), 200);
        assert!(d.iter().any(|x| x.alpha == 0.0 && x.side == 1) && d.iter().any(|x| x.alpha == 0.0 && x.side == -1));
        assert!(d.iter().any(|x| x.alpha == FRAC_PI_2));
        let interior: Vec<_> = d[3..].iter().collect();
        assert!(interior.iter().all(|x| x.alpha > 0.0 && x.alpha < FRAC_PI_2));
        assert_eq!(interior.iter().filter(|x| x.side == 1).count(), interior.iter().filter(|x| x.side == -1).count() + 1);
    }

    #[test]
    fn ball_verifies_as_symmetric_reference() {
        let ball = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        let r = verify_body(&ball, false, 40, DEFAULT_TOL).unwrap();
        assert!(r.spread <= 1e-10, "{}", r.spread);
        assert!(r.asymmetry_residual < 1e-10);
        assert!(r.verdict.pass && r.verdict.asymmetry_ok.is_none());
        assert_eq!(r.notes, vec!["symmetric reference".to_string()]);
    }
}
