//! Odd-dimensional body: search, radial pair, profile and certificates.

use serde::Serialize;

use super::borsuk::{search_best, BorsukOutcome};
use super::{Evaluation, OddConfig, OddContext, OddSystem, RadialStage, V4};
use crate::abel::{ChordState, PicardDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{convexity_check, profile_from_radial, BodyOfRevolution, ProfileFunction, RadialPair};
use crate::Bump;

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct OddReport {
    pub dim: usize,
    pub delta: f64,
    pub k: usize,
    pub h_scale: f64,
    pub halvings: usize,
    pub coefficients: Vec<f64>,
    /// B(x*) = (Θ(0), Θ'(0), …).
    pub b: Vec<f64>,
    pub b_norm: f64,
    /// Typical ‖B‖ on the coefficient sphere at this scale.
    pub b_scale: f64,
    pub b_relative: f64,
    pub borsuk_converged: bool,
    pub oddness_defect: f64,
    pub search_runs: usize,
    pub search_history: Vec<f64>,
    pub picard: PicardDiagnostics,
    pub max_deviation_from_ball: f64,
    /// sup |Φ - 2|.
    pub phi_deviation: f64,
    pub extension_mismatch: f64,
    pub roundtrip: f64,
    pub cap_mismatch: f64,
    /// Dropped singular part of Θ/sin^{d-2} relative to its scale.
    pub singular_dropped: f64,
    pub big_slope_at_0: f64,
    pub small_slope_at_0: f64,
    pub max_radius_difference: f64,
    pub concavity_worst: f64,
    pub concavity_pass: bool,
}

#[derive(Clone, Debug)]
pub struct OddBuild {
    pub body: BodyOfRevolution<f64>,
    pub radial: RadialPair<f64>,
    pub perturbation: Bump,
    pub state: ChordState<V4>,
    pub report: OddReport,
}

/// Radial pair and profile from one pipeline run, with the convexity certificate.
pub fn assemble_odd_body(ctx: &OddContext, eval: &Evaluation) -> Result<(BodyOfRevolution<f64>, RadialStage, OddReport)> {
    let cfg = &ctx.cfg;
    let radial = ctx.radial(eval)?;
    let profile = if eval.h.is_zero() { ProfileFunction::unit_circle() } else { profile_from_radial(&radial.pair, cfg.dim)? };
    let z = &eval.zonal;
    let mut rep = OddReport {
        dim: cfg.dim,
        delta: cfg.delta,
        k: cfg.k,
        h_scale: eval.h.scale,
        coefficients: eval.h.coeffs.clone(),
        b: z.b.clone(),
        picard: eval.picard.clone(),
        extension_mismatch: if z.extension_scale > 0.0 { z.extension_mismatch / z.extension_scale } else { 0.0 },
        roundtrip: z.roundtrip,
        cap_mismatch: radial.cap_mismatch,
        singular_dropped: if radial.rhs_scale > 0.0 { radial.dropped / radial.rhs_scale } else { 0.0 },
        big_slope_at_0: radial.pair.big(0.0).1,
        small_slope_at_0: radial.pair.small(0.0).1,
        ..Default::default()
    };
    for (s, v) in eval.state.grid.nodes.iter().zip(&eval.state.values) {
        rep.max_deviation_from_ball = rep.max_deviation_from_ball.max((v - OddSystem::z_o(*s)).amax());
    }
    rep.phi_deviation = z.delta_phi.values().iter().fold(0.0, |m, v| m.max(v.abs()));
    rep.max_radius_difference = radial.big.iter().zip(&radial.small).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
    let conv = convexity_check(&profile, cfg.concavity_margin, 4000);
    rep.concavity_worst = conv.worst;
    rep.concavity_pass = conv.pass;
    if !conv.pass {
        return Err(Error::ConvexityFailure(conv.worst));
    }
    Ok((BodyOfRevolution::new(cfg.dim, profile)?, radial, rep))
}

fn finish(ctx: &OddContext, search: &BorsukOutcome, halvings: usize) -> Result<OddBuild> {
    let eval = search.eval.as_ref().ok_or_else(|| Error::SearchExhausted { best: search.relative })?;
    let (body, radial, mut report) = assemble_odd_body(ctx, eval)?;
    report.halvings = halvings;
    report.b_norm = search.b_norm;
    report.b_scale = search.b_scale;
    report.b_relative = search.relative;
    report.borsuk_converged = search.converged;
    report.oddness_defect = search.oddness_defect;
    report.search_history = search.history.clone();
    report.search_runs = ctx.runs();
    Ok(OddBuild { body, radial: radial.pair, perturbation: eval.h.clone(), state: eval.state.clone(), report })
}

/// Search and build at a single perturbation scale.
pub fn build_odd_with(ctx: &mut OddContext, scale: f64) -> Result<OddBuild> {
    let search = search_best(ctx, scale, None)?;
    finish(ctx, &search, 0)
}

/// Builds the body, halving the perturbation scale while any acceptance
/// check fails; the zero found at one scale warm-starts the next.
pub fn build_odd(cfg: &OddConfig) -> Result<OddBuild> {
    let mut ctx = OddContext::new(cfg)?;
    let mut scale = cfg.h_scale;
    let mut search = search_best(&mut ctx, scale, None)?;
    let mut last = None;
    for halvings in 0..=cfg.max_halvings {
        match finish(&ctx, &search, halvings) {
            Ok(b) => return Ok(b),
            Err(e @ (Error::UnsupportedDimension(_) | Error::InvalidInput(_))) => return Err(e),
            Err(e) => last = Some(e),
        }
        if halvings == cfg.max_halvings {
            break;
        }
        scale *= 0.5;
        let model = search.model.clone().expect("model kept by the search");
        search = search_best(&mut ctx, scale, Some((&search.x, &model)))?;
    }
    Err(last.expect("at least one attempt"))
}
