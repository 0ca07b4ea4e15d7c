//! Odd-dimensional builder.
pub mod borsuk;
pub mod build;
pub mod pipeline;
pub mod system;
pub mod zonal;

use serde::{Deserialize, Serialize};

use crate::abel::{ChordState, PicardDiagnostics};
use crate::error::{Error, Result};
use crate::perturbation::BumpBasis;
use crate::Bump;

pub use borsuk::{borsuk_search, BorsukOutcome};
pub use build::{assemble_odd_body, build_odd, build_odd_with, OddBuild, OddReport};
pub use pipeline::{CapLayout, RadialStage, ZonalSettings, ZonalStage};
pub use system::{half_order, j_factors, OddChordSolver, OddDiscretization, OddSystem, V4};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OddConfig {
    pub dim: usize,
    pub delta: f64,
    /// B has d + k components and the basis d + k + 1 bumps.
    pub k: usize,
    pub h_scale: f64,
    /// Start of the search instead of the seeded frame.
    pub h_coeffs: Option<Vec<f64>>,
    pub seed: u64,
    pub panels_per_interval: usize,
    pub order: usize,
    pub tau_nodes: usize,
    pub bump_subpanels: usize,
    pub tilde_nodes: usize,
    pub zonal_fine: f64,
    pub zonal_coarse: f64,
    pub zonal_growth: f64,
    pub cheb_degree: usize,
    pub cheb_radius: f64,
    pub cheb_samples: usize,
    /// Relative to the cap data scale.
    pub extension_tol: f64,
    /// Relative roundtrip of the inverse transform.
    pub inverse_tol: f64,
    /// Relative size of the dropped singular terms of Θ/sin^{d-2}.
    pub singular_tol: f64,
    pub cap_tol: f64,
    /// ‖B(x*)‖ relative to the typical ‖B‖ on the sphere.
    pub borsuk_tol: f64,
    pub max_runs: usize,
    pub concavity_margin: f64,
    pub max_halvings: usize,
}

impl Default for OddConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            delta: 0.05,
            k: 2,
            h_scale: 1e-5,
            h_coeffs: None,
            seed: 7,
            panels_per_interval: 1,
            order: 24,
            tau_nodes: 8,
            bump_subpanels: 2,
            tilde_nodes: 24,
            zonal_fine: 2e-5,
            zonal_coarse: 5e-3,
            zonal_growth: 0.05,
            cheb_degree: 12,
            cheb_radius: 0.2,
            cheb_samples: 40,
            extension_tol: 5e-2,
            inverse_tol: 5e-2,
            singular_tol: 1e-3,
            cap_tol: 1e-7,
            borsuk_tol: 1e-9,
            max_runs: 30,
            concavity_margin: 0.1,
            max_halvings: 8,
        }
    }
}

impl OddConfig {
    pub fn bumps(&self) -> usize {
        self.dim + self.k + 1
    }

    pub fn b_len(&self) -> usize {
        self.dim + self.k
    }

    pub fn basis(&self) -> Result<BumpBasis> {
        BumpBasis::with_gap(self.delta, self.bumps(), 0.0)
    }

    pub fn discretization(&self) -> OddDiscretization {
        OddDiscretization {
            panels_per_interval: self.panels_per_interval,
            order: self.order,
            tau_nodes: self.tau_nodes,
            bump_subpanels: self.bump_subpanels,
            tilde_nodes: self.tilde_nodes,
        }
    }

    pub fn zonal_settings(&self) -> ZonalSettings {
        ZonalSettings {
            dim: self.dim,
            extension_tol: self.extension_tol,
            inverse_tol: self.inverse_tol,
            cheb_degree: self.cheb_degree,
            cheb_radius: self.cheb_radius,
            cheb_samples: self.cheb_samples,
            b_len: self.b_len(),
        }
    }

    fn validate(&self) -> Result<()> {
        half_order(self.dim)?;
        if !(self.delta > 0.0 && self.delta < 0.1) {
            return Err(Error::InvalidInput(format!("delta {} outside (0, 0.1)", self.delta)));
        }
        if let Some(c) = &self.h_coeffs {
            if c.len() != self.bumps() {
                return Err(Error::InvalidInput(format!("expected {} coefficients, got {}", self.bumps(), c.len())));
            }
        }
        Ok(())
    }
}

/// One pipeline run: chords, zonal data and B.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub h: Bump,
    pub state: ChordState<V4>,
    pub picard: PicardDiagnostics,
    pub zonal: ZonalStage,
}

impl Evaluation {
    pub fn b(&self) -> &[f64] {
        &self.zonal.b
    }
}

/// Solver, grid and settings shared by all runs of one configuration.
pub struct OddContext {
    pub cfg: OddConfig,
    pub basis: BumpBasis,
    pub solver: OddChordSolver,
    pub layout: CapLayout,
    pub settings: ZonalSettings,
    runs: usize,
}

impl OddContext {
    pub fn new(cfg: &OddConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = cfg.basis()?;
        let solver = OddChordSolver::new(cfg.dim, &basis, cfg.discretization())?;
        let layout = CapLayout::new(cfg.delta, cfg.zonal_fine, cfg.zonal_coarse, cfg.zonal_growth, cfg.cheb_radius)?;
        Ok(Self { cfg: cfg.clone(), basis, solver, layout, settings: cfg.zonal_settings(), runs: 0 })
    }

    /// Pipeline runs performed so far.
    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn perturbation(&self, coeffs: &[f64], scale: f64) -> Result<Bump> {
        Bump::new(self.basis.clone(), coeffs.to_vec(), scale)
    }

    pub fn evaluate(&mut self, coeffs: &[f64], scale: f64) -> Result<Evaluation> {
        self.runs += 1;
        let h = self.perturbation(coeffs, scale)?;
        let (state, picard) = self.solver.solve(&h, None)?;
        if picard.locality_ok != Some(true) {
            return Err(Error::ConvergenceFailure("solution moved on [1-δ, 1]".into()));
        }
        let zonal = pipeline::zonal_stage(&self.layout, &self.settings, &state, &h)?;
        Ok(Evaluation { h, state, picard, zonal })
    }

    pub fn radial(&self, eval: &Evaluation) -> Result<RadialStage> {
        pipeline::radial_stage(&self.layout, &eval.zonal, self.cfg.dim, self.cfg.singular_tol, self.cfg.cap_tol)
    }
}
