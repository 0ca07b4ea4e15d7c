//! Run configuration shared by the command-line front end. Precedence, lowest
//! first: builder defaults, the `even`/`odd` tables, top-level keys, flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::even::EvenConfig;
use crate::odd::OddConfig;
use crate::verify::{DEFAULT_DIRECTIONS, DEFAULT_TOL};

pub const CONFIG_ENV: &str = "KLEE_CONFIG";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub delta: Option<f64>,
    pub h_scale: Option<f64>,
    pub h_coeffs: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub directions: Option<usize>,
    pub tol: Option<f64>,
    pub even: Option<EvenConfig>,
    pub odd: Option<OddConfig>,
}

impl RunConfig {
    /// JSON if the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The file named by KLEE_CONFIG, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)).map(Some),
            _ => Ok(None),
        }
    }

    /// Fields set in `over` replace those of `self`.
    pub fn overridden_by(self, over: RunConfig) -> RunConfig {
        RunConfig {
            dim: over.dim.or(self.dim),
            delta: over.delta.or(self.delta),
            h_scale: over.h_scale.or(self.h_scale),
            h_coeffs: over.h_coeffs.or(self.h_coeffs),
            k: over.k.or(self.k),
            seed: over.seed.or(self.seed),
            directions: over.directions.or(self.directions),
            tol: over.tol.or(self.tol),
            even: over.even.or(self.even),
            odd: over.odd.or(self.odd),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(4)
    }

    pub fn directions(&self) -> usize {
        self.directions.unwrap_or(DEFAULT_DIRECTIONS)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn even_config(&self) -> EvenConfig {
        let mut c = self.even.clone().unwrap_or_default();
        c.dim = self.dim();
        if let Some(d) = self.delta {
            c.delta = d;
        }
        if let Some(s) = self.h_scale {
            c.h_scale = s;
        }
        if let Some(h) = &self.h_coeffs {
            c.bumps = h.len();
            c.h_coeffs = Some(h.clone());
        }
        c
    }

    pub fn odd_config(&self) -> OddConfig {
        let mut c = self.odd.clone().unwrap_or_default();
        c.dim = self.dim();
        if let Some(d) = self.delta {
            c.delta = d;
        }
        if let Some(s) = self.h_scale {
            c.h_scale = s;
        }
        if let Some(h) = &self.h_coeffs {
            c.h_coeffs = Some(h.clone());
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c
    }
}
