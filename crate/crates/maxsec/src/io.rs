//! Body files: the serialized profile plus construction data for plotting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abel::ChordState;
use crate::error::Result;
use crate::geometry::{ArcSpec, BodyOfRevolution, ProfileFunction, RadialPair};
use crate::perturbation::PerturbationSpec;

type V4 = nalgebra::Vector4<f64>;

/// Chord endpoints x(s), y(s) on the solver grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChordSamples {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ChordSamples {
    pub fn from_state(state: &ChordState<V4>) -> Self {
        Self {
            s: state.grid.nodes.clone(),
            x: state.values.iter().map(|z| z[0]).collect(),
            y: state.values.iter().map(|z| z[1]).collect(),
        }
    }
}

/// R(α), r(α) on the radial grid, α ascending.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub alpha: Vec<f64>,
    pub big: Vec<f64>,
    pub small: Vec<f64>,
}

impl RadialSamples {
    pub fn from_pair(pair: &RadialPair<f64>) -> Self {
        Self { alpha: pair.alpha().to_vec(), big: pair.big_values().to_vec(), small: pair.small_values().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub dim: usize,
    pub arcs: Vec<ArcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chords: Option<ChordSamples>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialSamples>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
}

impl BodyFile {
    pub fn new(body: &BodyOfRevolution<f64>) -> Self {
        Self { dim: body.dim, arcs: body.profile.specs(), perturbation: None, chords: None, radial: None, report: None }
    }

    /// A nonzero perturbation was used to build the body.
    pub fn is_perturbed(&self) -> bool {
        self.perturbation.as_ref().is_some_and(|p| p.scale != 0.0 && p.coeffs.iter().any(|&c| c != 0.0))
    }

    pub fn body(&self) -> Result<BodyOfRevolution<f64>> {
        BodyOfRevolution::new(self.dim, ProfileFunction::from_specs(&self.arcs)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_file_roundtrip() {
        let ball = BodyOfRevolution::<f64>::unit_ball(3).unwrap();
        let file = BodyFile::new(&ball);
        let back = BodyFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
        assert!(!back.is_perturbed());
        let body = back.body().unwrap();
        assert_eq!(body.profile.value(0.6), 0.8);
    }
}
