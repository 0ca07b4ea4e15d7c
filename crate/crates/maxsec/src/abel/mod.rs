//! Weakly singular integral operators with the (σ - s)^{-1/2} kernel and the
//! Picard engine for Volterra-type systems G(s, Z) = ∫_s^b Θ(s, σ, Z(σ)) dσ + Ξ(s).

use std::ops::{AddAssign, Mul};

use num_traits::Zero;

pub mod grid;
pub mod picard;
pub mod transform;

pub use grid::{ChordState, PanelGrid};
pub use picard::{consistent_xi, contraction_estimate, jacobian_fd, picard_solve, PicardDiagnostics, PicardOptions, SingularSystem};
pub use transform::{AbelOps, Invert22Report};

/// Values that can be accumulated by a quadrature rule.
pub trait Accum: Copy + AddAssign + Mul<f64, Output = Self> + Zero {}

impl<T: Copy + AddAssign + Mul<f64, Output = T> + Zero> Accum for T {}
