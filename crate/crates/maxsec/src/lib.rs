//! Numerical construction and verification of convex bodies of revolution
//! whose maximal hyperplane sections all have the same volume.
//!
//! The generic primitives ([`taylor`], [`quadrature`], [`spline`],
//! [`perturbation`], [`geometry`]) work over any [`Real`] scalar; the chord
//! solvers and builders run in `f64`. The aliases below name the f64
//! instantiations used throughout.

pub mod abel;
pub mod chord;
pub mod config;
pub mod error;
pub mod even;
pub mod geometry;
pub mod io;
pub mod odd;
pub mod perturbation;
pub mod quadrature;
pub mod scalar;
pub mod solve1d;
pub mod spline;
pub mod taylor;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Jet<const N: usize> = taylor::Taylor<f64, N>;
pub type Bump = perturbation::Perturbation<f64>;
