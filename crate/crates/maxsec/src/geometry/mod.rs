//! Profiles, bodies of revolution and their hyperplane sections.

pub mod body;
pub mod certificate;
pub mod chords;
pub mod profile;
pub mod radial;

pub use body::{sphere_area, unit_ball_volume, BodyOfRevolution, ChordLine, Direction, MaxSection};
pub use certificate::{asymmetry_certificate, asymmetry_fit, brunn_defect, convexity_check, AsymmetryReport, ConvexityReport};
pub use chords::{chord_point, chord_polar, profile_from_chords};
pub use profile::{Arc, ArcSpec, PolarArc, ProfileFunction, Side};
pub use radial::{profile_from_radial, radial_from_profile, RadialPair};
