//! Simulation and analysis of pushed fronts that leave periodic wave trains
//! behind in the FitzHugh–Nagumo system.

pub mod diagnostics;
pub mod eikonal;
pub mod error;
pub mod fit;
pub mod front;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod spectral;
pub mod stepper;
pub mod wavetrain;
pub mod weight;

pub use error::{Error, Result};
pub use front::FrontProfile;
pub use grid::{Grid, State};
pub use model::Params;
pub use stepper::{Bc, Component, PerturbationEvent, SchemeConfig, Stepper, Trajectory};
pub use wavetrain::WaveTrain;
pub use weight::{NormKind, Weight};
