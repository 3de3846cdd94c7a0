pub mod arnoldi;
pub mod banded;
pub mod dense;

pub use banded::{BandLu, BandMatrix, CyclicBand, CyclicLu};
