pub mod bloch;
pub mod dispersion;
pub mod point;

pub use bloch::{bloch_matrix, bloch_sweep, critical_curve, group_velocity_adjoint, BlochSpectrum, CriticalCurve};
pub use dispersion::{dispersion, double_root, linear_spreading_speed, DispersionRoot, SpreadingSpeed};
pub use point::{front_point_spectrum, ptr, PointSpectrumOptions, PointSpectrumReport};
