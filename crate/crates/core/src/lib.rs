//! Simulation of beamlike type-II parametric down-conversion in BBO:
//! dispersion and phase matching, the biphoton spectrum and its
//! Hong-Ou-Mandel scan, a two-photon polarization state engine, and a
//! coincidence-counting model.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases at the crate root fix the scalar to `f64`.

pub mod biphoton;
pub mod counting;
pub mod dispersion;
pub mod error;
pub mod numerics;
pub mod phasematch;
pub mod polstate;
pub mod scalar;

pub use num_complex::Complex;

pub use dispersion::{Branch, WAVELENGTH_MAX_UM, WAVELENGTH_MIN_UM};
pub use error::{Result, SpdcError};
pub use scalar::Real;

pub type SellmeierSet = dispersion::SellmeierSet<f64>;
pub type UniaxialCrystal = dispersion::UniaxialCrystal<f64>;
pub type CrystalConfig = phasematch::CrystalConfig<f64>;
pub type PhaseMatcher = phasematch::PhaseMatcher<f64>;
pub type TuningPoint = phasematch::TuningPoint<f64>;
pub type TuningSample = phasematch::TuningSample<f64>;
pub type WalkoffResult = phasematch::WalkoffResult<f64>;
pub type SpectralFilter = biphoton::SpectralFilter<f64>;
pub type JointSpectralAmplitude = biphoton::JointSpectralAmplitude<f64>;
pub type DelayScan = biphoton::DelayScan<f64>;
pub type GaussianDipFit = biphoton::GaussianDipFit<f64>;
pub type TwoPhotonState = polstate::TwoPhotonState<f64>;
pub type PolarizationDensityMatrix = polstate::PolarizationDensityMatrix<f64>;
pub type QutritState = polstate::QutritState<f64>;
pub type TwoCrystalSettings = polstate::TwoCrystalSettings<f64>;
pub type TwoCrystalReport = polstate::TwoCrystalReport<f64>;
