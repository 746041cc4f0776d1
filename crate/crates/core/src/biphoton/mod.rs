//! Spectral model of the CW-pumped type-II biphoton and its two-photon
//! interference.
//!
//! Detunings `Ω` are angular frequencies in rad/ps measured from the
//! degenerate frequency; delays are in ps. The signal (e-ray) sits at
//! `ω0 + Ω`, the idler (o-ray) at `ω0 − Ω`.

mod filter;
mod fit;
mod grid;
mod hom;
mod pulsed;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use filter::{FilterShape, SpectralFilter};
pub use fit::{fit_gaussian_dip, gaussian_filter_shape_check, GaussianDipFit};
pub use grid::{DetuningGrid, SAMPLES_PER_LOBE, SINC_LOBES};
pub use hom::{hom_scan, hom_scan_with, DelayScan, HomOptions};
pub use pulsed::{pulsed_visibility, pulsed_visibility_with, PulsedOptions};

use crate::error::{Result, SpdcError};
use crate::phasematch::WalkoffResult;
use crate::scalar::{sinc, Real};

/// Joint spectral amplitude of the CW biphoton, `φ(Ω) = sinc(Ω DL/2) e^{−iΩ DL/2}`,
/// sampled on a symmetric grid and normalized so that `Σ |φ|² ΔΩ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectralAmplitude<T> {
    pub grid: DetuningGrid<T>,
    pub amp: Vec<Complex<T>>,
    /// Total o/e group-delay mismatch, ps.
    pub dl_ps: T,
    /// Degenerate wavelength, µm.
    pub degenerate_um: T,
}

impl<T: Real> JointSpectralAmplitude<T> {
    /// Unnormalized model value at detuning `omega`.
    pub fn model(&self, omega: T) -> Complex<T> {
        cw_amplitude(omega, self.dl_ps)
    }
}

fn cw_amplitude<T: Real>(omega: T, dl: T) -> Complex<T> {
    let half = omega * dl / T::lit(2.0);
    Complex::from_polar(sinc(half), -half)
}

/// CW joint spectral amplitude on the default sinc grid.
pub fn jsa_cw<T: Real>(walkoff: &WalkoffResult<T>) -> Result<JointSpectralAmplitude<T>> {
    if !(walkoff.dl_ps > T::zero()) {
        return Err(SpdcError::InvalidParameter(format!(
            "joint spectrum needs DL > 0, got {} ps",
            walkoff.dl_ps
        )));
    }
    jsa_cw_on(walkoff, DetuningGrid::for_sinc(walkoff.dl_ps)?)
}

/// CW joint spectral amplitude sampled on `grid`.
pub fn jsa_cw_on<T: Real>(walkoff: &WalkoffResult<T>, grid: DetuningGrid<T>) -> Result<JointSpectralAmplitude<T>> {
    let dl = walkoff.dl_ps;
    if !(dl > T::zero()) {
        return Err(SpdcError::InvalidParameter(format!("joint spectrum needs DL > 0, got {dl} ps")));
    }
    let mut amp: Vec<Complex<T>> = grid.omega.iter().map(|&w| cw_amplitude(w, dl)).collect();
    let norm = amp.iter().fold(T::zero(), |s, a| s + a.norm_sqr()) * grid.step;
    let scale = T::one() / norm.sqrt();
    for a in &mut amp {
        *a = *a * scale;
    }
    Ok(JointSpectralAmplitude {
        grid,
        amp,
        dl_ps: dl,
        degenerate_um: walkoff.wavelength_um,
    })
}

/// Normalized coincidence rate of the unfiltered type-II dip: a triangle of
/// full base `DL` centred at `τ = −DL/2`.
pub fn triangle_closed_form<T: Real>(tau: T, dl: T) -> T {
    let half = dl / T::lit(2.0);
    T::one() - (T::one() - (tau + half).abs() / half).max(T::zero())
}
