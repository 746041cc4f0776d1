use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::scalar::{Real, SPEED_OF_LIGHT_UM_PER_PS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    /// Unit amplitude transmission across a band one FWHM wide, zero outside.
    Flat,
    /// Gaussian amplitude transmission whose intensity FWHM is `fwhm_nm`.
    Gaussian,
}

/// Bandpass filter in front of a detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter<T> {
    /// Center wavelength, µm.
    pub center_um: T,
    /// Intensity FWHM, nm. `+∞` with a flat shape means no filter.
    pub fwhm_nm: T,
    pub shape: FilterShape,
}

impl<T: Real> SpectralFilter<T> {
    pub fn new(center_um: T, fwhm_nm: T, shape: FilterShape) -> Result<Self> {
        let f = SpectralFilter { center_um, fwhm_nm, shape };
        f.validate()?;
        Ok(f)
    }

    pub fn flat(center_um: T, fwhm_nm: T) -> Result<Self> {
        Self::new(center_um, fwhm_nm, FilterShape::Flat)
    }

    pub fn gaussian(center_um: T, fwhm_nm: T) -> Result<Self> {
        Self::new(center_um, fwhm_nm, FilterShape::Gaussian)
    }

    /// Flat filter of unbounded width: the unfiltered limit.
    pub fn open(center_um: T) -> Self {
        SpectralFilter {
            center_um,
            fwhm_nm: T::infinity(),
            shape: FilterShape::Flat,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_nm > T::zero()) {
            return Err(SpdcError::InvalidParameter(format!(
                "filter FWHM must be positive, got {} nm",
                self.fwhm_nm
            )));
        }
        if !(self.center_um > T::zero()) || !self.center_um.is_finite() {
            return Err(SpdcError::InvalidParameter(format!(
                "filter center must be a positive wavelength, got {} µm",
                self.center_um
            )));
        }
        if self.shape == FilterShape::Gaussian && !self.fwhm_nm.is_finite() {
            return Err(SpdcError::InvalidParameter("gaussian filter needs a finite FWHM".into()));
        }
        Ok(())
    }

    /// Angular-frequency detuning of the filter center from `reference_um`, rad/ps.
    pub fn center_detuning(&self, reference_um: T) -> T {
        let two_pi_c = T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT_UM_PER_PS);
        two_pi_c / self.center_um - two_pi_c / reference_um
    }

    /// Intensity FWHM converted to angular frequency, rad/ps.
    pub fn fwhm_angular(&self) -> T {
        let two_pi_c = T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT_UM_PER_PS);
        two_pi_c * self.fwhm_nm * T::lit(1e-3) / (self.center_um * self.center_um)
    }

    /// RMS width `σ_a` of the Gaussian amplitude transmission, rad/ps.
    pub fn amplitude_sigma(&self) -> T {
        self.fwhm_angular() / (T::lit(2.0) * T::LN_2().sqrt())
    }

    /// Distance from the reference frequency beyond which transmission is
    /// negligible (exactly zero for a flat band), rad/ps. Infinite for an
    /// open filter.
    pub fn extent(&self, reference_um: T) -> T {
        let offset = self.center_detuning(reference_um).abs();
        match self.shape {
            FilterShape::Flat => offset + self.fwhm_angular() / T::lit(2.0),
            FilterShape::Gaussian => offset + T::lit(6.0) * self.amplitude_sigma(),
        }
    }

    /// Finest spectral feature the quadrature grid has to resolve, rad/ps.
    pub fn feature_scale(&self) -> T {
        match self.shape {
            FilterShape::Flat => self.fwhm_angular(),
            FilterShape::Gaussian => self.amplitude_sigma(),
        }
    }

    /// Amplitude transmission at detuning `omega` (rad/ps) from `reference_um`.
    pub fn transmission(&self, omega: T, reference_um: T) -> T {
        let x = omega - self.center_detuning(reference_um);
        match self.shape {
            FilterShape::Flat => {
                let half = self.fwhm_angular() / T::lit(2.0);
                // Band edges are closed; the slack keeps grid end points that
                // land on an edge inside the band.
                if x.abs() <= half * (T::one() + T::lit(1e-12)) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FilterShape::Gaussian => {
                let s = self.amplitude_sigma();
                (-(x * x) / (T::lit(2.0) * s * s)).exp()
            }
        }
    }
}
