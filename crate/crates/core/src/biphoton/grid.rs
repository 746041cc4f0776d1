use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::scalar::Real;

use super::filter::SpectralFilter;

/// Sinc lobes kept on each side of zero when nothing else bounds the spectrum.
pub const SINC_LOBES: usize = 4096;
/// Samples per sinc lobe (`2π/DL`); the main lobe spans two lobes.
pub const SAMPLES_PER_LOBE: usize = 40;
const MIN_POINTS: usize = 1025;
const MAX_POINTS: usize = (1 << 22) + 1;

/// Uniform detuning grid symmetric about zero: `Ω_k = −Ω_{N−1−k}` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid<T> {
    pub omega: Vec<T>,
    pub step: T,
}

impl<T: Real> DetuningGrid<T> {
    /// `n` points (forced odd so that `Ω = 0` is a node) spanning `[−half_span, half_span]`.
    pub fn symmetric(half_span: T, n: usize) -> Result<Self> {
        if !(half_span > T::zero()) || !half_span.is_finite() {
            return Err(SpdcError::InvalidParameter(format!("grid half-span {half_span} must be positive")));
        }
        let n = (n.max(3)) | 1;
        if n > MAX_POINTS {
            return Err(SpdcError::Convergence(format!(
                "detuning grid needs {n} points, more than the {MAX_POINTS} limit"
            )));
        }
        let m = (n - 1) / 2;
        let step = half_span / T::from_count(m);
        let omega = (0..n)
            .map(|k| {
                if k >= m {
                    step * T::from_count(k - m)
                } else {
                    -(step * T::from_count(m - k))
                }
            })
            .collect();
        Ok(DetuningGrid { omega, step })
    }

    /// Grid wide enough for `SINC_LOBES` lobes of `sinc(Ω DL/2)`.
    pub fn for_sinc(dl: T) -> Result<Self> {
        let lobe = T::lit(2.0) * T::PI() / dl;
        let n = 2 * SINC_LOBES * SAMPLES_PER_LOBE + 1;
        Self::symmetric(lobe * T::from_count(SINC_LOBES), n)
    }

    /// Integration grid for a delay scan: the span is cut at the narrower of
    /// the sinc envelope and the two filter passbands, and the step resolves
    /// the sinc lobes, the filter features, and the fastest delay phase
    /// `exp(−2iΩτ)` without aliasing.
    pub fn for_scan(
        dl: T,
        f1: &SpectralFilter<T>,
        f2: &SpectralFilter<T>,
        reference_um: T,
        max_abs_tau: T,
        refinement: usize,
    ) -> Result<Self> {
        let lobe = T::lit(2.0) * T::PI() / dl;
        let half_span = [f1.extent(reference_um), f2.extent(reference_um)]
            .into_iter()
            .fold(lobe * T::from_count(SINC_LOBES), |a, b| a.min(b));

        let mut step = lobe / T::from_count(SAMPLES_PER_LOBE);
        // Time-domain support of the cross term is at most DL + 2|τ|; keep the
        // aliasing period 2π/step at least twice that.
        let support = dl + T::lit(2.0) * max_abs_tau.abs();
        step = step.min(T::PI() / support);
        for f in [f1, f2] {
            if f.fwhm_nm.is_finite() {
                step = step.min(f.feature_scale() / T::lit(64.0));
            }
        }
        let half_points = (half_span / step).ceil().to_usize().unwrap_or(usize::MAX / 4);
        let n = (2 * half_points + 1).max(MIN_POINTS);
        let n = (n - 1) * refinement.max(1) + 1;
        Self::symmetric(half_span, n)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn half_span(&self) -> T {
        *self.omega.last().expect("grid is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_exactly_antisymmetric() {
        let g = DetuningGrid::symmetric(3.7_f64, 1000).unwrap();
        assert_eq!(g.len(), 1001);
        for k in 0..g.len() {
            assert_eq!(g.omega[k], -g.omega[g.len() - 1 - k]);
        }
        assert_eq!(g.omega[500], 0.0);
        assert_eq!(g.half_span(), 3.7);
    }

    #[test]
    fn sinc_grid_resolves_main_lobe() {
        let dl = 0.2413_f64;
        let g = DetuningGrid::for_sinc(dl).unwrap();
        let lobe = 2.0 * std::f64::consts::PI / dl;
        let in_main = g.omega.iter().filter(|w| w.abs() < lobe).count();
        assert!(in_main >= 2 * SAMPLES_PER_LOBE - 1);
    }

    #[test]
    fn scan_grid_ends_on_flat_band_edges() {
        let dl = 0.2413_f64;
        let f = SpectralFilter::flat(0.7022, 20.0).unwrap();
        let g = DetuningGrid::for_scan(dl, &f, &f, 0.7022, 0.5, 1).unwrap();
        assert!((g.half_span() - f.fwhm_angular() / 2.0).abs() < 1e-12);
        let g2 = DetuningGrid::for_scan(dl, &f, &f, 0.7022, 0.5, 2).unwrap();
        assert_eq!(g2.len(), 2 * g.len() - 1);
    }

    #[test]
    fn oversized_grid_is_refused() {
        assert!(DetuningGrid::<f64>::symmetric(1.0, MAX_POINTS + 2).is_err());
        assert!(DetuningGrid::<f64>::symmetric(0.0, 11).is_err());
    }
}
