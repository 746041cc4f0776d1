use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::numerics::trapezoid_weights;
use crate::scalar::Real;

use super::{cw_amplitude, DetuningGrid, JointSpectralAmplitude, SpectralFilter};

/// Normalized coincidence rate versus delay. `τ` is the upper-arm (e-ray)
/// delay minus the lower-arm delay, ps; the baseline is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan<T> {
    pub tau: Vec<T>,
    pub rate: Vec<T>,
    pub dl_ps: T,
}

impl<T: Real> DelayScan<T> {
    /// Sample with the lowest rate, `(τ, R)`.
    pub fn minimum(&self) -> Option<(T, T)> {
        self.tau
            .iter()
            .zip(&self.rate)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(&t, &r)| (t, r))
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomOptions {
    /// Integer factor by which the default grid step is divided.
    pub refinement: usize,
}

impl Default for HomOptions {
    fn default() -> Self {
        HomOptions { refinement: 1 }
    }
}

/// Hong-Ou-Mandel delay scan with filter `f1` on the signal and `f2` on the idler.
pub fn hom_scan<T: Real>(
    jsa: &JointSpectralAmplitude<T>,
    f1: &SpectralFilter<T>,
    f2: &SpectralFilter<T>,
    tau: &[T],
) -> Result<DelayScan<T>> {
    hom_scan_with(jsa, f1, f2, tau, HomOptions::default())
}

/// [`hom_scan`] with explicit quadrature options.
///
/// With `A(Ω) = φ(Ω) f1(Ω) f2(−Ω)` the rate is
/// `R(τ) ∝ ∫ |A(Ω)|² + |A(−Ω)|² − 2 Re[A(Ω) A*(−Ω) e^{−2iΩτ}] dΩ`,
/// normalized to the `|τ| → ∞` baseline. The `e^{−iΩ DL/2}` phase of `φ`
/// places the minimum at `τ = −DL/2`.
pub fn hom_scan_with<T: Real>(
    jsa: &JointSpectralAmplitude<T>,
    f1: &SpectralFilter<T>,
    f2: &SpectralFilter<T>,
    tau: &[T],
    opts: HomOptions,
) -> Result<DelayScan<T>> {
    f1.validate()?;
    f2.validate()?;
    let dl = jsa.dl_ps;
    let half = dl / T::lit(2.0);
    if let Some(bad) = tau.iter().find(|t| !t.is_finite()) {
        return Err(SpdcError::InvalidParameter(format!("non-finite delay {bad}")));
    }
    let reach = tau.iter().fold(T::zero(), |m, &t| m.max((t + half).abs())) + half;
    let reference = jsa.degenerate_um;
    let grid = DetuningGrid::for_scan(dl, f1, f2, reference, reach, opts.refinement)?;

    let n = grid.len();
    let amp: Vec<Complex<T>> = grid
        .omega
        .iter()
        .map(|&w| cw_amplitude(w, dl) * (f1.transmission(w, reference) * f2.transmission(-w, reference)))
        .collect();
    let weights = trapezoid_weights(n, grid.step);
    let base = (0..n).fold(T::zero(), |s, k| {
        s + weights[k] * (amp[k].norm_sqr() + amp[n - 1 - k].norm_sqr())
    });
    let peak = amp.iter().fold(T::zero(), |m, a| m.max(a.norm_sqr()));
    if !(base > T::zero()) || !(peak > T::min_positive_value()) {
        return Err(SpdcError::EmptyPassband);
    }

    // p_k = w_k A(Ω_k) A*(−Ω_k); p_{N−1−k} = conj(p_k), so the cross term is
    // 2 Re p_0 + 4 Σ_{j>0} Re(p_j e^{−2iΩ_j τ}) over the non-negative half.
    let m = (n - 1) / 2;
    let pairs: Vec<Complex<T>> = (m..n).map(|k| amp[k] * amp[n - 1 - k].conj() * weights[k]).collect();
    let step = grid.step;

    let rate = tau
        .par_iter()
        .map(|&t| {
            let cross = cross_term(&pairs, step, t);
            ((base - cross) / base).max(T::zero())
        })
        .collect();

    Ok(DelayScan {
        tau: tau.to_vec(),
        rate,
        dl_ps: dl,
    })
}

/// `2 Re Σ_k p_k e^{−2iΩ_k τ}` over the full grid, given the non-negative half.
fn cross_term<T: Real>(pairs: &[Complex<T>], step: T, tau: T) -> T {
    const RESEED: usize = 64;
    let angle = -T::lit(2.0) * step * tau;
    let rot = Complex::from_polar(T::one(), angle);
    let mut acc = T::zero();
    let mut phase = Complex::new(T::one(), T::zero());
    for (j, p) in pairs.iter().enumerate().skip(1) {
        if j % RESEED == 0 {
            phase = Complex::from_polar(T::one(), angle * T::from_count(j));
        } else {
            phase = phase * rot;
        }
        acc = acc + (p * phase).re;
    }
    T::lit(2.0) * pairs[0].re + T::lit(4.0) * acc
}
