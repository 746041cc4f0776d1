use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Result, SpdcError};
use crate::numerics::{scan_maximize, trapezoid_weights};
use crate::phasematch::WalkoffResult;
use crate::scalar::{sinc, Real};

use super::DetuningGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsedOptions {
    /// Sinc lobes kept along the difference frequency.
    pub lobes: usize,
    /// Samples per sinc lobe along each axis.
    pub samples_per_lobe: usize,
    /// Largest allowed change of V when the grid is refined twofold.
    pub convergence_tol: f64,
}

impl Default for PulsedOptions {
    fn default() -> Self {
        PulsedOptions {
            lobes: 128,
            samples_per_lobe: 16,
            convergence_tol: 1e-3,
        }
    }
}

/// Two-photon interference visibility with a Gaussian-envelope pump of
/// amplitude bandwidth `sigma` (rad/ps): `α(Ω_s + Ω_i) = exp(−(Ω_s+Ω_i)²/2σ²)`.
///
/// The two-photon amplitude is
/// `Φ(Ω_s, Ω_i) = α(Ω_s+Ω_i) sinc(x) e^{ix}` with
/// `x = (Ω_s δ_e + Ω_i δ_o) L / 2`, and
/// `V = max_τ |∫∫ Φ(Ω_s,Ω_i) Φ*(Ω_i,Ω_s) e^{i(Ω_s−Ω_i)τ}| / ∫∫ |Φ|²`.
/// The integral is evaluated at two resolutions; a change larger than the
/// convergence tolerance is an error.
pub fn pulsed_visibility<T: Real>(sigma: T, walkoff: &WalkoffResult<T>) -> Result<T> {
    pulsed_visibility_with(sigma, walkoff, PulsedOptions::default())
}

pub fn pulsed_visibility_with<T: Real>(sigma: T, walkoff: &WalkoffResult<T>, opts: PulsedOptions) -> Result<T> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(SpdcError::InvalidParameter(format!("pump bandwidth must be >= 0, got {sigma}")));
    }
    let l = walkoff.length_mm;
    // Sum- and difference-frequency delays (ps) acting on Ω+ = Ω_s + Ω_i and Ω− = Ω_s − Ω_i.
    let sum_delay = (walkoff.delta_e_ps_per_mm + walkoff.delta_o_ps_per_mm) * l / T::lit(2.0);
    let diff_delay = (walkoff.delta_e_ps_per_mm - walkoff.delta_o_ps_per_mm) * l / T::lit(2.0);
    if !(diff_delay.abs() > T::zero()) {
        return Err(SpdcError::InvalidParameter("walk-off has no o/e delay mismatch".into()));
    }
    let coarse = evaluate(sigma, sum_delay, diff_delay, opts, 1)?;
    let fine = evaluate(sigma, sum_delay, diff_delay, opts, 2)?;
    if (coarse - fine).abs().to_f64_lossy() > opts.convergence_tol {
        return Err(SpdcError::Convergence(format!(
            "pulsed visibility changed from {coarse} to {fine} on grid refinement"
        )));
    }
    Ok(fine.min(T::one()))
}

fn amplitude<T: Real>(plus: T, minus: T, sigma: T, sum_delay: T, diff_delay: T) -> Complex<T> {
    let x = (plus * sum_delay + minus * diff_delay) / T::lit(2.0);
    let envelope = if sigma > T::zero() {
        (-(plus * plus) / (T::lit(2.0) * sigma * sigma)).exp()
    } else {
        T::one()
    };
    Complex::from_polar(envelope * sinc(x), x)
}

fn evaluate<T: Real>(sigma: T, sum_delay: T, diff_delay: T, opts: PulsedOptions, refine: usize) -> Result<T> {
    let two_pi = T::lit(2.0) * T::PI();
    let lobe_minus = two_pi / (diff_delay.abs() / T::lit(2.0));
    let per_lobe = opts.samples_per_lobe * refine;

    // The sinc ridge moves along Ω− as Ω+ varies; widen the Ω− window to follow it.
    let plus_span = T::lit(6.0) * sigma;
    let shift = plus_span * (sum_delay / diff_delay).abs();
    let minus_span = lobe_minus * T::from_count(opts.lobes) + shift;
    let n_minus = 2 * ((minus_span / lobe_minus) * T::from_count(per_lobe)).ceil().to_usize().unwrap_or(0) + 1;
    let minus = DetuningGrid::symmetric(minus_span, n_minus)?;
    let w_minus = trapezoid_weights(minus.len(), minus.step);

    // G(Ω−) = ∫ dΩ+ Φ(Ω+, Ω−) Φ*(Ω+, −Ω−); the exchange Ω_s ↔ Ω_i flips Ω−.
    let (g, norm) = if sigma > T::zero() {
        let lobe_plus = if sum_delay != T::zero() {
            two_pi / (sum_delay.abs() / T::lit(2.0))
        } else {
            T::infinity()
        };
        let scale = sigma.min(lobe_plus);
        let n_plus_f = (T::lit(2.0) * plus_span / scale) * T::from_count(per_lobe);
        let n_plus = (n_plus_f.ceil().to_usize().unwrap_or(0) + 1).max(33 * refine);
        let plus = DetuningGrid::symmetric(plus_span, n_plus)?;
        let w_plus = trapezoid_weights(plus.len(), plus.step);
        let rows: Vec<(Complex<T>, T)> = minus
            .omega
            .par_iter()
            .map(|&m| {
                plus.omega.iter().zip(&w_plus).fold(
                    (Complex::new(T::zero(), T::zero()), T::zero()),
                    |(acc, nrm), (&p, &w)| {
                        let a = amplitude(p, m, sigma, sum_delay, diff_delay);
                        let b = amplitude(p, -m, sigma, sum_delay, diff_delay);
                        (acc + a * b.conj() * w, nrm + a.norm_sqr() * w)
                    },
                )
            })
            .collect();
        let norm = rows.iter().zip(&w_minus).fold(T::zero(), |s, (r, &w)| s + r.1 * w);
        (rows.into_iter().map(|r| r.0).collect::<Vec<_>>(), norm)
    } else {
        // CW limit: the pump envelope pins Ω+ = 0 and the integral is one-dimensional.
        let rows: Vec<(Complex<T>, T)> = minus
            .omega
            .iter()
            .map(|&m| {
                let a = amplitude(T::zero(), m, sigma, sum_delay, diff_delay);
                let b = amplitude(T::zero(), -m, sigma, sum_delay, diff_delay);
                (a * b.conj(), a.norm_sqr())
            })
            .collect();
        let norm = rows.iter().zip(&w_minus).fold(T::zero(), |s, (r, &w)| s + r.1 * w);
        (rows.into_iter().map(|r| r.0).collect(), norm)
    };
    if !(norm > T::zero()) {
        return Err(SpdcError::Convergence("pulsed two-photon amplitude vanished on the grid".into()));
    }

    let weighted: Vec<Complex<T>> = g.iter().zip(&w_minus).map(|(v, &w)| v * w).collect();
    let overlap = |tau: T| {
        weighted
            .iter()
            .zip(&minus.omega)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (v, &m)| {
                acc + v * Complex::from_polar(T::one(), m * tau)
            })
            .norm()
    };
    let reach = T::lit(4.0) * (diff_delay.abs() + sum_delay.abs());
    let (_, best) = scan_maximize(overlap, -reach, reach, 161, T::epsilon().sqrt());
    Ok(best / norm)
}
