use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::numerics::solve_dense;
use crate::scalar::Real;

use super::DelayScan;

/// Least-squares fit of `R(τ) = 1 − v exp(−(τ − τ0)² / 2s²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDipFit<T> {
    pub visibility: T,
    pub center: T,
    pub width: T,
    /// RMS residual in units of the (unit) baseline.
    pub residual_rms: T,
}

/// Threshold on the RMS residual for a dip to count as Gaussian.
pub const GAUSSIAN_RESIDUAL_MAX: f64 = 0.02;

impl<T: Real> GaussianDipFit<T> {
    /// Gaussian-shaped dip at `τ = −DL/2`: RMS residual below 0.02 and
    /// centre within `s/10` of `−DL/2`.
    pub fn meets_contract(&self, dl: T) -> bool {
        self.residual_rms < T::lit(GAUSSIAN_RESIDUAL_MAX)
            && (self.center + dl / T::lit(2.0)).abs() <= self.width.abs() / T::lit(10.0)
    }
}

/// Fits a Gaussian dip to a delay scan.
pub fn gaussian_filter_shape_check<T: Real>(scan: &DelayScan<T>) -> Result<GaussianDipFit<T>> {
    fit_gaussian_dip(&scan.tau, &scan.rate)
}

fn model<T: Real>(p: &[T; 3], t: T) -> (T, [T; 3]) {
    let [v, c, s] = *p;
    let d = t - c;
    let e = (-(d * d) / (T::lit(2.0) * s * s)).exp();
    let value = T::one() - v * e;
    let grad = [-e, -v * e * d / (s * s), -v * e * d * d / (s * s * s)];
    (value, grad)
}

fn sse<T: Real>(p: &[T; 3], tau: &[T], rate: &[T]) -> T {
    tau.iter().zip(rate).fold(T::zero(), |acc, (&t, &r)| {
        let d = model(p, t).0 - r;
        acc + d * d
    })
}

/// Levenberg–Marquardt fit of `1 − v exp(−(τ − τ0)²/2s²)` to `(tau, rate)`.
pub fn fit_gaussian_dip<T: Real>(tau: &[T], rate: &[T]) -> Result<GaussianDipFit<T>> {
    if tau.len() != rate.len() || tau.len() < 4 {
        return Err(SpdcError::DegenerateFit(format!(
            "need at least 4 matched samples, got {} delays and {} rates",
            tau.len(),
            rate.len()
        )));
    }
    let (i_min, &r_min) = rate
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let r_max = rate.iter().fold(T::neg_infinity(), |m, &r| m.max(r));
    let depth = T::one() - r_min;
    if !(r_max - r_min > T::lit(1e-6)) || !(depth > T::lit(1e-6)) {
        return Err(SpdcError::DegenerateFit("scan has no dip".into()));
    }

    // Width guess from the half-depth crossings around the minimum.
    let level = T::one() - depth / T::lit(2.0);
    let left = (0..i_min).rev().find(|&i| rate[i] >= level).map(|i| tau[i]);
    let right = (i_min + 1..rate.len()).find(|&i| rate[i] >= level).map(|i| tau[i]);
    let span = tau[tau.len() - 1] - tau[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => T::lit(2.0) * (tau[i_min] - l),
        (None, Some(r)) => T::lit(2.0) * (r - tau[i_min]),
        (None, None) => span / T::lit(2.0),
    };
    let mut p = [depth, tau[i_min], (fwhm / T::lit(2.354_820_045)).abs().max(span * T::lit(1e-6))];
    let mut cost = sse(&p, tau, rate);
    let mut lambda = T::lit(1e-3);

    for _ in 0..500 {
        let mut jtj = [T::zero(); 9];
        let mut jtr = [T::zero(); 3];
        for (&t, &r) in tau.iter().zip(rate) {
            let (m, g) = model(&p, t);
            let res = r - m;
            for a in 0..3 {
                jtr[a] = jtr[a] + g[a] * res;
                for b in 0..3 {
                    jtj[a * 3 + b] = jtj[a * 3 + b] + g[a] * g[b];
                }
            }
        }
        let mut improved = false;
        while lambda < T::lit(1e12) {
            let mut a = jtj.to_vec();
            for d in 0..3 {
                a[d * 3 + d] = a[d * 3 + d] * (T::one() + lambda) + T::min_positive_value().sqrt();
            }
            let Some(step) = solve_dense(a, jtr.to_vec()) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let trial_cost = sse(&trial, tau, rate);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(T::min_positive_value());
                p = trial;
                cost = trial_cost;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-15));
                improved = rel > T::epsilon();
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if !improved {
            break;
        }
    }
    if !p.iter().all(|x| x.is_finite()) {
        return Err(SpdcError::DegenerateFit("fit diverged".into()));
    }
    Ok(GaussianDipFit {
        visibility: p[0],
        center: p[1],
        width: p[2].abs(),
        residual_rms: (cost / T::from_count(tau.len())).sqrt(),
    })
}
