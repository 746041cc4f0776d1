//! Detection-efficiency budget and seeded coincidence-counting simulation.
//!
//! Losses are independent Bernoulli thinnings; dark counts, dead time and
//! afterpulsing are not modelled. All rates are per second, windows in ns.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};

/// Largest expected count handled exactly by the f64 samplers.
pub const MAX_EXPECTED_COUNT: f64 = 9_007_199_254_740_992.0;

/// Per-arm detection efficiencies, each in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain {
    pub detector: f64,
    pub fiber_coupling: f64,
    pub filter_peak: f64,
    #[serde(default = "one")]
    pub misc_optical: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for EfficiencyChain {
    fn default() -> Self {
        EfficiencyChain {
            detector: 0.70,
            fiber_coupling: 0.65,
            filter_peak: 0.55,
            misc_optical: 1.0,
        }
    }
}

impl EfficiencyChain {
    pub fn new(detector: f64, fiber_coupling: f64, filter_peak: f64, misc_optical: f64) -> Result<Self> {
        let c = EfficiencyChain {
            detector,
            fiber_coupling,
            filter_peak,
            misc_optical,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detector", self.detector),
            ("fiber_coupling", self.fiber_coupling),
            ("filter_peak", self.filter_peak),
            ("misc_optical", self.misc_optical),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(SpdcError::InvalidParameter(format!("{name} efficiency must be in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Probability that a photon entering this arm is counted.
    pub fn product(&self) -> f64 {
        self.detector * self.fiber_coupling * self.filter_peak * self.misc_optical
    }
}

/// Coincidence-to-singles ratio seen from one arm: the probability that the
/// partner photon is detected, i.e. the partner arm's efficiency product.
pub fn expected_ratio(partner: &EfficiencyChain) -> Result<f64> {
    partner.validate()?;
    Ok(partner.product())
}

/// Accidental coincidence rate `R1 R2 τ_w` (counts/s) for a window of
/// `window_ns` nanoseconds.
pub fn accidental_rate(r1: f64, r2: f64, window_ns: f64) -> Result<f64> {
    if !(r1 >= 0.0 && r2 >= 0.0 && window_ns >= 0.0) || !(r1 * r2 * window_ns).is_finite() {
        return Err(SpdcError::InvalidParameter(format!(
            "rates and window must be finite and nonnegative (R1 = {r1}, R2 = {r2}, window = {window_ns} ns)"
        )));
    }
    Ok(r1 * r2 * window_ns * 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingConfig {
    /// Pair generation rate, pairs/s.
    pub pair_rate: f64,
    /// Integration time, s.
    pub duration: f64,
    /// Full coincidence window, ns.
    pub window: f64,
    pub seed: u64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        CountingConfig {
            pair_rate: 1e5,
            duration: 5.0,
            window: 7.3,
            seed: 0,
        }
    }
}

impl CountingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate >= 0.0 && self.pair_rate.is_finite()) {
            return Err(SpdcError::InvalidParameter(format!("pair_rate must be >= 0, got {}", self.pair_rate)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SpdcError::InvalidParameter(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(SpdcError::InvalidParameter(format!("window must be > 0, got {}", self.window)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    pub pairs: u64,
    pub singles1: u64,
    pub singles2: u64,
    pub true_coinc: u64,
    pub accidental_coinc: u64,
}

impl CountResult {
    pub fn total_coinc(&self) -> u64 {
        self.true_coinc + self.accidental_coinc
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean > MAX_EXPECTED_COUNT {
        return Err(SpdcError::Overflow(mean));
    }
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| SpdcError::InvalidParameter(e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> Result<u64> {
    let d = Binomial::new(n, p.clamp(0.0, 1.0)).map_err(|e| SpdcError::InvalidParameter(e.to_string()))?;
    Ok(d.sample(rng))
}

/// Seeded simulation of one counting run.
///
/// Pairs are Poisson with mean `pair_rate · duration`. Each pair is split
/// multinomially into both-detected, arm-1-only and arm-2-only outcomes by
/// sequential binomial draws. Accidentals are Poisson with mean
/// `R1 R2 τ_w T` using the expected singles rates.
pub fn simulate_counts(cfg: &CountingConfig, arm1: &EfficiencyChain, arm2: &EfficiencyChain) -> Result<CountResult> {
    cfg.validate()?;
    arm1.validate()?;
    arm2.validate()?;
    let (e1, e2) = (arm1.product(), arm2.product());
    let expected_pairs = cfg.pair_rate * cfg.duration;
    let r1 = cfg.pair_rate * e1;
    let r2 = cfg.pair_rate * e2;
    let expected_accidentals = accidental_rate(r1, r2, cfg.window)? * cfg.duration;
    for mean in [expected_pairs, expected_accidentals] {
        if !(mean <= MAX_EXPECTED_COUNT) {
            return Err(SpdcError::Overflow(mean));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = poisson(&mut rng, expected_pairs)?;
    let both = binomial(&mut rng, pairs, e1 * e2)?;
    let rest = pairs - both;
    // Conditional on not both: arm 1 only with e1(1−e2)/(1 − e1e2).
    let none_or_single = 1.0 - e1 * e2;
    let only1 = if none_or_single > 0.0 {
        binomial(&mut rng, rest, e1 * (1.0 - e2) / none_or_single)?
    } else {
        0
    };
    let rest = rest - only1;
    let p2 = 1.0 - e1 * e2 - e1 * (1.0 - e2);
    let only2 = if p2 > 0.0 {
        binomial(&mut rng, rest, (1.0 - e1) * e2 / p2)?
    } else {
        0
    };
    let accidental_coinc = poisson(&mut rng, expected_accidentals)?;
    Ok(CountResult {
        pairs,
        singles1: both + only1,
        singles2: both + only2,
        true_coinc: both,
        accidental_coinc,
    })
}
