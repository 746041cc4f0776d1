//! Flat JSON run configuration. Units: wavelengths in nm, lengths in mm,
//! delays in ps, angles in degrees, windows in ns.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spdc_core::biphoton::SpectralFilter;
use spdc_core::counting::{CountingConfig, EfficiencyChain};
use spdc_core::phasematch::CrystalConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Gaussian,
    Flat,
    /// No filter.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    HomDip,
    Singlet,
    Qutrit,
    TwoCrystal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pump_wavelength_nm: f64,
    pub crystal_length_mm: f64,
    pub theta_p_deg: f64,
    /// Report emission angles after refraction into air as well as inside the crystal.
    pub refract_to_air: bool,

    pub tuning_min_nm: f64,
    pub tuning_max_nm: f64,
    pub tuning_points: usize,

    /// Filter centres default to the degenerate wavelength.
    pub filter1_center_nm: Option<f64>,
    pub filter1_fwhm_nm: f64,
    pub filter1_shape: FilterKind,
    pub filter2_center_nm: Option<f64>,
    pub filter2_fwhm_nm: f64,
    pub filter2_shape: FilterKind,

    pub tau_min_ps: f64,
    pub tau_max_ps: f64,
    pub tau_step_ps: f64,

    /// Delay for the polarization and state commands; defaults to the dip centre.
    pub tau_ps: Option<f64>,
    /// Two-photon overlap; when absent it is taken from the delay scan at `tau_ps`.
    pub overlap: Option<f64>,
    /// Plate on the e-photon path; defaults to 45° for the dip, 0° otherwise.
    pub hwp_deg: Option<f64>,
    pub analyzer1_deg: f64,
    pub analyzer2_min_deg: f64,
    pub analyzer2_max_deg: f64,
    pub analyzer2_step_deg: f64,

    pub scheme: Scheme,
    pub qutrit_hwp_deg: Option<f64>,
    pub compensator_phase_deg: f64,
    pub bell_hwp_deg: Option<f64>,
    pub mirror_t1: f64,
    pub mirror_t2: f64,
    pub pump_polarization_deg: f64,

    pub arm1_detector: f64,
    pub arm1_fiber_coupling: f64,
    pub arm1_filter_peak: f64,
    pub arm1_misc_optical: f64,
    pub arm2_detector: f64,
    pub arm2_fiber_coupling: f64,
    pub arm2_filter_peak: f64,
    pub arm2_misc_optical: f64,
    pub pair_rate: f64,
    pub duration_s: f64,
    pub window_ns: f64,
    pub seed: u64,

    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pump_wavelength_nm: 351.1,
            crystal_length_mm: 1.0,
            theta_p_deg: 48.3,
            refract_to_air: true,
            tuning_min_nm: 690.0,
            tuning_max_nm: 715.0,
            tuning_points: 251,
            filter1_center_nm: None,
            filter1_fwhm_nm: 3.0,
            filter1_shape: FilterKind::Gaussian,
            filter2_center_nm: None,
            filter2_fwhm_nm: 3.0,
            filter2_shape: FilterKind::Gaussian,
            tau_min_ps: -0.8,
            tau_max_ps: 0.55,
            tau_step_ps: 0.005,
            tau_ps: None,
            overlap: None,
            hwp_deg: None,
            analyzer1_deg: -45.0,
            analyzer2_min_deg: -90.0,
            analyzer2_max_deg: 90.0,
            analyzer2_step_deg: 5.0,
            scheme: Scheme::Singlet,
            qutrit_hwp_deg: None,
            compensator_phase_deg: 180.0,
            bell_hwp_deg: None,
            mirror_t1: 1.0,
            mirror_t2: 1.0,
            pump_polarization_deg: 0.0,
            arm1_detector: 0.70,
            arm1_fiber_coupling: 0.65,
            arm1_filter_peak: 0.55,
            arm1_misc_optical: 1.0,
            arm2_detector: 0.70,
            arm2_fiber_coupling: 0.65,
            arm2_filter_peak: 0.55,
            arm2_misc_optical: 1.0,
            pair_rate: 1e5,
            duration_s: 5.0,
            window_ns: 7.3,
            seed: 0,
            out: None,
        }
    }
}

/// Parses `key=value`; the value is read as JSON when possible, otherwise as a string.
fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{raw}` is not of the form key=value")))?;
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.trim().to_string(), value))
}

impl RunConfig {
    /// Loads the optional config file, then applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut map = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text)
                    .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
                {
                    Value::Object(m) => m,
                    _ => return Err(CliError::Config(format!("config {} must be a JSON object", p.display()))),
                }
            }
            None => Map::new(),
        };
        for raw in overrides {
            let (k, v) = parse_override(raw)?;
            map.insert(k, v);
        }
        let cfg: RunConfig =
            serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite = [
            ("pump_wavelength_nm", self.pump_wavelength_nm),
            ("theta_p_deg", self.theta_p_deg),
            ("tau_min_ps", self.tau_min_ps),
            ("tau_max_ps", self.tau_max_ps),
            ("analyzer1_deg", self.analyzer1_deg),
            ("analyzer2_min_deg", self.analyzer2_min_deg),
            ("analyzer2_max_deg", self.analyzer2_max_deg),
            ("compensator_phase_deg", self.compensator_phase_deg),
            ("pump_polarization_deg", self.pump_polarization_deg),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(CliError::Config(format!("{k} must be finite")));
            }
        }
        if self.tau_max_ps < self.tau_min_ps {
            return Err(CliError::Config("tau_max_ps is below tau_min_ps".into()));
        }
        if !(self.tau_step_ps > 0.0) {
            return Err(CliError::Config("tau_step_ps must be positive".into()));
        }
        if self.analyzer2_max_deg < self.analyzer2_min_deg || !(self.analyzer2_step_deg > 0.0) {
            return Err(CliError::Config("analyzer2 sweep needs min <= max and a positive step".into()));
        }
        if !(self.tuning_min_nm < self.tuning_max_nm) || self.tuning_points < 2 {
            return Err(CliError::Config(
                "tuning range needs tuning_min_nm < tuning_max_nm and at least 2 points".into(),
            ));
        }
        Ok(())
    }

    pub fn crystal(&self) -> Result<CrystalConfig<f64>, CliError> {
        let mut c = CrystalConfig::new(
            self.pump_wavelength_nm * 1e-3,
            self.theta_p_deg.to_radians(),
            self.crystal_length_mm,
        )?;
        c.refract_to_air = self.refract_to_air;
        Ok(c)
    }

    pub fn degenerate_um(&self) -> f64 {
        2.0 * self.pump_wavelength_nm * 1e-3
    }

    fn filter(&self, center: Option<f64>, fwhm: f64, kind: FilterKind) -> Result<SpectralFilter<f64>, CliError> {
        let c = center.map_or(self.degenerate_um(), |nm| nm * 1e-3);
        Ok(match kind {
            FilterKind::Gaussian => SpectralFilter::gaussian(c, fwhm)?,
            FilterKind::Flat => SpectralFilter::flat(c, fwhm)?,
            FilterKind::None => SpectralFilter::open(c),
        })
    }

    pub fn filters(&self) -> Result<(SpectralFilter<f64>, SpectralFilter<f64>), CliError> {
        Ok((
            self.filter(self.filter1_center_nm, self.filter1_fwhm_nm, self.filter1_shape)?,
            self.filter(self.filter2_center_nm, self.filter2_fwhm_nm, self.filter2_shape)?,
        ))
    }

    /// Delay grid from `tau_min_ps` to `tau_max_ps`; a zero-width range is a single delay.
    pub fn tau_grid(&self) -> Vec<f64> {
        inclusive_grid(self.tau_min_ps, self.tau_max_ps, self.tau_step_ps)
    }

    pub fn analyzer2_grid(&self) -> Vec<f64> {
        inclusive_grid(self.analyzer2_min_deg, self.analyzer2_max_deg, self.analyzer2_step_deg)
    }

    pub fn chains(&self) -> Result<(EfficiencyChain, EfficiencyChain), CliError> {
        Ok((
            EfficiencyChain::new(self.arm1_detector, self.arm1_fiber_coupling, self.arm1_filter_peak, self.arm1_misc_optical)?,
            EfficiencyChain::new(self.arm2_detector, self.arm2_fiber_coupling, self.arm2_filter_peak, self.arm2_misc_optical)?,
        ))
    }

    pub fn counting(&self) -> CountingConfig {
        CountingConfig {
            pair_rate: self.pair_rate,
            duration: self.duration_s,
            window: self.window_ns,
            seed: self.seed,
        }
    }
}

/// `lo, lo + step, …` up to `hi` (included when within 1e-9 steps).
fn inclusive_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + step * i as f64).collect()
}
