//! Type-II (e → e + o) phase matching in the optic-axis plane of a negative
//! uniaxial crystal.
//!
//! Angles are measured from the pump direction inside the plane that
//! contains the optic axis. The extraordinary daughter photon propagating at
//! internal angle `α_e` sees the optic axis at `θ_p − α_e`. Wavevectors are in
//! rad/µm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{Branch, UniaxialCrystal};
use crate::error::{Result, SpdcError};
use crate::numerics::{bracketed_root, scan_maximize, RootError, RootOptions};
use crate::scalar::{Real, SPEED_OF_LIGHT_UM_PER_PS};

/// Half-width of the internal emission-angle window searched for solutions, rad.
const ANGLE_WINDOW: f64 = 0.35;
const PUMP_MIN_UM: f64 = 0.35;
const PUMP_MAX_UM: f64 = 0.40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig<T> {
    /// Pump wavelength, µm.
    pub pump_wavelength: T,
    /// Internal angle between pump and optic axis, rad.
    pub theta_p: T,
    /// Crystal length, mm.
    pub length_mm: T,
    /// Refract emission angles through a flat crystal-to-air exit face
    /// normal to the pump. When false, external angles equal internal ones.
    pub refract_to_air: bool,
}

impl<T: Real> CrystalConfig<T> {
    pub fn new(pump_wavelength: T, theta_p: T, length_mm: T) -> Result<Self> {
        let cfg = CrystalConfig {
            pump_wavelength,
            theta_p,
            length_mm,
            refract_to_air: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let lp = self.pump_wavelength.to_f64_lossy();
        if !(PUMP_MIN_UM..=PUMP_MAX_UM).contains(&lp) {
            return Err(SpdcError::domain("pump wavelength (µm)", lp, PUMP_MIN_UM, PUMP_MAX_UM));
        }
        let t = self.theta_p.to_f64_lossy();
        if !(t > 0.0 && t < std::f64::consts::FRAC_PI_2) {
            return Err(SpdcError::domain("theta_p (rad)", t, 0.0, std::f64::consts::FRAC_PI_2));
        }
        if !(self.length_mm > T::zero()) {
            return Err(SpdcError::InvalidParameter(format!(
                "crystal length must be positive, got {} mm",
                self.length_mm
            )));
        }
        Ok(())
    }

    /// Wavelength conjugate to `lambda` under energy conservation.
    pub fn conjugate_wavelength(&self, lambda: T) -> T {
        T::one() / (T::one() / self.pump_wavelength - T::one() / lambda)
    }

    /// Degenerate down-conversion wavelength, `2 λ_p`.
    pub fn degenerate_wavelength(&self) -> T {
        T::lit(2.0) * self.pump_wavelength
    }
}

/// One solution of the energy/momentum system. The signal is the
/// extraordinary photon, the idler the ordinary one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPoint<T> {
    pub lambda_signal: T,
    pub lambda_idler: T,
    pub alpha_e_internal: T,
    pub alpha_o_internal: T,
    pub alpha_e_external: T,
    pub alpha_o_external: T,
}

/// All tuning-curve solutions at one grid wavelength.
///
/// `e_branch` holds solutions where the extraordinary photon has
/// `wavelength`; `o_branch` those where the ordinary photon has it. An empty
/// list means no real solution exists; an error flags a point the solver
/// could not resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningSample<T> {
    pub wavelength: T,
    pub e_branch: Result<Vec<TuningPoint<T>>>,
    pub o_branch: Result<Vec<TuningPoint<T>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkoffResult<T> {
    /// `1/u_o − 1/u_e`, ps/mm.
    pub d_ps_per_mm: T,
    /// `D L`, ps.
    pub dl_ps: T,
    /// `c D L`, µm.
    pub path_um: T,
    pub length_mm: T,
    /// Group-delay mismatch of the e-photon against the pump, ps/mm.
    pub delta_e_ps_per_mm: T,
    /// Group-delay mismatch of the o-photon against the pump, ps/mm.
    pub delta_o_ps_per_mm: T,
    /// Degenerate wavelength the group indices were evaluated at, µm.
    pub wavelength_um: T,
}

impl<T: Real> WalkoffResult<T> {
    /// Builds a result directly from a total mismatch, with the pump
    /// mismatches split symmetrically.
    pub fn from_dl(dl_ps: T, length_mm: T, wavelength_um: T) -> Result<Self> {
        if !(dl_ps > T::zero()) || !(length_mm > T::zero()) {
            return Err(SpdcError::InvalidParameter(format!(
                "walk-off requires DL > 0 and L > 0 (got DL = {dl_ps} ps, L = {length_mm} mm)"
            )));
        }
        let d = dl_ps / length_mm;
        let half = d / T::lit(2.0);
        Ok(WalkoffResult {
            d_ps_per_mm: d,
            dl_ps,
            path_um: T::lit(SPEED_OF_LIGHT_UM_PER_PS) * dl_ps,
            length_mm,
            delta_e_ps_per_mm: -half,
            delta_o_ps_per_mm: half,
            wavelength_um,
        })
    }
}

/// Phase-matching solver bound to a crystal's dispersion.
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatcher<T> {
    pub crystal: UniaxialCrystal<T>,
}

impl<T: Real> Default for PhaseMatcher<T> {
    fn default() -> Self {
        PhaseMatcher::new(UniaxialCrystal::bbo())
    }
}

/// `|Δk| L` tolerance at the collinear root, with L = 1 mm.
const COLLINEAR_PHASE_TOL: f64 = 1e-9;

impl<T: Real> PhaseMatcher<T> {
    pub fn new(crystal: UniaxialCrystal<T>) -> Self {
        PhaseMatcher { crystal }
    }

    fn wavenumber(&self, branch: Branch, lambda: T, theta: T) -> Result<T> {
        let n = self.crystal.index(branch, lambda, theta)?;
        Ok(T::lit(2.0) * T::PI() * n / lambda)
    }

    /// Collinear degenerate mismatch `k_p(θ) − k_e(2λ_p, θ) − k_o(2λ_p)`, rad/µm.
    pub fn collinear_mismatch(&self, pump_wavelength: T, theta: T) -> Result<T> {
        let ld = T::lit(2.0) * pump_wavelength;
        Ok(self.wavenumber(Branch::Extraordinary, pump_wavelength, theta)?
            - self.wavenumber(Branch::Extraordinary, ld, theta)?
            - self.wavenumber(Branch::Ordinary, ld, theta)?)
    }

    /// Pump–optic-axis angle for collinear degenerate type-II emission.
    pub fn collinear_degenerate_angle(&self, pump_wavelength: T) -> Result<T> {
        let lp = pump_wavelength.to_f64_lossy();
        if !(PUMP_MIN_UM..=PUMP_MAX_UM).contains(&lp) {
            return Err(SpdcError::domain("pump wavelength (µm)", lp, PUMP_MIN_UM, PUMP_MAX_UM));
        }
        let lo = T::lit(30.0).rad();
        let hi = T::lit(70.0).rad();
        let f = |t: T| self.collinear_mismatch(pump_wavelength, t).unwrap_or(T::nan());
        let theta = bracketed_root(f, lo, hi, RootOptions::default()).map_err(|e| match e {
            RootError::NoSignChange => SpdcError::NoPhaseMatch(format!(
                "collinear mismatch has no sign change in [30°, 70°] at λ_p = {pump_wavelength} µm"
            )),
            RootError::MaxIterations => SpdcError::Convergence("collinear angle root".into()),
        })?;
        let residual = self.collinear_mismatch(pump_wavelength, theta)?.abs() * T::lit(1000.0);
        let k_p = self.wavenumber(Branch::Extraordinary, pump_wavelength, theta)?;
        let tol = T::lit(COLLINEAR_PHASE_TOL).max(T::lit(64.0) * T::epsilon() * k_p * T::lit(1000.0));
        if residual > tol {
            return Err(SpdcError::Convergence(format!(
                "collinear root residual |Δk|L = {residual:e} exceeds {tol:e}"
            )));
        }
        Ok(theta)
    }

    /// Longitudinal momentum residual `k_e cos α_e + k_o cos α_o − k_p` with
    /// the transverse balance `k_e sin α_e + k_o sin α_o = 0` imposed
    /// exactly. Returns `None` when no real `α_o` exists.
    fn longitudinal_residual(&self, cfg: &CrystalConfig<T>, lambda_e: T, lambda_o: T, alpha_e: T) -> Option<(T, T)> {
        let k_p = self.wavenumber(Branch::Extraordinary, cfg.pump_wavelength, cfg.theta_p).ok()?;
        let k_e = self.wavenumber(Branch::Extraordinary, lambda_e, cfg.theta_p - alpha_e).ok()?;
        let k_o = self.wavenumber(Branch::Ordinary, lambda_o, T::zero()).ok()?;
        let sin_o = -k_e * alpha_e.sin() / k_o;
        if sin_o.abs() > T::one() {
            return None;
        }
        let alpha_o = sin_o.asin();
        Some((k_e * alpha_e.cos() + k_o * alpha_o.cos() - k_p, alpha_o))
    }

    fn residual_or_floor(&self, cfg: &CrystalConfig<T>, lambda_e: T, lambda_o: T, alpha_e: T) -> T {
        self.longitudinal_residual(cfg, lambda_e, lambda_o, alpha_e)
            .map(|(r, _)| r)
            .unwrap_or(-T::max_value().sqrt())
    }

    /// Largest longitudinal residual over `α_e` and where it occurs. The
    /// momentum system has real solutions iff this is `>= 0`.
    pub fn peak_residual(&self, cfg: &CrystalConfig<T>, lambda_e: T, lambda_o: T) -> (T, T) {
        let w = T::lit(ANGLE_WINDOW);
        let tol = T::epsilon().sqrt();
        let (alpha, peak) = scan_maximize(|a| self.residual_or_floor(cfg, lambda_e, lambda_o, a), -w, w, 71, tol);
        (alpha, peak)
    }

    fn point(&self, cfg: &CrystalConfig<T>, lambda_e: T, lambda_o: T, alpha_e: T) -> Result<TuningPoint<T>> {
        let (_, alpha_o) = self
            .longitudinal_residual(cfg, lambda_e, lambda_o, alpha_e)
            .ok_or_else(|| SpdcError::Convergence(format!("no real idler angle at α_e = {alpha_e}")))?;
        let (ext_e, ext_o) = if cfg.refract_to_air {
            let n_e = self.crystal.index_extraordinary(lambda_e, cfg.theta_p - alpha_e)?;
            let n_o = self.crystal.index_ordinary(lambda_o)?;
            let se = n_e * alpha_e.sin();
            let so = n_o * alpha_o.sin();
            if se.abs() > T::one() || so.abs() > T::one() {
                return Err(SpdcError::Convergence(format!(
                    "emission at α_e = {alpha_e} rad is totally internally reflected"
                )));
            }
            (se.asin(), so.asin())
        } else {
            (alpha_e, alpha_o)
        };
        Ok(TuningPoint {
            lambda_signal: lambda_e,
            lambda_idler: lambda_o,
            alpha_e_internal: alpha_e,
            alpha_o_internal: alpha_o,
            alpha_e_external: ext_e,
            alpha_o_external: ext_o,
        })
    }

    /// Solves for every emission direction with the e-photon at `lambda_e`
    /// (the o-photon takes the energy-conserving partner wavelength).
    /// Returns zero, one (tangent) or two solutions in ascending `α_e`.
    pub fn solve_signal(&self, cfg: &CrystalConfig<T>, lambda_e: T) -> Result<Vec<TuningPoint<T>>> {
        let lambda_o = cfg.conjugate_wavelength(lambda_e);
        self.crystal.index_ordinary(lambda_e)?;
        self.crystal.index_ordinary(lambda_o)?;

        let (alpha_peak, peak) = self.peak_residual(cfg, lambda_e, lambda_o);
        let k_p = self.wavenumber(Branch::Extraordinary, cfg.pump_wavelength, cfg.theta_p)?;
        let tangent_tol = k_p * T::epsilon() * T::lit(64.0);
        if peak < -tangent_tol {
            return Ok(Vec::new());
        }
        if peak <= tangent_tol {
            return Ok(vec![self.point(cfg, lambda_e, lambda_o, alpha_peak)?]);
        }

        let w = T::lit(ANGLE_WINDOW);
        let f = |a: T| self.residual_or_floor(cfg, lambda_e, lambda_o, a);
        let mut roots = Vec::with_capacity(2);
        for (lo, hi) in [(-w, alpha_peak), (alpha_peak, w)] {
            match bracketed_root(f, lo, hi, RootOptions::default()) {
                Ok(a) => roots.push(a),
                Err(RootError::NoSignChange) => {
                    return Err(SpdcError::Convergence(format!(
                        "solution at λ = {lambda_e} µm lies outside the ±{ANGLE_WINDOW} rad search window"
                    )))
                }
                Err(RootError::MaxIterations) => {
                    return Err(SpdcError::Convergence(format!("emission-angle root at λ = {lambda_e} µm")))
                }
            }
        }
        roots.into_iter().map(|a| self.point(cfg, lambda_e, lambda_o, a)).collect()
    }

    /// Solutions with the o-photon at `lambda_o`, in ascending `α_o`.
    pub fn solve_idler(&self, cfg: &CrystalConfig<T>, lambda_o: T) -> Result<Vec<TuningPoint<T>>> {
        let mut pts = self.solve_signal(cfg, cfg.conjugate_wavelength(lambda_o))?;
        pts.sort_by(|a, b| a.alpha_o_internal.partial_cmp(&b.alpha_o_internal).unwrap());
        Ok(pts)
    }

    /// Emission-angle tuning curve over `n_points` wavelengths spanning
    /// `range` (µm, inclusive), both branches at every grid wavelength.
    pub fn tuning_curve(&self, cfg: &CrystalConfig<T>, range: (T, T), n_points: usize) -> Result<Vec<TuningSample<T>>> {
        cfg.validate()?;
        if n_points < 2 {
            return Err(SpdcError::InvalidParameter(format!(
                "tuning curve needs at least 2 points, got {n_points}"
            )));
        }
        let (lo, hi) = range;
        if !(lo < hi) {
            return Err(SpdcError::InvalidParameter(format!("empty wavelength range [{lo}, {hi}]")));
        }
        for l in [lo, hi] {
            if !(l > cfg.pump_wavelength) {
                return Err(SpdcError::InvalidParameter(format!(
                    "wavelength {l} µm is not longer than the pump"
                )));
            }
            self.crystal.index_ordinary(l)?;
            self.crystal.index_ordinary(cfg.conjugate_wavelength(l))?;
        }
        let step = (hi - lo) / T::from_count(n_points - 1);
        Ok((0..n_points)
            .into_par_iter()
            .map(|i| {
                let wavelength = if i + 1 == n_points { hi } else { lo + step * T::from_count(i) };
                TuningSample {
                    wavelength,
                    e_branch: self.solve_signal(cfg, wavelength),
                    o_branch: self.solve_idler(cfg, wavelength),
                }
            })
            .collect())
    }

    /// Pump angle at which both branches of the degenerate tuning curve are
    /// tangent to `lambda_deg`: the momentum system at degeneracy has a
    /// double root.
    pub fn beamlike_angle(&self, pump_wavelength: T, lambda_deg: T) -> Result<T> {
        let base = CrystalConfig {
            pump_wavelength,
            theta_p: T::lit(48.0).rad(),
            length_mm: T::one(),
            refract_to_air: true,
        };
        base.validate()?;
        self.crystal.index_ordinary(lambda_deg)?;
        let lambda_partner = base.conjugate_wavelength(lambda_deg);
        self.crystal.index_ordinary(lambda_partner)?;
        let peak = |theta: T| {
            let cfg = CrystalConfig { theta_p: theta, ..base };
            self.peak_residual(&cfg, lambda_deg, lambda_partner).1
        };
        bracketed_root(peak, T::lit(40.0).rad(), T::lit(55.0).rad(), RootOptions::default()).map_err(|e| match e {
            RootError::NoSignChange => SpdcError::NoPhaseMatch(format!(
                "no tangency angle in [40°, 55°] for λ_p = {pump_wavelength} µm, λ = {lambda_deg} µm"
            )),
            RootError::MaxIterations => SpdcError::Convergence("beamlike tangency angle".into()),
        })
    }

    /// Wavelength extremum of one tuning-curve branch: the wavelength at
    /// which that branch's two emission directions merge. Searched within
    /// `±half_width` µm of the degenerate wavelength.
    pub fn branch_extremum(&self, cfg: &CrystalConfig<T>, branch: Branch, half_width: T) -> Result<T> {
        let ld = cfg.degenerate_wavelength();
        let peak = |lambda: T| {
            let (le, lo) = match branch {
                Branch::Extraordinary => (lambda, cfg.conjugate_wavelength(lambda)),
                Branch::Ordinary => (cfg.conjugate_wavelength(lambda), lambda),
            };
            self.peak_residual(cfg, le, lo).1
        };
        bracketed_root(peak, ld - half_width, ld + half_width, RootOptions::default()).map_err(|e| match e {
            RootError::NoSignChange => SpdcError::NoPhaseMatch(format!(
                "{branch:?} branch has no wavelength extremum within ±{half_width} µm of {ld} µm"
            )),
            RootError::MaxIterations => SpdcError::Convergence("branch extremum".into()),
        })
    }

    /// Wavelength of the e-photon emitted at internal angle `alpha_e`,
    /// searched within `bracket` (µm).
    pub fn signal_wavelength_at(&self, cfg: &CrystalConfig<T>, alpha_e: T, bracket: (T, T)) -> Result<T> {
        let f = |lambda: T| {
            self.longitudinal_residual(cfg, lambda, cfg.conjugate_wavelength(lambda), alpha_e)
                .map(|(r, _)| r)
                .unwrap_or(T::nan())
        };
        bracketed_root(f, bracket.0, bracket.1, RootOptions::default()).map_err(|_| {
            SpdcError::NoPhaseMatch(format!("no emission wavelength at α_e = {alpha_e} rad"))
        })
    }

    /// Group-velocity mismatch between the o- and e-photons at `lambda_deg`.
    pub fn walkoff(&self, cfg: &CrystalConfig<T>, lambda_deg: T) -> Result<WalkoffResult<T>> {
        cfg.validate()?;
        let c = T::lit(SPEED_OF_LIGHT_UM_PER_PS);
        let per_mm = T::lit(1000.0) / c;
        let ng_o = self.crystal.group_index(Branch::Ordinary, lambda_deg, cfg.theta_p)?;
        let ng_e = self.crystal.group_index(Branch::Extraordinary, lambda_deg, cfg.theta_p)?;
        let ng_p = self.crystal.group_index(Branch::Extraordinary, cfg.pump_wavelength, cfg.theta_p)?;
        let d = (ng_o - ng_e) * per_mm;
        if !(d > T::zero()) {
            return Err(SpdcError::InvalidParameter(format!(
                "o-ray is not the slow ray (D = {d} ps/mm)"
            )));
        }
        let dl = d * cfg.length_mm;
        Ok(WalkoffResult {
            d_ps_per_mm: d,
            dl_ps: dl,
            path_um: c * dl,
            length_mm: cfg.length_mm,
            delta_e_ps_per_mm: (ng_e - ng_p) * per_mm,
            delta_o_ps_per_mm: (ng_o - ng_p) * per_mm,
            wavelength_um: lambda_deg,
        })
    }
}
