use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::scalar::Real;

use super::{ModeLabel, Pol, PolarizationDensityMatrix, TwoPhotonState, MAX_PATHS};

/// Beamsplitter / PBS output ports used by the canned circuits.
pub const PORT_C: u8 = 3;
pub const PORT_D: u8 = 4;

/// Source → half-wave plate on the e-photon path → 50/50 beamsplitter into ports 3 and 4.
pub fn hom_dip_state<T: Real>(hwp_angle: T, overlap: T) -> Result<TwoPhotonState<T>> {
    TwoPhotonState::source()
        .with_overlap(overlap)?
        .apply_hwp(1, hwp_angle)?
        .apply_bs(1, 2, PORT_C, PORT_D)
}

/// Plate at 0° and coincidence postselection on ports 3 and 4. Returns the
/// conditional state and the coincidence probability.
pub fn singlet_state<T: Real>(overlap: T) -> Result<(TwoPhotonState<T>, T)> {
    hom_dip_state(T::zero(), overlap)?.postselect_coincidence(PORT_C, PORT_D)
}

/// Source photons combined on a polarizing beamsplitter so both leave
/// through port 3, optionally followed by a half-wave plate on that port.
pub fn pbs_combined_state<T: Real>(hwp_after: Option<T>) -> Result<TwoPhotonState<T>> {
    let s = TwoPhotonState::source().apply_pbs(1, 2, PORT_C, PORT_D)?;
    match hwp_after {
        Some(angle) => s.apply_hwp(PORT_C, angle),
        None => Ok(s),
    }
}

/// Two photons sharing one spatial path, in the Fock basis `{|2H⟩, |1H 1V⟩, |2V⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritState<T> {
    pub path: u8,
    pub two_h: Complex<T>,
    pub hv: Complex<T>,
    pub two_v: Complex<T>,
}

impl<T: Real> QutritState<T> {
    pub fn weights(&self) -> [T; 3] {
        [self.two_h.norm_sqr(), self.hv.norm_sqr(), self.two_v.norm_sqr()]
    }
}

/// Qutrit amplitudes of a state whose photons occupy a single path.
pub fn qutrit_state<T: Real>(state: &TwoPhotonState<T>) -> Result<QutritState<T>> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let mut occupied = Vec::new();
    for p in 0..MAX_PATHS as u8 {
        let mass = Pol::BOTH.iter().fold(T::zero(), |s, &a| {
            (0..MAX_PATHS as u8).fold(s, |s, q| {
                Pol::BOTH.iter().fold(s, |s, &b| {
                    let (m, n) = (ModeLabel::new(p, a), ModeLabel::new(q, b));
                    s + state.labelled_amplitude(m, n).norm_sqr() + state.labelled_amplitude(n, m).norm_sqr()
                })
            })
        });
        if mass > tol {
            occupied.push(p);
        }
    }
    match occupied.as_slice() {
        [p] => {
            let h = ModeLabel::new(*p, Pol::H);
            let v = ModeLabel::new(*p, Pol::V);
            let two_h = state.amplitude(h, h);
            let hv = state.amplitude(h, v) * T::SQRT_2();
            let two_v = state.amplitude(v, v);
            let n = (two_h.norm_sqr() + hv.norm_sqr() + two_v.norm_sqr()).sqrt();
            if !(n > T::zero()) {
                return Err(SpdcError::InvalidParameter("state has no two-photon amplitude".into()));
            }
            Ok(QutritState {
                path: *p,
                two_h: two_h / n,
                hv: hv / n,
                two_v: two_v / n,
            })
        }
        [p, q, ..] => Err(SpdcError::DistinctPaths(*p, *q)),
        [] => Err(SpdcError::InvalidParameter("state is empty".into())),
    }
}

/// Settings of the two-crystal source: crystal 1 emits `|H⟩₁|V⟩₂`, crystal 2
/// emits `|V⟩₁|H⟩₂`; `t1`, `t2` are the amplitude transmissions of the
/// partial mirrors acting on each crystal's pair, `phase` the compensator
/// phase on crystal 2's term and `hwp_after` an optional plate on path 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCrystalSettings<T> {
    pub phase: T,
    pub hwp_after: Option<T>,
    pub t1: T,
    pub t2: T,
    /// Pump polarization angle from the crystals' common extraordinary axis.
    pub pump_angle: T,
}

impl<T: Real> Default for TwoCrystalSettings<T> {
    fn default() -> Self {
        TwoCrystalSettings {
            phase: T::PI(),
            hwp_after: None,
            t1: T::one(),
            t2: T::one(),
            pump_angle: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCrystalReport<T> {
    pub state: TwoPhotonState<T>,
    pub density: PolarizationDensityMatrix<T>,
    /// Fidelities with `[φ+, φ−, ψ+, ψ−]`.
    pub fidelities: [T; 4],
    pub concurrence: T,
    /// Probability weights of the crystal-1 and crystal-2 terms.
    pub weights: [T; 2],
    /// Probability that a pair was removed by the partial mirrors.
    pub discarded_probability: T,
    /// Pair rate relative to a pump polarized along the crystal axis.
    pub pair_rate_factor: T,
}

/// Postselection-free Bell-state source built from two type-II crystals.
pub fn two_crystal_bell<T: Real>(settings: &TwoCrystalSettings<T>) -> Result<TwoCrystalReport<T>> {
    let TwoCrystalSettings {
        phase,
        hwp_after,
        t1,
        t2,
        pump_angle,
    } = *settings;
    for (name, t) in [("t1", t1), ("t2", t2)] {
        if !(t > T::zero() && t <= T::one()) {
            return Err(SpdcError::InvalidParameter(format!("{name} must be in (0, 1], got {t}")));
        }
    }
    if !phase.is_finite() || !pump_angle.is_finite() {
        return Err(SpdcError::InvalidParameter("phase and pump angle must be finite".into()));
    }
    // Both crystals share the same axis, so the pump projection scales their
    // amplitudes equally and drops out of the normalized state.
    let coupling = pump_angle.cos();
    if coupling.abs() < T::epsilon().sqrt() {
        return Err(SpdcError::InvalidParameter(
            "pump polarization is orthogonal to the crystal axis; no pairs are generated".into(),
        ));
    }
    let a1 = Complex::new(t1 * coupling, T::zero());
    let a2 = Complex::from_polar(t2 * coupling, phase);
    let mut state = TwoPhotonState::from_terms(
        &[
            (ModeLabel::new(1, Pol::H), ModeLabel::new(2, Pol::V), a1),
            (ModeLabel::new(2, Pol::H), ModeLabel::new(1, Pol::V), a2),
        ],
        T::one(),
    )?;
    if let Some(h) = hwp_after {
        state = state.apply_hwp(1, h)?;
    }
    let (density, _) = state.polarization_density_matrix(1, 2)?;
    let total = a1.norm_sqr() + a2.norm_sqr();
    Ok(TwoCrystalReport {
        fidelities: density.bell_fidelities(),
        concurrence: density.concurrence(),
        density,
        state,
        weights: [a1.norm_sqr() / total, a2.norm_sqr() / total],
        discarded_probability: T::one() - (t1 * t1 + t2 * t2) / T::lit(2.0),
        pair_rate_factor: coupling * coupling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polstate::BellState;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn number_path_state() {
        let s = hom_dip_state(FRAC_PI_4, 1.0_f64).unwrap();
        let c = ModeLabel::new(PORT_C, Pol::V);
        let d = ModeLabel::new(PORT_D, Pol::V);
        assert!(s.coincidence_sector_probability(PORT_C, PORT_D).unwrap() < 1e-12);
        assert!((s.amplitude(c, c).norm() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((s.amplitude(d, d).norm() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(s.amplitude(c, d).norm() < 1e-12);
        assert!((s.probability(c, c) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singlet_sector() {
        let (s, p) = singlet_state(1.0_f64).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let (rho, _) = s.polarization_density_matrix(PORT_C, PORT_D).unwrap();
        assert!((rho.fidelity(BellState::PsiMinus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pbs_gives_hv_qutrit() {
        let q = qutrit_state(&pbs_combined_state::<f64>(None).unwrap()).unwrap();
        assert_eq!(q.path, PORT_C);
        assert!((q.hv.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qutrit_after_plate_matches_hand_expansion() {
        // a†_H a†_V → (a†_H + a†_V)(a†_H − a†_V)/2 = (a†_H² − a†_V²)/2,
        // and a†² |0⟩ = √2 |2⟩, so the amplitudes are (1/√2, 0, −1/√2).
        let q = qutrit_state(&pbs_combined_state(Some(FRAC_PI_8)).unwrap()).unwrap();
        let r = 0.5_f64.sqrt();
        assert!((q.two_h.re - r).abs() < 1e-12);
        assert!(q.hv.norm() < 1e-12);
        assert!((q.two_v.re + r).abs() < 1e-12);
    }

    #[test]
    fn qutrit_rejects_split_photons() {
        let s = TwoPhotonState::<f64>::source();
        assert!(matches!(qutrit_state(&s), Err(SpdcError::DistinctPaths(1, 2))));
    }

    #[test]
    fn four_bell_states() {
        let cases = [
            (0.0, None, BellState::PsiPlus),
            (PI, None, BellState::PsiMinus),
            (0.0, Some(FRAC_PI_4), BellState::PhiPlus),
            (PI, Some(FRAC_PI_4), BellState::PhiMinus),
        ];
        for (phase, hwp_after, bell) in cases {
            let r = two_crystal_bell(&TwoCrystalSettings {
                phase,
                hwp_after,
                ..Default::default()
            })
            .unwrap();
            assert!(r.density.fidelity(bell) >= 1.0 - 1e-12, "{bell:?}: {:?}", r.fidelities);
        }
    }

    #[test]
    fn unbalanced_mirrors() {
        let r = two_crystal_bell(&TwoCrystalSettings {
            t2: 0.5_f64.sqrt(),
            ..Default::default()
        })
        .unwrap();
        assert!((r.weights[0] / r.weights[1] - 2.0).abs() < 1e-12);
        assert!((r.concurrence - 2.0 * 2.0_f64.sqrt() / 3.0).abs() < 1e-7);
        assert!((r.discarded_probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pump_rotation_leaves_weights_unchanged() {
        let base = two_crystal_bell(&TwoCrystalSettings::<f64>::default()).unwrap();
        for angle in [0.2, 0.7, 1.3] {
            let r = two_crystal_bell(&TwoCrystalSettings {
                pump_angle: angle,
                ..Default::default()
            })
            .unwrap();
            assert!((r.weights[0] - base.weights[0]).abs() < 1e-12);
            assert!((r.fidelities[3] - base.fidelities[3]).abs() < 1e-12);
        }
        assert!(two_crystal_bell(&TwoCrystalSettings {
            t1: 0.0_f64,
            ..Default::default()
        })
        .is_err());
    }
}
