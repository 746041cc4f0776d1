//! Two-photon state engine over path ⊗ polarization modes.
//!
//! The state is stored as a photon-labelled amplitude `ψ[m, n]`: photon A
//! (the e-ray photon) in mode `m`, photon B (the o-ray photon) in mode `n`.
//! Spectral degrees of freedom are folded into one real scalar, the
//! exchange overlap `V = ∫ f(ω₁, ω₂) f*(ω₂, ω₁)`, which weights every
//! interference term between `ψ[m, n]` and `ψ[n, m]`. At `V = 1` the
//! photons are indistinguishable and the bosonic amplitude
//! `(ψ + ψᵀ)/√2` describes the state completely.
//!
//! Linear optics maps `ψ → U ψ Uᵀ`, which preserves both `Σ|ψ|²` and the
//! exchange term, so every passive element keeps the norm at one.

mod density;
mod schemes;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::scalar::Real;

pub use density::{postselected_polarization_state, BellState, PolarizationDensityMatrix};
pub use schemes::{
    hom_dip_state, pbs_combined_state, qutrit_state, singlet_state, two_crystal_bell, QutritState,
    TwoCrystalReport, TwoCrystalSettings,
};

/// Number of addressable spatial paths (labels `0..MAX_PATHS`).
pub const MAX_PATHS: usize = 8;
const MODES: usize = 2 * MAX_PATHS;
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    fn offset(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub path: u8,
    pub pol: Pol,
}

impl ModeLabel {
    pub const fn new(path: u8, pol: Pol) -> Self {
        ModeLabel { path, pol }
    }

    fn index(self) -> usize {
        2 * self.path as usize + self.pol.offset()
    }

    fn from_index(i: usize) -> Self {
        ModeLabel {
            path: (i / 2) as u8,
            pol: if i % 2 == 0 { Pol::H } else { Pol::V },
        }
    }
}

/// Two photons distributed over path/polarization modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonState<T> {
    /// Row-major `MODES × MODES` photon-labelled amplitude.
    psi: Vec<Complex<T>>,
    /// Bit `p` set when path `p` is part of the circuit.
    paths: u16,
    overlap: T,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> TwoPhotonState<T> {
    /// Photon A in `(1, H)`, photon B in `(2, V)`, with unit overlap.
    pub fn source() -> Self {
        Self::from_terms(&[(ModeLabel::new(1, Pol::H), ModeLabel::new(2, Pol::V), Complex::new(T::one(), T::zero()))], T::one())
            .expect("source state is valid")
    }

    /// Builds a normalized state from labelled terms `(mode of A, mode of B, amplitude)`.
    pub fn from_terms(terms: &[(ModeLabel, ModeLabel, Complex<T>)], overlap: T) -> Result<Self> {
        check_overlap(overlap)?;
        let mut state = TwoPhotonState {
            psi: vec![czero(); MODES * MODES],
            paths: 0,
            overlap,
        };
        for &(a, b, amp) in terms {
            for m in [a, b] {
                if m.path as usize >= MAX_PATHS {
                    return Err(SpdcError::UnknownPath(m.path));
                }
                state.paths |= 1 << m.path;
            }
            let k = a.index() * MODES + b.index();
            state.psi[k] = state.psi[k] + amp;
        }
        let norm = state.norm();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(SpdcError::InvalidParameter("state has zero norm".into()));
        }
        state.scale(T::one() / norm.sqrt());
        Ok(state)
    }

    /// Same amplitudes with a different exchange overlap, renormalized.
    pub fn with_overlap(&self, overlap: T) -> Result<Self> {
        check_overlap(overlap)?;
        let mut out = self.clone();
        out.overlap = overlap;
        let norm = out.norm();
        if !(norm > T::zero()) {
            return Err(SpdcError::InvalidParameter(format!(
                "state has zero norm at overlap {overlap}"
            )));
        }
        out.scale(T::one() / norm.sqrt());
        Ok(out)
    }

    pub fn overlap(&self) -> T {
        self.overlap
    }

    /// Paths currently part of the circuit, ascending.
    pub fn paths(&self) -> Vec<u8> {
        (0..MAX_PATHS as u8).filter(|p| self.has_path(*p)).collect()
    }

    pub fn has_path(&self, path: u8) -> bool {
        (path as usize) < MAX_PATHS && self.paths & (1 << path) != 0
    }

    fn at(&self, a: ModeLabel, b: ModeLabel) -> Complex<T> {
        self.psi[a.index() * MODES + b.index()]
    }

    /// Photon-labelled amplitude: photon A in `a`, photon B in `b`.
    pub fn labelled_amplitude(&self, a: ModeLabel, b: ModeLabel) -> Complex<T> {
        if a.path as usize >= MAX_PATHS || b.path as usize >= MAX_PATHS {
            return czero();
        }
        self.at(a, b)
    }

    /// Exchange-symmetric amplitude `(ψ[m,n] + ψ[n,m])/√2`.
    ///
    /// For `m = n` this is the `|2⟩` Fock amplitude; for `m ≠ n` the
    /// `|1,1⟩` amplitude is `√2` times it.
    pub fn amplitude(&self, m: ModeLabel, n: ModeLabel) -> Complex<T> {
        (self.labelled_amplitude(m, n) + self.labelled_amplitude(n, m)) / T::SQRT_2()
    }

    /// Probability of detecting one photon in `m` and one in `n`
    /// (both in `m` when `m = n`), including the overlap-weighted
    /// interference between the two photon orderings.
    pub fn probability(&self, m: ModeLabel, n: ModeLabel) -> T {
        let x = self.labelled_amplitude(m, n);
        if m == n {
            return x.norm_sqr() * (T::one() + self.overlap);
        }
        let y = self.labelled_amplitude(n, m);
        x.norm_sqr() + y.norm_sqr() + T::lit(2.0) * self.overlap * (x * y.conj()).re
    }

    /// `Σ|ψ|² + V·Re Σ ψ[m,n] ψ*[n,m]`: total detection probability.
    pub fn norm(&self) -> T {
        let mut direct = T::zero();
        let mut exchange = T::zero();
        for i in 0..MODES {
            for j in 0..MODES {
                let x = self.psi[i * MODES + j];
                direct = direct + x.norm_sqr();
                exchange = exchange + (x * self.psi[j * MODES + i].conj()).re;
            }
        }
        direct + self.overlap * exchange
    }

    fn scale(&mut self, s: T) {
        for x in &mut self.psi {
            *x = *x * s;
        }
    }

    fn require_path(&self, path: u8) -> Result<()> {
        if self.has_path(path) {
            Ok(())
        } else {
            Err(SpdcError::UnknownPath(path))
        }
    }

    /// Applies a single-photon mode map given as `(input mode, [(output mode, coefficient)])`.
    /// Modes not listed are left unchanged.
    fn transform(&self, map: &[(ModeLabel, Vec<(ModeLabel, Complex<T>)>)], paths: u16) -> Self {
        let mut u = vec![czero::<T>(); MODES * MODES];
        for i in 0..MODES {
            u[i * MODES + i] = Complex::new(T::one(), T::zero());
        }
        for (input, outputs) in map {
            let col = input.index();
            for k in 0..MODES {
                u[k * MODES + col] = czero();
            }
            for &(out, c) in outputs {
                let k = out.index() * MODES + col;
                u[k] = u[k] + c;
            }
        }
        // ψ' = U ψ Uᵀ
        let mut tmp = vec![czero::<T>(); MODES * MODES];
        for k in 0..MODES {
            for j in 0..MODES {
                let mut acc = czero();
                for i in 0..MODES {
                    let ui = u[k * MODES + i];
                    if ui != czero() {
                        acc = acc + ui * self.psi[i * MODES + j];
                    }
                }
                tmp[k * MODES + j] = acc;
            }
        }
        let mut psi = vec![czero::<T>(); MODES * MODES];
        for k in 0..MODES {
            for l in 0..MODES {
                let mut acc = czero();
                for j in 0..MODES {
                    let ul = u[l * MODES + j];
                    if ul != czero() {
                        acc = acc + tmp[k * MODES + j] * ul;
                    }
                }
                psi[k * MODES + l] = acc;
            }
        }
        let out = TwoPhotonState {
            psi,
            paths,
            overlap: self.overlap,
        };
        debug_assert!(
            (out.norm() - T::one()).abs() < T::lit(1e3 * NORM_TOL).max(T::epsilon() * T::lit(64.0)),
            "passive element changed the norm to {}",
            out.norm()
        );
        out
    }

    /// Half-wave plate with fast axis at `angle` (radians) on `path`:
    /// `H → cos2h H + sin2h V`, `V → sin2h H − cos2h V`.
    pub fn apply_hwp(&self, path: u8, angle: T) -> Result<Self> {
        self.require_path(path)?;
        let c = Complex::new((T::lit(2.0) * angle).cos(), T::zero());
        let s = Complex::new((T::lit(2.0) * angle).sin(), T::zero());
        let h = ModeLabel::new(path, Pol::H);
        let v = ModeLabel::new(path, Pol::V);
        Ok(self.transform(&[(h, vec![(h, c), (v, s)]), (v, vec![(h, s), (v, -c)])], self.paths))
    }

    /// Phase `e^{iφ}` on one polarization of one path.
    pub fn apply_phase(&self, path: u8, pol: Pol, phase: T) -> Result<Self> {
        self.require_path(path)?;
        let m = ModeLabel::new(path, pol);
        Ok(self.transform(&[(m, vec![(m, Complex::from_polar(T::one(), phase))])], self.paths))
    }

    fn route_outputs(&self, a: u8, b: u8, c: u8, d: u8) -> Result<u16> {
        self.require_path(a)?;
        self.require_path(b)?;
        if a == b {
            return Err(SpdcError::InvalidParameter(format!("beamsplitter inputs must differ (both {a})")));
        }
        if c == d {
            return Err(SpdcError::PathCollision(c));
        }
        let remaining = self.paths & !(1 << a) & !(1 << b);
        for p in [c, d] {
            if p as usize >= MAX_PATHS {
                return Err(SpdcError::UnknownPath(p));
            }
            if remaining & (1 << p) != 0 {
                return Err(SpdcError::PathCollision(p));
            }
        }
        Ok(remaining | (1 << c) | (1 << d))
    }

    /// 50/50 beamsplitter: `a → (c + d)/√2`, `b → (c − d)/√2` for both polarizations.
    pub fn apply_bs(&self, a: u8, b: u8, c: u8, d: u8) -> Result<Self> {
        let paths = self.route_outputs(a, b, c, d)?;
        let r = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        let map: Vec<_> = Pol::BOTH
            .iter()
            .flat_map(|&p| {
                [
                    (ModeLabel::new(a, p), vec![(ModeLabel::new(c, p), r), (ModeLabel::new(d, p), r)]),
                    (ModeLabel::new(b, p), vec![(ModeLabel::new(c, p), r), (ModeLabel::new(d, p), -r)]),
                ]
            })
            .collect();
        Ok(self.transform(&map, paths))
    }

    /// Polarizing beamsplitter: H transmits (`a → c`, `b → d`), V reflects (`a → d`, `b → c`).
    pub fn apply_pbs(&self, a: u8, b: u8, c: u8, d: u8) -> Result<Self> {
        let paths = self.route_outputs(a, b, c, d)?;
        let one = Complex::new(T::one(), T::zero());
        let map = [
            (ModeLabel::new(a, Pol::H), vec![(ModeLabel::new(c, Pol::H), one)]),
            (ModeLabel::new(a, Pol::V), vec![(ModeLabel::new(d, Pol::V), one)]),
            (ModeLabel::new(b, Pol::H), vec![(ModeLabel::new(d, Pol::H), one)]),
            (ModeLabel::new(b, Pol::V), vec![(ModeLabel::new(c, Pol::V), one)]),
        ];
        Ok(self.transform(&map, paths))
    }

    /// Partially transmitting element with amplitude transmission `t` on
    /// `path`. Returns the renormalized surviving state and the probability
    /// that at least one photon was lost.
    pub fn apply_attenuator(&self, path: u8, t: T) -> Result<(Self, T)> {
        self.require_path(path)?;
        if !(t > T::zero() && t <= T::one()) {
            return Err(SpdcError::InvalidParameter(format!("amplitude transmission must be in (0, 1], got {t}")));
        }
        let mut out = self.clone();
        for i in 0..MODES {
            for j in 0..MODES {
                let hits = usize::from(ModeLabel::from_index(i).path == path)
                    + usize::from(ModeLabel::from_index(j).path == path);
                let k = i * MODES + j;
                out.psi[k] = out.psi[k] * t.powi(hits as i32);
            }
        }
        let kept = out.norm();
        out.scale(T::one() / kept.sqrt());
        Ok((out, T::one() - kept))
    }

    fn sector_vectors(&self, c: u8, d: u8) -> Result<([Complex<T>; 4], [Complex<T>; 4])> {
        self.require_path(c)?;
        self.require_path(d)?;
        if c == d {
            return Err(SpdcError::InvalidParameter(format!("coincidence needs two distinct paths (got {c} twice)")));
        }
        let mut x = [czero(); 4];
        let mut y = [czero(); 4];
        for (pi, &p) in Pol::BOTH.iter().enumerate() {
            for (qi, &q) in Pol::BOTH.iter().enumerate() {
                let mc = ModeLabel::new(c, p);
                let md = ModeLabel::new(d, q);
                x[2 * pi + qi] = self.at(mc, md);
                y[2 * pi + qi] = self.at(md, mc);
            }
        }
        Ok((x, y))
    }

    /// Unnormalized polarization density matrix of the sector with one
    /// photon in `c` and one in `d`, basis `{HH, HV, VH, VV}` (pol in `c`
    /// first). Its trace is the sector probability.
    pub(crate) fn sector_matrix(&self, c: u8, d: u8) -> Result<[[Complex<T>; 4]; 4]> {
        let (x, y) = self.sector_vectors(c, d)?;
        let v = self.overlap;
        let mut rho = [[czero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                rho[i][j] = x[i] * x[j].conj() + y[i] * y[j].conj() + (x[i] * y[j].conj() + y[i] * x[j].conj()) * v;
            }
        }
        Ok(rho)
    }

    /// Probability of one photon in each of `c` and `d`.
    pub fn coincidence_sector_probability(&self, c: u8, d: u8) -> Result<T> {
        let rho = self.sector_matrix(c, d)?;
        Ok((0..4).fold(T::zero(), |s, i| s + rho[i][i].re))
    }

    /// Probability that one photon passes a linear analyzer at `theta_c`
    /// in path `c` and one passes an analyzer at `theta_d` in path `d`.
    pub fn coincidence_probability(&self, c: u8, d: u8, theta_c: T, theta_d: T) -> Result<T> {
        let rho = self.sector_matrix(c, d)?;
        let e = analyzer_pair(theta_c, theta_d);
        let mut p = czero::<T>();
        for i in 0..4 {
            for j in 0..4 {
                p = p + e[i] * rho[i][j] * e[j];
            }
        }
        Ok(p.re.max(T::zero()))
    }

    /// Conditions on one photon in each of `c` and `d`. Returns the
    /// renormalized conditional state and the sector probability.
    pub fn postselect_coincidence(&self, c: u8, d: u8) -> Result<(Self, T)> {
        let p = self.coincidence_sector_probability(c, d)?;
        if !(p > T::epsilon()) {
            return Err(SpdcError::InvalidParameter(format!("no coincidences between paths {c} and {d}")));
        }
        let mut out = self.clone();
        for i in 0..MODES {
            for j in 0..MODES {
                let pa = ModeLabel::from_index(i).path;
                let pb = ModeLabel::from_index(j).path;
                if !((pa == c && pb == d) || (pa == d && pb == c)) {
                    out.psi[i * MODES + j] = czero();
                }
            }
        }
        out.scale(T::one() / p.sqrt());
        Ok((out, p))
    }

    /// Normalized polarization state of the `(c, d)` coincidence sector and its probability.
    pub fn polarization_density_matrix(&self, c: u8, d: u8) -> Result<(PolarizationDensityMatrix<T>, T)> {
        let rho = self.sector_matrix(c, d)?;
        let p = (0..4).fold(T::zero(), |s, i| s + rho[i][i].re);
        if !(p > T::epsilon()) {
            return Err(SpdcError::InvalidParameter(format!("no coincidences between paths {c} and {d}")));
        }
        let mut out = rho;
        for row in &mut out {
            for x in row.iter_mut() {
                *x = *x / p;
            }
        }
        Ok((PolarizationDensityMatrix::from_elements(out), p))
    }

    /// Nonzero bosonic amplitudes `(m, n, amplitude)` with `m ≤ n`.
    pub fn bosonic_terms(&self, tol: T) -> Vec<(ModeLabel, ModeLabel, Complex<T>)> {
        let mut out = Vec::new();
        for i in 0..MODES {
            for j in i..MODES {
                let (m, n) = (ModeLabel::from_index(i), ModeLabel::from_index(j));
                let a = self.amplitude(m, n);
                if a.norm() > tol {
                    out.push((m, n, a));
                }
            }
        }
        out
    }
}

fn check_overlap<T: Real>(v: T) -> Result<()> {
    if (T::zero()..=T::one()).contains(&v) {
        Ok(())
    } else {
        Err(SpdcError::InvalidParameter(format!("overlap must be in [0, 1], got {v}")))
    }
}

/// `(cosθc H + sinθc V) ⊗ (cosθd H + sinθd V)` in the `{HH, HV, VH, VV}` basis.
pub(crate) fn analyzer_pair<T: Real>(theta_c: T, theta_d: T) -> [Complex<T>; 4] {
    let (sc, cc) = theta_c.sin_cos();
    let (sd, cd) = theta_d.sin_cos();
    [cc * cd, cc * sd, sc * cd, sc * sd].map(|x| Complex::new(x, T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn m(path: u8, pol: Pol) -> ModeLabel {
        ModeLabel::new(path, pol)
    }

    #[test]
    fn source_is_normalized_single_term() {
        let s = TwoPhotonState::<f64>::source();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.labelled_amplitude(m(1, Pol::H), m(2, Pol::V)).re, 1.0);
        assert_eq!(s.bosonic_terms(1e-15).len(), 1);
        assert_eq!(s.paths(), vec![1, 2]);
    }

    #[test]
    fn hwp_45_flips_h_to_v() {
        let s = TwoPhotonState::<f64>::source().apply_hwp(1, FRAC_PI_4).unwrap();
        assert!((s.labelled_amplitude(m(1, Pol::V), m(2, Pol::V)).re - 1.0).abs() < 1e-15);
        assert!(s.labelled_amplitude(m(1, Pol::H), m(2, Pol::V)).norm() < 1e-15);
    }

    #[test]
    fn hwp_zero_negates_v_only() {
        let s = TwoPhotonState::<f64>::source().apply_hwp(2, 0.0).unwrap();
        assert_eq!(s.labelled_amplitude(m(1, Pol::H), m(2, Pol::V)).re, -1.0);
    }

    #[test]
    fn hwp_is_an_involution() {
        let s = TwoPhotonState::<f64>::source().with_overlap(0.3).unwrap();
        let t = s.apply_hwp(1, 0.37).unwrap().apply_hwp(1, 0.37).unwrap();
        for (a, b) in s.psi.iter().zip(&t.psi) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_paths_and_collisions() {
        let s = TwoPhotonState::<f64>::source();
        assert!(matches!(s.apply_hwp(5, 0.1), Err(SpdcError::UnknownPath(5))));
        assert!(matches!(s.apply_bs(1, 3, 4, 5), Err(SpdcError::UnknownPath(3))));
        assert!(matches!(s.apply_bs(1, 2, 3, 3), Err(SpdcError::PathCollision(3))));
        let three = TwoPhotonState::from_terms(
            &[(m(1, Pol::H), m(2, Pol::V), Complex::new(1.0, 0.0)), (m(3, Pol::H), m(2, Pol::V), Complex::new(1.0, 0.0))],
            1.0,
        )
        .unwrap();
        assert!(matches!(three.apply_bs(1, 2, 3, 4), Err(SpdcError::PathCollision(3))));
        // Outputs may reuse the input labels.
        assert!(s.apply_bs(1, 2, 1, 2).is_ok());
    }

    #[test]
    fn distinguishable_photons_split_classically() {
        let s = TwoPhotonState::<f64>::source()
            .with_overlap(0.0)
            .unwrap()
            .apply_hwp(1, FRAC_PI_4)
            .unwrap()
            .apply_bs(1, 2, 3, 4)
            .unwrap();
        assert!((s.coincidence_sector_probability(3, 4).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn attenuator_reports_loss() {
        let s = TwoPhotonState::<f64>::source();
        let (t, lost) = s.apply_attenuator(1, 0.5).unwrap();
        assert!((lost - 0.75).abs() < 1e-15);
        assert!((t.norm() - 1.0).abs() < 1e-15);
        assert!(s.apply_attenuator(1, 0.0).is_err());
    }

    #[test]
    fn pbs_twice_with_swapped_ports_restores_rates() {
        let s = TwoPhotonState::<f64>::source().apply_hwp(1, 0.3).unwrap();
        let t = s.apply_pbs(1, 2, 3, 4).unwrap().apply_pbs(3, 4, 1, 2).unwrap();
        for a in Pol::BOTH {
            for b in Pol::BOTH {
                let p = s.probability(m(1, a), m(2, b));
                let q = t.probability(m(1, a), m(2, b));
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn overlap_outside_unit_interval_rejected() {
        assert!(TwoPhotonState::<f64>::source().with_overlap(1.5).is_err());
        assert!(TwoPhotonState::<f64>::source().with_overlap(-0.1).is_err());
    }
}
