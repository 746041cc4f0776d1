use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::numerics::symmetric_eigen;
use crate::scalar::Real;

type Mat4<T> = [[Complex<T>; 4]; 4];

/// Two-qubit polarization state in the basis `{HH, HV, VH, VV}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationDensityMatrix<T> {
    pub elements: Mat4<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    pub fn vector<T: Real>(self) -> [Complex<T>; 4] {
        let r = T::FRAC_1_SQRT_2();
        let z = T::zero();
        let v = match self {
            BellState::PhiPlus => [r, z, z, r],
            BellState::PhiMinus => [r, z, z, -r],
            BellState::PsiPlus => [z, r, r, z],
            BellState::PsiMinus => [z, r, -r, z],
        };
        v.map(|x| Complex::new(x, z))
    }
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn matmul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = [[zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).fold(zero(), |s, k| s + a[i][k] * b[k][j]);
        }
    }
    out
}

/// Real symmetric 8×8 embedding `[[A, −B], [B, A]]` of `A + iB`.
fn embed<T: Real>(m: &Mat4<T>) -> Vec<T> {
    let mut e = vec![T::zero(); 64];
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (m[i][j].re, m[i][j].im);
            e[i * 8 + j] = a;
            e[(i + 4) * 8 + j + 4] = a;
            e[i * 8 + j + 4] = -b;
            e[(i + 4) * 8 + j] = b;
        }
    }
    e
}

/// Applies `f` to the spectrum of a Hermitian matrix: `f(M)` is read off
/// the upper-left (real part) and lower-left (imaginary part) blocks of
/// `f` applied to the real embedding.
fn hermitian_apply<T: Real>(m: &Mat4<T>, f: impl Fn(T) -> T) -> Mat4<T> {
    let (values, vectors) = symmetric_eigen(&embed(m), 8);
    let mut out = [[zero(); 4]; 4];
    for (k, &value) in values.iter().enumerate() {
        let fk = f(value);
        for i in 0..4 {
            for j in 0..4 {
                let uj = vectors[j * 8 + k];
                let re = vectors[i * 8 + k] * uj;
                let im = vectors[(i + 4) * 8 + k] * uj;
                out[i][j] = out[i][j] + Complex::new(re, im) * fk;
            }
        }
    }
    out
}

impl<T: Real> PolarizationDensityMatrix<T> {
    pub(crate) fn from_elements(elements: Mat4<T>) -> Self {
        PolarizationDensityMatrix { elements }
    }

    /// Validated constructor: Hermitian within `1e-12`, unit trace.
    pub fn new(elements: Mat4<T>) -> Result<Self> {
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        for i in 0..4 {
            for j in 0..4 {
                if (elements[i][j] - elements[j][i].conj()).norm() > tol {
                    return Err(SpdcError::InvalidParameter("density matrix is not Hermitian".into()));
                }
            }
        }
        let m = PolarizationDensityMatrix { elements };
        if (m.trace() - T::one()).abs() > tol {
            return Err(SpdcError::InvalidParameter(format!("density matrix trace is {}", m.trace())));
        }
        Ok(m)
    }

    pub fn pure(v: [Complex<T>; 4]) -> Result<Self> {
        let n = v.iter().fold(T::zero(), |s, x| s + x.norm_sqr());
        if !(n > T::zero()) {
            return Err(SpdcError::InvalidParameter("zero state vector".into()));
        }
        let mut e = [[zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                e[i][j] = v[i] * v[j].conj() / n;
            }
        }
        Ok(PolarizationDensityMatrix { elements: e })
    }

    pub fn trace(&self) -> T {
        (0..4).fold(T::zero(), |s, i| s + self.elements[i][i].re)
    }

    /// `⟨v|ρ|v⟩` for a normalized `v`.
    pub fn expectation(&self, v: &[Complex<T>; 4]) -> T {
        let mut acc = zero();
        for i in 0..4 {
            for j in 0..4 {
                acc = acc + v[i].conj() * self.elements[i][j] * v[j];
            }
        }
        acc.re
    }

    pub fn fidelity(&self, bell: BellState) -> T {
        self.expectation(&bell.vector())
    }

    /// Fidelities with `[φ+, φ−, ψ+, ψ−]`.
    pub fn bell_fidelities(&self) -> [T; 4] {
        BellState::ALL.map(|b| self.fidelity(b))
    }

    pub fn purity(&self) -> T {
        let sq = matmul(&self.elements, &self.elements);
        (0..4).fold(T::zero(), |s, i| s + sq[i][i].re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 4] {
        let (values, _) = symmetric_eigen(&embed(&self.elements), 8);
        [values[0], values[2], values[4], values[6]]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    /// Wootters concurrence, from the eigenvalues of `√(√ρ ρ̃ √ρ)` with
    /// `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
    pub fn concurrence(&self) -> T {
        let root = hermitian_apply(&self.elements, |x| x.max(T::zero()).sqrt());
        // σy⊗σy is real and anti-diagonal: entries (0,3) = (3,0) = −1, (1,2) = (2,1) = 1.
        let flip = |i: usize| 3 - i;
        let sign = |i: usize| if i == 0 || i == 3 { -T::one() } else { T::one() };
        let mut tilde = [[zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                tilde[i][j] = self.elements[flip(i)][flip(j)].conj() * (sign(i) * sign(j));
            }
        }
        let mut m = matmul(&matmul(&root, &tilde), &root);
        // Symmetrize away rounding so the embedding is exactly symmetric.
        for i in 0..4 {
            for j in i..4 {
                let avg = (m[i][j] + m[j][i].conj()) / T::lit(2.0);
                m[i][j] = avg;
                m[j][i] = avg.conj();
            }
        }
        let (values, _) = symmetric_eigen(&embed(&m), 8);
        let l: Vec<T> = [7, 5, 3, 1].iter().map(|&k| values[k].max(T::zero()).sqrt()).collect();
        (l[0] - l[1] - l[2] - l[3]).max(T::zero())
    }
}

/// Coincidence-sector polarization state behind a beamsplitter with the
/// plate at 0°: `V |ψ⁻⟩⟨ψ⁻| + (1 − V)(|HV⟩⟨HV| + |VH⟩⟨VH|)/2`, where `V` is
/// the two-photon overlap at the chosen delay.
pub fn postselected_polarization_state<T: Real>(overlap: T) -> Result<PolarizationDensityMatrix<T>> {
    if !(T::zero()..=T::one()).contains(&overlap) {
        return Err(SpdcError::InvalidParameter(format!("overlap must be in [0, 1], got {overlap}")));
    }
    let half = T::lit(0.5);
    let mut e = [[zero(); 4]; 4];
    e[1][1] = Complex::new(half, T::zero());
    e[2][2] = Complex::new(half, T::zero());
    e[1][2] = Complex::new(-half * overlap, T::zero());
    e[2][1] = e[1][2];
    Ok(PolarizationDensityMatrix { elements: e })
}
