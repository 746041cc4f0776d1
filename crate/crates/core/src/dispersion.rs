//! Refractive and group indices of beta barium borate (BBO).
//!
//! Each principal index follows the four-term Sellmeier form
//! `n^2(λ) = b1 + b2/(λ^2 - b3) - c1 λ^2` with λ in micrometers. The
//! extraordinary index at angle θ to the optic axis comes from the index
//! ellipse `1/n^2(θ) = cos^2 θ / n_o^2 + sin^2 θ / n_e^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpdcError};
use crate::scalar::Real;

/// Lower edge of the wavelength range the Sellmeier fit is trusted on, µm.
pub const WAVELENGTH_MIN_UM: f64 = 0.35;
/// Upper edge of the trusted wavelength range, µm.
pub const WAVELENGTH_MAX_UM: f64 = 0.80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Ordinary,
    Extraordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierSet<T> {
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub c1: T,
}

impl<T: Real> SellmeierSet<T> {
    pub fn new(b1: T, b2: T, b3: T, c1: T) -> Self {
        SellmeierSet { b1, b2, b3, c1 }
    }

    pub fn from_array(c: [T; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// `n^2(λ)`.
    #[inline]
    pub fn index_squared(&self, lambda: T) -> T {
        let l2 = lambda * lambda;
        self.b1 + self.b2 / (l2 - self.b3) - self.c1 * l2
    }

    /// `d(n^2)/dλ`.
    #[inline]
    fn index_squared_slope(&self, lambda: T) -> T {
        let two = T::lit(2.0);
        let denom = lambda * lambda - self.b3;
        -two * lambda * self.b2 / (denom * denom) - two * self.c1 * lambda
    }

    #[inline]
    fn index(&self, lambda: T) -> T {
        self.index_squared(lambda).sqrt()
    }

    /// `(n, dn/dλ)`.
    #[inline]
    fn index_and_slope(&self, lambda: T) -> (T, T) {
        let n = self.index(lambda);
        (n, self.index_squared_slope(lambda) / (T::lit(2.0) * n))
    }
}

/// Negative uniaxial crystal described by two Sellmeier branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniaxialCrystal<T> {
    pub ordinary: SellmeierSet<T>,
    /// Principal (θ = 90°) extraordinary branch.
    pub extraordinary: SellmeierSet<T>,
}

impl<T: Real> Default for UniaxialCrystal<T> {
    fn default() -> Self {
        Self::bbo()
    }
}

impl<T: Real> UniaxialCrystal<T> {
    /// Standard BBO coefficients, λ in µm.
    pub fn bbo() -> Self {
        UniaxialCrystal {
            ordinary: SellmeierSet::new(T::lit(2.7359), T::lit(0.01878), T::lit(0.01822), T::lit(0.01354)),
            extraordinary: SellmeierSet::new(T::lit(2.3753), T::lit(0.01224), T::lit(0.01667), T::lit(0.01516)),
        }
    }

    /// Builds a crystal from user-supplied coefficients and checks that it
    /// is a physically sensible negative uniaxial crystal on the domain.
    pub fn new(ordinary: SellmeierSet<T>, extraordinary: SellmeierSet<T>) -> Result<Self> {
        let crystal = UniaxialCrystal { ordinary, extraordinary };
        crystal.validate()?;
        Ok(crystal)
    }

    /// Samples the wavelength domain and checks `n^2 > 1` on both branches,
    /// `n_o > n_e`, and that the pole `λ^2 = b3` lies outside the domain.
    pub fn validate(&self) -> Result<()> {
        let lo = T::lit(WAVELENGTH_MIN_UM);
        let hi = T::lit(WAVELENGTH_MAX_UM);
        for set in [&self.ordinary, &self.extraordinary] {
            if set.b3 >= lo * lo && set.b3 <= hi * hi {
                return Err(SpdcError::InvalidParameter(format!(
                    "Sellmeier pole at {} µm lies inside the wavelength domain",
                    set.b3.sqrt()
                )));
            }
        }
        let n = 256;
        for i in 0..=n {
            let lambda = lo + (hi - lo) * T::from_count(i) / T::from_count(n);
            let no2 = self.ordinary.index_squared(lambda);
            let ne2 = self.extraordinary.index_squared(lambda);
            if !(no2 > T::one()) || !(ne2 > T::one()) {
                return Err(SpdcError::InvalidParameter(format!(
                    "Sellmeier coefficients give n^2 <= 1 at {} µm",
                    lambda
                )));
            }
            if !(no2 > ne2) {
                return Err(SpdcError::InvalidParameter(format!(
                    "crystal is not negative uniaxial at {} µm",
                    lambda
                )));
            }
        }
        Ok(())
    }

    fn check_wavelength(lambda: T) -> Result<()> {
        let l = lambda.to_f64_lossy();
        if !(WAVELENGTH_MIN_UM..=WAVELENGTH_MAX_UM).contains(&l) {
            return Err(SpdcError::domain("wavelength (µm)", l, WAVELENGTH_MIN_UM, WAVELENGTH_MAX_UM));
        }
        Ok(())
    }

    fn check_angle(theta: T) -> Result<()> {
        let t = theta.to_f64_lossy();
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&t) {
            return Err(SpdcError::domain(
                "angle to optic axis (rad)",
                t,
                0.0,
                std::f64::consts::FRAC_PI_2,
            ));
        }
        Ok(())
    }

    pub fn index_ordinary(&self, lambda: T) -> Result<T> {
        Self::check_wavelength(lambda)?;
        Ok(self.ordinary.index(lambda))
    }

    /// Principal extraordinary index `n_e(λ)` (propagation normal to the optic axis).
    pub fn index_extraordinary_principal(&self, lambda: T) -> Result<T> {
        Self::check_wavelength(lambda)?;
        Ok(self.extraordinary.index(lambda))
    }

    /// Extraordinary index for propagation at `theta` radians to the optic axis.
    pub fn index_extraordinary(&self, lambda: T, theta: T) -> Result<T> {
        Self::check_wavelength(lambda)?;
        Self::check_angle(theta)?;
        Ok(self.ellipse(lambda, theta).0)
    }

    /// Index of `branch`; `theta` is ignored for the ordinary ray.
    pub fn index(&self, branch: Branch, lambda: T, theta: T) -> Result<T> {
        match branch {
            Branch::Ordinary => self.index_ordinary(lambda),
            Branch::Extraordinary => self.index_extraordinary(lambda, theta),
        }
    }

    /// Group index `n - λ dn/dλ` at fixed propagation angle.
    pub fn group_index(&self, branch: Branch, lambda: T, theta: T) -> Result<T> {
        Self::check_wavelength(lambda)?;
        let (n, slope) = match branch {
            Branch::Ordinary => self.ordinary.index_and_slope(lambda),
            Branch::Extraordinary => {
                Self::check_angle(theta)?;
                self.ellipse(lambda, theta)
            }
        };
        Ok(n - lambda * slope)
    }

    /// Extraordinary `(n(θ), dn/dλ)` from the index ellipse.
    fn ellipse(&self, lambda: T, theta: T) -> (T, T) {
        let (no, dno) = self.ordinary.index_and_slope(lambda);
        let (ne, dne) = self.extraordinary.index_and_slope(lambda);
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (s * s, c * c);
        let inv = c2 / (no * no) + s2 / (ne * ne);
        let n = T::one() / inv.sqrt();
        let two = T::lit(2.0);
        let dinv = -two * c2 * dno / (no * no * no) - two * s2 * dne / (ne * ne * ne);
        let dn = -dinv / (two * inv * inv.sqrt());
        (n, dn)
    }
}
