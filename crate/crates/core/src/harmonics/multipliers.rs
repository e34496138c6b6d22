use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{exp, log};

use super::HarmonicCoeffs;
use crate::special::{digamma, ln_gamma};
use crate::{Error, Result};

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    Ok(n as f64 / 2.0)
}

/// Eigenvalue of `P₂ₛ` on degree-`l` harmonics: Γ(l+n/2−s)/Γ(l+n/2+s).
pub fn multiplier_p2s(n: usize, l: usize, s: f64) -> Result<f64> {
    let half = check_n(n)?;
    if !(0.0..half).contains(&s) {
        return Err(Error::Parameter("P2s requires 0 <= s < n/2"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let a = l as f64 + half;
    Ok(exp(ln_gamma(a - s)? - ln_gamma(a + s)?))
}

/// Eigenvalue of `A₂ₛ` on degree-`l` harmonics: Γ(l+n/2+s)/Γ(l+n/2−s).
pub fn multiplier_a2s(n: usize, l: usize, s: f64) -> Result<f64> {
    let half = check_n(n)?;
    let a = l as f64 + half;
    if !(s < a && s > -a) {
        return Err(Error::Parameter("A2s requires |s| < l + n/2"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    Ok(exp(ln_gamma(a + s)? - ln_gamma(a - s)?))
}

/// 2π^{n/2}/Γ(n/2), the scale of the logarithmic operator.
pub(crate) fn log_operator_scale(n: usize) -> Result<f64> {
    let half = check_n(n)?;
    Ok(2.0 * exp(half * log(PI) - ln_gamma(half)?))
}

/// Eigenvalue of `H` on degree-`l` harmonics:
/// h_l = (2π^{n/2}/Γ(n/2))·(ψ(l+n/2) − ψ(n/2)).
pub fn multiplier_h(n: usize, l: usize) -> Result<f64> {
    let half = check_n(n)?;
    if l == 0 {
        return Ok(0.0);
    }
    Ok(log_operator_scale(n)? * (digamma(l as f64 + half)? - digamma(half)?))
}

/// Per-degree multiplier values `m_0, …, m_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    n: usize,
    values: Vec<f64>,
}

impl MultiplierTable {
    /// Wraps explicit values; entries must be finite.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("multipliers must be finite"));
        }
        Ok(Self { n, values })
    }

    /// `h_0, …, h_L` of the logarithmic operator `H`.
    pub fn log_operator(n: usize, band_limit: usize) -> Result<Self> {
        let values = (0..=band_limit)
            .map(|l| multiplier_h(n, l))
            .collect::<Result<_>>()?;
        Ok(Self { n, values })
    }

    /// Eigenvalues of `P₂ₛ`.
    pub fn p2s(n: usize, band_limit: usize, s: f64) -> Result<Self> {
        let values = (0..=band_limit)
            .map(|l| multiplier_p2s(n, l, s))
            .collect::<Result<_>>()?;
        Ok(Self { n, values })
    }

    /// Eigenvalues of `A₂ₛ`.
    pub fn a2s(n: usize, band_limit: usize, s: f64) -> Result<Self> {
        let values = (0..=band_limit)
            .map(|l| multiplier_a2s(n, l, s))
            .collect::<Result<_>>()?;
        Ok(Self { n, values })
    }

    /// Sphere dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Table entries by degree.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest degree covered.
    pub fn band_limit(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Multiplies every `u_{l,m}` by `m_l`.
    pub fn apply(&self, c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
        if c.dim() != self.n || c.band_limit() > self.band_limit() {
            return Err(Error::ShapeMismatch);
        }
        let mut out = c.clone();
        let degrees: Vec<usize> = c.degrees().collect();
        for (v, l) in out.values_mut().iter_mut().zip(degrees) {
            *v *= self.values[l];
        }
        Ok(out)
    }

    /// Σ m_l u_{l,m} v_{l,m}.
    pub fn quadratic_form(&self, u: &HarmonicCoeffs, v: &HarmonicCoeffs) -> Result<f64> {
        u.check_same_shape(v)?;
        if u.dim() != self.n || u.band_limit() > self.band_limit() {
            return Err(Error::ShapeMismatch);
        }
        Ok(u
            .degrees()
            .zip(u.values().iter().zip(v.values()))
            .map(|(l, (a, b))| self.values[l] * (a * b))
            .sum())
    }
}

/// `(Hu)_{l,m} = h_l u_{l,m}`.
pub fn apply_h(c: &HarmonicCoeffs) -> Result<HarmonicCoeffs> {
    MultiplierTable::log_operator(c.dim(), c.band_limit())?.apply(c)
}

/// `(P₂ₛu)_{l,m}` by the Funk–Hecke eigenvalues.
pub fn apply_p2s(c: &HarmonicCoeffs, s: f64) -> Result<HarmonicCoeffs> {
    MultiplierTable::p2s(c.dim(), c.band_limit(), s)?.apply(c)
}
