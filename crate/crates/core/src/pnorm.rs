//! Normalized Schatten p-"norms" `‖f‖_p = (τ|f|^p)^{1/p}` for every extended
//! real `p`, including the limit cases `p = 0` (geometric mean) and `p = ±∞`.
//!
//! For `p < 1` these are not norms; the reverse inequalities in
//! [`crate::verify`] are stated in terms of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, EPS_PD};

/// An extended-real exponent. `Finite` never holds `0.0` or a non-finite
/// value; use [`PExponent::new`] to construct from a raw `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PExponent {
    Finite(f64),
    /// `p → 0`, the geometric mean `exp τ(ln f)`.
    Zero,
    PosInf,
    NegInf,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(Error::range("exponent is NaN"));
        }
        Ok(if p == 0.0 {
            PExponent::Zero
        } else if p == f64::INFINITY {
            PExponent::PosInf
        } else if p == f64::NEG_INFINITY {
            PExponent::NegInf
        } else {
            PExponent::Finite(p)
        })
    }

    /// The exponent as an `f64` (`0.0` for the zero limit).
    pub fn value(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Zero => 0.0,
            PExponent::PosInf => f64::INFINITY,
            PExponent::NegInf => f64::NEG_INFINITY,
        }
    }

    /// True when the exponent needs a positive definite argument.
    pub fn needs_pd(self) -> bool {
        matches!(self, PExponent::Zero | PExponent::NegInf) || self.value() < 0.0
    }
}

impl From<PExponent> for f64 {
    fn from(p: PExponent) -> f64 {
        p.value()
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Zero => write!(f, "0"),
            PExponent::PosInf => write!(f, "inf"),
            PExponent::NegInf => write!(f, "-inf"),
        }
    }
}

/// `p′ = p/(p−1)`. `1 ↦ +∞`, `±∞ ↦ 1`; the zero limit has no conjugate.
pub fn holder_conjugate(p: PExponent) -> Result<PExponent> {
    match p {
        PExponent::Zero => Err(Error::range("the Hölder conjugate of p = 0 is undefined")),
        PExponent::PosInf | PExponent::NegInf => Ok(PExponent::Finite(1.0)),
        PExponent::Finite(1.0) => Ok(PExponent::PosInf),
        PExponent::Finite(x) => PExponent::new(x / (x - 1.0)),
    }
}

/// Normalized p-norm of a Hermitian operator.
///
/// `p ≥ 1` accepts any Hermitian `f` through `|f|`; `0 < p < 1` requires PSD;
/// `p < 0`, `p = 0` and `p = −∞` require positive definite `f`.
pub fn pnorm(f: &HermitianOperator, p: PExponent) -> Result<f64> {
    let spec = f.eigh()?;
    let d = spec.values.len() as f64;
    match p {
        PExponent::PosInf => Ok(spec.values.iter().map(|x| x.abs()).fold(0.0, f64::max)),
        PExponent::NegInf => {
            f.require_pd(EPS_PD, "p = -inf norm")?;
            Ok(spec.min())
        }
        PExponent::Zero => {
            f.require_pd(EPS_PD, "p = 0 norm")?;
            let mean_log = spec.values.iter().map(|x| x.ln()).sum::<f64>() / d;
            Ok(mean_log.exp())
        }
        PExponent::Finite(p) if p >= 1.0 => {
            let abs: Vec<f64> = spec.values.iter().map(|x| x.abs()).collect();
            Ok(power_mean(&abs, p))
        }
        PExponent::Finite(p) if p > 0.0 => {
            let vals = f.psd_spectrum(EPS_PD)?;
            Ok(power_mean(&vals, p))
        }
        PExponent::Finite(p) => {
            f.require_pd(EPS_PD, "negative-exponent norm")?;
            Ok(power_mean(&spec.values, p))
        }
    }
}

/// Convenience wrapper taking a raw exponent.
pub fn pnorm_f64(f: &HermitianOperator, p: f64) -> Result<f64> {
    pnorm(f, PExponent::new(p)?)
}

/// `(mean x_i^p)^{1/p}` for nonnegative `x` (strictly positive if `p < 0`),
/// computed after scaling by the extreme value so large `|p|` cannot overflow.
pub(crate) fn power_mean(xs: &[f64], p: f64) -> f64 {
    let n = xs.len() as f64;
    let scale = if p > 0.0 {
        xs.iter().cloned().fold(0.0, f64::max)
    } else {
        xs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = xs
        .iter()
        .map(|&x| if x == 0.0 { 0.0 } else { (x / scale).powf(p) })
        .sum();
    scale * (s / n).powf(1.0 / p)
}
