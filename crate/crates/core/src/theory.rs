//! Time horizons and smallness thresholds from the a priori estimates,
//! evaluated with user-supplied constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{NormKind, SobolevNorm};
use crate::symbols::LineConstants;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("constant {0} is not set")]
    MissingConstants(&'static str),
    #[error("{0} must be positive and finite, got {1}")]
    Invalid(&'static str, f64),
}

/// Unspecified constants of the commutator and interpolation estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConstants {
    pub c_s: Option<f64>,
    pub c_alpha: Option<f64>,
    pub c_kappa: Option<f64>,
}

impl AnalysisConstants {
    /// All constants set to 1.
    pub fn unit() -> Self {
        Self {
            c_s: Some(1.0),
            c_alpha: Some(1.0),
            c_kappa: Some(1.0),
        }
    }
}

fn positive(name: &'static str, v: Option<f64>) -> Result<f64, TheoryError> {
    let v = v.ok_or(TheoryError::MissingConstants(name))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(TheoryError::Invalid(name, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalTimes {
    /// `ε / (2 C_s ‖v‖²_{H^s})`, when a drift and `ε > 0` are given.
    pub t_star_eps: Option<f64>,
    /// `ln 2 / ((C_s m★/√m⋆) ‖Λ^s θ₀‖)²`.
    pub t_local: f64,
    /// Same with `min(ln 2, 1/6)`.
    pub t_combined: f64,
    /// `min{(1−α)/(16 C_α), ln√2 / C_κ}·(m⋆/m★)`.
    pub epsilon0: Option<f64>,
}

/// `T★_ε = ε / (2 C_s ‖v‖²_{H^s})`.
pub fn t_star_eps(eps: f64, v_hs_norm: f64, c_s: Option<f64>) -> Result<f64, TheoryError> {
    let c = positive("C_s", c_s)?;
    if !(eps > 0.0) {
        return Err(TheoryError::Invalid("epsilon", eps));
    }
    if !(v_hs_norm > 0.0 && v_hs_norm.is_finite()) {
        return Err(TheoryError::Invalid("drift norm", v_hs_norm));
    }
    Ok(eps / (2.0 * c * v_hs_norm * v_hs_norm))
}

/// `ε₀ = min{(1−α)/(16 C_α), ln√2 / C_κ}·(m⋆/m★)`.
pub fn epsilon0(alpha: f64, bounds: &LineConstants, constants: &AnalysisConstants) -> Result<f64, TheoryError> {
    let ca = positive("C_alpha", constants.c_alpha)?;
    let ck = positive("C_kappa", constants.c_kappa)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TheoryError::Invalid("alpha", alpha));
    }
    let a = (1.0 - alpha) / (16.0 * ca);
    let b = 2f64.sqrt().ln() / ck;
    Ok(a.min(b) * bounds.m_lower / bounds.m_upper)
}

/// Local and combined existence times for `θ₀` with the line constants
/// `m⋆ = M̂₃(p)`, `m★ = maxⱼ|M̂ⱼ(p)|`; `drift` optionally supplies `(ε, ‖v‖_{H^s})` for `T★_ε`.
pub fn theoretical_times(
    theta0: &impl SobolevNorm,
    s: f64,
    bounds: &LineConstants,
    constants: &AnalysisConstants,
    alpha: Option<f64>,
    drift: Option<(f64, f64)>,
) -> Result<TheoreticalTimes, TheoryError> {
    let c = positive("C_s", constants.c_s)?;
    let lam = theta0.sobolev_norm(s, NormKind::Homogeneous);
    let denom = (c * bounds.m_upper / bounds.m_lower.sqrt() * lam).powi(2);
    let (t_local, t_combined) = if denom > 0.0 {
        (2f64.ln() / denom, 2f64.ln().min(1.0 / 6.0) / denom)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let t_star = drift.map(|(eps, v)| t_star_eps(eps, v, constants.c_s)).transpose()?;
    let eps0 = alpha.map(|a| epsilon0(a, bounds, constants)).transpose()?;
    Ok(TheoreticalTimes {
        t_star_eps: t_star,
        t_local,
        t_combined,
        epsilon0: eps0,
    })
}
