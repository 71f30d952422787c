use super::BoundParams;
use crate::error::{Error, Result};

/// Truncation-error decay exponent
/// `η_{κ+1}(s, ς) = (κ+1−s)(ς−s)/(κ+1+ς−s)`, valid for `s < ς < κ+1`.
pub fn eta_exponent(p: &BoundParams) -> Result<f64> {
    p.require_varsigma_above_s()?;
    p.require_t_below_s()?;
    if p.varsigma >= p.kappa_plus_1 {
        return Err(Error::constraint(
            "varsigma < kappa + 1",
            format!("varsigma = {}, kappa + 1 = {}", p.varsigma, p.kappa_plus_1),
        ));
    }
    let k = p.kappa_plus_1;
    Ok((k - p.s) * (p.varsigma - p.s) / (k + p.varsigma - p.s))
}

/// Perturbed-operator exponent
/// `ζ = min{ς − s, 1, ((4s + (α−2)d)/(2s − α + 2) + d)/2}`.
pub fn zeta_exponent(p: &BoundParams) -> Result<f64> {
    p.require_s_above_half_d()?;
    p.require_alpha_window()?;
    p.require_varsigma_above_s()?;
    let d = p.d as f64;
    let third = ((4.0 * p.s + (p.alpha - 2.0) * d) / (2.0 * p.s - p.alpha + 2.0) + d) / 2.0;
    Ok((p.varsigma - p.s).min(1.0).min(third))
}
