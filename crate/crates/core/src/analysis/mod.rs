//! Norms, error measures, rate exponents, closed-form bounds and their
//! brute-force counterparts.

mod bracket;
mod constants;
mod exponents;
mod norms;
mod rate;
mod tail;

pub use bracket::{autocorrelation, bracket_product, bracket_sup, BracketSum, BRACKET_SUP_NODES};
pub use constants::{c3_constant, perturbation_constants, PerturbationConstants};
pub use exponents::{eta_exponent, zeta_exponent};
pub use norms::{aliasing_risk, relative_l2_error, sobolev_norm, spatial_l2_norm, NormEstimate, SobolevQuadrature};
pub use rate::{rate_fit, RateReport, EXACT_THRESHOLD};
pub use tail::{tail_sum_bound, tail_sum_bruteforce, TailSum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters shared by the exponent and constant formulas. Each
/// formula checks only the constraints it relies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Sobolev exponent.
    pub s: f64,
    /// Dual smoothness, `t < s`.
    pub t: Option<f64>,
    /// Source smoothness `ς`.
    pub varsigma: f64,
    /// Sum-rule order `κ + 1`.
    pub kappa_plus_1: f64,
    pub alpha: f64,
    pub d: usize,
    pub m: f64,
    pub level: u32,
}

impl BoundParams {
    pub(crate) fn require_s_above_half_d(&self) -> Result<()> {
        if self.s > self.d as f64 / 2.0 {
            Ok(())
        } else {
            Err(Error::constraint("s > d/2", format!("s = {}, d = {}", self.s, self.d)))
        }
    }

    pub(crate) fn require_alpha_window(&self) -> Result<()> {
        let cap = (2.0 * self.s - self.d as f64).min(2.0);
        if self.alpha > 0.0 && self.alpha < cap {
            Ok(())
        } else {
            Err(Error::constraint(
                "0 < alpha < min{2s - d, 2}",
                format!("alpha = {}, min{{2s - d, 2}} = {cap}", self.alpha),
            ))
        }
    }

    pub(crate) fn require_varsigma_above_s(&self) -> Result<()> {
        if self.varsigma > self.s {
            Ok(())
        } else {
            Err(Error::constraint(
                "varsigma > s",
                format!("varsigma = {}, s = {}", self.varsigma, self.s),
            ))
        }
    }

    pub(crate) fn require_t_below_s(&self) -> Result<()> {
        match self.t {
            Some(t) if t >= self.s => Err(Error::constraint("t < s", format!("t = {t}, s = {}", self.s))),
            _ => Ok(()),
        }
    }
}
