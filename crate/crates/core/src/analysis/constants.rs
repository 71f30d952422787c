use std::f64::consts::PI;

use super::bracket::bracket_sup;
use super::BoundParams;
use crate::error::{Error, Result};
use crate::generators::Generator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConstants {
    pub c3: f64,
    pub c2: f64,
    /// Certified `sup_ξ [φ̂, φ̂]₀(ξ)` used for `c2`.
    pub bracket_sup: f64,
}

/// `C₃(s, α) = (2π)^{α−2+d−2s} 2^{4s+2} d^{1+s−d} [(2s−d+1)/(2s−d) + 2s/(2s−1)]`.
pub fn c3_constant(p: &BoundParams) -> Result<f64> {
    p.require_s_above_half_d()?;
    if 2.0 * p.s <= 1.0 {
        return Err(Error::constraint("2s > 1", format!("s = {}", p.s)));
    }
    let (s, d) = (p.s, p.d as f64);
    let bracket = (2.0 * s - d + 1.0) / (2.0 * s - d) + 2.0 * s / (2.0 * s - 1.0);
    Ok((2.0 * PI).powf(p.alpha - 2.0 + d - 2.0 * s) * 2f64.powf(4.0 * s + 2.0) * d.powf(1.0 + s - d) * bracket)
}

/// `C₃` and `C₂(s, α) = ||φ̃̂||_∞ · ([φ̂, φ̂]₀^sup / (2π)^{d−2} · (C₃ + 4(2π)^{2d}))^{1/2}`.
/// For the point-evaluation dual `g_dual_sup = 1`.
pub fn perturbation_constants(p: &BoundParams, g: &Generator, g_dual_sup: f64) -> Result<PerturbationConstants> {
    Error::check_dim(p.d, g.dimension())?;
    if !(g_dual_sup >= 0.0 && g_dual_sup.is_finite()) {
        return Err(Error::Argument(format!(
            "dual sup must be finite and >= 0, got {g_dual_sup}"
        )));
    }
    let c3 = c3_constant(p)?;
    let d = p.d as f64;
    let sup = bracket_sup(g);
    let two_pi = 2.0 * PI;
    let c2 = g_dual_sup * (sup / two_pi.powf(d - 2.0) * (c3 + 4.0 * two_pi.powf(2.0 * d))).sqrt();
    Ok(PerturbationConstants {
        c3,
        c2,
        bracket_sup: sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, alpha: f64, d: usize) -> BoundParams {
        BoundParams {
            s,
            t: None,
            varsigma: s + 0.5,
            kappa_plus_1: 2.0,
            alpha,
            d,
            m: 2.0,
            level: 0,
        }
    }

    #[test]
    fn c3_reference_value() {
        let c3 = c3_constant(&params(1.0, 0.5, 1)).unwrap();
        // same value through a different expression tree
        let alt = 64.0 * 4.0 * (2.0 * PI).powi(-3) * (2.0 * PI).sqrt();
        assert!((c3 - alt).abs() < 1e-12);
        assert!((c3 - 2.586_963_459_535_78).abs() < 1e-12);
    }

    #[test]
    fn c3_positive_and_constrained() {
        for &s in &[0.6, 1.0, 1.7, 3.0] {
            assert!(c3_constant(&params(s, 0.1, 1)).unwrap() > 0.0);
        }
        assert!(c3_constant(&params(1.1, 0.1, 2)).unwrap() > 0.0);
        assert!(matches!(
            c3_constant(&params(0.9, 0.5, 2)),
            Err(Error::Constraint {
                constraint: "s > d/2",
                ..
            })
        ));
    }

    #[test]
    fn c2_bspline() {
        let p = params(1.0, 0.5, 1);
        let k = perturbation_constants(&p, &Generator::BSpline2, 1.0).unwrap();
        let two_pi = 2.0 * PI;
        let nominal = (two_pi * (k.c3 + 4.0 * two_pi * two_pi)).sqrt();
        assert!(k.c2 >= nominal);
        assert!((k.c2 - nominal) / nominal < 1e-6);
    }
}
