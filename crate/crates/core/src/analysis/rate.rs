use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Errors below this are treated as exact reconstruction.
pub const EXACT_THRESHOLD: f64 = 1e-10;

/// Least-squares fit of `−log_m(error) ≈ intercept + slope · N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub points: Vec<(u32, f64)>,
    pub m: f64,
    /// Empirical decay exponent.
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the fit residuals in `log_m` units.
    pub residual: f64,
    /// Exponent predicted by theory, when one applies.
    pub theoretical: Option<f64>,
    /// All errors sit at the quadrature noise floor; the slope is meaningless.
    pub exact: bool,
}

pub fn rate_fit(points: &[(u32, f64)], m: f64) -> Result<RateReport> {
    if points.len() < 3 {
        return Err(Error::Argument(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::constraint("m > 1", format!("m = {m}")));
    }
    if let Some(&(n, e)) = points.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Argument(format!(
            "error at N = {n} must be positive and finite, got {e}"
        )));
    }
    let ln_m = m.ln();
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| -e.ln() / ln_m).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument("rate fit needs at least two distinct levels".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(RateReport {
        points: points.to_vec(),
        m,
        slope,
        intercept,
        residual,
        theoretical: None,
        exact: points.iter().all(|&(_, e)| e <= EXACT_THRESHOLD),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_errors() {
        let r = rate_fit(&[(1, 0.4), (2, 0.2), (3, 0.1), (4, 0.05)], 2.0).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-12);
        let pts: Vec<_> = (1..6).map(|n| (n, 3.0 * 4f64.powi(-(n as i32)))).collect();
        assert!((rate_fit(&pts, 2.0).unwrap().slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn outlier_sensitivity() {
        let clean: Vec<_> = (1..=4).map(|n| (n, 0.8 * 2f64.powi(-(n as i32)))).collect();
        let base = rate_fit(&clean, 2.0).unwrap().slope;
        for i in 0..clean.len() {
            for &f in &[0.99, 1.01] {
                let mut p = clean.clone();
                p[i].1 *= f;
                assert!((rate_fit(&p, 2.0).unwrap().slope - base).abs() < 0.02);
            }
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(rate_fit(&[(1, 0.1), (2, 0.05)], 2.0).is_err());
        assert!(rate_fit(&[(2, 0.1), (2, 0.05), (2, 0.01)], 2.0).is_err());
        assert!(rate_fit(&[(1, 0.1), (2, 0.0), (3, 0.01)], 2.0).is_err());
    }

    #[test]
    fn exact_flag() {
        let r = rate_fit(&[(1, 1e-14), (2, 3e-15), (3, 2e-14)], 2.0).unwrap();
        assert!(r.exact);
    }
}
