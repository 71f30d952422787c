use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::generators::Generator;

/// Grid size per axis for the supremum of `[φ̂, φ̂]₀`.
pub const BRACKET_SUP_NODES: usize = 4096;

/// Truncated bracket product with a certified bound on the omitted aliases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSum {
    pub value: f64,
    pub remainder: f64,
}

/// `[φ̂, φ̂]_s(ξ) = Σ_k |φ̂(ξ + 2πk)|² (1 + ||ξ + 2πk||²)^s`, summed over
/// `||k||_∞ ≤ K` around the alias nearest to the origin.
///
/// The remainder uses `(1+||η||²)^s ≤ Π_i (1+η_i²)^{s⁺}` and the per-axis
/// bound `|B̂₂(η)|² ≤ 16/η⁴`, so it is a true upper bound on the tail.
pub fn bracket_product(g: &Generator, s: f64, xi: &[f64], k: u32) -> Result<BracketSum> {
    let d = g.dimension();
    Error::check_dim(d, xi.len())?;
    if k == 0 {
        return Err(Error::Argument("bracket truncation K must be at least 1".into()));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("non-finite frequency {xi:?}")));
    }
    let s_plus = s.max(0.0);
    let factors = g.factors();
    if s_plus >= 1.5 && factors.iter().any(|f| matches!(f, Generator::BSpline2)) {
        return Err(Error::Divergent(format!(
            "[B̂₂, B̂₂]_s diverges for s = {s} (needs s < 3/2)"
        )));
    }

    // Reduce each axis to [−π, π); the sum is 2π-periodic.
    let reduced: Vec<f64> = xi.iter().map(|&w| w - 2.0 * PI * (w / (2.0 * PI)).round()).collect();
    let k = k as i64;
    let side = (2 * k + 1) as usize;

    // Per-axis |ĝ_i(ξ_i + 2πk)|² for k = −K..=K.
    let amps: Vec<Vec<f64>> = factors
        .iter()
        .zip(&reduced)
        .map(|(f, &w)| {
            (-k..=k)
                .map(|j| f.fourier_factor(w + 2.0 * PI * j as f64).norm_sqr())
                .collect()
        })
        .collect();

    let mut value = 0.0;
    let mut idx = vec![0usize; d];
    let total = side.pow(d as u32);
    for _ in 0..total {
        let mut amp = 1.0;
        let mut norm2 = 0.0;
        for i in 0..d {
            amp *= amps[i][idx[i]];
            let eta = reduced[i] + 2.0 * PI * (idx[i] as i64 - k) as f64;
            norm2 += eta * eta;
        }
        if amp != 0.0 {
            value += amp * (1.0 + norm2).powf(s);
        }
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < side {
                break;
            }
            idx[i] = 0;
        }
    }

    // Π(S_i + T_i) − Π S_i bounds every term with some |k_i| > K.
    let mut with_tail = 1.0;
    let mut inner = 1.0;
    for (i, f) in factors.iter().enumerate() {
        let s_i: f64 = (-k..=k)
            .zip(&amps[i])
            .map(|(j, a)| {
                let eta = reduced[i] + 2.0 * PI * j as f64;
                a * (1.0 + eta * eta).powf(s_plus)
            })
            .sum();
        let t_i = match f {
            Generator::BSpline2 => {
                let p = 2.0 * s_plus - 4.0;
                32.0 * 2f64.powf(s_plus) * PI.powf(p) * ((2 * k - 1) as f64).powf(p + 1.0) / (2.0 * (-p - 1.0))
            }
            _ => 0.0,
        };
        with_tail *= s_i + t_i;
        inner *= s_i;
    }

    Ok(BracketSum {
        value,
        remainder: (with_tail - inner).max(0.0),
    })
}

/// Integer autocorrelation `a_k = ∫ φ(x) φ(x + k) dx` over the nonzero lags.
/// Then `[φ̂, φ̂]₀(ξ) = Σ_k a_k e^{-ik·ξ}`.
pub fn autocorrelation(g: &Generator) -> Vec<(Vec<i64>, f64)> {
    let mut out: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
    for f in g.factors() {
        let axis = autocorrelation_factor(f);
        out = out
            .iter()
            .flat_map(|(k, a)| {
                axis.iter().map(move |&(j, b)| {
                    let mut kk = k.clone();
                    kk.push(j);
                    (kk, a * b)
                })
            })
            .collect();
    }
    out
}

fn autocorrelation_factor(f: &Generator) -> Vec<(i64, f64)> {
    match f {
        // Orthonormal shifts.
        Generator::Sinc { .. } => vec![(0, 1.0)],
        Generator::BSpline2 => {
            // Simpson on unit cells is exact: the integrand is piecewise
            // quadratic with integer breakpoints.
            let (a, b) = (0.0f64, 2.0f64);
            let width = (b - a) as i64;
            (-width..=width)
                .filter_map(|k| {
                    let mut acc = 0.0;
                    let mut x = a;
                    while x < b {
                        let h = |t: f64| f.eval_factor(t) * f.eval_factor(t + k as f64);
                        acc += (h(x) + 4.0 * h(x + 0.5) + h(x + 1.0)) / 6.0;
                        x += 1.0;
                    }
                    (acc != 0.0).then_some((k, acc))
                })
                .collect()
        }
        Generator::TensorProduct(_) => unreachable!("factors are univariate"),
    }
}

/// Certified upper bound on `sup_ξ [φ̂, φ̂]₀(ξ)`.
///
/// The bracket factorizes over axes. Each axis is the cosine polynomial
/// `f(ξ) = Σ a_k cos(kξ)`; on a cell of width `h` around a grid node
/// `f ≤ f(node) + |f'(node)| h/2 + L₂ h²/8` with `L₂ = Σ k²|a_k|`.
pub fn bracket_sup(g: &Generator) -> f64 {
    g.factors()
        .iter()
        .map(|f| {
            let coeffs = autocorrelation_factor(f);
            let l2: f64 = coeffs.iter().map(|&(k, a)| (k * k) as f64 * a.abs()).sum();
            let h = 2.0 * PI / BRACKET_SUP_NODES as f64;
            (0..BRACKET_SUP_NODES)
                .map(|n| {
                    let x = n as f64 * h;
                    let (mut v, mut dv) = (0.0, 0.0);
                    for &(k, a) in &coeffs {
                        let kf = k as f64;
                        v += a * (kf * x).cos();
                        dv -= a * kf * (kf * x).sin();
                    }
                    v + dv.abs() * h / 2.0 + l2 * h * h / 8.0
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .product()
}
