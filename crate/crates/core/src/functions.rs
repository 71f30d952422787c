//! Test functions `f` with optional closed-form Fourier transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::sinc;

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Transform = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Declared decay of `|f̂|²`, used to certify quadrature tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FourierDecay {
    /// `f̂` vanishes outside the cube `||ξ||_∞ ≤ radius`.
    BandLimited { radius: f64 },
    /// `|f̂(ξ)|² ≤ constant · (1 + ||ξ||²)^{-power}`.
    Algebraic { constant: f64, power: f64 },
}

#[derive(Clone)]
pub struct FourierForm {
    transform: Transform,
    decay: FourierDecay,
}

impl FourierForm {
    pub fn new(transform: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static, decay: FourierDecay) -> Self {
        Self {
            transform: Arc::new(transform),
            decay,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.transform)(xi)
    }

    pub fn decay(&self) -> FourierDecay {
        self.decay
    }
}

#[derive(Clone)]
pub struct TestFunction {
    id: String,
    dimension: usize,
    eval: Evaluator,
    fourier: Option<FourierForm>,
    /// `f ∈ H^ς` for every `ς` below this value.
    smoothness_sup: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("dimension", &self.dimension)
            .field("has_fourier", &self.fourier.is_some())
            .field("smoothness_sup", &self.smoothness_sup)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        id: impl Into<String>,
        dimension: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        fourier: Option<FourierForm>,
        smoothness_sup: f64,
    ) -> Self {
        Self {
            id: id.into(),
            dimension,
            eval: Arc::new(eval),
            fourier,
            smoothness_sup,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn fourier(&self) -> Option<&FourierForm> {
        self.fourier.as_ref()
    }

    pub fn smoothness_sup(&self) -> f64 {
        self.smoothness_sup
    }

    pub fn belongs_to(&self, varsigma: f64) -> bool {
        varsigma < self.smoothness_sup
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dimension, x.len())?;
        Ok((self.eval)(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// `e^{-|x|}` on ℝ, with `f̂(ξ) = 2/(1+ξ²)`.
    pub fn exp_abs() -> Self {
        Self::new(
            "exp-abs",
            1,
            |x| (-x[0].abs()).exp(),
            Some(FourierForm::new(
                |xi| Complex64::new(2.0 / (1.0 + xi[0] * xi[0]), 0.0),
                FourierDecay::Algebraic {
                    constant: 4.0,
                    power: 2.0,
                },
            )),
            1.5,
        )
    }

    /// `e^{-(|x₁|+|x₂|)} + e^{-(x₁²+x₂²)}`.
    pub fn exp_abs_gauss_2d() -> Self {
        // (1+r²)e^{-r²/4} peaks at r² = 3
        let gauss_peak = PI * 4.0 * (-0.75f64).exp();
        Self::new(
            "exp-abs-gauss-2d",
            2,
            |x| (-(x[0].abs() + x[1].abs())).exp() + (-(x[0] * x[0] + x[1] * x[1])).exp(),
            Some(FourierForm::new(
                |xi| {
                    let a = 4.0 / ((1.0 + xi[0] * xi[0]) * (1.0 + xi[1] * xi[1]));
                    let g = PI * (-(xi[0] * xi[0] + xi[1] * xi[1]) / 4.0).exp();
                    Complex64::new(a + g, 0.0)
                },
                FourierDecay::Algebraic {
                    constant: (4.0 + gauss_peak).powi(2),
                    power: 2.0,
                },
            )),
            1.5,
        )
    }

    /// `e^{-||x||²}` with `f̂(ξ) = π^{d/2} e^{-||ξ||²/4}`.
    pub fn gaussian(d: usize) -> Self {
        let scale = PI.powf(d as f64 / 2.0);
        // (1+r²)^4 e^{-r²/2} peaks at r² = 7
        let peak = 8f64.powi(4) * (-3.5f64).exp();
        Self::new(
            format!("gauss-{d}d"),
            d,
            |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Some(FourierForm::new(
                move |xi| Complex64::new(scale * (-xi.iter().map(|v| v * v).sum::<f64>() / 4.0).exp(), 0.0),
                FourierDecay::Algebraic {
                    constant: scale * scale * peak,
                    power: 4.0,
                },
            )),
            f64::INFINITY,
        )
    }

    /// `f ≡ 1`; not in L², so no Fourier form.
    pub fn one(d: usize) -> Self {
        Self::new(format!("one-{d}d"), d, |_| 1.0, None, f64::NEG_INFINITY)
    }

    /// `f(x) = x₁`.
    pub fn first_coordinate(d: usize) -> Self {
        Self::new(format!("x-{d}d"), d, |x| x[0], None, f64::NEG_INFINITY)
    }

    /// `sinc(x - shift)`.
    pub fn sinc_shift(shift: i64) -> Self {
        Self::sinc_series(format!("sinc-shift:{shift}"), vec![(shift, 1.0)])
    }

    /// `Σ_{j=0}^{P} C(P, j) sinc(x - j)`; decays like `|x|^{-P-1}`.
    pub fn sinc_binomial(order: u32) -> Self {
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        let mut c = 1.0;
        for j in 0..=order as i64 {
            coeffs.push((j, c));
            c = c * (order as i64 - j) as f64 / (j + 1) as f64;
        }
        Self::sinc_series(format!("sinc-comb:{order}"), coeffs)
    }

    fn sinc_series(id: String, coeffs: Vec<(i64, f64)>) -> Self {
        let c2 = coeffs.clone();
        Self::new(
            id,
            1,
            move |x| coeffs.iter().map(|&(j, c)| c * sinc(x[0] - j as f64)).sum(),
            Some(FourierForm::new(
                move |xi| {
                    if xi[0].abs() > PI {
                        return Complex64::new(0.0, 0.0);
                    }
                    c2.iter()
                        .map(|&(j, c)| Complex64::from_polar(c, -(j as f64) * xi[0]))
                        .sum()
                },
                FourierDecay::BandLimited { radius: PI },
            )),
            f64::INFINITY,
        )
    }

    /// `a·f + b·g`, pointwise and in Fourier.
    pub fn linear_combination(a: f64, f: &TestFunction, b: f64, g: &TestFunction) -> Result<Self> {
        Error::check_dim(f.dimension, g.dimension)?;
        let (fe, ge) = (f.eval.clone(), g.eval.clone());
        let fourier = match (&f.fourier, &g.fourier) {
            (Some(ff), Some(gf)) => {
                let (ft, gt) = (ff.transform.clone(), gf.transform.clone());
                combine_decay(a, ff.decay, b, gf.decay)
                    .map(|decay| FourierForm::new(move |xi| a * ft(xi) + b * gt(xi), decay))
            }
            _ => None,
        };
        Ok(Self::new(
            format!("{a}*{}+{b}*{}", f.id, g.id),
            f.dimension,
            move |x| a * fe(x) + b * ge(x),
            fourier,
            f.smoothness_sup.min(g.smoothness_sup),
        ))
    }
}

/// Certified decay of `a f̂ + b ĝ`; `None` when it cannot be derived from
/// the two declarations alone.
fn combine_decay(a: f64, da: FourierDecay, b: f64, db: FourierDecay) -> Option<FourierDecay> {
    use FourierDecay::*;
    match (da, db) {
        (BandLimited { radius: r1 }, BandLimited { radius: r2 }) => Some(BandLimited { radius: r1.max(r2) }),
        (
            Algebraic {
                constant: c1,
                power: p1,
            },
            Algebraic {
                constant: c2,
                power: p2,
            },
        ) => {
            // |a f̂ + b ĝ| ≤ (|a|√c1 + |b|√c2)(1+|ξ|²)^{-min(p)/2}
            let amp = a.abs() * c1.sqrt() + b.abs() * c2.sqrt();
            Some(Algebraic {
                constant: amp * amp,
                power: p1.min(p2),
            })
        }
        _ => None,
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("sinc-shift:") {
            let j = rest.parse().map_err(|_| Error::Config(format!("bad shift in `{s}`")))?;
            return Ok(Self::sinc_shift(j));
        }
        if let Some(rest) = s.strip_prefix("sinc-comb:") {
            let p = rest.parse().map_err(|_| Error::Config(format!("bad order in `{s}`")))?;
            return Ok(Self::sinc_binomial(p));
        }
        let dim_suffix = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix)?.strip_suffix('d')?.parse().ok() };
        match s {
            "exp-abs" => Ok(Self::exp_abs()),
            "exp-abs-gauss-2d" => Ok(Self::exp_abs_gauss_2d()),
            _ => {
                if let Some(d) = dim_suffix("gauss-") {
                    Ok(Self::gaussian(d))
                } else if let Some(d) = dim_suffix("one-") {
                    Ok(Self::one(d))
                } else if let Some(d) = dim_suffix("x-") {
                    Ok(Self::first_coordinate(d))
                } else {
                    Err(Error::Config(format!("unknown test function `{s}`")))
                }
            }
        }
    }
}
