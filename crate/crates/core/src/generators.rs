//! Refinable generators: the 1D sinc, the order-2 cardinal B-spline `B₂`,
//! and tensor products of those for `d ≥ 2`.
//!
//! Fourier transforms use the angular convention `f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx`.
//! Mask symbols are normalized so that `φ̂(Mᵀξ) = â(ξ) φ̂(ξ)` with `â(0) = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::DilationScheme;

/// Default truncation radius for sinc lattice sums, in sample-index units.
pub const DEFAULT_SINC_RADIUS: f64 = 200.0;

/// Step sizes used for log-log zero-order estimation.
const ZERO_ORDER_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Accepted distance of a fitted slope from the nearest integer.
const ZERO_ORDER_TOLERANCE: f64 = 0.1;
/// Symbol magnitudes below this are rounding noise and excluded from the fit.
const ZERO_ORDER_NOISE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `sin(πx)/(πx)`; lattice sums are truncated to `|u - k| ≤ radius`.
    Sinc { radius: f64 },
    /// Hat function on `[0, 2]` with peak 1 at `x = 1`.
    BSpline2,
    /// Product of univariate factors, one per axis.
    TensorProduct(Vec<Generator>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Closed per-axis interval outside of which the generator vanishes.
    CompactBox(Vec<(f64, f64)>),
    /// Global support; sums are cut at the given radius.
    GlobalWithDecayRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRuleOrder {
    Finite(u32),
    Unbounded,
}

/// Open interval `(lo, hi)` of exponents `s` with `φ ∈ Hˢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothnessInterval {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && s < self.hi
    }
}

impl Generator {
    pub fn sinc() -> Self {
        Generator::Sinc {
            radius: DEFAULT_SINC_RADIUS,
        }
    }

    pub fn sinc_with_radius(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Argument(format!(
                "sinc truncation radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Generator::Sinc { radius })
    }

    /// Tensor product of univariate factors. Nested tensors are rejected.
    pub fn tensor(factors: Vec<Generator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Argument("tensor product needs at least one factor".into()));
        }
        if factors.iter().any(|f| matches!(f, Generator::TensorProduct(_))) {
            return Err(Error::Argument("tensor factors must be univariate".into()));
        }
        Ok(Generator::TensorProduct(factors))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Generator::TensorProduct(factors) => factors.len(),
            _ => 1,
        }
    }

    /// Univariate factor for each axis.
    pub fn factors(&self) -> &[Generator] {
        match self {
            Generator::TensorProduct(factors) => factors,
            other => std::slice::from_ref(other),
        }
    }

    /// Same generator with every sinc factor truncated at `radius`.
    pub fn with_sinc_radius(&self, radius: f64) -> Result<Self> {
        match self {
            Generator::Sinc { .. } => Generator::sinc_with_radius(radius),
            Generator::BSpline2 => Ok(Generator::BSpline2),
            Generator::TensorProduct(factors) => Ok(Generator::TensorProduct(
                factors
                    .iter()
                    .map(|f| f.with_sinc_radius(radius))
                    .collect::<Result<_>>()?,
            )),
        }
    }

    pub fn has_global_support(&self) -> bool {
        self.factors().iter().any(|f| matches!(f, Generator::Sinc { .. }))
    }

    pub fn support(&self) -> Support {
        if let Some(radius) = self
            .factors()
            .iter()
            .filter_map(|f| match f {
                Generator::Sinc { radius } => Some(*radius),
                _ => None,
            })
            .reduce(f64::max)
        {
            Support::GlobalWithDecayRadius(radius)
        } else {
            Support::CompactBox((0..self.dimension()).map(|i| self.axis_window(i)).collect())
        }
    }

    /// Closed interval of `t` on axis `axis` outside which the factor is zero
    /// (or truncated, for sinc).
    pub fn axis_window(&self, axis: usize) -> (f64, f64) {
        match &self.factors()[axis] {
            Generator::Sinc { radius } => (-radius, *radius),
            Generator::BSpline2 => (0.0, 2.0),
            Generator::TensorProduct(_) => unreachable!("tensor factors are univariate"),
        }
    }

    pub fn sum_rule_order(&self) -> SumRuleOrder {
        self.factors()
            .iter()
            .map(|f| match f {
                Generator::Sinc { .. } => SumRuleOrder::Unbounded,
                Generator::BSpline2 => SumRuleOrder::Finite(2),
                Generator::TensorProduct(_) => unreachable!(),
            })
            .fold(SumRuleOrder::Unbounded, |acc, o| match (acc, o) {
                (SumRuleOrder::Unbounded, o) => o,
                (a, SumRuleOrder::Unbounded) => a,
                (SumRuleOrder::Finite(a), SumRuleOrder::Finite(b)) => SumRuleOrder::Finite(a.min(b)),
            })
    }

    pub fn smoothness_interval(&self) -> SmoothnessInterval {
        let hi = self
            .factors()
            .iter()
            .map(|f| match f {
                Generator::Sinc { .. } => f64::INFINITY,
                Generator::BSpline2 => 1.5,
                Generator::TensorProduct(_) => unreachable!(),
            })
            .fold(f64::INFINITY, f64::min);
        SmoothnessInterval {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dimension(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.factors().iter().zip(x).map(|(f, &t)| f.eval_factor(t)).product()
    }

    /// Value of a univariate factor at `t`. Sinc factors ignore the truncation
    /// radius here; truncation only applies to lattice sums.
    pub(crate) fn eval_factor(&self, t: f64) -> f64 {
        match self {
            Generator::Sinc { .. } => sinc(t),
            Generator::BSpline2 => bspline2(t),
            Generator::TensorProduct(_) => unreachable!(),
        }
    }

    pub fn fourier(&self, xi: &[f64]) -> Result<Complex64> {
        Error::check_dim(self.dimension(), xi.len())?;
        Ok(self
            .factors()
            .iter()
            .zip(xi)
            .map(|(f, &w)| f.fourier_factor(w))
            .product())
    }

    pub(crate) fn fourier_factor(&self, xi: f64) -> Complex64 {
        match self {
            Generator::Sinc { .. } => {
                if xi.abs() <= PI {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            // ((1 - e^{-iξ})/(iξ))² = e^{-iξ} (sin(ξ/2)/(ξ/2))²
            Generator::BSpline2 => {
                let r = sin_ratio(xi / 2.0);
                Complex64::from_polar(r * r, -xi)
            }
            Generator::TensorProduct(_) => unreachable!(),
        }
    }

    pub fn mask_symbol(&self, xi: &[f64]) -> Result<Complex64> {
        Error::check_dim(self.dimension(), xi.len())?;
        Ok(self
            .factors()
            .iter()
            .zip(xi)
            .map(|(f, &w)| match f {
                // Ideal low-pass, 1 on [-π/2, π/2] mod 2π.
                Generator::Sinc { .. } => {
                    let r = wrap_to_pi(w);
                    if r.abs() <= PI / 2.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                Generator::BSpline2 => {
                    let c = (w / 2.0).cos();
                    Complex64::from_polar(c * c, -w)
                }
                Generator::TensorProduct(_) => unreachable!(),
            })
            .product())
    }

    /// Refinement mask as a trigonometric polynomial, for `M = 2I`.
    pub fn mask_coefficients(&self) -> Result<TrigPolynomial> {
        let mut factors = Vec::with_capacity(self.dimension());
        for f in self.factors() {
            factors.push(match f {
                Generator::Sinc { .. } => {
                    return Err(Error::Unsupported(
                        "the sinc mask is an ideal low-pass filter, not a trigonometric polynomial".into(),
                    ))
                }
                Generator::BSpline2 => TrigPolynomial::bspline2_mask(),
                Generator::TensorProduct(_) => unreachable!(),
            });
        }
        let mut iter = factors.into_iter();
        let first = iter.next().expect("at least one factor");
        Ok(iter.fold(first, |acc, f| acc.tensor(&f)))
    }

    /// Estimates the sum-rule order from the zeros of the mask symbol at the
    /// aliasing points of `2I` and checks it against the declared order.
    pub fn sum_rule_order_check(&self) -> Result<u32> {
        let declared = match self.sum_rule_order() {
            SumRuleOrder::Finite(n) => n,
            SumRuleOrder::Unbounded => {
                return Err(Error::Unsupported(
                    "sum-rule order of a band-limited generator is unbounded and not estimated".into(),
                ))
            }
        };
        let mask = self.mask_coefficients()?;
        let scheme = DilationScheme::dyadic(self.dimension())?;
        let estimated = estimate_zero_order(&mask, &scheme)?;
        if estimated != declared {
            return Err(Error::Consistency(format!(
                "estimated sum-rule order {estimated} differs from declared order {declared}"
            )));
        }
        Ok(estimated)
    }

    /// Config id (`"sinc"`, `"bspline2"`, `"tensor:bspline2^2"`, ...).
    pub fn id(&self) -> String {
        match self {
            Generator::Sinc { .. } => "sinc".into(),
            Generator::BSpline2 => "bspline2".into(),
            Generator::TensorProduct(factors) => {
                let first = factors[0].id();
                if factors.iter().all(|f| f.id() == first) {
                    format!("tensor:{first}^{}", factors.len())
                } else {
                    let ids: Vec<_> = factors.iter().map(|f| f.id()).collect();
                    format!("tensor:{}", ids.join("*"))
                }
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sinc" => return Ok(Generator::sinc()),
            "bspline2" => return Ok(Generator::BSpline2),
            _ => {}
        }
        let Some(rest) = s.strip_prefix("tensor:") else {
            return Err(Error::Config(format!("unknown generator id `{s}`")));
        };
        let factors = if let Some((base, power)) = rest.split_once('^') {
            let n: usize = power
                .parse()
                .map_err(|_| Error::Config(format!("bad tensor power in `{s}`")))?;
            if n == 0 || n > 3 {
                return Err(Error::Config(format!("tensor power must be 1..=3 in `{s}`")));
            }
            vec![base.parse::<Generator>()?; n]
        } else {
            rest.split('*').map(str::parse).collect::<Result<Vec<Generator>>>()?
        };
        Generator::tensor(factors).map_err(|e| Error::Config(e.to_string()))
    }
}

/// `sin(πx)/(πx)`, exact zeros at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    sin_pi(x) / (PI * x)
}

/// `sin(πx)` with argument reduction so that integers give exactly zero.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let v = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        v
    } else {
        -v
    }
}

pub fn bspline2(t: f64) -> f64 {
    if (0.0..1.0).contains(&t) {
        t
    } else if (1.0..=2.0).contains(&t) {
        2.0 - t
    } else {
        0.0
    }
}

fn sin_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn wrap_to_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `â(ξ) = Σ_k c_k e^{-i k·ξ}` with integer multi-indices `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dimension: usize,
    terms: Vec<(Vec<i64>, f64)>,
}

impl TrigPolynomial {
    pub fn new(dimension: usize, terms: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Argument("trigonometric polynomial needs d >= 1".into()));
        }
        for (k, _) in &terms {
            Error::check_dim(dimension, k.len())?;
        }
        Ok(Self { dimension, terms })
    }

    /// Refinement coefficients `{1/2, 1, 1/2}` of `B₂`, halved.
    pub fn bspline2_mask() -> Self {
        Self {
            dimension: 1,
            terms: vec![(vec![0], 0.25), (vec![1], 0.5), (vec![2], 0.25)],
        }
    }

    /// Haar mask `(1 + e^{-iξ})/2`.
    pub fn haar_mask() -> Self {
        Self {
            dimension: 1,
            terms: vec![(vec![0], 0.5), (vec![1], 0.5)],
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[(Vec<i64>, f64)] {
        &self.terms
    }

    pub fn tensor(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k = ka.clone();
                k.extend_from_slice(kb);
                terms.push((k, ca * cb));
            }
        }
        TrigPolynomial {
            dimension: self.dimension + other.dimension,
            terms,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        Error::check_dim(self.dimension, xi.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(xi).map(|(&ki, &x)| ki as f64 * x).sum();
                Complex64::from_polar(*c, -phase)
            })
            .sum())
    }
}

/// Minimum zero order of `mask` over the nonzero aliasing points `2πγ`,
/// `γ ∈ Γ_{Mᵀ} \ {0}`, estimated by log-log slopes along a fixed direction.
pub fn estimate_zero_order(mask: &TrigPolynomial, scheme: &DilationScheme) -> Result<u32> {
    Error::check_dim(scheme.dimension(), mask.dimension())?;
    let d = mask.dimension();
    let direction = probe_direction(d);
    let mut best: Option<u32> = None;

    for gamma in scheme.coset_representatives() {
        if gamma.is_zero() {
            continue;
        }
        let center: Vec<f64> = gamma.to_f64().iter().map(|g| 2.0 * PI * g).collect();
        let mut pts = Vec::with_capacity(ZERO_ORDER_STEPS.len());
        for &h in &ZERO_ORDER_STEPS {
            let xi: Vec<f64> = center.iter().zip(&direction).map(|(c, u)| c + h * u).collect();
            let v = mask.eval(&xi)?.norm();
            if v > ZERO_ORDER_NOISE {
                pts.push((h.ln(), v.ln()));
            }
        }
        // Fewer than two usable points: the zero is deeper than the noise floor
        // allows us to resolve, so it cannot be the minimum unless all are.
        if pts.len() < 2 {
            continue;
        }
        let slope = least_squares_slope(&pts);
        let order = slope.round();
        if (slope - order).abs() > ZERO_ORDER_TOLERANCE || order < 0.0 {
            return Err(Error::Consistency(format!(
                "zero order at aliasing point {:?} is not an integer (slope {slope:.4})",
                center
            )));
        }
        let order = order as u32;
        best = Some(best.map_or(order, |b| b.min(order)));
    }
    best.ok_or_else(|| Error::Consistency("no aliasing point yielded a resolvable zero order".into()))
}

fn probe_direction(d: usize) -> Vec<f64> {
    let raw = [1.0, 0.754_877_666_246_692_7, 0.569_840_290_998_053_3];
    let v = &raw[..d.min(raw.len())];
    let mut v: Vec<f64> = v.to_vec();
    v.resize(d, 0.5);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor_b2() -> Generator {
        "tensor:bspline2^2".parse().unwrap()
    }

    #[test]
    fn point_values() {
        assert_eq!(Generator::BSpline2.eval(&[0.5]).unwrap(), 0.5);
        assert_eq!(Generator::BSpline2.eval(&[1.0]).unwrap(), 1.0);
        assert_eq!(Generator::BSpline2.eval(&[2.0]).unwrap(), 0.0);
        assert_eq!(Generator::sinc().eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(Generator::sinc().eval(&[1.0]).unwrap(), 0.0);
        for k in [-7, -2, 3, 11] {
            assert_eq!(sinc(k as f64), 0.0);
        }
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        assert!(matches!(
            tensor_b2().eval(&[0.5]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn fourier_values() {
        assert!((Generator::BSpline2.fourier(&[0.0]).unwrap() - 1.0).norm() < 1e-15);
        let v = Generator::BSpline2.fourier(&[PI]).unwrap().norm();
        // Frozen from midpoint quadrature of ∫B₂(x)e^{-iπx}dx (oracle in tests/oracles.rs).
        assert!((v - 0.405_284_734_569_351_1).abs() < 1e-12);
        assert_eq!(Generator::sinc().fourier(&[2.0 * PI]).unwrap().norm(), 0.0);
        for g in [Generator::sinc(), Generator::BSpline2, tensor_b2()] {
            let zero = vec![0.0; g.dimension()];
            assert!((g.fourier(&zero).unwrap() - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn refinement_relation_holds_for_bspline2() {
        for &xi in &[0.1, 0.7, 1.9, 3.0, -2.2, 5.5] {
            let lhs = Generator::BSpline2.fourier(&[2.0 * xi]).unwrap();
            let rhs = Generator::BSpline2.mask_symbol(&[xi]).unwrap() * Generator::BSpline2.fourier(&[xi]).unwrap();
            assert!((lhs - rhs).norm() < 1e-14, "xi={xi}");
            let from_coeffs = TrigPolynomial::bspline2_mask().eval(&[xi]).unwrap();
            assert!((from_coeffs - Generator::BSpline2.mask_symbol(&[xi]).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn mask_values() {
        assert!((Generator::BSpline2.mask_symbol(&[0.0]).unwrap() - 1.0).norm() < 1e-15);
        assert!(Generator::BSpline2.mask_symbol(&[PI]).unwrap().norm() < 1e-15);
        assert!(tensor_b2().mask_symbol(&[PI, 0.0]).unwrap().norm() < 1e-15);
        assert_eq!(Generator::sinc().mask_symbol(&[1.0]).unwrap().re, 1.0);
        assert_eq!(Generator::sinc().mask_symbol(&[2.0]).unwrap().re, 0.0);
        assert_eq!(Generator::sinc().mask_symbol(&[2.0 * PI + 1.0]).unwrap().re, 1.0);
        assert!(matches!(
            Generator::sinc().mask_coefficients(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sum_rule_orders() {
        assert_eq!(Generator::BSpline2.sum_rule_order_check().unwrap(), 2);
        assert_eq!(tensor_b2().sum_rule_order_check().unwrap(), 2);
        let haar = TrigPolynomial::haar_mask();
        assert_eq!(
            estimate_zero_order(&haar, &DilationScheme::dyadic(1).unwrap()).unwrap(),
            1
        );
        assert!(matches!(
            Generator::sinc().sum_rule_order_check(),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(Generator::sinc().sum_rule_order(), SumRuleOrder::Unbounded);
    }

    #[test]
    fn partition_of_unity_and_linear_identity() {
        for i in 0..200 {
            let x = -5.0 + 10.0 * (i as f64 + 0.37) / 200.0;
            let lo = (x - 2.0).ceil() as i64;
            let hi = x.floor() as i64;
            let (mut s0, mut s1) = (0.0, 0.0);
            for k in lo..=hi {
                let b = bspline2(x - k as f64);
                s0 += b;
                s1 += k as f64 * b;
            }
            assert!((s0 - 1.0).abs() < 1e-12);
            assert!((s1 - (x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_invariants() {
        let g = tensor_b2();
        assert_eq!(g.dimension(), 2);
        assert_eq!(g.support(), Support::CompactBox(vec![(0.0, 2.0), (0.0, 2.0)]));
        assert!((g.smoothness_interval().hi - 1.5).abs() < 1e-15);
        for &(a, b) in &[(0.3, 1.7), (1.2, 0.4), (1.99, 0.01)] {
            let prod = bspline2(a) * bspline2(b);
            assert!((g.eval(&[a, b]).unwrap() - prod).abs() < 1e-15);
        }
        let s: Generator = "tensor:sinc^2".parse().unwrap();
        assert_eq!(s.support(), Support::GlobalWithDecayRadius(DEFAULT_SINC_RADIUS));
    }

    #[test]
    fn id_round_trip() {
        for id in ["sinc", "bspline2", "tensor:bspline2^2", "tensor:sinc^2"] {
            let g: Generator = id.parse().unwrap();
            assert_eq!(g.id(), id);
        }
        assert!("bspline3".parse::<Generator>().is_err());
    }
}
