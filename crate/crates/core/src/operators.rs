//! Sampling approximation operators
//!
//! ```text
//! S_{φ;ε}^N f(x) = Σ_k f(M^{-N}(k + ε_k)) φ(M^N x − k)
//! ```
//!
//! with `ε ≡ 0` giving the uniform operator `S_φ^N`. The sum runs over the
//! index box of the perturbation sequence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::generators::{sin_pi, Generator};
use crate::lattice::{DilationScheme, IndexBox, RealBox, ScaleMap};
use crate::perturbation::PerturbationSequence;

/// Largest evaluation grid the library will allocate.
pub const MAX_GRID_NODES: u128 = 50_000_000;

#[derive(Debug, Clone)]
pub struct Approximant {
    generator: Generator,
    scheme: DilationScheme,
    level: u32,
    map: ScaleMap,
    perturbation: PerturbationSequence,
    samples: Vec<f64>,
}

/// Value at a point plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEvaluation {
    pub value: f64,
    /// Number of lattice terms visited.
    pub terms: usize,
    /// The generator window at this point extends past the stored index box,
    /// so dropped terms may bias the value.
    pub outside_domain: bool,
}

impl Approximant {
    /// Samples `f` at `M^{-N}(k + ε_k)` for every `k` in the perturbation's box.
    pub fn build(
        f: &TestFunction,
        generator: &Generator,
        scheme: &DilationScheme,
        level: u32,
        perturbation: PerturbationSequence,
    ) -> Result<Self> {
        let d = scheme.dimension();
        Error::check_dim(d, generator.dimension())?;
        Error::check_dim(d, f.dimension())?;
        Error::check_dim(d, perturbation.dimension())?;
        let map = scheme.scale(level as i64);
        let bx = perturbation.index_box().clone();
        let lambda = perturbation.lambda().to_vec();

        let samples: Vec<f64> = (0..bx.len())
            .into_par_iter()
            .map(|off| {
                let k = bx.index_at(off);
                let theta = perturbation.theta_at_offset(off);
                let shifted: Vec<f64> = (0..d).map(|i| k[i] as f64 + (theta[i] + lambda[i])).collect();
                f.eval_unchecked(&map.inverse(&shifted))
            })
            .collect();

        if let Some(off) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data {
                index: bx.index_at(off),
                value: samples[off],
            });
        }
        Ok(Self {
            generator: generator.clone(),
            scheme: scheme.clone(),
            level,
            map,
            perturbation,
            samples,
        })
    }

    /// Approximant with caller-supplied sample values, one per box index.
    pub fn from_samples(
        generator: &Generator,
        scheme: &DilationScheme,
        level: u32,
        perturbation: PerturbationSequence,
        samples: Vec<f64>,
    ) -> Result<Self> {
        Error::check_dim(scheme.dimension(), generator.dimension())?;
        Error::check_dim(scheme.dimension(), perturbation.dimension())?;
        Error::check_dim(perturbation.index_box().len(), samples.len())?;
        if let Some(off) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data {
                index: perturbation.index_box().index_at(off),
                value: samples[off],
            });
        }
        Ok(Self {
            generator: generator.clone(),
            scheme: scheme.clone(),
            level,
            map: scheme.scale(level as i64),
            perturbation,
            samples,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn scheme(&self) -> &DilationScheme {
        &self.scheme
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn perturbation(&self) -> &PerturbationSequence {
        &self.perturbation
    }

    pub fn index_box(&self) -> &IndexBox {
        self.perturbation.index_box()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Cached sample `f(M^{-N}(k + ε_k))`.
    pub fn sample(&self, k: &[i64]) -> Option<f64> {
        self.index_box().offset(k).map(|o| self.samples[o])
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_detailed(x)?.value)
    }

    pub fn eval_detailed(&self, x: &[f64]) -> Result<PointEvaluation> {
        Error::check_dim(self.scheme.dimension(), x.len())?;
        let mut scratch = Scratch::new(self.scheme.dimension());
        Ok(self.eval_with(x, &mut scratch))
    }

    fn eval_with(&self, x: &[f64], s: &mut Scratch) -> PointEvaluation {
        let d = self.scheme.dimension();
        let bx = self.perturbation.index_box();
        self.map.forward_into(x, &mut s.u);

        let mut outside = false;
        for i in 0..d {
            let (klo, khi) = term_window(self.generator.factors()[i].factor_kind(), s.u[i]);
            outside |= klo < bx.lo()[i] || khi > bx.hi()[i];
            let lo = klo.max(bx.lo()[i]);
            let hi = khi.min(bx.hi()[i]);
            s.lo[i] = lo;
            s.weights[i].clear();
            if lo > hi {
                return PointEvaluation {
                    value: 0.0,
                    terms: 0,
                    outside_domain: outside,
                };
            }
            fill_weights(&self.generator.factors()[i], s.u[i], lo, hi, &mut s.weights[i]);
        }

        // Row-major strides of the stored box.
        let mut base = 0usize;
        for i in 0..d {
            base = base * bx.extent(i) + (s.lo[i] - bx.lo()[i]) as usize;
        }
        let (value, terms) = match d {
            1 => {
                let w = &s.weights[0];
                let v: f64 = w
                    .iter()
                    .zip(&self.samples[base..base + w.len()])
                    .map(|(a, b)| a * b)
                    .sum();
                (v, w.len())
            }
            _ => self.tensor_sum(base, s),
        };
        PointEvaluation {
            value,
            terms,
            outside_domain: outside,
        }
    }

    fn tensor_sum(&self, base: usize, s: &Scratch) -> (f64, usize) {
        let d = self.scheme.dimension();
        let bx = self.perturbation.index_box();
        let mut strides = vec![1usize; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1] * bx.extent(i + 1);
        }
        let counts: Vec<usize> = s.weights.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; d];
        let mut acc = 0.0;
        for _ in 0..total {
            let mut w = 1.0;
            let mut off = base;
            for i in 0..d {
                w *= s.weights[i][idx[i]];
                off += idx[i] * strides[i];
            }
            acc += w * self.samples[off];
            for i in (0..d).rev() {
                idx[i] += 1;
                if idx[i] < counts[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        (acc, total)
    }

    /// Values at every node of `grid`, in row-major node order. Each node is
    /// evaluated independently, so the output does not depend on thread count.
    pub fn eval_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        let d = self.scheme.dimension();
        Error::check_dim(d, grid.dimension())?;
        Ok((0..grid.len())
            .into_par_iter()
            .map_init(
                || (Scratch::new(d), vec![0.0; d]),
                |(scratch, x), n| {
                    grid.node_into(n, x);
                    self.eval_with(x, scratch).value
                },
            )
            .collect())
    }
}

struct Scratch {
    u: Vec<f64>,
    lo: Vec<i64>,
    weights: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Self {
            u: vec![0.0; d],
            lo: vec![0; d],
            weights: vec![Vec::new(); d],
        }
    }
}

#[derive(Clone, Copy)]
enum FactorKind {
    Sinc(f64),
    BSpline2,
}

impl Generator {
    fn factor_kind(&self) -> FactorKind {
        match self {
            Generator::Sinc { radius } => FactorKind::Sinc(*radius),
            Generator::BSpline2 => FactorKind::BSpline2,
            Generator::TensorProduct(_) => unreachable!("factors are univariate"),
        }
    }
}

/// Integers `k` whose factor term `φ(u − k)` is summed.
fn term_window(kind: FactorKind, u: f64) -> (i64, i64) {
    match kind {
        // |u − k| ≤ R
        FactorKind::Sinc(r) => ((u - r).ceil() as i64, (u + r).floor() as i64),
        // B₂ vanishes at 0 and 2: 0 < u − k < 2
        FactorKind::BSpline2 => ((u - 2.0).floor() as i64 + 1, u.ceil() as i64 - 1),
    }
}

fn fill_weights(g: &Generator, u: f64, lo: i64, hi: i64, out: &mut Vec<f64>) {
    match g {
        Generator::Sinc { .. } => {
            // sin(π(u − k)) = (−1)^k sin(πu)
            let s = sin_pi(u);
            let inv_pi = std::f64::consts::FRAC_1_PI;
            for k in lo..=hi {
                let t = u - k as f64;
                let w = if t == 0.0 {
                    1.0
                } else {
                    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    sign * s * inv_pi / t
                };
                out.push(w);
            }
        }
        _ => out.extend((lo..=hi).map(|k| g.eval_factor(u - k as f64))),
    }
}

/// Cell-midpoint grid over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: RealBox,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(domain: RealBox, counts: Vec<usize>) -> Result<Self> {
        Error::check_dim(domain.dimension(), counts.len())?;
        if counts.contains(&0) {
            return Err(Error::Argument("grid needs at least one node per axis".into()));
        }
        let total: u128 = counts.iter().map(|&c| c as u128).product();
        if total > MAX_GRID_NODES {
            return Err(Error::InstanceTooLarge {
                resource: "evaluation grid",
                count: total,
                limit: MAX_GRID_NODES,
                suggestion: format!(
                    "lower the resolution by a factor of at least {:.3}",
                    (total as f64 / MAX_GRID_NODES as f64).powf(1.0 / counts.len() as f64)
                ),
            });
        }
        Ok(Self { domain, counts })
    }

    /// `⌈length · nodes_per_unit⌉` cells per axis.
    pub fn with_resolution(domain: RealBox, nodes_per_unit: f64) -> Result<Self> {
        if !(nodes_per_unit > 0.0 && nodes_per_unit.is_finite()) {
            return Err(Error::Argument(format!("bad grid resolution {nodes_per_unit}")));
        }
        let counts: Vec<u128> = domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(a, b)| (((b - a) * nodes_per_unit).ceil() as u128).max(1))
            .collect();
        let total: u128 = counts.iter().product();
        if total > MAX_GRID_NODES {
            return Err(Error::InstanceTooLarge {
                resource: "evaluation grid",
                count: total,
                limit: MAX_GRID_NODES,
                suggestion: format!(
                    "lower the resolution to at most {:.3} nodes per unit",
                    nodes_per_unit / (total as f64 / MAX_GRID_NODES as f64).powf(1.0 / counts.len() as f64)
                ),
            });
        }
        Self::new(domain, counts.into_iter().map(|c| c as usize).collect())
    }

    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn domain(&self) -> &RealBox {
        &self.domain
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dimension())
            .map(|i| (self.domain.hi[i] - self.domain.lo[i]) / self.counts[i] as f64)
            .product()
    }

    pub fn node(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dimension()];
        self.node_into(n, &mut x);
        x
    }

    pub(crate) fn node_into(&self, mut n: usize, x: &mut [f64]) {
        for i in (0..self.dimension()).rev() {
            let c = self.counts[i];
            let j = n % c;
            n /= c;
            let h = (self.domain.hi[i] - self.domain.lo[i]) / c as f64;
            x[i] = self.domain.lo[i] + (j as f64 + 0.5) * h;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::sinc;

    fn dyadic(d: usize) -> DilationScheme {
        DilationScheme::dyadic(d).unwrap()
    }

    fn uniform(f: &TestFunction, g: &Generator, scheme: &DilationScheme, level: u32, domain: &RealBox) -> Approximant {
        let bx = scheme.index_box_for_domain(level, domain, g).unwrap();
        let eps = PerturbationSequence::zero(bx, 1.0).unwrap();
        Approximant::build(f, g, scheme, level, eps).unwrap()
    }

    #[test]
    fn build_examples() {
        let s = dyadic(1);
        let domain = RealBox::symmetric(3.0, 1).unwrap();
        let a = uniform(&TestFunction::one(1), &Generator::BSpline2, &s, 0, &domain);
        assert!(a.samples().iter().all(|&v| v == 1.0));

        let a = uniform(&TestFunction::first_coordinate(1), &Generator::BSpline2, &s, 1, &domain);
        assert_eq!(a.sample(&[3]), Some(1.5));

        let bx = IndexBox::new(vec![-2], vec![2]).unwrap();
        let eps = PerturbationSequence::from_entries(bx, vec![0.0], &[(vec![0], vec![0.5])], 1.0).unwrap();
        let a = Approximant::build(&TestFunction::exp_abs(), &Generator::BSpline2, &s, 0, eps).unwrap();
        assert!((a.sample(&[0]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let f = TestFunction::new("pole", 1, |x| 1.0 / x[0], None, 0.0);
        let bx = IndexBox::new(vec![-1], vec![1]).unwrap();
        let eps = PerturbationSequence::zero(bx, 1.0).unwrap();
        match Approximant::build(&f, &Generator::BSpline2, &dyadic(1), 0, eps) {
            Err(Error::Data { index, .. }) => assert_eq!(index, vec![0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eval_examples() {
        let s = dyadic(1);
        let domain = RealBox::symmetric(10.0, 1).unwrap();
        for level in 0..4 {
            let a = uniform(&TestFunction::one(1), &Generator::BSpline2, &s, level, &domain);
            for &x in &[-3.3, 0.0, 0.123, 7.9] {
                assert!((a.eval(&[x]).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let a = uniform(&TestFunction::first_coordinate(1), &Generator::BSpline2, &s, 0, &domain);
        assert!((a.eval(&[5.0]).unwrap() - 4.0).abs() < 1e-12);

        let bx = s.index_box_for_domain(0, &domain, &Generator::BSpline2).unwrap();
        let eps = PerturbationSequence::constant(bx, vec![1.0], 1.0).unwrap();
        let a = Approximant::build(&TestFunction::first_coordinate(1), &Generator::BSpline2, &s, 0, eps).unwrap();
        assert!((a.eval(&[5.0]).unwrap() - 5.0).abs() < 1e-12);

        let a = uniform(&TestFunction::sinc_shift(3), &Generator::sinc(), &s, 0, &domain);
        let expected = (2.5 * std::f64::consts::PI).sin() / (2.5 * std::f64::consts::PI);
        let got = a.eval(&[0.5]).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((expected - sinc(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_is_flagged() {
        let s = dyadic(1);
        let domain = RealBox::new(vec![0.0], vec![1.0]).unwrap();
        let a = uniform(&TestFunction::one(1), &Generator::BSpline2, &s, 2, &domain);
        assert!(!a.eval_detailed(&[0.5]).unwrap().outside_domain);
        assert!(a.eval_detailed(&[3.0]).unwrap().outside_domain);
    }

    #[test]
    fn bspline_locality() {
        let s = dyadic(2);
        let g: Generator = "tensor:bspline2^2".parse().unwrap();
        let domain = RealBox::symmetric(2.0, 2).unwrap();
        let a = uniform(&TestFunction::gaussian(2), &g, &s, 3, &domain);
        for &x in &[[0.1, 0.2], [-1.0, 1.0], [0.0, 0.0], [1.3, -0.77]] {
            let e = a.eval_detailed(&x).unwrap();
            assert!(e.terms <= 4, "{x:?}: {}", e.terms);
        }
    }

    #[test]
    fn grid_examples() {
        let s = dyadic(1);
        let domain = RealBox::symmetric(5.0, 1).unwrap();
        let a = uniform(&TestFunction::exp_abs(), &Generator::BSpline2, &s, 3, &domain);
        let one = Grid::new(RealBox::new(vec![0.2], vec![0.4]).unwrap(), vec![1]).unwrap();
        assert_eq!(a.eval_grid(&one).unwrap(), vec![a.eval(&one.node(0)).unwrap()]);

        let c = uniform(&TestFunction::one(1), &Generator::BSpline2, &s, 3, &domain);
        let grid = Grid::new(RealBox::symmetric(4.0, 1).unwrap(), vec![101]).unwrap();
        assert!(c.eval_grid(&grid).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let grid = Grid::with_resolution(domain.clone(), 37.0).unwrap();
        let pooled = a.eval_grid(&grid).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| a.eval_grid(&grid).unwrap());
        assert_eq!(
            pooled.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            single.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        for (n, v) in pooled.iter().enumerate().step_by(17) {
            assert_eq!(*v, a.eval(&grid.node(n)).unwrap());
        }
    }

    #[test]
    fn grid_guard() {
        let domain = RealBox::symmetric(100.0, 2).unwrap();
        assert!(matches!(
            Grid::with_resolution(domain, 1e4),
            Err(Error::InstanceTooLarge { .. })
        ));
    }
}
