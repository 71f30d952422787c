//! Self-checks behind `framelet verify`: each compares a computed quantity
//! with an independent closed form.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    bracket_product, sobolev_norm, spatial_l2_norm, tail_sum_bound, tail_sum_bruteforce, SobolevQuadrature,
};
use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::generators::Generator;
use crate::lattice::{DilationScheme, RealBox};
use crate::operators::Approximant;
use crate::perturbation::PerturbationSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Tail,
    Bracket,
    Poly,
    Norms,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Tail, Suite::Bracket, Suite::Poly, Suite::Norms];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tail => "tail",
            Suite::Bracket => "bracket",
            Suite::Poly => "poly",
            Suite::Norms => "norms",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown verification suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            suite: suite.name(),
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Tail => tail_checks(),
        Suite::Bracket => bracket_checks(),
        Suite::Poly => poly_checks(),
        Suite::Norms => norm_checks(),
    }
}

/// `Σ_{m^J ≤ ||j||} ||j||^{-2s}` (brute force plus certified remainder) stays
/// below the closed-form bound over the whole parameter grid, and one value
/// matches `ζ(2)` arithmetic.
pub fn tail_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let m = 2.0f64;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut cases = 0;
    for d in [1usize, 2] {
        for s in [0.8, 1.0, 1.5, 2.5] {
            if 2.0 * s <= (d as f64).max(1.0) {
                continue;
            }
            let j0 = ((d as f64).ln() / m.ln()).ceil() as u32;
            for j in j0..=5 {
                let radius = if d == 1 { 1_000_000 } else { 1_500 };
                let brute = tail_sum_bruteforce(j as f64, s, d, m, radius)?;
                let bound = tail_sum_bound(j as f64, s, d, m)?;
                cases += 1;
                worst = worst.max(brute.upper() / bound);
                if brute.upper() > bound {
                    failures.push(format!("d={d} s={s} J={j}: {} > {bound}", brute.upper()));
                }
            }
        }
    }
    out.push(Check::new(
        Suite::Tail,
        "lattice tail below closed-form bound",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{cases} cases, max ratio {worst:.4}")
        } else {
            failures.join("; ")
        },
    ));

    let exact = 2.0 * (PI * PI / 6.0 - 1.0 - 0.25 - 1.0 / 9.0);
    let t = tail_sum_bruteforce(2.0, 1.0, 1, m, 10_000_000)?;
    let dev = (t.value - exact).abs();
    out.push(Check::new(
        Suite::Tail,
        "d=1 s=1 J=2 tail equals 2(π²/6 − 1 − 1/4 − 1/9)",
        dev < 1e-6 && t.upper() >= exact,
        format!(
            "value {:.9}, exact {exact:.9}, |diff| {dev:.2e}, remainder {:.2e}",
            t.value, t.remainder
        ),
    ));
    Ok(out)
}

/// `[B̂₂, B̂₂]₀(ξ) = 2/3 + cos(ξ)/3` and `[sinc, sinc]₀ ≡ 1`.
pub fn bracket_checks() -> Result<Vec<Check>> {
    let mut worst_b2: f64 = 0.0;
    let mut worst_sinc: f64 = 0.0;
    let mut worst_period: f64 = 0.0;
    for i in 0..100 {
        // avoid ξ ≡ π (mod 2π), where the ideal low-pass boundary counts twice
        let xi = -PI + 2.0 * PI * (i as f64 + 0.5) / 100.0;
        let b = bracket_product(&Generator::BSpline2, 0.0, &[xi], 400)?;
        worst_b2 = worst_b2.max((b.value - (2.0 + xi.cos()) / 3.0).abs());
        let shifted = bracket_product(&Generator::BSpline2, 0.0, &[xi + 6.0 * PI], 400)?;
        worst_period = worst_period.max((b.value - shifted.value).abs());
        let s = bracket_product(&Generator::sinc(), 0.0, &[xi], 4)?;
        worst_sinc = worst_sinc.max((s.value - 1.0).abs());
    }
    Ok(vec![
        Check::new(
            Suite::Bracket,
            "B2 bracket matches autocorrelation 2/3 + cos(ξ)/3",
            worst_b2 < 1e-8,
            format!("max deviation {worst_b2:.2e} over 100 points"),
        ),
        Check::new(
            Suite::Bracket,
            "B2 bracket is 2π-periodic",
            worst_period < 1e-10,
            format!("max deviation {worst_period:.2e}"),
        ),
        Check::new(
            Suite::Bracket,
            "sinc bracket is identically 1",
            worst_sinc < 1e-10,
            format!("max deviation {worst_sinc:.2e}"),
        ),
    ])
}

/// Polynomial identities of `B₂` shifts at random interior points, and exact
/// reproduction of `x` under the clustered jitter `ε ≡ 1`.
pub fn poly_checks() -> Result<Vec<Check>> {
    let scheme = DilationScheme::dyadic(1)?;
    let g = Generator::BSpline2;
    let domain = RealBox::symmetric(50.0, 1)?;
    let bx = scheme.index_box_for_domain(0, &domain, &g)?;
    let zero = PerturbationSequence::zero(bx.clone(), 1.0)?;
    let ones = Approximant::build(&TestFunction::one(1), &g, &scheme, 0, zero.clone())?;
    let identity = Approximant::build(&TestFunction::first_coordinate(1), &g, &scheme, 0, zero)?;
    let shifted = Approximant::build(
        &TestFunction::first_coordinate(1),
        &g,
        &scheme,
        0,
        PerturbationSequence::constant(bx, vec![1.0], 1.0)?,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut pu, mut lin, mut clustered) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-40.0..40.0);
        pu = pu.max((ones.eval(&[x])? - 1.0).abs());
        lin = lin.max((identity.eval(&[x])? - (x - 1.0)).abs());
        clustered = clustered.max((shifted.eval(&[x])? - x).abs());
    }
    Ok(vec![
        Check::new(
            Suite::Poly,
            "Σ B2(x−k) = 1",
            pu < 1e-12,
            format!("max deviation {pu:.2e} at 1000 points"),
        ),
        Check::new(
            Suite::Poly,
            "Σ k B2(x−k) = x − 1",
            lin < 1e-10,
            format!("max deviation {lin:.2e} at 1000 points"),
        ),
        Check::new(
            Suite::Poly,
            "clustered jitter λ = 1 reproduces x",
            clustered < 1e-10,
            format!("max deviation {clustered:.2e} at 1000 points"),
        ),
    ])
}

/// `||e^{-|x|}||_{L²} = 1` and `||e^{-|x|}||_{H¹} = √2` from the Fourier side,
/// cross-checked against spatial quadrature.
pub fn norm_checks() -> Result<Vec<Check>> {
    let f = TestFunction::exp_abs();
    let q = SobolevQuadrature::for_dimension(1);
    let l2 = sobolev_norm(&f, 0.0, &q)?;
    let h1 = sobolev_norm(&f, 1.0, &q)?;
    // e^{-80} is far below the quadrature error, so [−40, 40] stands in for ℝ
    let spatial = spatial_l2_norm(&f, &RealBox::symmetric(40.0, 1)?, 2000.0)?;
    let gap = (spatial.value - l2.value).abs();
    Ok(vec![
        Check::new(
            Suite::Norms,
            "||e^-|x| ||_L2 = 1",
            (l2.value - 1.0).abs() < 1e-6,
            format!("{:.10} ± {:.1e}", l2.value, l2.error),
        ),
        Check::new(
            Suite::Norms,
            "||e^-|x| ||_H1 = √2",
            (h1.value - 2f64.sqrt()).abs() < 1e-5,
            format!("{:.10} ± {:.1e}", h1.value, h1.error),
        ),
        Check::new(
            Suite::Norms,
            "Fourier and spatial L2 norms agree",
            gap <= l2.error + spatial.error + 1e-9,
            format!(
                "spatial {:.10} ± {:.1e}, |diff| {gap:.2e}",
                spatial.value, spatial.error
            ),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_suites() {
        assert_eq!("poly".parse::<Suite>().unwrap(), Suite::Poly);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for suite in [Suite::Bracket, Suite::Poly, Suite::Norms] {
            for c in run_suite(suite).unwrap() {
                assert!(c.passed, "{}: {} ({})", c.suite, c.name, c.detail);
            }
        }
    }
}
