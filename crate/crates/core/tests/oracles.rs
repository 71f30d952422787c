//! Library results against hand-written reference computations.

use std::f64::consts::PI;

use proptest::prelude::*;
use sobolev_sampling::analysis::{bracket_product, sobolev_norm, spatial_l2_norm, SobolevQuadrature};
use sobolev_sampling::perturbation::generate_uniform_jitter;
use sobolev_sampling::{Approximant, DilationScheme, Generator, PerturbationSequence, RealBox, TestFunction};

fn hat(t: f64) -> f64 {
    if (0.0..1.0).contains(&t) {
        t
    } else if (1.0..=2.0).contains(&t) {
        2.0 - t
    } else {
        0.0
    }
}

fn exp_abs(x: f64) -> f64 {
    (-x.abs()).exp()
}

fn setup(level: u32, half: f64) -> (DilationScheme, RealBox, sobolev_sampling::IndexBox) {
    let scheme = DilationScheme::dyadic(1).unwrap();
    let domain = RealBox::symmetric(half, 1).unwrap();
    let bx = scheme
        .index_box_for_domain(level, &domain, &Generator::BSpline2)
        .unwrap();
    (scheme, domain, bx)
}

#[test]
fn uniform_operator_matches_direct_sum() {
    let level = 3;
    let (scheme, _, bx) = setup(level, 5.0);
    assert!(bx.len() <= 1000);
    let zero = PerturbationSequence::zero(bx.clone(), 0.5).unwrap();
    let a = Approximant::build(&TestFunction::exp_abs(), &Generator::BSpline2, &scheme, level, zero).unwrap();
    let h = 8.0;
    for i in 0..=400 {
        let x = -4.9 + 9.8 * i as f64 / 400.0;
        let direct: f64 = bx
            .iter()
            .map(|k| exp_abs(k[0] as f64 / h) * hat(h * x - k[0] as f64))
            .sum();
        let got = a.eval(&[x]).unwrap();
        assert!((got - direct).abs() < 1e-13, "x = {x}: {got} vs {direct}");
    }
}

#[test]
fn jittered_operator_matches_direct_sum() {
    let level = 2;
    let (scheme, _, bx) = setup(level, 5.0);
    let eps = generate_uniform_jitter(bx.clone(), 0.5, vec![0.25], 7, 0.5).unwrap();
    let a = Approximant::build(
        &TestFunction::exp_abs(),
        &Generator::BSpline2,
        &scheme,
        level,
        eps.clone(),
    )
    .unwrap();
    let h = 4.0;
    for i in 0..=200 {
        let x = -4.5 + 9.0 * i as f64 / 200.0;
        let direct: f64 = bx
            .iter()
            .map(|k| {
                let e = eps.epsilon(&k)[0];
                exp_abs((k[0] as f64 + e) / h) * hat(h * x - k[0] as f64)
            })
            .sum();
        assert!((a.eval(&[x]).unwrap() - direct).abs() < 1e-13);
    }
}

#[test]
fn sinc_reproduces_shifted_sinc_on_dyadic_points() {
    let scheme = DilationScheme::dyadic(1).unwrap();
    let g = Generator::sinc_with_radius(64.0).unwrap();
    let domain = RealBox::symmetric(10.0, 1).unwrap();
    let bx = scheme.index_box_for_domain(0, &domain, &g).unwrap();
    let zero = PerturbationSequence::zero(bx, 0.5).unwrap();
    let f = TestFunction::sinc_shift(3);
    let a = Approximant::build(&f, &g, &scheme, 0, zero).unwrap();
    for j in -32..=32 {
        let x = j as f64 / 4.0;
        let expect = f.eval(&[x]).unwrap();
        assert!((a.eval(&[x]).unwrap() - expect).abs() < 1e-14, "x = {x}");
    }
}

#[test]
fn b2_fourier_at_pi_by_quadrature() {
    let n = 200_000;
    let step = 2.0 / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..n {
        let x = (i as f64 + 0.5) * step;
        re += hat(x) * (PI * x).cos() * step;
        im -= hat(x) * (PI * x).sin() * step;
    }
    let quad = re.hypot(im);
    let lib = Generator::BSpline2.fourier(&[PI]).unwrap().norm();
    assert!((quad - 4.0 / (PI * PI)).abs() < 1e-9);
    assert!((lib - 4.0 / (PI * PI)).abs() < 1e-14);
}

#[test]
fn b2_bracket_at_pi_is_one_third() {
    let b = bracket_product(&Generator::BSpline2, 0.0, &[PI - 1e-9], 2000).unwrap();
    assert!((b.value - 1.0 / 3.0).abs() < 1e-9, "{}", b.value);
    assert!(b.remainder < 1e-6);
}

#[test]
fn plancherel() {
    for (id, half, res) in [
        ("exp-abs", 40.0, 2000.0),
        ("gauss-1d", 12.0, 200.0),
        ("gauss-2d", 8.0, 40.0),
    ] {
        let f: TestFunction = id.parse().unwrap();
        let d = f.dimension();
        let fourier = sobolev_norm(&f, 0.0, &SobolevQuadrature::for_dimension(d)).unwrap();
        let spatial = spatial_l2_norm(&f, &RealBox::symmetric(half, d).unwrap(), res).unwrap();
        let gap = (fourier.value - spatial.value).abs();
        assert!(
            gap <= fourier.error + spatial.error + 1e-9,
            "{id}: {} vs {} (gap {gap:.2e})",
            fourier.value,
            spatial.value
        );
    }
}

proptest! {
    #[test]
    fn operator_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -4.0f64..4.0) {
        let level = 2;
        let (scheme, _, bx) = setup(level, 5.0);
        let zero = PerturbationSequence::zero(bx.clone(), 0.5).unwrap();
        let g = Generator::BSpline2;
        let f1 = Approximant::build(&TestFunction::exp_abs(), &g, &scheme, level, zero.clone()).unwrap();
        let f2 = Approximant::build(&TestFunction::gaussian(1), &g, &scheme, level, zero.clone()).unwrap();
        let combo: Vec<f64> = f1.samples().iter().zip(f2.samples()).map(|(p, q)| a * p + b * q).collect();
        let sum = Approximant::from_samples(&g, &scheme, level, zero, combo).unwrap();
        let lhs = sum.eval(&[x]).unwrap();
        let rhs = a * f1.eval(&[x]).unwrap() + b * f2.eval(&[x]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
