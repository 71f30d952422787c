use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::{FourierDecay, TestFunction};
use crate::lattice::RealBox;
use crate::operators::{Approximant, Grid};

/// Relative size of the certified frequency tail when the cutoff is automatic.
const TAIL_FRACTION: f64 = 1e-8;
/// Smallest panel half-width of the graded frequency mesh.
const FINEST_PANEL: f64 = 0.25;
const MAX_CUTOFF: f64 = 1_099_511_627_776.0; // 2^40

/// A quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

/// Frequency quadrature for `||f||_{Hˢ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevQuadrature {
    /// Half-width `Ξ` of the integration cube; chosen from the declared decay
    /// when `None`.
    pub cutoff: Option<f64>,
    /// Midpoint nodes per panel per axis. Must be even.
    pub nodes_per_panel: usize,
}

impl SobolevQuadrature {
    /// Defaults sized for a few seconds of work in dimension `d`.
    pub fn for_dimension(d: usize) -> Self {
        let nodes_per_panel = match d {
            1 => 1024,
            2 => 128,
            _ => 12,
        };
        Self {
            cutoff: None,
            nodes_per_panel,
        }
    }
}

/// `||f||_{Hˢ} = (2π)^{-d/2} (∫ |f̂(ξ)|² (1 + ||ξ||²)ˢ dξ)^{1/2}`.
///
/// Composite midpoint rule on graded panels with breakpoints `0, ±Ξ 2^{-j}`.
/// The error estimate is the Richardson difference against half the nodes plus
/// the analytic tail beyond `Ξ`.
pub fn sobolev_norm(f: &TestFunction, s: f64, quad: &SobolevQuadrature) -> Result<NormEstimate> {
    let form = f
        .fourier()
        .ok_or_else(|| Error::Unsupported(format!("{} has no Fourier form", f.id())))?;
    let n = quad.nodes_per_panel;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "nodes_per_panel must be even and ≥ 2, got {n}"
        )));
    }
    let d = f.dimension();
    let df = d as f64;
    let integrand = |xi: &[f64]| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        form.eval(xi).norm_sqr() * (1.0 + r2).powf(s)
    };

    // Tail ∫_{||ξ|| > Ξ} as a function of Ξ.
    let tail: Box<dyn Fn(f64) -> f64> = match form.decay() {
        FourierDecay::BandLimited { radius } => Box::new(move |xi| if xi >= radius { 0.0 } else { f64::INFINITY }),
        FourierDecay::Algebraic { constant, power } => {
            let excess = 2.0 * power - 2.0 * s - df;
            if excess <= 0.0 {
                return Err(Error::Divergent(format!(
                    "declared decay (1+|ξ|²)^-{power} is too slow for s = {s} in dimension {d}"
                )));
            }
            let omega = surface_measure(d);
            Box::new(move |xi: f64| constant * omega * xi.powf(-excess) / excess)
        }
    };

    let cutoff = match (quad.cutoff, form.decay()) {
        (Some(c), _) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Argument(format!("bad frequency cutoff {c}")));
            }
            c
        }
        (None, FourierDecay::BandLimited { radius }) => radius,
        (None, FourierDecay::Algebraic { .. }) => {
            let q0 = cube_integral(&integrand, d, 1.0, n);
            let mut c = 1.0;
            while tail(c) > TAIL_FRACTION * q0 {
                c *= 2.0;
                if c > MAX_CUTOFF {
                    return Err(Error::Divergent("frequency tail does not fall below tolerance".into()));
                }
            }
            c
        }
    };

    let fine = cube_integral(&integrand, d, cutoff, n);
    let coarse = cube_integral(&integrand, d, cutoff, n / 2);
    let q_err = (fine - coarse).abs() / 3.0 + tail(cutoff);
    let scale = (2.0 * PI).powf(-df / 2.0);
    let value = scale * fine.max(0.0).sqrt();
    let upper = scale * (fine + q_err).max(0.0).sqrt();
    let lower = scale * (fine - q_err).max(0.0).sqrt();
    Ok(NormEstimate {
        value,
        error: (upper - value).max(value - lower),
    })
}

fn surface_measure(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        // 2π^{d/2}/Γ(d/2) via the recurrence ω_{d+2} = 2π ω_d / d
        _ => {
            let mut omega = if d.is_multiple_of(2) { 2.0 * PI } else { 4.0 * PI };
            let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
            while k < d {
                omega *= 2.0 * PI / k as f64;
                k += 2;
            }
            omega
        }
    }
}

/// Midpoint nodes and weights on `[−Ξ, Ξ]` with panels `[Ξ2^{-j-1}, Ξ2^{-j}]`
/// and a central panel of half-width at most `FINEST_PANEL`.
fn graded_rule(cutoff: f64, n: usize) -> Vec<(f64, f64)> {
    let mut breaks = vec![cutoff];
    while *breaks.last().unwrap() > FINEST_PANEL {
        let next = breaks.last().unwrap() / 2.0;
        breaks.push(next);
    }
    breaks.push(0.0);
    breaks.reverse();
    let mut positive = Vec::with_capacity(n * breaks.len());
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / n as f64;
        positive.extend((0..n).map(|i| (w[0] + (i as f64 + 0.5) * h, h)));
    }
    let mut rule: Vec<(f64, f64)> = positive.iter().rev().map(|&(x, h)| (-x, h)).collect();
    rule.extend(positive);
    rule
}

/// Tensor midpoint rule on `[−Ξ, Ξ]^d`. Parallel over the first axis, with the
/// per-slice sums combined in index order.
fn cube_integral(f: &(dyn Fn(&[f64]) -> f64 + Sync), d: usize, cutoff: f64, n: usize) -> f64 {
    let rule = graded_rule(cutoff, n);
    let slices: Vec<f64> = rule
        .par_iter()
        .map(|&(x0, w0)| {
            let mut x = vec![0.0; d];
            x[0] = x0;
            if d == 1 {
                return w0 * f(&x);
            }
            let mut idx = vec![0usize; d - 1];
            let mut acc = 0.0;
            loop {
                let mut w = w0;
                for (i, &j) in idx.iter().enumerate() {
                    x[i + 1] = rule[j].0;
                    w *= rule[j].1;
                }
                acc += w * f(&x);
                let mut axis = d - 1;
                loop {
                    if axis == 0 {
                        return acc;
                    }
                    idx[axis - 1] += 1;
                    if idx[axis - 1] < rule.len() {
                        break;
                    }
                    idx[axis - 1] = 0;
                    axis -= 1;
                }
            }
        })
        .collect();
    slices.iter().sum()
}

/// `||f||_{L²(domain)}` by the cell-midpoint rule, with a Richardson error
/// estimate against a grid of half the resolution.
pub fn spatial_l2_norm(f: &TestFunction, domain: &RealBox, resolution: f64) -> Result<NormEstimate> {
    Error::check_dim(f.dimension(), domain.dimension())?;
    let fine = grid_square_integral(f, &Grid::with_resolution(domain.clone(), resolution)?);
    let coarse = grid_square_integral(f, &Grid::with_resolution(domain.clone(), resolution / 2.0)?);
    let value = fine.sqrt();
    Ok(NormEstimate {
        value,
        error: ((fine - coarse).abs() / 3.0) / (2.0 * value.max(f64::MIN_POSITIVE)),
    })
}

fn grid_square_integral(f: &TestFunction, grid: &Grid) -> f64 {
    let d = grid.dimension();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |x, n| {
                grid.node_into(n, x);
                let v = f.eval_unchecked(x);
                v * v
            },
        )
        .collect();
    values.iter().sum::<f64>() * grid.cell_volume()
}

/// `||f − a||₂ / ||f||₂` over `domain` by the cell-midpoint rule.
///
/// Node values are computed in parallel; the sums run sequentially in node
/// order so the result does not depend on the thread count.
pub fn relative_l2_error(f: &TestFunction, a: &Approximant, domain: &RealBox, resolution: f64) -> Result<f64> {
    Error::check_dim(f.dimension(), domain.dimension())?;
    let grid = Grid::with_resolution(domain.clone(), resolution)?;
    let approx = a.eval_grid(&grid)?;
    let d = grid.dimension();
    let exact: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |x, n| {
                grid.node_into(n, x);
                f.eval_unchecked(x)
            },
        )
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, v) in exact.iter().zip(&approx) {
        let diff = e - v;
        num += diff * diff;
        den += e * e;
    }
    if den == 0.0 {
        return Err(Error::Argument(format!(
            "{} vanishes on the error domain; relative error undefined",
            f.id()
        )));
    }
    Ok((num / den).sqrt())
}

/// Warning text when the grid is too coarse to resolve the finest generator
/// scale `m^{-N}`, i.e. fewer than `2 m^N` nodes per unit.
pub fn aliasing_risk(m: f64, level: u32, resolution: f64) -> Option<String> {
    let needed = 2.0 * m.powi(level as i32);
    (resolution < needed)
        .then(|| format!("grid resolution {resolution} per unit is below 2·m^N = {needed}; errors may alias"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Generator;
    use crate::lattice::DilationScheme;
    use crate::perturbation::PerturbationSequence;

    #[test]
    fn exp_abs_norms() {
        let f = TestFunction::exp_abs();
        let q = SobolevQuadrature::for_dimension(1);
        let l2 = sobolev_norm(&f, 0.0, &q).unwrap();
        assert!((l2.value - 1.0).abs() < 1e-6, "{l2:?}");
        assert!(l2.error < 1e-6);
        let h1 = sobolev_norm(&f, 1.0, &q).unwrap();
        assert!((h1.value - 2f64.sqrt()).abs() < 1e-5, "{h1:?}");
        assert!((h1.value - 2f64.sqrt()).abs() <= h1.error + 1e-9);
    }

    #[test]
    fn homogeneity() {
        let f = TestFunction::exp_abs();
        let g = TestFunction::linear_combination(-3.0, &f, 0.0, &f).unwrap();
        let q = SobolevQuadrature::for_dimension(1);
        let a = sobolev_norm(&f, 0.5, &q).unwrap().value;
        let b = sobolev_norm(&g, 0.5, &q).unwrap().value;
        assert!((b - 3.0 * a).abs() < 1e-10 * b);
    }

    #[test]
    fn gaussian_2d_plancherel() {
        let f = TestFunction::gaussian(2);
        let fourier = sobolev_norm(&f, 0.0, &SobolevQuadrature::for_dimension(2)).unwrap();
        // ∫ e^{-2|x|²} = π/2
        let exact = (PI / 2.0).sqrt();
        assert!((fourier.value - exact).abs() <= fourier.error, "{fourier:?} vs {exact}");
        assert!(fourier.error < 1e-5);
        let spatial = spatial_l2_norm(&f, &RealBox::symmetric(6.0, 2).unwrap(), 100.0).unwrap();
        assert!((spatial.value - fourier.value).abs() <= spatial.error + fourier.error + 1e-7);
    }

    #[test]
    fn band_limited_norm() {
        // ||sinc||₂ = 1 and the H¹ weight integrates in closed form.
        let f = TestFunction::sinc_shift(2);
        let q = SobolevQuadrature::for_dimension(1);
        assert!((sobolev_norm(&f, 0.0, &q).unwrap().value - 1.0).abs() < 1e-10);
        let h1 = (1.0 + PI * PI / 3.0f64).sqrt();
        assert!((sobolev_norm(&f, 1.0, &q).unwrap().value - h1).abs() < 1e-6);
    }

    #[test]
    fn missing_fourier_form() {
        let q = SobolevQuadrature::for_dimension(1);
        assert!(matches!(
            sobolev_norm(&TestFunction::one(1), 0.0, &q),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            sobolev_norm(&TestFunction::exp_abs(), 1.5, &q),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn relative_error_examples() {
        let scheme = DilationScheme::dyadic(1).unwrap();
        let g = Generator::BSpline2;
        let one = TestFunction::one(1);
        let domain = RealBox::symmetric(3.0, 1).unwrap();
        let bx = scheme.index_box_for_domain(2, &domain, &g).unwrap();
        let p = PerturbationSequence::zero(bx.clone(), 0.5).unwrap();
        let a = Approximant::build(&one, &g, &scheme, 2, p.clone()).unwrap();
        assert!(relative_l2_error(&one, &a, &domain, 64.0).unwrap() < 1e-12);

        let f = TestFunction::exp_abs();
        let zero = Approximant::from_samples(&g, &scheme, 2, p, vec![0.0; bx.len()]).unwrap();
        assert_eq!(relative_l2_error(&f, &zero, &domain, 64.0).unwrap(), 1.0);
    }

    #[test]
    fn aliasing_warning() {
        assert!(aliasing_risk(2.0, 3, 15.9).is_some());
        assert!(aliasing_risk(2.0, 3, 16.0).is_none());
    }
}
