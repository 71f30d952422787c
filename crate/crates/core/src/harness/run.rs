use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, LambdaMode, ResolvedConfig};
use super::report::{summarize, DeltaRate, ExperimentReport, TrialRecord};
use crate::analysis::{aliasing_risk, eta_exponent, rate_fit, relative_l2_error, BoundParams, RateReport};
use crate::error::{Error, Result};
use crate::generators::{Generator, SumRuleOrder};
use crate::lattice::IndexBox;
use crate::operators::{Approximant, Grid};
use crate::perturbation::{draw_uniform_lambda, generate_uniform_jitter, min_scale_level, mix64};

/// Upper limit on generator evaluations for one error computation
/// (grid nodes × lattice terms per node).
pub const MAX_TERM_EVALUATIONS: u128 = 200_000_000_000;

/// Seed for trial `t` at level `N`: SplitMix64 folded over `(base, t, N)`.
pub fn trial_seed(base: u64, trial: u32, level: u32) -> u64 {
    mix64(mix64(mix64(base) ^ trial as u64) ^ level as u64)
}

/// Everything that depends on the level but not on the trial.
struct LevelPlan {
    level: u32,
    generator: Generator,
    index_box: IndexBox,
    resolution: f64,
}

fn plan_level(
    cfg: &ExperimentConfig,
    rc: &ResolvedConfig,
    level: u32,
    warnings: &mut Vec<String>,
) -> Result<LevelPlan> {
    let m = rc.scheme.m();
    let scale = m.powi(level as i32);
    let generator = if rc.generator.has_global_support() {
        rc.generator.with_sinc_radius(cfg.sinc_radius_x() * scale)?
    } else {
        rc.generator.clone()
    };
    let index_box = rc.scheme.index_box_for_domain(level, &cfg.domain, &generator)?;
    let (resolution, capped) = cfg.resolution_at(m, level);
    warnings.extend(capped);
    warnings.extend(aliasing_risk(m, level, resolution).map(|w| format!("N = {level}: {w}")));

    let grid = Grid::with_resolution(cfg.domain.clone(), resolution)?;
    let per_node: u128 = generator
        .factors()
        .iter()
        .enumerate()
        .map(|(axis, f)| match f {
            Generator::Sinc { radius } => ((2.0 * radius).floor() as u128 + 1).min(index_box.extent(axis) as u128),
            _ => 2,
        })
        .product();
    let work = per_node * grid.len() as u128;
    if work > MAX_TERM_EVALUATIONS {
        return Err(Error::InstanceTooLarge {
            resource: "generator evaluations per error estimate",
            count: work,
            limit: MAX_TERM_EVALUATIONS,
            suggestion: format!(
                "at N = {level}, shrink the domain volume or the resolution by a factor of {:.3}",
                work as f64 / MAX_TERM_EVALUATIONS as f64
            ),
        });
    }
    Ok(LevelPlan {
        level,
        generator,
        index_box,
        resolution,
    })
}

fn lambda_for(mode: &LambdaMode, d: usize, delta: f64, seed: u64) -> Result<Vec<f64>> {
    match mode {
        LambdaMode::Zero => Ok(vec![0.0; d]),
        LambdaMode::UniformDelta => draw_uniform_lambda(d, delta, seed),
        LambdaMode::Uniform(w) => draw_uniform_lambda(d, *w, seed),
        LambdaMode::Fixed(v) => Ok(v.clone()),
    }
}

fn run_trial(cfg: &ExperimentConfig, rc: &ResolvedConfig, plan: &LevelPlan, trial: u32) -> Result<Vec<TrialRecord>> {
    let d = rc.scheme.dimension();
    let seed = trial_seed(cfg.seed, trial, plan.level);
    rc.deltas
        .iter()
        .map(|&delta| {
            let start = Instant::now();
            let lambda = lambda_for(&cfg.jitter.lambda, d, delta, seed)?;
            let eps = generate_uniform_jitter(plan.index_box.clone(), delta, lambda, seed, cfg.jitter.alpha)?;
            let (lambda_l2, theta_l2, theta_lalpha) = (eps.lambda_norm(), eps.l2_norm(), eps.lp_alpha_norm());
            let a = Approximant::build(&rc.function, &plan.generator, &rc.scheme, plan.level, eps)?;
            let rel_error = relative_l2_error(&rc.function, &a, &cfg.domain, plan.resolution)?;
            Ok(TrialRecord {
                trial,
                level: plan.level,
                delta,
                lambda_l2,
                theta_l2,
                theta_lalpha,
                rel_error,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

fn theoretical_eta(cfg: &ExperimentConfig, rc: &ResolvedConfig) -> Option<Result<f64>> {
    let (s, varsigma) = (cfg.sobolev_s?, cfg.varsigma?);
    let SumRuleOrder::Finite(k) = rc.generator.sum_rule_order() else {
        return None;
    };
    Some(eta_exponent(&BoundParams {
        s,
        t: None,
        varsigma,
        kappa_plus_1: k as f64,
        alpha: cfg.jitter.alpha,
        d: rc.scheme.dimension(),
        m: rc.scheme.m(),
        level: 0,
    }))
}

/// Runs every `(trial, N, δ)` cell of the config.
///
/// Trials and levels run in parallel; each record depends only on the config
/// and its own `(trial, N, δ)`, and the report is assembled in sorted order, so
/// the output is independent of scheduling and thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rc = cfg.resolve()?;
    let mut warnings = Vec::new();

    let jittered = rc.deltas.iter().any(|&d| d > 0.0)
        || match &cfg.jitter.lambda {
            LambdaMode::Uniform(w) => *w > 0.0,
            LambdaMode::Fixed(v) => v.iter().any(|x| *x != 0.0),
            _ => false,
        };
    if let (true, Some(s)) = (jittered, cfg.sobolev_s) {
        let d = rc.scheme.dimension();
        match min_scale_level(s, cfg.jitter.alpha, d, rc.scheme.m()) {
            Ok(n_min) => {
                for &n in cfg.levels.iter().filter(|&&n| n < n_min) {
                    warnings.push(format!(
                        "N = {n} is below the minimal scale level {n_min} for jittered sampling"
                    ));
                }
            }
            Err(e) => warnings.push(format!("minimal scale level unavailable: {e}")),
        }
    }

    let mut plans = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        plans.push(plan_level(cfg, &rc, level, &mut warnings)?);
    }

    let jobs: Vec<(usize, u32)> = (0..plans.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let results: Vec<Result<Vec<TrialRecord>>> = jobs
        .par_iter()
        .map(|&(p, t)| run_trial(cfg, &rc, &plans[p], t))
        .collect();
    let mut records = Vec::with_capacity(jobs.len() * rc.deltas.len());
    for r in results {
        records.extend(r?);
    }
    records.sort_by(|a, b| {
        a.level
            .cmp(&b.level)
            .then(a.delta.total_cmp(&b.delta))
            .then(a.trial.cmp(&b.trial))
    });
    let summary = summarize(&records);

    let eta = match theoretical_eta(cfg, &rc) {
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            warnings.push(format!("theoretical rate unavailable: {e}"));
            None
        }
        None => None,
    };
    let mut rates = Vec::new();
    for &delta in &rc.deltas {
        let points: Vec<(u32, f64)> = summary
            .iter()
            .filter(|r| r.delta == delta)
            .map(|r| (r.level, r.mean))
            .collect();
        if points.len() >= 3 {
            if let Ok(mut rate) = fit_with_floor(&points, rc.scheme.m()) {
                rate.theoretical = eta;
                rates.push(DeltaRate { delta, rate });
            }
        }
    }

    Ok(ExperimentReport {
        id: cfg.id.clone(),
        records,
        summary,
        rates,
        warnings,
    })
}

/// One reconstruction with its error-grid values.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub approximant: Approximant,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub exact: Vec<f64>,
    pub record: TrialRecord,
    pub warnings: Vec<String>,
}

/// Builds the approximant of trial `trial` at level `N` with jitter size
/// `delta`, exactly as [`run_experiment`] would, and keeps the grid values.
pub fn reconstruct(cfg: &ExperimentConfig, level: u32, trial: u32, delta: f64) -> Result<Reconstruction> {
    let mut cfg = cfg.clone();
    cfg.levels = vec![level];
    cfg.jitter.delta = super::config::Deltas::One(delta);
    let rc = cfg.resolve()?;
    let mut warnings = Vec::new();
    let plan = plan_level(&cfg, &rc, level, &mut warnings)?;
    let record = run_trial(&cfg, &rc, &plan, trial)?.remove(0);

    let d = rc.scheme.dimension();
    let seed = trial_seed(cfg.seed, trial, level);
    let lambda = lambda_for(&cfg.jitter.lambda, d, delta, seed)?;
    let eps = generate_uniform_jitter(plan.index_box.clone(), delta, lambda, seed, cfg.jitter.alpha)?;
    let approximant = Approximant::build(&rc.function, &plan.generator, &rc.scheme, level, eps)?;
    let grid = Grid::with_resolution(cfg.domain.clone(), plan.resolution)?;
    let values = approximant.eval_grid(&grid)?;
    let exact = (0..grid.len())
        .map(|n| rc.function.eval(&grid.node(n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Reconstruction {
        approximant,
        grid,
        values,
        exact,
        record,
        warnings,
    })
}

/// Rate fit that tolerates exact (zero) errors by flooring them at the
/// smallest positive double; such fits are flagged `exact`.
fn fit_with_floor(points: &[(u32, f64)], m: f64) -> Result<RateReport> {
    let floored: Vec<(u32, f64)> = points.iter().map(|&(n, e)| (n, e.max(f64::MIN_POSITIVE))).collect();
    let mut report = rate_fit(&floored, m)?;
    report.points = points.to_vec();
    Ok(report)
}

/// Unjittered sweep over the configured levels and the fitted decay exponent
/// of the error, next to the predicted exponent `η` when `s` and `ς` are set.
pub fn sweep_rate(cfg: &ExperimentConfig) -> Result<(ExperimentReport, RateReport)> {
    if cfg.levels.len() < 3 {
        return Err(Error::Config(format!(
            "a rate sweep needs at least 3 levels, got {}",
            cfg.levels.len()
        )));
    }
    let mut cfg = cfg.clone();
    cfg.jitter.delta = super::config::Deltas::One(0.0);
    cfg.jitter.lambda = LambdaMode::Zero;
    let report = run_experiment(&cfg)?;
    let rate = report
        .rates
        .first()
        .map(|r| r.rate.clone())
        .ok_or_else(|| Error::Consistency("rate sweep produced no fit".into()))?;
    Ok((report, rate))
}

/// Jitter sweep; the `δ` list must contain the `0` baseline so that each
/// summary row carries its excess error.
pub fn sweep_jitter(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !cfg.jitter.delta.values().contains(&0.0) {
        return Err(Error::Config("a jitter sweep needs delta = 0 in its delta list".into()));
    }
    run_experiment(cfg)
}
