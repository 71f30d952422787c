//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sobolev_sampling::analysis::{eta_exponent, zeta_exponent, BoundParams};
use sobolev_sampling::harness::verify::{self, Check};
use sobolev_sampling::harness::{
    run_experiment, sweep_jitter, sweep_rate, to_csv, Deltas, ExperimentConfig, JitterSpec, LambdaMode, TrialRecord,
};
use sobolev_sampling::perturbation::min_scale_level;
use sobolev_sampling::RealBox;

type Outcome = Result<String, String>;

fn from_checks(checks: Vec<Check>) -> Outcome {
    let detail: Vec<String> = checks.iter().map(|c| format!("{} [{}]", c.name, c.detail)).collect();
    if checks.iter().all(|c| c.passed) {
        Ok(detail.join("; "))
    } else {
        Err(detail.join("; "))
    }
}

fn budget(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let t = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    match outcome {
        Ok(s) if elapsed <= limit => Ok(format!("{s}; {t}")),
        Ok(s) => Err(format!("{s}; over time budget: {t}")),
        Err(s) => Err(format!("{s}; {t}")),
    }
}

fn base_config(id: &str, generator: &str, function: &str, domain: RealBox) -> ExperimentConfig {
    ExperimentConfig {
        id: id.into(),
        generator: generator.into(),
        dilation: None,
        function: function.into(),
        domain,
        levels: vec![],
        jitter: JitterSpec {
            kind: "uniform".into(),
            delta: Deltas::One(0.0),
            lambda: LambdaMode::UniformDelta,
            alpha: 0.5,
        },
        trials: 1,
        seed: 20_240_601,
        resolution: None,
        truncation_radius: None,
        output: None,
        sobolev_s: None,
        varsigma: None,
    }
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn c1_polynomials() -> Outcome {
    verify::poly_checks().map_err(|e| e.to_string()).and_then(from_checks)
}

fn c2_tail() -> Outcome {
    verify::tail_checks().map_err(|e| e.to_string()).and_then(from_checks)
}

fn c3_bracket() -> Outcome {
    verify::bracket_checks()
        .map_err(|e| e.to_string())
        .and_then(from_checks)
}

fn c4_norms() -> Outcome {
    verify::norm_checks().map_err(|e| e.to_string()).and_then(from_checks)
}

fn c5_exponents() -> Outcome {
    let p = |s: f64, varsigma: f64, alpha: f64| BoundParams {
        s,
        t: None,
        varsigma,
        kappa_plus_1: 2.0,
        alpha,
        d: 1,
        m: 2.0,
        level: 0,
    };
    let eta = eta_exponent(&p(1.0, 1.25, 0.5)).map_err(|e| e.to_string())?;
    let zeta = zeta_exponent(&p(1.0, 1.4, 0.5)).map_err(|e| e.to_string())?;
    let n_min = min_scale_level(1.2, 0.5, 2, 2.0).map_err(|e| e.to_string())?;
    let msg = format!("eta {eta:.15}, zeta {zeta:.15}, N_min {n_min}");
    if (eta - 1.0 / 9.0).abs() < 1e-12 && (zeta - 0.4).abs() < 1e-12 && n_min == 3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_sinc_desk() -> Outcome {
    let mut cfg = base_config("sinc-desk", "sinc", "exp-abs", RealBox::symmetric(40.0, 1).unwrap());
    cfg.levels = vec![3, 6];
    cfg.trials = 10;
    cfg.jitter.delta = Deltas::Many(vec![0.0, 1.0]);
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let e3 = r.errors(3, 1.0);
    let e6 = r.errors(6, 1.0);
    let base6 = r.errors(6, 0.0)[0];
    let mean6 = r.row(6, 1.0).unwrap().mean;
    let ok = e6.len() == 10
        && e6.iter().all(|e| e.is_finite() && *e > 0.0)
        && e6.iter().zip(&e3).all(|(a, b)| a < b)
        && base6 < mean6;
    let msg = format!(
        "N=6 errors [{}]; N=3 errors [{}]; unjittered {base6:.4e} < mean jittered {mean6:.4e}",
        sci(&e6),
        sci(&e3)
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_rate() -> Outcome {
    let mut cfg = base_config("b2-rate", "bspline2", "exp-abs", RealBox::symmetric(40.0, 1).unwrap());
    cfg.levels = (2..=7).collect();
    cfg.sobolev_s = Some(0.6);
    cfg.varsigma = Some(1.4);
    let (_, rate) = sweep_rate(&cfg).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = rate.points.iter().map(|p| p.1).collect();
    let eta = rate.theoretical.unwrap_or(f64::NAN);
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let msg = format!("errors [{}]; slope {:.6} vs eta {eta}", sci(&errs), rate.slope);
    if decreasing && rate.slope >= eta && (eta - 0.4).abs() < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_jitter() -> Outcome {
    let mut cfg = base_config("b2-jitter", "bspline2", "exp-abs", RealBox::symmetric(40.0, 1).unwrap());
    cfg.levels = vec![6];
    cfg.trials = 10;
    cfg.jitter.delta = Deltas::Many(vec![0.0, 0.25, 0.5, 1.0]);
    let r = sweep_jitter(&cfg).map_err(|e| e.to_string())?;
    let rows: Vec<_> = [0.0, 0.25, 0.5, 1.0].iter().map(|&d| r.row(6, d).unwrap()).collect();
    let excess: Vec<f64> = rows.iter().map(|row| row.excess.unwrap()).collect();
    // each step may drop by at most 5% of the mean error it starts from
    let monotone = excess
        .windows(2)
        .zip(&rows)
        .all(|(w, row)| w[1] >= w[0] - 0.05 * row.mean);

    cfg.levels = (3..=7).collect();
    cfg.jitter.delta = Deltas::One(1.0);
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let means: Vec<f64> = (3..=7).map(|n| r.row(n, 1.0).unwrap().mean).collect();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let msg = format!(
        "excess over delta [{}]; delta=1 means over N=3..7 [{}]",
        sci(&excess),
        sci(&means)
    );
    if monotone && decreasing && excess[0] == 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_tensor_desk() -> Outcome {
    let mut cfg = base_config(
        "b2-2d",
        "tensor:bspline2^2",
        "exp-abs-gauss-2d",
        RealBox::symmetric(5.0, 2).unwrap(),
    );
    cfg.levels = vec![2, 3, 4];
    cfg.trials = 5;
    cfg.jitter.delta = Deltas::One(1.0);
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let means: Vec<f64> = [2, 3, 4].iter().map(|&n| r.row(n, 1.0).unwrap().mean).collect();
    let msg = format!("mean errors over N=2,3,4 [{}]", sci(&means));
    if means.windows(2).all(|w| w[1] < w[0]) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn without_wall_time(records: &[TrialRecord]) -> String {
    let mut rs = records.to_vec();
    rs.iter_mut().for_each(|r| r.wall_ms = 0.0);
    to_csv(&rs)
}

fn c10_determinism() -> Outcome {
    let mut cfg = base_config("determinism", "sinc", "exp-abs", RealBox::symmetric(10.0, 1).unwrap());
    cfg.levels = vec![2, 4];
    cfg.trials = 4;
    cfg.jitter.delta = Deltas::Many(vec![0.0, 0.5, 1.0]);
    let mut csvs = Vec::new();
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = pool.install(|| run_experiment(&cfg)).map_err(|e| e.to_string())?;
        csvs.push(without_wall_time(&r.records));
    }
    let again = run_experiment(&cfg).map_err(|e| e.to_string())?;
    csvs.push(without_wall_time(&again.records));
    let msg = format!("{} runs, {} bytes each", csvs.len(), csvs[0].len());
    if csvs.iter().all(|c| *c == csvs[0]) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("1 partition of unity and polynomial identities", c1_polynomials, 1),
        ("2 lattice tail inequality suite", c2_tail, 60),
        ("3 bracket-product oracle", c3_bracket, 60),
        ("4 Sobolev-norm oracle", c4_norms, 60),
        ("5 exponent calculators", c5_exponents, 60),
        ("6 sinc desk-scale reproduction", c6_sinc_desk, 180),
        ("7 rate sweep", c7_rate, 120),
        ("8 jitter robustness", c8_jitter, 180),
        ("9 tensor B2 desk-scale reproduction", c9_tensor_desk, 300),
        ("10 determinism", c10_determinism, 120),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        match budget(outcome, start.elapsed(), Duration::from_secs(limit)) {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
