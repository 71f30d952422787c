use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sobolev_sampling::analysis::{eta_exponent, perturbation_constants, zeta_exponent, BoundParams, RateReport};
use sobolev_sampling::generators::SumRuleOrder;
use sobolev_sampling::harness::verify::{run_suite, Suite};
use sobolev_sampling::harness::{
    emit_results, reconstruct, run_experiment, sweep_jitter, sweep_rate, Deltas, ExperimentConfig, ExperimentReport,
    JitterSpec, LambdaMode, OutputFormat,
};
use sobolev_sampling::perturbation::{min_scale_level, relative_separation_bound};
use sobolev_sampling::{Error, Generator, RealBox};

#[derive(Parser)]
#[command(
    name = "framelet",
    version,
    about = "Sampling reconstruction in Sobolev spaces from jittered samples"
)]
struct Cli {
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Base seed; falls back to FRAMELET_SEED, then to the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single reconstruction; writes grid values.
    Approx(ApproxArgs),
    /// Error decay over scale levels.
    SweepN(SweepNArgs),
    /// Error growth over jitter sizes at one level.
    SweepJitter(SweepJitterArgs),
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exponents, minimal level and perturbation constants.
    Bounds(BoundsArgs),
    /// Self-checks against closed forms.
    Verify {
        #[arg(long, value_delimiter = ',', default_value = "tail,bracket,poly,norms")]
        suite: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "bspline2")]
    generator: String,
    #[arg(long, default_value = "exp-abs")]
    function: String,
    /// `lo:hi` per axis, comma separated, or a single half-width.
    #[arg(long, default_value = "40", allow_hyphen_values = true)]
    domain: String,
    /// `zero`, `uniform`, `uniform:<w>` or a comma-separated vector.
    #[arg(long, default_value = "uniform")]
    lambda: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Error-grid nodes per unit length.
    #[arg(long)]
    resolution: Option<f64>,
    /// Sinc truncation radius in x units.
    #[arg(long)]
    truncation_radius: Option<f64>,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    level: u32,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    trial: u32,
}

#[derive(Args)]
struct SweepNArgs {
    #[command(flatten)]
    common: Common,
    /// `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "2..7")]
    levels: String,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    varsigma: Option<f64>,
}

#[derive(Args)]
struct SweepJitterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    level: u32,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1")]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: u32,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    varsigma: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    #[arg(long, default_value_t = 0)]
    level: u32,
    #[arg(long)]
    t: Option<f64>,
    /// Sum-rule order κ + 1; taken from the generator when omitted.
    #[arg(long)]
    kappa_plus_1: Option<f64>,
    /// Generator for C₂; defaults to the d-fold tensor B2.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    lambda_l2: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_l2: f64,
}

enum Failure {
    Lib(Error),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Argument(_)
        | Error::Constraint { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotIsotropic { .. }
        | Error::NotExpanding { .. } => 2,
        Error::InstanceTooLarge { .. } => 3,
        _ => 1,
    }
}

fn parse_domain(text: &str, d: usize) -> Result<RealBox, Error> {
    let bad = || {
        Error::Config(format!(
            "bad domain {text:?}; expected `lo:hi[,lo:hi...]` or a half-width"
        ))
    };
    if !text.contains(':') {
        let half: f64 = text.trim().parse().map_err(|_| bad())?;
        return RealBox::symmetric(half, d).map_err(|e| Error::Config(e.to_string()));
    }
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for part in text.split(',') {
        let (a, b) = part.split_once(':').ok_or_else(bad)?;
        lo.push(a.trim().parse::<f64>().map_err(|_| bad())?);
        hi.push(b.trim().parse::<f64>().map_err(|_| bad())?);
    }
    RealBox::new(lo, hi).map_err(|e| Error::Config(e.to_string()))
}

fn parse_levels(text: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::Config(format!("bad levels {text:?}; expected `a..b` or a list"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, Error> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("FRAMELET_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("FRAMELET_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(fallback),
    }
}

fn base_config(id: &str, c: &Common, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let d = c.generator.parse::<Generator>()?.dimension();
    Ok(ExperimentConfig {
        id: id.into(),
        generator: c.generator.clone(),
        dilation: None,
        function: c.function.clone(),
        domain: parse_domain(&c.domain, d)?,
        levels: vec![],
        jitter: JitterSpec {
            kind: "uniform".into(),
            delta: Deltas::One(0.0),
            lambda: c.lambda.parse::<LambdaMode>()?,
            alpha: c.alpha,
        },
        trials: 1,
        seed: resolve_seed(seed, 0)?,
        resolution: c.resolution,
        truncation_radius: c.truncation_radius,
        output: None,
        sobolev_s: None,
        varsigma: None,
    })
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn summary_table(report: &ExperimentReport) -> String {
    let mut out = format!(
        "{:>3} {:>8} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "N", "delta", "trials", "mean", "stddev", "min", "max", "excess"
    );
    for r in &report.summary {
        let excess = r.excess.map_or("-".to_string(), |e| format!("{e:.4e}"));
        writeln!(
            out,
            "{:>3} {:>8} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12}",
            r.level, r.delta, r.count, r.mean, r.stddev, r.min, r.max, excess
        )
        .unwrap();
    }
    out
}

fn rate_line(delta: Option<f64>, r: &RateReport) -> String {
    let label = delta.map_or(String::new(), |d| format!("delta {d}: "));
    let eta = r.theoretical.map_or("n/a".to_string(), |e| format!("{e:.6}"));
    let exact = if r.exact { " (exact reproduction)" } else { "" };
    format!(
        "{label}fitted rate {:.6} (residual {:.2e}), theoretical eta {eta}{exact}",
        r.slope, r.residual
    )
}

fn finish_report(cli: &Cli, report: &ExperimentReport, fallback_out: Option<&Path>) -> Result<(), Error> {
    warn_all(&report.warnings);
    if let Some(path) = cli.out.as_deref().or(fallback_out) {
        for p in emit_results(report, OutputFormat::from_path(path), path)? {
            eprintln!("wrote {}", p.display());
        }
    }
    if cli.json {
        print_json(report);
    } else {
        print!("{}", summary_table(report));
        for r in &report.rates {
            println!("{}", rate_line(Some(r.delta), &r.rate));
        }
    }
    Ok(())
}

fn cmd_approx(cli: &Cli, a: &ApproxArgs) -> Result<(), Failure> {
    let mut cfg = base_config("approx", &a.common, cli.seed)?;
    cfg.levels = vec![a.level];
    let r = reconstruct(&cfg, a.level, a.trial, a.delta)?;
    warn_all(&r.warnings);
    if let Some(path) = &cli.out {
        let d = r.grid.dimension();
        let mut text = String::new();
        let axes: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        writeln!(text, "{},value,exact", axes.join(",")).unwrap();
        for n in 0..r.grid.len() {
            for x in r.grid.node(n) {
                write!(text, "{x:.16e},").unwrap();
            }
            writeln!(text, "{:.16e},{:.16e}", r.values[n], r.exact[n]).unwrap();
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        eprintln!("wrote {}", path.display());
    }
    if cli.json {
        print_json(&json!({
            "record": r.record,
            "grid_nodes": r.grid.len(),
            "samples": r.approximant.samples().len(),
            "warnings": r.warnings,
        }));
    } else {
        println!(
            "N = {}, delta = {}, {} samples, {} grid nodes: relative L2 error {:.6e}",
            a.level,
            a.delta,
            r.approximant.samples().len(),
            r.grid.len(),
            r.record.rel_error
        );
    }
    Ok(())
}

fn cmd_sweep_n(cli: &Cli, a: &SweepNArgs) -> Result<(), Failure> {
    let mut cfg = base_config("sweep-n", &a.common, cli.seed)?;
    cfg.levels = parse_levels(&a.levels)?;
    cfg.sobolev_s = a.s;
    cfg.varsigma = a.varsigma;
    let (report, rate) = sweep_rate(&cfg)?;
    warn_all(&report.warnings);
    if let Some(path) = &cli.out {
        for p in emit_results(&report, OutputFormat::from_path(path), path)? {
            eprintln!("wrote {}", p.display());
        }
    }
    if cli.json {
        print_json(&json!({ "report": report, "rate": rate }));
    } else {
        println!("{:>3} {:>14}", "N", "rel_error");
        for (n, e) in &rate.points {
            println!("{n:>3} {e:>14.6e}");
        }
        println!("{}", rate_line(None, &rate));
    }
    Ok(())
}

fn cmd_sweep_jitter(cli: &Cli, a: &SweepJitterArgs) -> Result<(), Failure> {
    let mut cfg = base_config("sweep-jitter", &a.common, cli.seed)?;
    cfg.levels = vec![a.level];
    cfg.trials = a.trials;
    cfg.jitter.delta = Deltas::Many(a.deltas.clone());
    let report = sweep_jitter(&cfg)?;
    finish_report(cli, &report, None)?;
    Ok(())
}

fn cmd_experiment(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.seed = resolve_seed(cli.seed, cfg.seed)?;
    let report = run_experiment(&cfg)?;
    finish_report(cli, &report, cfg.output.as_deref())?;
    Ok(())
}

fn cmd_bounds(cli: &Cli, a: &BoundsArgs) -> Result<(), Failure> {
    if a.d == 0 || a.d > 3 {
        return Err(Error::Config(format!("dimension must be 1..=3, got {}", a.d)).into());
    }
    let generator: Generator = match &a.generator {
        Some(id) => id.parse()?,
        None if a.d == 1 => Generator::BSpline2,
        None => format!("tensor:bspline2^{}", a.d).parse()?,
    };
    let kappa_plus_1 = match (a.kappa_plus_1, generator.sum_rule_order()) {
        (Some(k), _) => k,
        (None, SumRuleOrder::Finite(k)) => k as f64,
        (None, SumRuleOrder::Unbounded) => f64::INFINITY,
    };
    let p = BoundParams {
        s: a.s,
        t: a.t,
        varsigma: a.varsigma,
        kappa_plus_1,
        alpha: a.alpha,
        d: a.d,
        m: a.m,
        level: a.level,
    };
    let eta = if kappa_plus_1.is_infinite() {
        // the limit κ → ∞ of the truncation exponent
        if a.varsigma > a.s {
            Ok(a.varsigma - a.s)
        } else {
            eta_exponent(&p)
        }
    } else {
        eta_exponent(&p)
    };
    let zeta = zeta_exponent(&p);
    let n_min = min_scale_level(a.s, a.alpha, a.d, a.m);
    let constants = perturbation_constants(&p, &generator, 1.0);
    let separation = relative_separation_bound(a.d, a.lambda_l2, a.theta_l2, a.m, a.level);

    let cell = |r: Result<f64, &Error>| match r {
        Ok(v) => (json!(v), format!("{v:.12}")),
        Err(e) => (json!(null), format!("n/a ({e})")),
    };
    let rows = [
        ("eta", cell(eta.as_ref().copied())),
        ("zeta", cell(zeta.as_ref().copied())),
        (
            "N_min",
            match &n_min {
                Ok(n) => (json!(n), n.to_string()),
                Err(e) => (json!(null), format!("n/a ({e})")),
            },
        ),
        ("C3", cell(constants.as_ref().map(|c| c.c3))),
        ("C2", cell(constants.as_ref().map(|c| c.c2))),
        ("bracket_sup", cell(constants.as_ref().map(|c| c.bracket_sup))),
        ("D_N", (json!(separation), separation.to_string())),
    ];
    if cli.json {
        let mut values = serde_json::Map::new();
        for (name, (v, _)) in &rows {
            values.insert(name.to_string(), v.clone());
        }
        print_json(&json!({
            "params": p,
            "generator": generator.id(),
            "lambda_l2": a.lambda_l2,
            "theta_l2": a.theta_l2,
            "values": values,
        }));
    } else {
        let k = if kappa_plus_1.is_infinite() {
            "inf".to_string()
        } else {
            kappa_plus_1.to_string()
        };
        println!(
            "s = {}, varsigma = {}, alpha = {}, d = {}, m = {}, N = {}, kappa+1 = {k}, generator {}",
            a.s, a.varsigma, a.alpha, a.d, a.m, a.level, generator
        );
        for (name, (_, text)) in &rows {
            println!("{name:<12} {text}");
        }
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, names: &[String]) -> Result<(), Failure> {
    let suites: Vec<Suite> = names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mut checks = Vec::new();
    for suite in suites {
        checks.extend(run_suite(suite)?);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if cli.json {
        let items: Vec<_> = checks
            .iter()
            .map(|c| json!({ "suite": c.suite, "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        print_json(&json!({ "checks": items, "failed": failed }));
    } else {
        for c in &checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            println!("{tag} {:<8} {}: {}", c.suite, c.name, c.detail);
        }
        println!("{} of {} checks passed", checks.len() - failed, checks.len());
    }
    if failed > 0 {
        Err(Failure::Verify(failed))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Approx(a) => cmd_approx(&cli, a),
        Command::SweepN(a) => cmd_sweep_n(&cli, a),
        Command::SweepJitter(a) => cmd_sweep_jitter(&cli, a),
        Command::Experiment { config } => cmd_experiment(&cli, config),
        Command::Bounds(a) => cmd_bounds(&cli, a),
        Command::Verify { suite } => cmd_verify(&cli, suite),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(n)) => {
            eprintln!("error: {n} verification check(s) failed");
            ExitCode::from(4)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
