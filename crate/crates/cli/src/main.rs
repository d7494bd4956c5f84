//! `hsmdp`: density tables, shrinkage profiles, risk studies, thresholds,
//! τ calibration, the bound hierarchy and the sparse-testing experiments.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsmdp::calibration::{MmleSolver, TauGridPosterior};
use hsmdp::mixture::LocalLaw;
use hsmdp::risk::fit_line;
use hsmdp::threshold::DEFAULT_ROOT_TOL;
use hsmdp::{
    comparison_density, equiboundary_solve, generate_two_groups, hierarchy_report, hs_density_bounds,
    hs_marginal_density, hsplus_marginal_density, null_kl_risk, run_experiment, shrinkage_profile,
    ExperimentConfig, PriorSpec, QuadratureSpec, TauMethod,
};
use serde::Serialize;

use crate::output::{csv_string, emit, fmt_sig, manifest_path, timestamp, RunManifest};

#[derive(Parser)]
#[command(name = "hsmdp", version, about = "Horseshoe prior numerics and sparse testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prior density on a θ grid with the horseshoe sandwich bounds.
    Density(DensityArgs),
    /// Posterior shrinkage summaries E[κ|y], Var[κ|y] and θ̂ on a y grid.
    Shrinkage(ShrinkageArgs),
    /// Monte Carlo null-coordinate KL risk over τ values.
    Risk(RiskArgs),
    /// MDP, universal and equiboundary thresholds.
    Thresholds(ThresholdArgs),
    /// τ estimates from one simulated two-groups dataset.
    Calibrate(CalibrateArgs),
    /// One representative check per hierarchy level, as JSON.
    Hierarchy(HierarchyArgs),
    /// Calibration experiment from a config file or preset.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorName {
    Horseshoe,
    HorseshoePlus,
    Laplace,
    Ridge,
    Cauchy,
    StudentT,
}

#[derive(Clone, Copy, ValueEnum)]
enum RiskPrior {
    Horseshoe,
    HorseshoePlus,
    Laplace,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table3,
    Table4,
}

#[derive(Args)]
struct DensityArgs {
    /// Comma-separated θ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "log_grid")]
    theta: Vec<f64>,
    /// Log-spaced grid `LO:HI:COUNT`.
    #[arg(long)]
    log_grid: Option<String>,
    /// Scale τ; comparison priors are rescaled as π(θ/τ)/τ.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_enum, default_value = "horseshoe")]
    prior: PriorName,
    /// Degrees of freedom for `student-t`.
    #[arg(long, default_value_t = 3.0)]
    dof: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShrinkageArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RiskArgs {
    #[arg(long, value_enum, default_value = "horseshoe")]
    prior: RiskPrior,
    /// Comma-separated τ values.
    #[arg(long, value_delimiter = ',', default_value = "0.0316227766016838,0.01,0.00316227766016838,0.001")]
    tau: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    p0: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    p0: usize,
    #[arg(long = "A", default_value_t = 1.5)]
    amplitude: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HierarchyArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    p0: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// CSV destination; the manifest goes next to it.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Check(String),
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var("HS_MDP_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|k| *k >= 1)
        .ok_or_else(|| Failure::Usage(format!("HS_MDP_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
}

fn parse_log_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--log-grid expects LO:HI:COUNT with 0 < LO < HI, COUNT >= 2, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(bad());
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect())
}

fn cmd_density(a: DensityArgs) -> Outcome {
    let grid = match &a.log_grid {
        Some(g) => parse_log_grid(g)?,
        None => a.theta.clone(),
    };
    if grid.is_empty() {
        return Err(Failure::Usage("density needs --theta or --log-grid".into()));
    }
    if !(a.tau > 0.0) {
        return Err(Failure::Usage(format!("--tau must be positive, got {}", a.tau)));
    }
    let q = QuadratureSpec::default();
    let unit = match a.prior {
        PriorName::Laplace => Some(PriorSpec::laplace(1.0)),
        PriorName::Ridge => Some(PriorSpec::ridge(1.0)),
        PriorName::Cauchy => Some(PriorSpec::cauchy()),
        PriorName::StudentT => Some(PriorSpec::student_t(a.dof)),
        _ => None,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &theta in &grid {
        let at = |e: hsmdp::Error| Failure::Usage(format!("theta = {theta}: {e}"));
        let density = match a.prior {
            PriorName::Horseshoe => hs_marginal_density(theta, a.tau, &q).map_err(at)?,
            PriorName::HorseshoePlus => hsplus_marginal_density(theta, a.tau, &q).map_err(at)?,
            _ => comparison_density(unit.as_ref().unwrap(), theta / a.tau).map_err(at)? / a.tau,
        };
        let (lo, hi) = match a.prior {
            PriorName::Horseshoe => {
                let b = hs_density_bounds(theta / a.tau).map_err(at)?;
                (fmt_sig(b.lower / a.tau), fmt_sig(b.upper / a.tau))
            }
            _ => (String::new(), String::new()),
        };
        rows.push(vec![fmt_sig(theta), fmt_sig(density), lo, hi]);
    }
    let csv = csv_string(&["theta", "density", "lower_bound", "upper_bound"], &rows).map_err(Failure::Runtime)?;
    emit(a.out.as_deref(), &csv).map_err(Failure::Runtime)
}

fn cmd_shrinkage(a: ShrinkageArgs) -> Outcome {
    let prof = shrinkage_profile(&a.y, a.tau, a.sigma).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows: Vec<Vec<String>> = a
        .y
        .iter()
        .zip(&prof)
        .map(|(y, s)| vec![fmt_sig(*y), fmt_sig(s.e_kappa), fmt_sig(s.var_kappa), fmt_sig(s.post_mean_theta)])
        .collect();
    let csv = csv_string(&["y", "e_kappa", "var_kappa", "post_mean"], &rows).map_err(Failure::Runtime)?;
    emit(a.out.as_deref(), &csv).map_err(Failure::Runtime)
}

fn cmd_risk(a: RiskArgs) -> Outcome {
    let mut rows = Vec::new();
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for &tau in &a.tau {
        if !(tau > 0.0) {
            return Err(Failure::Usage(format!("tau must be positive, got {tau}")));
        }
        let prior = match a.prior {
            RiskPrior::Horseshoe => PriorSpec::horseshoe(tau),
            RiskPrior::HorseshoePlus => PriorSpec::horseshoe_plus(tau),
            RiskPrior::Laplace => PriorSpec::laplace(tau),
        };
        let r = null_kl_risk(&prior, a.reps, a.seed).map_err(|e| Failure::Usage(e.to_string()))?;
        lx.push(tau.ln());
        ly.push(r.mean.ln());
        rows.push(vec![fmt_sig(tau), fmt_sig(r.mean), fmt_sig(r.std_err)]);
    }
    let csv = csv_string(&["tau", "risk", "se"], &rows).map_err(Failure::Runtime)?;
    emit(a.out.as_deref(), &csv).map_err(Failure::Runtime)?;
    if let Ok(fit) = fit_line(&lx, &ly) {
        eprintln!("fitted tau exponent: {}", fmt_sig(fit.exponent));
    }
    Ok(())
}

fn cmd_thresholds(a: ThresholdArgs) -> Outcome {
    let mut rows = Vec::new();
    for &n in &a.n {
        let usage = |e: hsmdp::Error| Failure::Usage(format!("n = {n}: {e}"));
        let t_mdp = hsmdp::mdp_threshold(n).map_err(usage)?;
        let t_abos = hsmdp::abos_threshold(n, a.p0).map_err(usage)?;
        let eq = equiboundary_solve(n, DEFAULT_ROOT_TOL).map(fmt_sig).unwrap_or_default();
        let oracle = hsmdp::oracle_bayes_risk(n, a.p0).map(fmt_sig).unwrap_or_default();
        rows.push(vec![n.to_string(), a.p0.to_string(), fmt_sig(t_mdp), fmt_sig(t_abos), eq, oracle]);
    }
    let header = ["n", "p0", "t_mdp", "t_abos", "t_equiboundary", "oracle_risk"];
    let csv = csv_string(&header, &rows).map_err(Failure::Runtime)?;
    emit(a.out.as_deref(), &csv).map_err(Failure::Runtime)
}

fn cmd_calibrate(a: CalibrateArgs) -> Outcome {
    let probe = ExperimentConfig::new(a.n, a.p0, a.amplitude, TauMethod::mmle(), 1, a.seed);
    probe.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (y, _) = generate_two_groups(&probe, 0);
    let rt = |e: hsmdp::Error| Failure::Runtime(e.to_string());
    let floor = 1.0 / a.n as f64;
    let mut rows = Vec::new();
    for (name, law) in [("MMLE HS", LocalLaw::HalfCauchy), ("MMLE HS+", LocalLaw::HorseshoePlus)] {
        let t = MmleSolver::new(law, 1.0, floor, 1.0).map_err(rt)?.solve(&y).0;
        rows.push(vec![name.to_string(), fmt_sig(t), fmt_sig(t)]);
    }
    for m in [TauMethod::truncated_half_cauchy(), TauMethod::untruncated_half_cauchy(), TauMethod::uniform()] {
        let p = TauGridPosterior::new(LocalLaw::HalfCauchy, m, a.n, 1.0).map_err(rt)?.posterior(&y);
        let label = ExperimentConfig { tau_method: m, ..probe.clone() }.label();
        rows.push(vec![label, fmt_sig(p.mean()), fmt_sig(p.median())]);
    }
    let csv = csv_string(&["method", "tau_mean", "tau_median"], &rows).map_err(Failure::Runtime)?;
    emit(a.out.as_deref(), &csv).map_err(Failure::Runtime)
}

#[derive(Serialize)]
struct HierarchyOut {
    n: usize,
    p0: usize,
    seed: u64,
    levels: Vec<hsmdp::HierarchyLevel>,
}

fn cmd_hierarchy(a: HierarchyArgs) -> Outcome {
    let levels = hierarchy_report(a.n, a.p0, a.seed).map_err(|e| match e {
        hsmdp::Error::DomainError(_) => Failure::Usage(e.to_string()),
        e => Failure::Runtime(e.to_string()),
    })?;
    let failed: Vec<String> = levels.iter().filter(|l| !l.pass).map(|l| l.level.to_string()).collect();
    let report = HierarchyOut {
        n: a.n,
        p0: a.p0,
        seed: a.seed,
        levels,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    emit(a.out.as_deref(), &json).map_err(Failure::Runtime)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("hierarchy levels failing: {}", failed.join(", "))))
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Outcome {
    let started_at = timestamp();
    let (name, text) = match (&a.config, a.preset) {
        (Some(p), _) => (
            p.display().to_string(),
            std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?,
        ),
        (None, Some(Preset::Table3)) => ("preset table3".to_string(), config::TABLE3.to_string()),
        (None, Some(Preset::Table4)) => ("preset table4".to_string(), config::TABLE4.to_string()),
        (None, None) => return Err(Failure::Usage("experiment needs --config or --preset".into())),
    };
    let file = config::parse(&text).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    let resolved = config::resolve(file, a.seed, a.reps).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    let mut rows = Vec::with_capacity(resolved.runs.len());
    for cfg in &resolved.runs {
        let r = run_experiment(cfg).map_err(|e| Failure::Runtime(format!("{} at n = {}: {e}", cfg.label(), cfg.n)))?;
        rows.push(vec![
            cfg.label(),
            cfg.n.to_string(),
            cfg.p0.to_string(),
            fmt_sig(cfg.amplitude),
            fmt_sig(r.scaled_risk),
            fmt_sig(r.se_scaled_risk),
            fmt_sig(r.type1),
            fmt_sig(r.type2),
            fmt_sig(r.tau_hat_mean),
            fmt_sig(r.rel_efficiency),
        ]);
    }
    let header = ["method", "n", "p0", "A", "scaled_risk", "se", "type1", "type2", "tau_hat_mean", "rel_eff"];
    let csv = csv_string(&header, &rows).map_err(Failure::Runtime)?;
    let manifest = RunManifest {
        command: "experiment".into(),
        config_digest: resolved.digest(),
        seed: resolved.file.experiment.seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_at,
        finished_at: timestamp(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    emit(Some(&a.out), &csv).map_err(Failure::Runtime)?;
    emit(Some(&manifest_path(&a.out)), &json).map_err(Failure::Runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Shrinkage(a) => cmd_shrinkage(a),
        Command::Risk(a) => cmd_risk(a),
        Command::Thresholds(a) => cmd_thresholds(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Hierarchy(a) => cmd_hierarchy(a),
        Command::Experiment(a) => cmd_experiment(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hsmdp: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
