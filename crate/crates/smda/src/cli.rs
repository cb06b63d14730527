//! Command-line harness: `run`, `bound`, `check`, `minimize`.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad arguments, bad
//! config, bad data), 3 on numerical errors (solver non-convergence, failed
//! diagnostic).

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{
    builtin, load_dataset, stump_basis, BaseClass, DistributionKind, FiniteDistribution,
};
use crate::engine::Algorithm;
use crate::error::{Error, Result};
use crate::experiment::{
    logged_runs, regret_diagnostic, reports_to_csv, run_experiment, ExperimentConfig, ScheduleSpec,
};
use crate::loss::LossKind;
use crate::proxy::{
    entropy_conjugate_value, entropy_hessian, entropy_mirror_map, entropy_value, ProxyFunction,
};
use crate::risk::{batch_minimizer, exact_misclassification, TheoreticalBound};
use crate::schedule::Schedule;
use crate::simplex::{norm_l1, norm_linf, DualVector, Weights};

#[derive(Parser)]
#[command(
    name = "smda",
    about = "Stochastic mirror descent with averaging for convex aggregation on the simplex",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicate experiment described by a JSON config file.
    Run(RunArgs),
    /// Print a closed-form excess-risk bound.
    Bound(BoundArgs),
    /// Run the analytic property and diagnostic suites.
    Check(CheckArgs),
    /// Compute the batch optimum of a CSV dataset.
    Minimize(MinimizeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replicate count.
    #[arg(long)]
    replicates: Option<u32>,
    /// Override the config's algorithm.
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    /// Override the config's schedule.
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Smd,
    Eg,
    Sgd,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Smd => Algorithm::SmdAveraged,
            AlgorithmArg::Eg => Algorithm::Eg,
            AlgorithmArg::Sgd => Algorithm::ProjectedSgd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Anytime,
    Fixed,
}

impl From<ScheduleArg> for ScheduleSpec {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Anytime => ScheduleSpec::Anytime,
            ScheduleArg::Fixed => ScheduleSpec::Fixed,
        }
    }
}

#[derive(Args)]
struct BoundArgs {
    /// Which bound to evaluate.
    #[arg(long, value_enum)]
    kind: BoundKind,
    /// Sample size.
    #[arg(long)]
    t: u64,
    /// Dimension M (simplex bounds).
    #[arg(long)]
    m: Option<usize>,
    /// Simplex mass lambda (simplex bounds).
    #[arg(long)]
    lambda: Option<f64>,
    /// Sub-gradient sup-norm bound L.
    #[arg(long)]
    lipschitz: f64,
    /// Strong-convexity modulus (general bound).
    #[arg(long)]
    alpha: Option<f64>,
    /// Proxy maximum (general bound).
    #[arg(long)]
    vbar: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    AnytimeThm1,
    FixedHorizon,
    GeneralThm2,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Args)]
struct MinimizeArgs {
    /// CSV dataset, label first.
    #[arg(long)]
    data: PathBuf,
    /// Problem type of the labels.
    #[arg(long, value_enum, default_value_t = ProblemArg::Classification)]
    problem: ProblemArg,
    /// Loss to minimize.
    #[arg(long, value_enum, default_value_t = LossArg::Hinge)]
    loss: LossArg,
    /// Simplex mass.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// First-order gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Skip the first line of the file.
    #[arg(long)]
    has_header: bool,
    /// Stump thresholds: per-coordinate lists separated by ';', values by ','
    /// (default: the per-coordinate median).
    #[arg(long)]
    thresholds: Option<String>,
    /// Do not close the stump class under negation.
    #[arg(long)]
    asymmetric: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Classification,
    Regression,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Hinge,
    Exponential,
    Logit,
    Squared,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Hinge => LossKind::Hinge,
            LossArg::Exponential => LossKind::Exponential,
            LossArg::Logit => LossKind::Logit,
            LossArg::Squared => LossKind::Squared,
        }
    }
}

/// Parses arguments from the process environment, dispatches, and returns the
/// process exit code.
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Check(args) => cmd_check(args),
        Command::Minimize(args) => cmd_minimize(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let json = fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&json)?;
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(replicates) = args.replicates {
        config.replicates = replicates;
    }
    if let Some(algorithm) = args.algorithm {
        config.algorithm = algorithm.into();
    }
    if let Some(schedule) = args.schedule {
        config.schedule = schedule.into();
    }
    let reports = run_experiment(&config)?;
    println!(
        "{:<8} {:>6} {:>14} {:>12} {:>14} {:>10}",
        "algo", "t", "mean_excess", "stderr", "bound", "misclass"
    );
    for r in &reports {
        println!(
            "{:<8} {:>6} {:>14.6e} {:>12.4e} {:>14.6e} {:>10.4}",
            r.algorithm, r.t, r.excess, r.stderr, r.bound, r.misclassification
        );
    }
    if config.out.is_none() {
        print!("{}", reports_to_csv(&reports));
    } else if let Some(path) = &config.out {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::Usage(format!("--{name} is required for this bound kind")))
    };
    let bound = match args.kind {
        BoundKind::AnytimeThm1 => TheoreticalBound::AnytimeThm1 {
            t: args.t,
            m: args
                .m
                .ok_or_else(|| Error::Usage("--m is required".into()))?,
            lambda: need("lambda", args.lambda)?,
            l: args.lipschitz,
        },
        BoundKind::FixedHorizon => TheoreticalBound::FixedHorizon {
            t: args.t,
            m: args
                .m
                .ok_or_else(|| Error::Usage("--m is required".into()))?,
            lambda: need("lambda", args.lambda)?,
            l: args.lipschitz,
        },
        BoundKind::GeneralThm2 => TheoreticalBound::GeneralThm2 {
            t: args.t,
            l: args.lipschitz,
            alpha: need("alpha", args.alpha)?,
            vbar: need("vbar", args.vbar)?,
        },
    };
    println!("{:.16e}", bound.value()?);
    Ok(())
}

struct CheckOutcome {
    failures: usize,
}

impl CheckOutcome {
    fn report(&mut self, name: &str, pass: bool, detail: String) {
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{name:<44} {status}  ({detail})");
        if !pass {
            self.failures += 1;
        }
    }
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut outcome = CheckOutcome { failures: 0 };

    // finite differences of the conjugate reproduce the mirror map
    let mut max_rel = 0.0f64;
    for _ in 0..40 {
        let m = [2usize, 5, 20][rng.random_range(0..3)];
        let lambda = [1.0, 2.0][rng.random_range(0..2)];
        let beta = 1.0 + rng.random::<f64>();
        let z: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let z = DualVector::new(z)?;
        let map = entropy_mirror_map(&z, beta, lambda, m)?;
        let h = 1e-5;
        for j in 0..m {
            let mut plus = z.values().to_vec();
            plus[j] += h;
            let mut minus = z.values().to_vec();
            minus[j] -= h;
            let wp = entropy_conjugate_value(&DualVector::new(plus)?, beta, lambda, m)?;
            let wm = entropy_conjugate_value(&DualVector::new(minus)?, beta, lambda, m)?;
            let fd = (wp - wm) / (2.0 * h);
            let rel = (fd + map.theta.values()[j]).abs() / map.theta.values()[j];
            max_rel = max_rel.max(rel);
        }
    }
    outcome.report(
        "conjugate finite differences vs mirror map",
        max_rel < 1e-6,
        format!("max rel err {max_rel:.2e}"),
    );

    // Hessian row sums and the sup-norm curvature bound
    let mut max_row = 0.0f64;
    let mut max_quad_excess = f64::NEG_INFINITY;
    for _ in 0..50 {
        let m = 6;
        let lambda = 1.5;
        let beta = 0.5 + rng.random::<f64>();
        let z: Vec<f64> = (0..m).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let h = entropy_hessian(&DualVector::new(z)?, beta, lambda, m)?;
        for row in &h {
            max_row = max_row.max(row.iter().sum::<f64>().abs());
        }
        // quadratic form on sup-norm unit vectors, including sign vertices
        for _ in 0..20 {
            let x: Vec<f64> = (0..m)
                .map(|_| if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 })
                .collect();
            let y: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.random::<f64>() < 0.5 {
                        2.0 * rng.random::<f64>() - 1.0
                    } else if rng.random::<f64>() < 0.5 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let quad: f64 = (0..m)
                .map(|i| x[i] * (0..m).map(|j| h[i][j] * y[j]).sum::<f64>())
                .sum();
            max_quad_excess = max_quad_excess.max(quad - lambda / beta);
        }
    }
    outcome.report(
        "hessian row sums vanish",
        max_row <= 1e-12,
        format!("max |row sum| {max_row:.2e}"),
    );
    outcome.report(
        "hessian sup-norm curvature bound",
        max_quad_excess <= 1e-9,
        format!("max excess {max_quad_excess:.2e}"),
    );

    // Lipschitz property of the mirror map in dual norms
    let mut max_ratio = 0.0f64;
    let (m, lambda) = (8usize, 1.5);
    for _ in 0..300 {
        let beta = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let z1: Vec<f64> = (0..m).map(|_| 6.0 * rng.random::<f64>() - 3.0).collect();
        let z2: Vec<f64> = (0..m).map(|_| 6.0 * rng.random::<f64>() - 3.0).collect();
        let g1 = entropy_mirror_map(&DualVector::new(z1.clone())?, beta, lambda, m)?;
        let g2 = entropy_mirror_map(&DualVector::new(z2.clone())?, beta, lambda, m)?;
        let diff: Vec<f64> = g1
            .theta
            .values()
            .iter()
            .zip(g2.theta.values())
            .map(|(a, b)| a - b)
            .collect();
        let dz: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a - b).collect();
        let ratio = norm_l1(&diff)? / ((lambda / beta) * norm_linf(&dz)?);
        max_ratio = max_ratio.max(ratio);
    }
    outcome.report(
        "mirror map Lipschitz in dual norms",
        max_ratio <= 1.0 + 1e-9,
        format!("max ratio {max_ratio:.6}"),
    );

    // strong convexity of entropy at alpha = 1/lambda, and the quadratic
    // lower bound around the minimizer
    let (m, lambda) = (6usize, 1.5);
    let alpha = 1.0 / lambda;
    let theta_star = Weights::uniform(m, lambda)?;
    let vstar = entropy_value(&theta_star);
    let mut max_sconv = f64::NEG_INFINITY;
    let mut max_lower = f64::NEG_INFINITY;
    for _ in 0..500 {
        let sample = |rng: &mut ChaCha8Rng| -> Weights {
            let raw: Vec<f64> = (0..m).map(|_| -(rng.random::<f64>()).ln()).collect();
            Weights::renormalized(raw, lambda).expect("positive exponentials")
        };
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let s = rng.random::<f64>();
        let mid_values: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| s * a + (1.0 - s) * b)
            .collect();
        let mid = Weights::new_unchecked(mid_values, lambda);
        let dxy: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| a - b)
            .collect();
        let gap = entropy_value(&mid)
            - (s * entropy_value(&x) + (1.0 - s) * entropy_value(&y)
                - 0.5 * alpha * s * (1.0 - s) * norm_l1(&dxy)?.powi(2));
        max_sconv = max_sconv.max(gap);

        let dstar: Vec<f64> = x
            .values()
            .iter()
            .zip(theta_star.values())
            .map(|(a, b)| a - b)
            .collect();
        let lower = vstar + 0.5 * alpha * norm_l1(&dstar)?.powi(2) - entropy_value(&x);
        max_lower = max_lower.max(lower);
    }
    outcome.report(
        "entropy strong convexity (alpha = 1/lambda)",
        max_sconv <= 1e-9,
        format!("max violation {max_sconv:.2e}"),
    );
    outcome.report(
        "quadratic lower bound at the minimizer",
        max_lower <= 1e-9,
        format!("max violation {max_lower:.2e}"),
    );

    // path-wise regret inequality on logged runs
    let (dist, basis) = builtin::stump_classification_32();
    let dist = Arc::new(dist);
    let basis: Arc<dyn crate::data::BaseClass> = Arc::new(basis);
    let schedule = Schedule::anytime(1.0, 16)?;
    let logs = logged_runs(
        &dist,
        basis.clone(),
        LossKind::Hinge,
        1.0,
        &schedule,
        50,
        5,
        args.seed,
    )?;
    let proxy = ProxyFunction::entropy(1.0, 16)?;
    let report = regret_diagnostic(
        &logs,
        &dist,
        LossKind::Hinge,
        basis.as_ref(),
        &proxy,
        &schedule,
    )?;
    outcome.report(
        "path-wise regret inequality at all vertices",
        report.prop1_max_violation <= 1e-8,
        format!("max violation {:.2e}", report.prop1_max_violation),
    );

    // performance ratios
    let mut ratios_ok = true;
    for (lambda, m) in [(1.0f64, 2usize), (1.0, 16), (2.0, 8)] {
        let e = ProxyFunction::entropy(lambda, m)?.performance_ratio()?;
        let q = ProxyFunction::euclidean(lambda, m)?.performance_ratio()?;
        ratios_ok &= e == lambda * lambda * (m as f64).ln();
        ratios_ok &= q == lambda * lambda * m as f64 / 2.0;
    }
    outcome.report(
        "performance ratios (entropy, euclidean)",
        ratios_ok,
        "exact equality".into(),
    );

    if outcome.failures > 0 {
        return Err(Error::Numerical(format!(
            "{} diagnostic(s) failed",
            outcome.failures
        )));
    }
    println!("all diagnostics passed");
    Ok(())
}

fn cmd_minimize(args: MinimizeArgs) -> Result<()> {
    let kind = match args.problem {
        ProblemArg::Classification => DistributionKind::Classification,
        ProblemArg::Regression => DistributionKind::Regression,
    };
    let dist = load_dataset(&args.data, kind, args.has_header)?;
    let dim = dist.atoms()[0].x.len();
    let thresholds = match &args.thresholds {
        Some(spec) => parse_thresholds(spec, dim)?,
        None => median_thresholds(&dist, dim),
    };
    let basis = stump_basis(dim, &thresholds, !args.asymmetric)?;
    let loss: LossKind = args.loss.into();
    let (theta, value) = batch_minimizer(&dist, loss, &basis, args.lambda, args.tol)?;
    println!("M = {}, atoms = {}", basis.dim(), dist.atoms().len());
    println!("minimum risk = {:.16e}", value);
    println!(
        "theta* = [{}]",
        theta
            .values()
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if kind == DistributionKind::Classification {
        let miss = exact_misclassification(&theta, &dist, &basis)?;
        println!("misclassification = {miss:.6}");
    }
    Ok(())
}

fn parse_thresholds(spec: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let lists: Vec<Vec<f64>> = spec
        .split(';')
        .map(|coord| {
            coord
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Usage(format!("bad threshold '{s}'")))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    if lists.len() != dim {
        return Err(Error::Usage(format!(
            "threshold spec has {} coordinate lists, data has {dim} coordinates",
            lists.len()
        )));
    }
    Ok(lists)
}

fn median_thresholds(dist: &FiniteDistribution, dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|d| {
            let mut col: Vec<f64> = dist.atoms().iter().map(|a| a.x[d]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
            vec![col[col.len() / 2]]
        })
        .collect()
}
