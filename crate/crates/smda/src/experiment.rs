//! The replicate experiment runner: seeded Monte Carlo reproduction of the
//! expected excess-risk bounds, CSV reporting, and the path-wise regret
//! diagnostics.
//!
//! The expectation in the accuracy bounds is approximated by replicate means
//! with reported standard errors; soundness checks use `mean + 2 stderr`
//! against the bound. Replicates run in parallel, each owning its stream and
//! engine; aggregation is an ordered reduction by replicate index, so the
//! thread count never changes the output.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    builtin, load_dataset, stump_basis, Atom, BaseClass, DistributionKind, FiniteDistribution,
    SampleStream,
};
use crate::engine::{Algorithm, Engine, EngineConfig, TrajectoryLog};
use crate::error::{Error, Result};
use crate::loss::{ClassificationOracle, LossKind, LossOracle, RegressionOracle};
use crate::proxy::ProxyFunction;
use crate::risk::exact_gradient;
use crate::risk::{batch_minimizer, exact_misclassification, exact_phi_risk, TheoreticalBound};
use crate::schedule::Schedule;
use crate::simplex::{norm_linf, Weights};

/// Where the training law comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// A named desk-scale fixture; fixes the basis as well.
    Builtin { name: String },
    /// CSV file, label first, uniform empirical law.
    Csv {
        path: PathBuf,
        problem: DistributionKind,
        #[serde(default)]
        has_header: bool,
    },
    /// Inline atoms.
    Atoms {
        problem: DistributionKind,
        atoms: Vec<Atom>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisSpec {
    Stumps {
        dim: usize,
        thresholds: Vec<Vec<f64>>,
        symmetric: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleSpec {
    /// `gamma = 1`, `beta_i = beta0 sqrt(i+1)`, horizon-free.
    Anytime,
    /// Constant pair tuned to each horizon in the grid.
    Fixed,
}

/// Full description of a replicate experiment; mirrors the JSON config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    pub loss: LossKind,
    pub lambda: f64,
    pub schedule: ScheduleSpec,
    pub algorithm: Algorithm,
    pub t_grid: Vec<u64>,
    pub replicates: u32,
    pub seed: u64,
    /// Joint positive scale applied to both schedule sequences. Mirror
    /// descent output is invariant to it; EG and projected SGD are not.
    #[serde(default = "default_scale")]
    pub schedule_scale: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_scale() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::Domain("replicate count must be >= 1".into()));
        }
        if self.t_grid.is_empty() {
            return Err(Error::Domain("t_grid must not be empty".into()));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("t_grid must be strictly increasing".into()));
        }
        if self.t_grid[0] == 0 {
            return Err(Error::Domain("t_grid entries must be >= 1".into()));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.schedule_scale > 0.0) || !self.schedule_scale.is_finite() {
            return Err(Error::Domain(format!(
                "schedule_scale must be positive, got {}",
                self.schedule_scale
            )));
        }
        Ok(())
    }
}

/// One aggregated result row.
#[derive(Clone, Debug)]
pub struct RiskReport {
    /// `smd`, `eg` (last iterate), `eg-avg`, or `sgd`.
    pub algorithm: String,
    pub t: u64,
    pub m: usize,
    pub lambda: f64,
    pub replicates: u32,
    /// Mean exact risk of the reported point across replicates.
    pub phi_risk: f64,
    /// Mean exact excess risk across replicates.
    pub excess: f64,
    /// Standard error of the excess mean.
    pub stderr: f64,
    /// Mean misclassification probability (NaN for regression).
    pub misclassification: f64,
    /// The theoretical bound matching schedule and problem.
    pub bound: f64,
}

/// Resolves the distribution/basis pair of a config.
pub fn resolve_problem(
    config: &ExperimentConfig,
) -> Result<(Arc<FiniteDistribution>, Arc<dyn BaseClass>)> {
    match &config.distribution {
        DistributionSpec::Builtin { name } => {
            if config.basis.is_some() {
                return Err(Error::Domain(
                    "builtin distributions fix their basis; remove the basis field".into(),
                ));
            }
            let (dist, basis) = match name.as_str() {
                "stump-classification-32" => builtin::stump_classification_32(),
                "stump-regression-16" => builtin::stump_regression_16(),
                other => {
                    return Err(Error::Domain(format!(
                        "unknown builtin distribution '{other}'; available: \
                         stump-classification-32, stump-regression-16"
                    )))
                }
            };
            Ok((Arc::new(dist), Arc::new(basis)))
        }
        DistributionSpec::Csv {
            path,
            problem,
            has_header,
        } => {
            let dist = load_dataset(path, *problem, *has_header)?;
            let basis = build_basis(config)?;
            Ok((Arc::new(dist), basis))
        }
        DistributionSpec::Atoms { problem, atoms } => {
            let dist = FiniteDistribution::new(atoms.clone(), *problem)?;
            let basis = build_basis(config)?;
            Ok((Arc::new(dist), basis))
        }
    }
}

fn build_basis(config: &ExperimentConfig) -> Result<Arc<dyn BaseClass>> {
    match &config.basis {
        Some(BasisSpec::Stumps {
            dim,
            thresholds,
            symmetric,
        }) => Ok(Arc::new(stump_basis(*dim, thresholds, *symmetric)?)),
        None => Err(Error::Domain(
            "non-builtin distributions need a basis spec".into(),
        )),
    }
}

fn make_oracle(
    dist: &FiniteDistribution,
    basis: Arc<dyn BaseClass>,
    loss: LossKind,
    lambda: f64,
) -> Result<Arc<dyn LossOracle>> {
    Ok(match dist.kind() {
        DistributionKind::Classification => {
            Arc::new(ClassificationOracle::new(loss, basis, lambda)?)
        }
        DistributionKind::Regression => {
            Arc::new(RegressionOracle::new(basis, lambda, dist.response_bound())?)
        }
    })
}

/// splitmix64 finalizer; decorrelates replicate streams from the base seed.
fn replicate_seed(base: u64, replicate: u32) -> u64 {
    let mut z = base.wrapping_add((replicate as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn bound_for(
    schedule: ScheduleSpec,
    kind: DistributionKind,
    t: u64,
    m: usize,
    lambda: f64,
    l: f64,
) -> Result<f64> {
    match (schedule, kind) {
        (ScheduleSpec::Anytime, DistributionKind::Classification) => {
            TheoreticalBound::AnytimeThm1 { t, m, lambda, l }.value()
        }
        (ScheduleSpec::Anytime, DistributionKind::Regression) => TheoreticalBound::GeneralThm2 {
            t,
            l,
            alpha: 1.0 / lambda,
            vbar: lambda * (m as f64).ln(),
        }
        .value(),
        (ScheduleSpec::Fixed, _) => TheoreticalBound::FixedHorizon { t, m, lambda, l }.value(),
    }
}

/// Points reported by one replicate at one grid horizon.
struct Snapshot {
    primary: Weights,
    /// Averaged EG output, reported alongside the last iterate.
    eg_averaged: Option<Weights>,
}

fn run_one_replicate(
    dist: &Arc<FiniteDistribution>,
    oracle: &Arc<dyn LossOracle>,
    proxy: &ProxyFunction,
    schedule: &Schedule,
    algorithm: Algorithm,
    grid: &[u64],
    seed: u64,
) -> Result<Vec<Snapshot>> {
    let mut stream = SampleStream::new(dist.clone(), seed);
    let mut engine = Engine::new(EngineConfig::new(
        proxy.clone(),
        schedule.clone(),
        algorithm,
    )?)?;
    let t_max = *grid.last().expect("validated non-empty grid");
    let mut snapshots = Vec::with_capacity(grid.len());
    for i in 1..=t_max {
        let (x, y) = stream.draw();
        let sample = oracle.subgradient(engine.state().theta(), &x, y)?;
        engine.step(&sample.u)?;
        if grid.contains(&i) {
            let (primary, eg_averaged) = match algorithm {
                Algorithm::Eg => (
                    engine.state().theta().clone(),
                    Some(engine.state().theta_hat().clone()),
                ),
                _ => (engine.state().theta_hat().clone(), None),
            };
            snapshots.push(Snapshot {
                primary,
                eg_averaged,
            });
        }
    }
    Ok(snapshots)
}

/// Runs the configured experiment: for each horizon in the grid,
/// `replicates` independent seeded runs, exact excess risk of every reported
/// point, aggregated into [`RiskReport`] rows (and a CSV file when `out` is
/// set).
///
/// The fixed-horizon schedule is retuned per grid entry; the anytime
/// schedule shares one online pass per replicate across all horizons.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RiskReport>> {
    config.validate()?;
    let (dist, basis) = resolve_problem(config)?;
    let lambda = config.lambda;
    let m = basis.dim();
    let oracle = make_oracle(&dist, basis.clone(), config.loss, lambda)?;
    let l = oracle.linf_bound();
    let proxy = ProxyFunction::entropy(lambda, m)?;
    // the excess guard below tolerates -1e-9, so the optimum certificate
    // must be an order tighter than that
    let (_, min_risk) = batch_minimizer(&dist, config.loss, basis.as_ref(), lambda, 1e-10)?;

    // (schedule, horizons evaluated in that pass)
    let scale = config.schedule_scale;
    let passes: Vec<(Schedule, Vec<u64>)> = match config.schedule {
        ScheduleSpec::Anytime => {
            vec![(
                Schedule::anytime(l, m)?.scaled(scale)?,
                config.t_grid.clone(),
            )]
        }
        ScheduleSpec::Fixed => {
            let alpha = 1.0 / lambda;
            let vstar = lambda * (m as f64).ln();
            config
                .t_grid
                .iter()
                .map(|&t| {
                    Ok((
                        Schedule::fixed_horizon(l, alpha, vstar, t)?.scaled(scale)?,
                        vec![t],
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let mut reports = Vec::new();
    for (schedule, grid) in &passes {
        let replicate_snapshots: Vec<Vec<Snapshot>> = (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = replicate_seed(config.seed, r);
                run_one_replicate(
                    &dist,
                    &oracle,
                    &proxy,
                    schedule,
                    config.algorithm,
                    grid,
                    seed,
                )
                .map_err(|e| match e {
                    Error::Numerical(msg) => {
                        Error::Numerical(format!("{msg} (replicate seed {seed})"))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        for (slot, &t) in grid.iter().enumerate() {
            let mut variants: Vec<(&str, Vec<&Weights>)> = Vec::new();
            let primary_name = match config.algorithm {
                Algorithm::SmdAveraged => "smd",
                Algorithm::Eg => "eg",
                Algorithm::ProjectedSgd => "sgd",
            };
            variants.push((
                primary_name,
                replicate_snapshots
                    .iter()
                    .map(|s| &s[slot].primary)
                    .collect(),
            ));
            if config.algorithm == Algorithm::Eg {
                variants.push((
                    "eg-avg",
                    replicate_snapshots
                        .iter()
                        .map(|s| s[slot].eg_averaged.as_ref().expect("logged for eg"))
                        .collect(),
                ));
            }
            for (name, points) in variants {
                reports.push(aggregate(
                    name,
                    t,
                    m,
                    lambda,
                    config,
                    &dist,
                    basis.as_ref(),
                    min_risk,
                    l,
                    &points,
                )?);
            }
        }
    }

    if let Some(path) = &config.out {
        fs::write(path, reports_to_csv(&reports))?;
    }
    Ok(reports)
}

#[allow(clippy::too_many_arguments)]
fn aggregate(
    name: &str,
    t: u64,
    m: usize,
    lambda: f64,
    config: &ExperimentConfig,
    dist: &FiniteDistribution,
    basis: &dyn BaseClass,
    min_risk: f64,
    l: f64,
    points: &[&Weights],
) -> Result<RiskReport> {
    let n = points.len();
    let mut risks = Vec::with_capacity(n);
    let mut misclass = Vec::with_capacity(n);
    for (r, theta) in points.iter().enumerate() {
        let risk = exact_phi_risk(theta, dist, config.loss, basis)?;
        let excess = risk - min_risk;
        if excess < -1e-9 {
            return Err(Error::Numerical(format!(
                "excess risk {excess} below -1e-9: batch optimum is not a minimum \
                 (replicate seed {})",
                replicate_seed(config.seed, r as u32)
            )));
        }
        risks.push(risk);
        if dist.kind() == DistributionKind::Classification {
            misclass.push(exact_misclassification(theta, dist, basis)?);
        }
    }
    let mean_risk = risks.iter().sum::<f64>() / n as f64;
    let mean_excess = mean_risk - min_risk;
    let stderr = if n > 1 {
        let var = risks.iter().map(|r| (r - mean_risk).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let mean_misclass = if misclass.is_empty() {
        f64::NAN
    } else {
        misclass.iter().sum::<f64>() / n as f64
    };
    Ok(RiskReport {
        algorithm: name.to_string(),
        t,
        m,
        lambda,
        replicates: n as u32,
        phi_risk: mean_risk,
        excess: mean_excess,
        stderr,
        misclassification: mean_misclass,
        bound: bound_for(config.schedule, dist.kind(), t, m, lambda, l)?,
    })
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Frozen CSV schema: `algorithm,t,mean_excess,stderr,bound,misclass`, floats
/// with 17 significant digits.
pub fn reports_to_csv(reports: &[RiskReport]) -> String {
    let mut out = String::from("algorithm,t,mean_excess,stderr,bound,misclass\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.algorithm,
            r.t,
            fmt17(r.excess),
            fmt17(r.stderr),
            fmt17(r.bound),
            fmt17(r.misclassification),
        ));
    }
    out
}

/// Runs `replicates` seeded, trajectory-logged mirror-descent runs of length
/// `t`; input to [`regret_diagnostic`].
#[allow(clippy::too_many_arguments)]
pub fn logged_runs(
    dist: &Arc<FiniteDistribution>,
    basis: Arc<dyn BaseClass>,
    loss: LossKind,
    lambda: f64,
    schedule: &Schedule,
    t: u64,
    replicates: u32,
    seed: u64,
) -> Result<Vec<TrajectoryLog>> {
    let m = basis.dim();
    let oracle = make_oracle(dist, basis, loss, lambda)?;
    let proxy = ProxyFunction::entropy(lambda, m)?;
    (0..replicates)
        .map(|r| {
            let mut log = TrajectoryLog::new();
            let mut stream = SampleStream::new(dist.clone(), replicate_seed(seed, r));
            let mut engine = Engine::new(EngineConfig::new(
                proxy.clone(),
                schedule.clone(),
                Algorithm::SmdAveraged,
            )?)?;
            engine.run(&mut stream, oracle.as_ref(), t, Some(&mut log))?;
            Ok(log)
        })
        .collect()
}

/// Path-wise and in-expectation regret diagnostics of a batch of logged runs.
#[derive(Clone, Debug)]
pub struct RegretReport {
    /// Largest violation of the path-wise inequality over all runs and all
    /// simplex vertices; a correct implementation keeps this at rounding
    /// level (<= 1e-8).
    pub prop1_max_violation: f64,
    /// Mean exact risk of the averaged outputs.
    pub mean_risk: f64,
    /// Mean excess over the batch optimum.
    pub mean_excess: f64,
    /// The oracle-inequality bound on the expected excess.
    pub expectation_bound: f64,
    pub replicates: usize,
}

/// Evaluates, on every logged run, the path-wise inequality
///
/// ```text
/// sum_i gamma_i (theta_{i-1} - theta)' grad A(theta_{i-1})
///   <= beta_t V(theta) - beta_0 V(theta_*)
///      - sum_i gamma_i (theta_{i-1} - theta)' xi_i
///      + sum_i gamma_i^2 ||u_i||_inf^2 / (2 alpha beta_{i-1})
/// ```
///
/// at every simplex vertex `theta`, with `xi_i = u_i - grad A(theta_{i-1})`
/// computed from the exact gradient; and the in-expectation oracle bound on
/// the averaged outputs across the batch.
pub fn regret_diagnostic(
    logs: &[TrajectoryLog],
    dist: &FiniteDistribution,
    loss: LossKind,
    basis: &dyn BaseClass,
    proxy: &ProxyFunction,
    schedule: &Schedule,
) -> Result<RegretReport> {
    if logs.is_empty() || logs.iter().any(|l| l.steps.is_empty()) {
        return Err(Error::Usage(
            "regret diagnostic needs non-empty trajectory logs; enable logging in run()".into(),
        ));
    }
    let alpha = proxy.alpha().ok_or_else(|| {
        Error::Unsupported("regret diagnostic needs a proxy with a known modulus".into())
    })?;
    let m = proxy.dim();
    let lambda = proxy.lambda();
    let theta_star = proxy.minimizer();
    let v_star = proxy.value(&theta_star)?;
    let vertex_values: Vec<f64> = (0..m)
        .map(|j| proxy.value(&Weights::vertex(m, j, lambda)?))
        .collect::<Result<Vec<_>>>()?;

    let mut max_violation = f64::NEG_INFINITY;
    let mut risks = Vec::with_capacity(logs.len());

    for log in logs {
        let t = log.steps.len() as u64;
        // per-vertex accumulators of the gradient and noise terms
        let mut lhs = vec![0.0f64; m];
        let mut noise = vec![0.0f64; m];
        let mut quad = 0.0f64;
        let mut avg = vec![0.0f64; m];
        let mut gamma_sum = 0.0f64;

        for (idx, step) in log.steps.iter().enumerate() {
            let i = (idx + 1) as u64;
            let gamma = schedule.gamma(i);
            let beta_prev = schedule.beta(i - 1);
            let grad = exact_gradient(&step.theta_prev, dist, loss, basis)?;
            let xi: Vec<f64> = step.u.iter().zip(&grad).map(|(u, g)| u - g).collect();
            let theta_dot_grad = step.theta_prev.dot(&grad);
            let theta_dot_xi = step.theta_prev.dot(&xi);
            for j in 0..m {
                lhs[j] += gamma * (theta_dot_grad - lambda * grad[j]);
                noise[j] += gamma * (theta_dot_xi - lambda * xi[j]);
            }
            let u_inf = norm_linf(&step.u)?;
            quad += gamma * gamma * u_inf * u_inf / (2.0 * alpha * beta_prev);
            gamma_sum += gamma;
            for (a, v) in avg.iter_mut().zip(step.theta_prev.values()) {
                *a += gamma * v;
            }
        }

        let beta_t = schedule.beta(t);
        let beta_0 = schedule.beta(0);
        for j in 0..m {
            let rhs = beta_t * vertex_values[j] - beta_0 * v_star - noise[j] + quad;
            max_violation = max_violation.max(lhs[j] - rhs);
        }

        for a in avg.iter_mut() {
            *a /= gamma_sum;
        }
        let theta_hat = Weights::new(avg, lambda)?;
        risks.push(exact_phi_risk(&theta_hat, dist, loss, basis)?);
    }

    // oracle inequality on the expectation, using the batch optimum
    let (theta_star_a, min_risk) = batch_minimizer(dist, loss, basis, lambda, 1e-10)?;
    let l = match dist.kind() {
        DistributionKind::Classification => {
            crate::loss::lipschitz_constant(loss, lambda, basis.bound())?
        }
        DistributionKind::Regression => {
            crate::loss::regression_linf_bound(lambda, basis.bound(), dist.response_bound())?
        }
    };
    let t = logs[0].steps.len() as u64;
    let mut quad = 0.0;
    let mut gamma_sum = 0.0;
    for i in 1..=t {
        let gamma = schedule.gamma(i);
        quad += gamma * gamma / (2.0 * alpha * schedule.beta(i - 1));
        gamma_sum += gamma;
    }
    let expectation_bound =
        (schedule.beta(t) * proxy.value(&theta_star_a)? - schedule.beta(0) * v_star + l * l * quad)
            / gamma_sum;

    let mean_risk = risks.iter().sum::<f64>() / risks.len() as f64;
    Ok(RegretReport {
        prop1_max_violation: max_violation,
        mean_risk,
        mean_excess: mean_risk - min_risk,
        expectation_bound,
        replicates: logs.len(),
    })
}
