//! The online mirror-descent-with-averaging engine, plus the exponentiated
//! gradient and projected-SGD baselines.
//!
//! One iteration of the main algorithm is
//!
//! ```text
//! zeta_i    = zeta_{i-1} + gamma_i u_i(theta_{i-1})      (dual descent)
//! theta_i   = -grad W_{beta_i}(zeta_i)                   (mirror map)
//! hat_i     = hat_{i-1} + (gamma_i / sum gamma)(theta_{i-1} - hat_{i-1})
//! ```
//!
//! The averaged output incorporates the **pre-update** iterate, so
//! `hat_t` is the gamma-weighted convex combination of
//! `theta_0, ..., theta_{t-1}` and never depends on `theta_t`.
//!
//! The engine accumulates the dual state with the *unscaled* schedule
//! sequences: multiplying both `(gamma_i)` and `(beta_i)` by the same
//! positive constant cancels inside `zeta/beta`, so factoring the joint
//! scale out keeps rescaled runs bit-identical. EG and projected SGD have no
//! temperature to cancel against and use the scaled step sizes.

use crate::data::SampleSource;
use crate::error::{Error, Result};
use crate::loss::LossOracle;
use crate::proxy::ProxyFunction;
use crate::schedule::Schedule;
use crate::simplex::{project_simplex_l2, DualVector, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Algorithm {
    /// Dual averaging with temperature schedule and averaged output.
    #[serde(rename = "smd")]
    SmdAveraged,
    /// Exponentiated gradient: multiplicative update of the last iterate,
    /// no temperature. Equivalent to the Bregman-proximal mirror-descent
    /// step with the entropy divergence, which is why it carries the start
    /// point multiplicatively instead of restarting from the dual state.
    /// The averaged point is still tracked for comparison.
    #[serde(rename = "eg")]
    Eg,
    /// Euclidean step followed by exact l2 projection onto the simplex.
    #[serde(rename = "sgd")]
    ProjectedSgd,
}

/// Everything a run needs: proxy, schedule, start point, algorithm.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub proxy: ProxyFunction,
    pub schedule: Schedule,
    pub theta0: Weights,
    pub algorithm: Algorithm,
    /// Tolerance handed to numerical mirror-map solvers.
    pub map_tol: f64,
}

impl EngineConfig {
    /// Starts at the uniform point `theta_*`; for the entropy proxy this is
    /// exactly `-grad W_beta(0)`, so the iterate sequence is consistent at
    /// `i = 0`.
    pub fn new(proxy: ProxyFunction, schedule: Schedule, algorithm: Algorithm) -> Result<Self> {
        let theta0 = proxy.minimizer();
        Ok(EngineConfig {
            proxy,
            schedule,
            theta0,
            algorithm,
            map_tol: 1e-10,
        })
    }

    pub fn with_theta0(mut self, theta0: Weights) -> Result<Self> {
        if theta0.dim() != self.proxy.dim() || (theta0.mass() - self.proxy.lambda()).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "theta0 (M={}, lambda={}) does not match proxy (M={}, lambda={})",
                theta0.dim(),
                theta0.mass(),
                self.proxy.dim(),
                self.proxy.lambda()
            )));
        }
        self.theta0 = theta0;
        Ok(self)
    }
}

/// Mutable run state: dual vector, last iterate, averaged iterate.
#[derive(Clone, Debug)]
pub struct EngineState {
    zeta: DualVector,
    theta: Weights,
    theta_hat: Weights,
    iter: u64,
    gamma_sum: f64,
}

impl EngineState {
    pub fn zeta(&self) -> &DualVector {
        &self.zeta
    }

    /// The last iterate `theta_i`.
    pub fn theta(&self) -> &Weights {
        &self.theta
    }

    /// The averaged iterate `hat theta_i`.
    pub fn theta_hat(&self) -> &Weights {
        &self.theta_hat
    }

    /// Number of completed iterations `i`.
    pub fn iter(&self) -> u64 {
        self.iter
    }

    /// Running sum of the (unscaled) step sizes.
    pub fn gamma_sum(&self) -> f64 {
        self.gamma_sum
    }
}

/// One logged step: the pre-update iterate and the sub-gradient applied to it.
#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub theta_prev: Weights,
    pub u: Vec<f64>,
}

/// Optional per-iteration snapshots, consumed by the regret diagnostic.
/// Off the hot path: logging is opt-in and the step itself allocates nothing
/// proportional to the horizon.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryLog {
    pub steps: Vec<TrajectoryStep>,
}

impl TrajectoryLog {
    pub fn new() -> Self {
        TrajectoryLog::default()
    }
}

pub struct Engine {
    config: EngineConfig,
    state: EngineState,
}

impl Engine {
    /// `zeta = 0`, `theta = theta_hat = theta0`, `iter = 0`.
    pub fn new(config: EngineConfig) -> Result<Self> {
        Weights::validate(config.theta0.values(), config.theta0.mass())?;
        if config.algorithm == Algorithm::Eg && config.theta0.values().contains(&0.0) {
            return Err(Error::Domain(
                "EG needs a strictly positive theta0: the multiplicative update cannot leave \
                 a zero component"
                    .into(),
            ));
        }
        let m = config.theta0.dim();
        let state = EngineState {
            zeta: DualVector::zeros(m),
            theta: config.theta0.clone(),
            theta_hat: config.theta0.clone(),
            iter: 0,
            gamma_sum: 0.0,
        };
        Ok(Engine { config, state })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// Applies one iteration with sub-gradient `u` observed at the current
    /// iterate. Dispatches on the configured algorithm.
    pub fn step(&mut self, u: &[f64]) -> Result<()> {
        if u.len() != self.state.theta.dim() {
            return Err(Error::Domain(format!(
                "sub-gradient length {} does not match M={}",
                u.len(),
                self.state.theta.dim()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "sub-gradient has non-finite components".into(),
            ));
        }
        let i = self.state.iter + 1;
        match self.config.algorithm {
            Algorithm::SmdAveraged => self.smd_step(i, u),
            Algorithm::Eg => self.eg_step(i, u),
            Algorithm::ProjectedSgd => self.sgd_step(i, u),
        }
    }

    fn update_average(&mut self, gamma: f64) {
        self.state.gamma_sum += gamma;
        let w = gamma / self.state.gamma_sum;
        let theta_prev = self.state.theta.clone();
        self.state.theta_hat = self.state.theta_hat.convex_toward(&theta_prev, w);
    }

    fn smd_step(&mut self, i: u64, u: &[f64]) -> Result<()> {
        // unscaled sequences; the joint scale cancels in zeta/beta
        let gamma = self.config.schedule.gamma_base(i);
        let beta = self.config.schedule.beta_base(i);
        self.update_average(gamma);
        self.state.zeta.add_scaled(gamma, u);
        let map = self
            .config
            .proxy
            .mirror_map(&self.state.zeta, beta, self.config.map_tol)?;
        self.state.theta = map.theta;
        self.state.iter = i;
        Ok(())
    }

    fn eg_step(&mut self, i: u64, u: &[f64]) -> Result<()> {
        let gamma = self.config.schedule.gamma(i);
        self.update_average(gamma);
        // theta_j <- theta_j exp(-gamma u_j), renormalized to mass lambda;
        // max-shifted exactly like a softmax
        let lambda = self.state.theta.mass();
        let shift = u.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let mut next: Vec<f64> = self
            .state
            .theta
            .values()
            .iter()
            .zip(u)
            .map(|(&t, &uj)| t * (-gamma * (uj - shift)).exp())
            .collect();
        let total: f64 = next.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numerical(format!(
                "EG update degenerated at iteration {i} (mass {total})"
            )));
        }
        for v in next.iter_mut() {
            *v *= lambda / total;
        }
        self.state.theta = Weights::new_unchecked(next, lambda);
        self.state.zeta.add_scaled(gamma, u);
        self.state.iter = i;
        Ok(())
    }

    fn sgd_step(&mut self, i: u64, u: &[f64]) -> Result<()> {
        let gamma = self.config.schedule.gamma(i);
        self.update_average(gamma);
        let lambda = self.state.theta.mass();
        let moved: Vec<f64> = self
            .state
            .theta
            .values()
            .iter()
            .zip(u)
            .map(|(&t, &uj)| t - gamma * uj)
            .collect();
        let projected = project_simplex_l2(&moved, lambda)?;
        self.state.theta = Weights::new_unchecked(projected, lambda);
        self.state.zeta.add_scaled(gamma, u);
        self.state.iter = i;
        Ok(())
    }

    /// Runs `t` iterations: draw `(X_i, Y_i)`, query the sub-gradient oracle
    /// at `theta_{i-1}`, step. Returns the averaged estimate `hat theta_t`.
    /// A finite source that runs dry fails with the exhausted iteration.
    pub fn run(
        &mut self,
        source: &mut dyn SampleSource,
        oracle: &dyn LossOracle,
        t: u64,
        mut log: Option<&mut TrajectoryLog>,
    ) -> Result<Weights> {
        if t == 0 {
            return Err(Error::Domain("run needs t >= 1".into()));
        }
        for i in 1..=t {
            let (x, y) = source
                .next_sample()
                .ok_or(Error::DataExhausted { iteration: i })?;
            let theta_prev = self.state.theta.clone();
            let mut sample = oracle.subgradient(&theta_prev, &x, y)?;
            sample.iteration = i;
            self.step(&sample.u)?;
            if let Some(log) = log.as_deref_mut() {
                log.steps.push(TrajectoryStep {
                    theta_prev,
                    u: sample.u,
                });
            }
        }
        Ok(self.state.theta_hat.clone())
    }
}
