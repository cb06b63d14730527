//! Recursive convex aggregation of base decision rules on the lambda-simplex
//! by stochastic mirror descent with averaging.
//!
//! The library builds an aggregated classifier (or regressor) from a finite
//! dictionary of base functions, streaming one observation a time: a dual
//! state accumulates scaled stochastic sub-gradients, a mirror map (a Gibbs
//! distribution for the entropy proxy) pulls it back onto the simplex, and
//! the reported estimate is the step-weighted average of the pre-update
//! iterates. The expected excess phi-risk of the averaged estimate decays
//! like `sqrt(ln M / t)`, with small explicit constants; this crate ships the
//! algorithm, the exponentiated-gradient and projected-SGD baselines, exact
//! risk oracles on finite-support laws, the closed-form bounds, and a
//! replicate experiment harness that verifies the bounds end to end.
//!
//! Organized by module:
//!
//! - [`simplex`]: weight vectors on the simplex, dual vectors, norms, exact
//!   Euclidean projection.
//! - [`schedule`]: step-size/temperature sequences (anytime and
//!   fixed-horizon tunings).
//! - [`proxy`]: proxy functions, beta-conjugates, mirror maps.
//! - [`data`]: stump dictionaries, finite distributions, seeded streams,
//!   CSV ingestion.
//! - [`loss`]: hinge/exponential/logit/squared losses and their
//!   sub-gradient oracles.
//! - [`engine`]: the online algorithm and baselines.
//! - [`risk`]: exact risk, exact gradients, batch optimum, theoretical
//!   bounds.
//! - [`experiment`]: seeded Monte Carlo harness, CSV reports, regret
//!   diagnostics.
//!
//! The `examples/` directory holds one runnable example per capability;
//! `smda` is the thin CLI binary over [`experiment`] and [`risk`].

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod engine;
mod error;
pub mod experiment;
pub mod loss;
pub mod proxy;
pub mod risk;
pub mod schedule;
pub mod simplex;

pub use data::{
    decision_rule, load_dataset, stump_basis, Atom, BaseClass, DistributionKind,
    FiniteDistribution, ReplayStream, SampleSource, SampleStream, StumpBasis,
};
pub use engine::{Algorithm, Engine, EngineConfig, EngineState, TrajectoryLog, TrajectoryStep};
pub use error::{Error, Result};
pub use experiment::{
    logged_runs, regret_diagnostic, reports_to_csv, run_experiment, BasisSpec, DistributionSpec,
    ExperimentConfig, RegretReport, RiskReport, ScheduleSpec,
};
pub use loss::{
    classification_subgradient, lipschitz_constant, loss_derivative, loss_value,
    regression_linf_bound, regression_subgradient, ClassificationOracle, LossKind, LossOracle,
    RegressionOracle, SubgradientSample,
};
pub use proxy::{
    entropy_conjugate_value, entropy_hessian, entropy_mirror_map, entropy_value,
    generic_mirror_map, pnorm_value, power_mirror_map, power_value, MirrorMapResult, ProxyFunction,
    ProxyKind,
};
pub use risk::{
    batch_minimizer, exact_gradient, exact_misclassification, exact_phi_risk, TheoreticalBound,
};
pub use schedule::{Schedule, ScheduleKind};
pub use simplex::{norm_l1, norm_linf, project_simplex_l2, DualVector, Weights, MASS_TOL};
