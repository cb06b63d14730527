//! Convex losses, their monotone derivative versions, Lipschitz constants,
//! and the stochastic sub-gradient oracles built from them.
//!
//! The derivative at the hinge kink is fixed to the right-continuous version
//! (`phi'(1) = 0`); any monotone selection is admissible for the theory, but
//! freezing one keeps sample paths reproducible.

use std::sync::Arc;

use crate::data::BaseClass;
use crate::error::{Error, Result};
use crate::simplex::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `phi(x) = (1 - x)_+`
    Hinge,
    /// `phi(x) = exp(-x)`
    Exponential,
    /// `phi(x) = log2(1 + exp(-x))`
    Logit,
    /// `(y - f)^2`; evaluated on the residual, used by the regression oracle.
    Squared,
}

/// Evaluates the named loss. The first three are margin losses `phi(y f(x))`;
/// `Squared` is evaluated on the residual `y - f(x)`.
pub fn loss_value(kind: LossKind, x: f64) -> f64 {
    match kind {
        LossKind::Hinge => (1.0 - x).max(0.0),
        LossKind::Exponential => (-x).exp(),
        LossKind::Logit => (1.0 + (-x).exp()).log2(),
        LossKind::Squared => x * x,
    }
}

/// The right-continuous monotone version of the margin-loss derivative.
/// `Squared` is rejected: the regression oracle owns its gradient and a
/// margin-form derivative is not defined for it.
pub fn loss_derivative(kind: LossKind, x: f64) -> Result<f64> {
    match kind {
        LossKind::Hinge => Ok(if x < 1.0 { -1.0 } else { 0.0 }),
        LossKind::Exponential => Ok(-(-x).exp()),
        // d/dx log2(1 + e^-x) = -1 / ((1 + e^x) ln 2), written without
        // large exponentials
        LossKind::Logit => Ok(-1.0 / ((1.0 + x.exp()) * std::f64::consts::LN_2)),
        LossKind::Squared => Err(Error::Unsupported(
            "squared loss has no margin-form derivative; use the regression sub-gradient".into(),
        )),
    }
}

/// The Theorem-1 constant `L_phi(lambda) = K sup_{|x| <= K lambda} |phi'(x)|`.
///
/// `|phi'|` is monotone for all three margin losses, so the supremum sits at
/// an interval endpoint (for the hinge, anywhere left of the kink, and
/// `-K lambda < 1` always): no generic optimization is needed.
pub fn lipschitz_constant(kind: LossKind, lambda: f64, k: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!(
            "base-function bound K must be positive, got {k}"
        )));
    }
    match kind {
        LossKind::Hinge => Ok(k),
        LossKind::Exponential => Ok(k * (k * lambda).exp()),
        LossKind::Logit => {
            let left = loss_derivative(LossKind::Logit, -k * lambda)?.abs();
            let right = loss_derivative(LossKind::Logit, k * lambda)?.abs();
            Ok(k * left.max(right))
        }
        LossKind::Squared => Err(Error::Unsupported(
            "squared loss is not a margin loss; use regression_linf_bound".into(),
        )),
    }
}

/// Sup-norm bound on the squared-loss gradient `2 (theta^T H - y) H` when
/// `|H_j| <= K`, `sum theta = lambda`, and `|y| <= y_bound`:
/// `L = 2 (K lambda + y_bound) K`.
pub fn regression_linf_bound(lambda: f64, k: f64, y_bound: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(k > 0.0) || y_bound < 0.0 {
        return Err(Error::Domain(
            "regression bound needs lambda > 0, K > 0, y_bound >= 0".into(),
        ));
    }
    Ok(2.0 * (k * lambda + y_bound) * k)
}

/// One stochastic sub-gradient observation `u_i(theta)`.
#[derive(Clone, Debug)]
pub struct SubgradientSample {
    pub u: Vec<f64>,
    /// Iteration index the sample was used at (0 when drawn outside a run).
    pub iteration: u64,
}

/// Classification sub-gradient `u(theta) = phi'(y theta^T H(x)) y H(x)`.
pub fn classification_subgradient(
    kind: LossKind,
    h: &[f64],
    y: f64,
    theta: &Weights,
) -> Result<SubgradientSample> {
    if y != 1.0 && y != -1.0 {
        return Err(Error::Domain(format!(
            "classification label must be -1 or +1, got {y}"
        )));
    }
    if h.len() != theta.dim() {
        return Err(Error::Domain(format!(
            "base vector length {} does not match M={}",
            h.len(),
            theta.dim()
        )));
    }
    let margin = y * theta.dot(h);
    let slope = loss_derivative(kind, margin)?;
    let u = h.iter().map(|&hj| slope * y * hj).collect();
    Ok(SubgradientSample { u, iteration: 0 })
}

/// Squared-loss gradient `u(theta) = 2 (theta^T H(x) - y) H(x)`.
pub fn regression_subgradient(h: &[f64], y: f64, theta: &Weights) -> Result<SubgradientSample> {
    if h.len() != theta.dim() {
        return Err(Error::Domain(format!(
            "base vector length {} does not match M={}",
            h.len(),
            theta.dim()
        )));
    }
    if !y.is_finite() {
        return Err(Error::Domain(format!("response must be finite, got {y}")));
    }
    let residual = theta.dot(h) - y;
    let u = h.iter().map(|&hj| 2.0 * residual * hj).collect();
    Ok(SubgradientSample { u, iteration: 0 })
}

/// A loss `Q(theta, z)` with its stochastic sub-gradient and a bound
/// `L` with `E ||grad Q||_inf^2 <= L^2` over the feasible set.
pub trait LossOracle: Send + Sync {
    /// `Q(theta, (x, y))`.
    fn loss(&self, theta: &Weights, x: &[f64], y: f64) -> Result<f64>;

    /// `grad_theta Q(theta, (x, y))`.
    fn subgradient(&self, theta: &Weights, x: &[f64], y: f64) -> Result<SubgradientSample>;

    /// The constant `L` of the accuracy bounds.
    fn linf_bound(&self) -> f64;
}

/// Margin-loss oracle `Q(theta, (x,y)) = phi(y theta^T H(x))`.
#[derive(Clone)]
pub struct ClassificationOracle {
    kind: LossKind,
    basis: Arc<dyn BaseClass>,
    lambda: f64,
    linf: f64,
}

impl ClassificationOracle {
    pub fn new(kind: LossKind, basis: Arc<dyn BaseClass>, lambda: f64) -> Result<Self> {
        let linf = lipschitz_constant(kind, lambda, basis.bound())?;
        Ok(ClassificationOracle {
            kind,
            basis,
            lambda,
            linf,
        })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn basis(&self) -> &Arc<dyn BaseClass> {
        &self.basis
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl LossOracle for ClassificationOracle {
    fn loss(&self, theta: &Weights, x: &[f64], y: f64) -> Result<f64> {
        let h = self.basis.evaluate(x);
        Ok(loss_value(self.kind, y * theta.dot(&h)))
    }

    fn subgradient(&self, theta: &Weights, x: &[f64], y: f64) -> Result<SubgradientSample> {
        classification_subgradient(self.kind, &self.basis.evaluate(x), y, theta)
    }

    fn linf_bound(&self) -> f64 {
        self.linf
    }
}

/// Squared-loss oracle `Q(theta, (x,y)) = (y - theta^T H(x))^2`.
#[derive(Clone)]
pub struct RegressionOracle {
    basis: Arc<dyn BaseClass>,
    linf: f64,
}

impl RegressionOracle {
    pub fn new(basis: Arc<dyn BaseClass>, lambda: f64, y_bound: f64) -> Result<Self> {
        let linf = regression_linf_bound(lambda, basis.bound(), y_bound)?;
        Ok(RegressionOracle { basis, linf })
    }

    pub fn basis(&self) -> &Arc<dyn BaseClass> {
        &self.basis
    }
}

impl LossOracle for RegressionOracle {
    fn loss(&self, theta: &Weights, x: &[f64], y: f64) -> Result<f64> {
        let h = self.basis.evaluate(x);
        let r = y - theta.dot(&h);
        Ok(r * r)
    }

    fn subgradient(&self, theta: &Weights, x: &[f64], y: f64) -> Result<SubgradientSample> {
        regression_subgradient(&self.basis.evaluate(x), y, theta)
    }

    fn linf_bound(&self) -> f64 {
        self.linf
    }
}
