//! Proxy functions on the lambda-simplex, their beta-conjugates, and the
//! mirror maps `-grad W_beta` that pull dual states back onto the simplex.
//!
//! The entropy proxy has closed-form conjugate and gradient (a Gibbs
//! distribution with temperature `beta`); the power proxy gets a KKT bisection
//! solver; everything else falls back to a deterministic entropic
//! mirror-descent solver. All exponentials go through max-shifted
//! log-sum-exp: the dual state grows linearly in `t` and raw `exp` would
//! overflow.

use crate::error::{Error, Result};
use crate::simplex::{project_simplex_l2, DualVector, Weights};

/// Which proxy function generates the mirror map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProxyKind {
    /// `V = lambda ln(M/lambda) + sum_j theta_j ln theta_j`, with `0 ln 0 = 0`.
    Entropy,
    /// `V = C0 + C1 sum_j theta_j^(s+1)` with `s = 1/ln M`, calibrated so the
    /// simplex minimum is 0.
    Power,
    /// `V = ||theta||_p^2 / (2 lambda^2)` with `p = 1 + 1/ln M`.
    PNorm,
    /// `V = ||theta||_2^2`; kept for the performance-ratio comparison and as
    /// the projected-SGD baseline map.
    Euclidean,
}

/// A proxy function `V` together with the constants the excess-risk analysis
/// needs: the strong-convexity modulus `alpha` w.r.t. the 1-norm (where a
/// proven constant exists), the minimizer, and the simplex maximum `V*`.
#[derive(Clone, Debug)]
pub struct ProxyFunction {
    kind: ProxyKind,
    lambda: f64,
    m: usize,
}

/// Output of a mirror map: the feasible point `theta = -grad W_beta(z)` and
/// the conjugate value `W_beta(z)` at the query.
#[derive(Clone, Debug)]
pub struct MirrorMapResult {
    pub theta: Weights,
    pub wvalue: f64,
}

fn check_dims(lambda: f64, m: usize) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "simplex mass must be positive, got {lambda}"
        )));
    }
    if m < 2 {
        return Err(Error::Domain(format!(
            "proxy functions need M >= 2, got {m}"
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "temperature beta must be positive, got {beta}"
        )));
    }
    Ok(())
}

impl ProxyFunction {
    pub fn entropy(lambda: f64, m: usize) -> Result<Self> {
        check_dims(lambda, m)?;
        Ok(ProxyFunction {
            kind: ProxyKind::Entropy,
            lambda,
            m,
        })
    }

    pub fn power(lambda: f64, m: usize) -> Result<Self> {
        check_dims(lambda, m)?;
        Ok(ProxyFunction {
            kind: ProxyKind::Power,
            lambda,
            m,
        })
    }

    pub fn pnorm(lambda: f64, m: usize) -> Result<Self> {
        check_dims(lambda, m)?;
        Ok(ProxyFunction {
            kind: ProxyKind::PNorm,
            lambda,
            m,
        })
    }

    pub fn euclidean(lambda: f64, m: usize) -> Result<Self> {
        check_dims(lambda, m)?;
        Ok(ProxyFunction {
            kind: ProxyKind::Euclidean,
            lambda,
            m,
        })
    }

    /// The plain 1-norm penalty is not a proxy function: it is not strongly
    /// convex with respect to the 1-norm, so Assumption (L) fails and no
    /// Lipschitz mirror map exists. Always rejects.
    pub fn l1_penalty(_lambda: f64, _m: usize) -> Result<Self> {
        Err(Error::Unsupported(
            "the 1-norm penalty is not strongly convex w.r.t. the 1-norm and therefore \
             not a proxy function; use entropy, power, pnorm, or euclidean"
                .into(),
        ))
    }

    pub fn kind(&self) -> ProxyKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// The unique minimizer `theta_* = (lambda/M, ..., lambda/M)` (all four
    /// kinds are symmetric and convex).
    pub fn minimizer(&self) -> Weights {
        Weights::uniform(self.m, self.lambda).expect("validated dims")
    }

    /// Strong-convexity modulus w.r.t. the 1-norm, where a proven constant
    /// exists: `1/lambda` for entropy, `2/M` for the euclidean penalty. The
    /// moduli of the power and p-norm proxies are only known up to order, so
    /// `None` is returned and the test suite estimates them empirically.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            ProxyKind::Entropy => Some(1.0 / self.lambda),
            ProxyKind::Euclidean => Some(2.0 / self.m as f64),
            ProxyKind::Power | ProxyKind::PNorm => None,
        }
    }

    /// The simplex maximum `V* = max_theta V(theta)`, attained at the
    /// vertices for all four kinds.
    pub fn vmax(&self) -> f64 {
        let lambda = self.lambda;
        let ln_m = (self.m as f64).ln();
        match self.kind {
            ProxyKind::Entropy => lambda * ln_m,
            ProxyKind::Power => {
                lambda * lambda * (1.0 - (-1.0f64).exp()) * ln_m * ln_m / (ln_m + 1.0)
            }
            ProxyKind::PNorm => 0.5,
            ProxyKind::Euclidean => lambda * lambda,
        }
    }

    /// Evaluates `V(theta)`.
    pub fn value(&self, theta: &Weights) -> Result<f64> {
        self.check_compatible(theta)?;
        Ok(match self.kind {
            ProxyKind::Entropy => entropy_value(theta),
            ProxyKind::Power => power_value(theta),
            ProxyKind::PNorm => pnorm_value(theta),
            ProxyKind::Euclidean => theta.values().iter().map(|t| t * t).sum(),
        })
    }

    /// The ratio `V* / alpha`, the proxy-dependent factor of the excess-risk
    /// bound: `lambda^2 ln M` for entropy, `lambda^2 M / 2` for the euclidean
    /// penalty (the bad example for large M).
    pub fn performance_ratio(&self) -> Result<f64> {
        match self.alpha() {
            Some(alpha) => Ok(self.vmax() / alpha),
            None => Err(Error::Unsupported(format!(
                "performance ratio needs a proven strong-convexity modulus, which is not \
                 available for {:?}",
                self.kind
            ))),
        }
    }

    /// The mirror map `theta = -grad W_beta(z)`, i.e. the maximizer of
    /// `-z^T theta - beta V(theta)` over the simplex. Dispatches to the closed
    /// form where one exists, otherwise to a numerical solver with tolerance
    /// `tol`.
    pub fn mirror_map(&self, z: &DualVector, beta: f64, tol: f64) -> Result<MirrorMapResult> {
        if z.dim() != self.m {
            return Err(Error::Domain(format!(
                "dual vector has dimension {}, proxy expects {}",
                z.dim(),
                self.m
            )));
        }
        match self.kind {
            ProxyKind::Entropy => entropy_mirror_map(z, beta, self.lambda, self.m),
            ProxyKind::Power => power_mirror_map(z, beta, self.lambda, self.m, tol),
            ProxyKind::PNorm => generic_mirror_map(self, z, beta, tol),
            ProxyKind::Euclidean => {
                check_beta(beta)?;
                // argmin z.theta + beta ||theta||_2^2 = Proj(-z / (2 beta))
                let target: Vec<f64> = z.values().iter().map(|&v| -v / (2.0 * beta)).collect();
                let values = project_simplex_l2(&target, self.lambda)?;
                let theta = Weights::new_unchecked(values, self.lambda);
                let wvalue = -(theta.dot(z.values()) + beta * self.value(&theta)?);
                Ok(MirrorMapResult { theta, wvalue })
            }
        }
    }

    /// Gradient of `V` at an interior point; helper for the numerical solver.
    pub(crate) fn grad(&self, theta: &[f64]) -> Vec<f64> {
        match self.kind {
            ProxyKind::Entropy => theta.iter().map(|&t| t.ln() + 1.0).collect(),
            ProxyKind::Power => {
                let (s, _, c1) = power_constants(self.lambda, self.m);
                theta.iter().map(|&t| c1 * (s + 1.0) * t.powf(s)).collect()
            }
            ProxyKind::PNorm => {
                let p = 1.0 + 1.0 / (self.m as f64).ln();
                let norm_p = theta.iter().map(|&t| t.powf(p)).sum::<f64>().powf(1.0 / p);
                let scale = norm_p.powf(2.0 - p) / (self.lambda * self.lambda);
                theta.iter().map(|&t| scale * t.powf(p - 1.0)).collect()
            }
            ProxyKind::Euclidean => theta.iter().map(|&t| 2.0 * t).collect(),
        }
    }

    fn check_compatible(&self, theta: &Weights) -> Result<()> {
        if theta.dim() != self.m || (theta.mass() - self.lambda).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "weights (M={}, lambda={}) do not match proxy (M={}, lambda={})",
                theta.dim(),
                theta.mass(),
                self.m,
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Entropy proxy `V(theta) = lambda ln(M/lambda) + sum_j theta_j ln theta_j`,
/// with `0 ln 0 = 0`. Vanishes at the uniform point, peaks at `lambda ln M`
/// on the vertices.
pub fn entropy_value(theta: &Weights) -> f64 {
    let lambda = theta.mass();
    let m = theta.dim() as f64;
    let neg_entropy: f64 = theta
        .values()
        .iter()
        .map(|&t| if t > 0.0 { t * t.ln() } else { 0.0 })
        .sum();
    lambda * (m / lambda).ln() + neg_entropy
}

/// Log-sum-exp of `-z/beta`, max-shifted: returns `(max_a, ln sum exp(a - max_a))`
/// for `a = -z/beta`.
fn shifted_lse(z: &[f64], beta: f64) -> (f64, f64) {
    let amax = z
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(-v / beta));
    let sum: f64 = z.iter().map(|&v| (-v / beta - amax).exp()).sum();
    (amax, sum.ln())
}

/// The beta-conjugate of the entropy proxy:
/// `W_beta(z) = lambda beta ln( (1/M) sum_k exp(-z_k/beta) )`.
pub fn entropy_conjugate_value(z: &DualVector, beta: f64, lambda: f64, m: usize) -> Result<f64> {
    check_beta(beta)?;
    check_dims(lambda, m)?;
    if z.dim() != m {
        return Err(Error::Domain(format!(
            "dual vector dimension {} != M={m}",
            z.dim()
        )));
    }
    let (amax, lse) = shifted_lse(z.values(), beta);
    Ok(lambda * beta * (amax + lse - (m as f64).ln()))
}

/// Mirror map of the entropy proxy: a Gibbs distribution on the coordinates
/// of `z` at temperature `beta`, scaled to mass `lambda`. Overflow-free by
/// max subtraction.
pub fn entropy_mirror_map(
    z: &DualVector,
    beta: f64,
    lambda: f64,
    m: usize,
) -> Result<MirrorMapResult> {
    check_beta(beta)?;
    check_dims(lambda, m)?;
    if z.dim() != m {
        return Err(Error::Domain(format!(
            "dual vector dimension {} != M={m}",
            z.dim()
        )));
    }
    let amax = z
        .values()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(-v / beta));
    let weights: Vec<f64> = z
        .values()
        .iter()
        .map(|&v| (-v / beta - amax).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let values: Vec<f64> = weights.iter().map(|w| lambda * w / total).collect();
    let theta = Weights::new_unchecked(values, lambda);
    let wvalue = lambda * beta * (amax + total.ln() - (m as f64).ln());
    Ok(MirrorMapResult { theta, wvalue })
}

/// Second derivative matrix of the entropy conjugate,
/// `(lambda/beta) (a_i delta_ij - a_i a_j)` with `a` the Gibbs weights.
/// Row-major; exercised by the analytic test suite.
pub fn entropy_hessian(z: &DualVector, beta: f64, lambda: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    let gibbs = entropy_mirror_map(z, beta, lambda, m)?;
    let a: Vec<f64> = gibbs.theta.values().iter().map(|t| t / lambda).collect();
    let scale = lambda / beta;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            row.push(scale * (a[i] * delta - a[i] * a[j]));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Constants of the power proxy: `s = 1/ln M`,
/// `C0 = -lambda^2/(e s (s+1))`, `C1 = lambda^(1-s)/(s (s+1))`.
fn power_constants(lambda: f64, m: usize) -> (f64, f64, f64) {
    let s = 1.0 / (m as f64).ln();
    let c0 = -lambda * lambda / (std::f64::consts::E * s * (s + 1.0));
    let c1 = lambda.powf(1.0 - s) / (s * (s + 1.0));
    (s, c0, c1)
}

/// Power proxy `V = C0 + C1 sum_j theta_j^(s+1)`, calibrated to vanish at the
/// uniform point (`M^(-s) = 1/e` exactly when `s = 1/ln M`).
pub fn power_value(theta: &Weights) -> f64 {
    let (s, c0, c1) = power_constants(theta.mass(), theta.dim());
    c0 + c1 * theta.values().iter().map(|&t| t.powf(s + 1.0)).sum::<f64>()
}

/// Mirror map of the power proxy by KKT bisection on the Lagrange multiplier.
///
/// Stationarity gives `theta_j = max(0, (mu - z_j) / (beta C1 (s+1)))^(1/s)`,
/// where the mass increases monotonically in `mu`; `mu` is bracketed in
/// `[min z, min z + beta C1 (s+1) lambda^s]` and bisected until
/// `|sum theta - lambda| < tol`.
pub fn power_mirror_map(
    z: &DualVector,
    beta: f64,
    lambda: f64,
    m: usize,
    tol: f64,
) -> Result<MirrorMapResult> {
    check_beta(beta)?;
    check_dims(lambda, m)?;
    if z.dim() != m {
        return Err(Error::Domain(format!(
            "dual vector dimension {} != M={m}",
            z.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (s, _, c1) = power_constants(lambda, m);
    let denom = beta * c1 * (s + 1.0);
    let zmin = z.values().iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    let mut lo = zmin;
    let mut hi = zmin + denom * lambda.powf(s);

    let point = |mu: f64| -> Vec<f64> {
        z.values()
            .iter()
            .map(|&zj| {
                let base = (mu - zj) / denom;
                if base > 0.0 {
                    base.powf(1.0 / s)
                } else {
                    0.0
                }
            })
            .collect()
    };

    let mut values = point(hi);
    let mut converged = false;
    for _ in 0..200 {
        let mu = 0.5 * (lo + hi);
        values = point(mu);
        let total: f64 = values.iter().sum();
        if (total - lambda).abs() < tol {
            converged = true;
            break;
        }
        if total > lambda {
            hi = mu;
        } else {
            lo = mu;
        }
    }
    if !converged {
        let total: f64 = values.iter().sum();
        return Err(Error::Numerical(format!(
            "power mirror-map bisection did not reach |sum - lambda| < {tol} after 200 \
             iterations (bracket [{lo}, {hi}], current mass {total})"
        )));
    }
    let theta = Weights::renormalized(values, lambda)?;
    let wvalue = -(theta.dot(z.values()) + beta * power_value(&theta));
    Ok(MirrorMapResult { theta, wvalue })
}

/// The p-norm proxy `V = ||theta||_p^2 / (2 lambda^2)` with `p = 1 + 1/ln M`.
pub fn pnorm_value(theta: &Weights) -> f64 {
    let lambda = theta.mass();
    let p = 1.0 + 1.0 / (theta.dim() as f64).ln();
    let sum_p: f64 = theta.values().iter().map(|&t| t.powf(p)).sum();
    sum_p.powf(2.0 / p) / (2.0 * lambda * lambda)
}

/// Numerical fallback mirror map: minimizes `z^T theta + beta V(theta)` over
/// the simplex by deterministic entropic mirror descent in log space, with
/// decreasing steps, until the iterate moves less than `tol` in the 1-norm.
///
/// Useful for proxies without closed-form conjugates; expect it to be slower
/// than the dedicated maps.
pub fn generic_mirror_map(
    proxy: &ProxyFunction,
    z: &DualVector,
    beta: f64,
    tol: f64,
) -> Result<MirrorMapResult> {
    check_beta(beta)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if z.dim() != proxy.m {
        return Err(Error::Domain(format!(
            "dual vector dimension {} != M={}",
            z.dim(),
            proxy.m
        )));
    }
    let m = proxy.m;
    let lambda = proxy.lambda;
    // Step floor from relative smoothness of beta*V w.r.t. the entropy kernel;
    // the early iterations take larger (decreasing) steps to identify the
    // support quickly.
    let eta_floor = match proxy.kind {
        ProxyKind::Entropy => 1.0 / beta,
        ProxyKind::Power => 1.0 / (beta * lambda),
        ProxyKind::PNorm => lambda / (4.0 * beta),
        ProxyKind::Euclidean => 1.0 / (2.0 * beta * lambda),
    };

    // log-space iterate; theta = lambda * softmax(logits)
    let mut logits = vec![0.0f64; m];
    let to_theta = |logits: &[f64]| -> Vec<f64> {
        let lmax = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let w: Vec<f64> = logits.iter().map(|&l| (l - lmax).exp()).collect();
        let total: f64 = w.iter().sum();
        w.iter().map(|wi| lambda * wi / total).collect()
    };

    let mut theta = to_theta(&logits);
    let cap = 100_000;
    for k in 0..cap {
        let eta = eta_floor * 1.0f64.max(8.0 / ((k + 1) as f64).sqrt());
        let grad_v = match proxy.kind {
            // express ln(theta_j) through the logits to stay finite near the
            // boundary
            ProxyKind::Entropy => {
                let lmax = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let lse = lmax + logits.iter().map(|&l| (l - lmax).exp()).sum::<f64>().ln();
                logits
                    .iter()
                    .map(|&l| lambda.ln() + l - lse + 1.0)
                    .collect::<Vec<f64>>()
            }
            _ => proxy.grad(&theta),
        };
        for j in 0..m {
            logits[j] -= eta * (z.values()[j] + beta * grad_v[j]);
        }
        // re-center to keep the logits bounded
        let mean = logits.iter().sum::<f64>() / m as f64;
        for l in logits.iter_mut() {
            *l -= mean;
        }
        let next = to_theta(&logits);
        let moved: f64 = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).sum();
        theta = next;
        if moved < tol && k > 0 {
            let theta = Weights::new_unchecked(theta, lambda);
            let wvalue = -(theta.dot(z.values()) + beta * proxy.value(&theta)?);
            return Ok(MirrorMapResult { theta, wvalue });
        }
    }
    Err(Error::Numerical(format!(
        "generic mirror map did not converge to 1-norm change < {tol} within {cap} iterations"
    )))
}
