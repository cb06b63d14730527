//! Simplex geometry: weight vectors on the lambda-simplex, dual vectors, and
//! the norms pairing them.
//!
//! The primal space is `R^M` with the 1-norm, the dual space is `R^M` with the
//! sup-norm. Aggregation weights live on the lambda-simplex
//! `{theta >= 0, sum theta = lambda}`.

use crate::error::{Error, Result};

/// Absolute tolerance on the simplex mass constraint.
pub const MASS_TOL: f64 = 1e-10;

/// A point on the lambda-simplex in `R^M`.
///
/// Invariants: every component is nonnegative, the components sum to the mass
/// `lambda` within [`MASS_TOL`], and `M >= 2`. Constructors reject vectors
/// violating these; renormalization happens only through the explicit
/// [`Weights::renormalized`] constructor so that upstream bugs surface instead
/// of being papered over.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
    mass: f64,
}

impl Weights {
    /// Validates and wraps a weight vector. Rejects on any invariant breach.
    pub fn new(values: Vec<f64>, mass: f64) -> Result<Self> {
        Self::validate(&values, mass)?;
        Ok(Weights { values, mass })
    }

    /// Wraps a nonnegative vector after explicitly rescaling it to mass
    /// `lambda`. Rejects zero or non-finite input.
    pub fn renormalized(values: Vec<f64>, mass: f64) -> Result<Self> {
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::Domain(format!(
                "simplex mass must be positive, got {mass}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Domain(
                "weight vector needs at least 2 components".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "renormalization requires finite nonnegative components".into(),
            ));
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("cannot renormalize a zero vector".into()));
        }
        let scale = mass / total;
        let values = values.into_iter().map(|v| v * scale).collect();
        Ok(Weights { values, mass })
    }

    /// The uniform point `(lambda/M, ..., lambda/M)`, the entropy minimizer.
    pub fn uniform(m: usize, mass: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!(
                "simplex dimension must be >= 2, got {m}"
            )));
        }
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::Domain(format!(
                "simplex mass must be positive, got {mass}"
            )));
        }
        Ok(Weights {
            values: vec![mass / m as f64; m],
            mass,
        })
    }

    /// The vertex `lambda * e_j`.
    pub fn vertex(m: usize, j: usize, mass: f64) -> Result<Self> {
        if j >= m {
            return Err(Error::Domain(format!(
                "vertex index {j} out of range for M={m}"
            )));
        }
        let mut values = vec![0.0; m];
        values[j] = mass;
        Self::new(values, mass)
    }

    /// Checks the simplex invariants without constructing.
    pub fn validate(values: &[f64], mass: f64) -> Result<()> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "weight vector needs at least 2 components, got {}",
                values.len()
            )));
        }
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::Domain(format!(
                "simplex mass must be positive, got {mass}"
            )));
        }
        for (j, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("component {j} is not finite")));
            }
            if *v < 0.0 {
                return Err(Error::Domain(format!("component {j} is negative: {v}")));
            }
        }
        let total: f64 = values.iter().sum();
        if (total - mass).abs() > MASS_TOL {
            return Err(Error::Domain(format!(
                "components sum to {total}, expected {mass} (tolerance {MASS_TOL})"
            )));
        }
        Ok(())
    }

    /// Internal constructor for paths that preserve the invariants by
    /// construction (softmax outputs, convex combinations). Checked in debug.
    pub(crate) fn new_unchecked(values: Vec<f64>, mass: f64) -> Self {
        debug_assert!(Self::validate(&values, mass).is_ok());
        Weights { values, mass }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The simplex mass lambda.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// The ambient dimension M.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Inner product `theta^T z` against an arbitrary real vector.
    pub fn dot(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(self.values.len(), z.len());
        self.values.iter().zip(z).map(|(a, b)| a * b).sum()
    }

    /// `theta + w * (other - theta)` for `w` in `[0,1]`; stays on the simplex.
    pub(crate) fn convex_toward(&self, other: &Weights, w: f64) -> Weights {
        debug_assert!((0.0..=1.0).contains(&w));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + w * (b - a))
            .collect();
        Weights::new_unchecked(values, self.mass)
    }
}

/// A point of the dual space: accumulated scaled sub-gradients. Entries are
/// unconstrained but must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    values: Vec<f64>,
}

impl DualVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "dual vector component {j} is not finite"
            )));
        }
        Ok(DualVector { values })
    }

    pub fn zeros(m: usize) -> Self {
        DualVector {
            values: vec![0.0; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `self += step * u`, the dual descent update.
    pub(crate) fn add_scaled(&mut self, step: f64, u: &[f64]) {
        debug_assert_eq!(self.values.len(), u.len());
        for (z, du) in self.values.iter_mut().zip(u) {
            *z += step * du;
        }
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if let Some(j) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("component {j} is not finite")));
    }
    Ok(())
}

/// The 1-norm `sum_j |v_j|` of the primal space.
pub fn norm_l1(v: &[f64]) -> Result<f64> {
    check_finite(v)?;
    Ok(v.iter().map(|x| x.abs()).sum())
}

/// The sup-norm `max_j |v_j|` of the dual space.
pub fn norm_linf(v: &[f64]) -> Result<f64> {
    check_finite(v)?;
    Ok(v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Exact Euclidean projection onto the lambda-simplex
/// `{theta >= 0, sum theta = lambda}`.
///
/// Sort-based thresholding: the projection is `max(v - tau, 0)` where `tau` is
/// chosen so the result sums to `lambda`.
pub fn project_simplex_l2(v: &[f64], mass: f64) -> Result<Vec<f64>> {
    check_finite(v)?;
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::Domain(format!(
            "simplex mass must be positive, got {mass}"
        )));
    }
    if v.len() < 2 {
        return Err(Error::Domain(
            "projection needs at least 2 components".into(),
        ));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - mass) / (k + 1) as f64;
        if s - candidate > 0.0 {
            tau = candidate;
        }
    }
    Ok(v.iter().map(|&x| (x - tau).max(0.0)).collect())
}
