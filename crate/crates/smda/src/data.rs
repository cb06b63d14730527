//! Base-function vectors `H(x)`, finite-support laws of `(X, Y)`, and seeded
//! i.i.d. sample streams.
//!
//! Only finite-support distributions are first-class: they make the phi-risk,
//! its exact gradient, and the batch optimum exactly computable, which the
//! verification harness relies on. A continuous generator is expressible by
//! pre-sampling into an empirical law.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simplex::Weights;

/// A finite dictionary of base functions `h_1, ..., h_M` with
/// `h_j : X -> [-K, K]`, evaluated jointly as the vector `H(x)`.
pub trait BaseClass: Send + Sync {
    /// Number of base functions M (>= 2).
    fn dim(&self) -> usize;

    /// The uniform range bound K.
    fn bound(&self) -> f64;

    /// Evaluates `H(x) = (h_1(x), ..., h_M(x))`.
    fn evaluate(&self, x: &[f64]) -> Vec<f64>;
}

/// Decision stumps `sign(x_d - tau)` over selected coordinates, optionally
/// closed under negation (a symmetric class: `h` in the class implies `-h`).
/// All outputs are in `{-1, +1}`, so `K = 1`.
#[derive(Clone, Debug)]
pub struct StumpBasis {
    /// (coordinate, threshold, negated)
    stumps: Vec<(usize, f64, bool)>,
    input_dim: usize,
}

/// Builds a stump basis from per-coordinate threshold lists. Points with
/// `x_d >= tau` map to `+1`, the rest to `-1`; the tie `x_d = tau` is part of
/// the `+1` side.
pub fn stump_basis(dim: usize, thresholds: &[Vec<f64>], symmetric: bool) -> Result<StumpBasis> {
    if dim == 0 || thresholds.len() != dim {
        return Err(Error::Domain(format!(
            "need one threshold list per coordinate: dim={dim}, lists={}",
            thresholds.len()
        )));
    }
    let mut stumps = Vec::new();
    for (coord, taus) in thresholds.iter().enumerate() {
        for &tau in taus {
            if !tau.is_finite() {
                return Err(Error::Domain(format!(
                    "threshold {tau} on coordinate {coord} is not finite"
                )));
            }
            stumps.push((coord, tau, false));
            if symmetric {
                stumps.push((coord, tau, true));
            }
        }
    }
    if stumps.len() < 2 {
        return Err(Error::Domain(
            "stump basis needs at least two base functions; provide more thresholds or set symmetric".into(),
        ));
    }
    Ok(StumpBasis {
        stumps,
        input_dim: dim,
    })
}

impl BaseClass for StumpBasis {
    fn dim(&self) -> usize {
        self.stumps.len()
    }

    fn bound(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        debug_assert!(x.len() >= self.input_dim);
        self.stumps
            .iter()
            .map(|&(coord, tau, negated)| {
                let s = if x[coord] >= tau { 1.0 } else { -1.0 };
                if negated {
                    -s
                } else {
                    s
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    /// Labels in {-1, +1}.
    Classification,
    /// Real responses.
    Regression,
}

/// One support point of the joint law: feature vector, label or response,
/// and probability mass.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub y: f64,
    pub p: f64,
}

/// A finite-support joint law of `(X, Y)`.
#[derive(Clone, Debug)]
pub struct FiniteDistribution {
    atoms: Vec<Atom>,
    kind: DistributionKind,
}

impl FiniteDistribution {
    pub fn new(atoms: Vec<Atom>, kind: DistributionKind) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("distribution needs at least one atom".into()));
        }
        let mut total = 0.0;
        for (i, atom) in atoms.iter().enumerate() {
            if !(atom.p > 0.0) || !atom.p.is_finite() {
                return Err(Error::Domain(format!(
                    "atom {i} has nonpositive probability {}",
                    atom.p
                )));
            }
            if !atom.y.is_finite() || atom.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "atom {i} has non-finite coordinates"
                )));
            }
            if kind == DistributionKind::Classification && atom.y != 1.0 && atom.y != -1.0 {
                return Err(Error::Domain(format!(
                    "classification label must be -1 or +1, atom {i} has y={}",
                    atom.y
                )));
            }
            total += atom.p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        Ok(FiniteDistribution { atoms, kind })
    }

    /// Uniform empirical law over the given points (duplicates kept).
    pub fn empirical(points: Vec<(Vec<f64>, f64)>, kind: DistributionKind) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Domain(
                "empirical law needs at least one point".into(),
            ));
        }
        let p = 1.0 / n as f64;
        let atoms = points.into_iter().map(|(x, y)| Atom { x, y, p }).collect();
        FiniteDistribution::new(atoms, kind)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Largest `|y|` over the support; the regression noise bound.
    pub fn response_bound(&self) -> f64 {
        self.atoms.iter().fold(0.0f64, |acc, a| acc.max(a.y.abs()))
    }
}

/// Anything the engine can draw training pairs from. A finite source returns
/// `None` when exhausted.
pub trait SampleSource {
    fn next_sample(&mut self) -> Option<(Vec<f64>, f64)>;
}

/// A seeded i.i.d. stream over a finite distribution. Identical seed and
/// distribution produce the identical sequence of atom indices, which makes
/// every run replayable.
#[derive(Clone, Debug)]
pub struct SampleStream {
    dist: Arc<FiniteDistribution>,
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
    position: u64,
}

impl SampleStream {
    pub fn new(dist: Arc<FiniteDistribution>, seed: u64) -> Self {
        let mut cumulative = Vec::with_capacity(dist.atoms.len());
        let mut acc = 0.0;
        for atom in &dist.atoms {
            acc += atom.p;
            cumulative.push(acc);
        }
        SampleStream {
            dist,
            cumulative,
            rng: ChaCha8Rng::seed_from_u64(seed),
            position: 0,
        }
    }

    /// Index of the next atom under the seeded generator.
    pub fn draw_index(&mut self) -> usize {
        self.position += 1;
        let u: f64 = self.rng.random();
        // first cumulative weight >= u; the final entry catches u ~ 1
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.dist.atoms.len() - 1)
    }

    /// Draws the next pair `(x, y)`.
    pub fn draw(&mut self) -> (Vec<f64>, f64) {
        let idx = self.draw_index();
        let atom = &self.dist.atoms[idx];
        (atom.x.clone(), atom.y)
    }

    /// Number of draws made so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn distribution(&self) -> &FiniteDistribution {
        &self.dist
    }
}

impl SampleSource for SampleStream {
    fn next_sample(&mut self) -> Option<(Vec<f64>, f64)> {
        Some(self.draw())
    }
}

/// A fixed, finite sequence of samples (for instance the rows of a data
/// file, in order). Exhausts.
#[derive(Clone, Debug, Default)]
pub struct ReplayStream {
    samples: Vec<(Vec<f64>, f64)>,
    position: usize,
}

impl ReplayStream {
    pub fn new(samples: Vec<(Vec<f64>, f64)>) -> Self {
        ReplayStream {
            samples,
            position: 0,
        }
    }

    /// Replays the atoms of a finite distribution in support order.
    pub fn from_distribution(dist: &FiniteDistribution) -> Self {
        ReplayStream::new(dist.atoms.iter().map(|a| (a.x.clone(), a.y)).collect())
    }
}

impl SampleSource for ReplayStream {
    fn next_sample(&mut self) -> Option<(Vec<f64>, f64)> {
        let s = self.samples.get(self.position)?.clone();
        self.position += 1;
        Some(s)
    }
}

/// Loads a CSV dataset as a uniform empirical distribution. Each row is a
/// label (or real response) followed by the feature coordinates; `.` is the
/// decimal separator, UTF-8 encoding, optional header skipped via flag.
/// Duplicate rows stay duplicate atoms.
pub fn load_dataset(
    path: impl AsRef<Path>,
    kind: DistributionKind,
    has_header: bool,
) -> Result<FiniteDistribution> {
    let content = fs::read_to_string(path.as_ref())?;
    parse_dataset(&content, kind, has_header)
}

fn parse_dataset(
    content: &str,
    kind: DistributionKind,
    has_header: bool,
) -> Result<FiniteDistribution> {
    let mut points = Vec::new();
    let mut width = None;
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let label_field = fields.next().expect("split yields at least one field");
        let y: f64 = label_field.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("cannot parse label '{}'", label_field.trim()),
        })?;
        if kind == DistributionKind::Classification && y != 1.0 && y != -1.0 {
            return Err(Error::Domain(format!(
                "classification label must be -1 or +1, line {line_no} has {y}"
            )));
        }
        let mut x = Vec::new();
        for field in fields {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse feature '{}'", field.trim()),
            })?;
            x.push(v);
        }
        if x.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "row has no feature columns".into(),
            });
        }
        match width {
            None => width = Some(x.len()),
            Some(w) if w != x.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("row has {} features, expected {w}", x.len()),
                })
            }
            _ => {}
        }
        points.push((x, y));
    }
    FiniteDistribution::empirical(points, kind)
}

/// The aggregated decision rule `g(x) = 2*1{theta^T H(x) > 0} - 1`; the
/// indicator is strict, so a zero score maps to `-1`.
pub fn decision_rule(theta: &Weights, basis: &dyn BaseClass, x: &[f64]) -> f64 {
    let h = basis.evaluate(x);
    if theta.dot(&h) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Fixed desk-scale problems used by the experiment harness and the examples.
pub mod builtin {
    use super::*;

    /// 32-atom binary classification law on a one-dimensional feature grid
    /// with 16 symmetric stumps (8 thresholds and their negations), uniform
    /// atom weights. The stump at threshold 13.5 separates the labels with
    /// margin one, so the minimal hinge risk over the unit simplex is 0.
    pub fn stump_classification_32() -> (FiniteDistribution, StumpBasis) {
        let thresholds = vec![vec![1.5, 5.5, 9.5, 13.5, 17.5, 21.5, 25.5, 29.5]];
        let basis = stump_basis(1, &thresholds, true).expect("static basis");
        let points: Vec<(Vec<f64>, f64)> = (0..32)
            .map(|a| {
                let x = a as f64;
                let y = if x >= 13.5 { 1.0 } else { -1.0 };
                (vec![x], y)
            })
            .collect();
        let dist = FiniteDistribution::empirical(points, DistributionKind::Classification)
            .expect("static distribution");
        (dist, basis)
    }

    /// 16-atom regression law realizable by an interior point of the unit
    /// simplex: responses are `theta_bar^T H(x)` for a fixed strictly
    /// positive `theta_bar`, so `|y| < 1` and the minimal squared-loss risk
    /// is 0.
    pub fn stump_regression_16() -> (FiniteDistribution, StumpBasis) {
        let thresholds = vec![vec![0.5, 2.5, 4.5, 6.5, 8.5, 10.5, 12.5, 14.5]];
        let basis = stump_basis(1, &thresholds, true).expect("static basis");
        let m = basis.dim();
        // strictly positive mixing weights; each (stump, negation) pair gets
        // masses (k+9)/136 and (8-k)/136, so the effective pair weights
        // (2k+1)/136 grade the response over roughly [-0.47, 0.47]
        let mut theta_bar = Vec::with_capacity(m);
        for k in 0..m / 2 {
            theta_bar.push((k + 9) as f64 / 136.0);
            theta_bar.push((8 - k) as f64 / 136.0);
        }
        let points: Vec<(Vec<f64>, f64)> = (0..16)
            .map(|a| {
                let x = vec![a as f64];
                let h = basis.evaluate(&x);
                let y: f64 = theta_bar.iter().zip(&h).map(|(t, hj)| t * hj).sum();
                (x, y)
            })
            .collect();
        let dist = FiniteDistribution::empirical(points, DistributionKind::Regression)
            .expect("static distribution");
        (dist, basis)
    }
}
