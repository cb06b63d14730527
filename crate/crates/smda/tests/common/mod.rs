#![allow(dead_code)] // each integration binary uses a subset of these helpers

//! Shared brute-force oracles for the integration suites. These stay
//! independent of the library's solver paths: plain enumeration over simplex
//! grids, progressively refined around the incumbent.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive minimum of `f` over the lambda-simplex lattice with `n`
/// subdivisions, followed by `refinements` local grid passes that shrink the
/// step tenfold each time. Returns the best point found.
pub fn refined_grid_argmin(
    m: usize,
    lambda: f64,
    n: usize,
    refinements: usize,
    f: impl Fn(&[f64]) -> f64,
) -> Vec<f64> {
    let mut best_point = vec![lambda / m as f64; m];
    let mut best_value = f(&best_point);

    // coarse pass: all compositions of n into m parts
    let mut point = vec![0.0f64; m];
    enumerate_compositions(m, n, lambda, &mut point, 0, n, &mut |candidate| {
        let v = f(candidate);
        if v < best_value {
            best_value = v;
            best_point = candidate.to_vec();
        }
    });

    // local refinement: free coordinates move in [-2h, +2h] at step h/5,
    // the last coordinate absorbs the slack
    let mut h = lambda / n as f64;
    for _ in 0..refinements {
        let step = h / 5.0;
        let offsets: Vec<f64> = (-10..=10).map(|k| k as f64 * step).collect();
        let incumbent = best_point.clone();
        let mut trial = vec![0.0f64; m];
        enumerate_offsets(
            &incumbent,
            &offsets,
            lambda,
            &mut trial,
            0,
            &mut |candidate| {
                let v = f(candidate);
                if v < best_value {
                    best_value = v;
                    best_point = candidate.to_vec();
                }
            },
        );
        h = step * 2.0;
    }
    best_point
}

fn enumerate_compositions(
    m: usize,
    n: usize,
    lambda: f64,
    point: &mut Vec<f64>,
    coord: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[f64]),
) {
    if coord == m - 1 {
        point[coord] = lambda * remaining as f64 / n as f64;
        visit(point);
        return;
    }
    for k in 0..=remaining {
        point[coord] = lambda * k as f64 / n as f64;
        enumerate_compositions(m, n, lambda, point, coord + 1, remaining - k, visit);
    }
}

fn enumerate_offsets(
    incumbent: &[f64],
    offsets: &[f64],
    lambda: f64,
    trial: &mut Vec<f64>,
    coord: usize,
    visit: &mut impl FnMut(&[f64]),
) {
    let m = incumbent.len();
    if coord == m - 1 {
        let partial: f64 = trial[..m - 1].iter().sum();
        let last = lambda - partial;
        if last >= 0.0 {
            trial[m - 1] = last;
            visit(trial);
        }
        return;
    }
    for &d in offsets {
        let v = incumbent[coord] + d;
        if v < 0.0 || v > lambda {
            continue;
        }
        trial[coord] = v;
        enumerate_offsets(incumbent, offsets, lambda, trial, coord + 1, visit);
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Random interior point of the lambda-simplex (normalized exponentials).
pub fn random_simplex_point(rng: &mut ChaCha8Rng, m: usize, lambda: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..m)
        .map(|_| (-(rng.random::<f64>()).ln()).max(1e-12))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| lambda * v / total).collect()
}

pub fn random_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
