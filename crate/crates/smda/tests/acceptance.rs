//! Acceptance suite: one test per criterion, each printing a summary line
//! (run with `--nocapture` to see them). Tolerances and thresholds are
//! pinned in code, next to the assertions.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::{l1_distance, random_in, random_simplex_point, refined_grid_argmin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smda::{
    batch_minimizer, entropy_conjugate_value, entropy_hessian, entropy_mirror_map, entropy_value,
    logged_runs, norm_l1, norm_linf, power_mirror_map, power_value, project_simplex_l2,
    regret_diagnostic, reports_to_csv, run_experiment, Algorithm, BaseClass, DistributionKind,
    DistributionSpec, DualVector, Engine, EngineConfig, ExperimentConfig, FiniteDistribution,
    LossKind, LossOracle, ProxyFunction, SampleStream, Schedule, ScheduleSpec, Weights,
};

fn classification_config(schedule: ScheduleSpec, t_grid: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        distribution: DistributionSpec::Builtin {
            name: "stump-classification-32".into(),
        },
        basis: None,
        loss: LossKind::Hinge,
        lambda: 1.0,
        schedule,
        algorithm: Algorithm::SmdAveraged,
        t_grid,
        replicates: 200,
        seed: 1_208_050_301,
        schedule_scale: 1.0,
        out: None,
    }
}

#[test]
fn criterion_01_theorem1_reproduction() {
    // stump basis M = 16, K = 1, hinge, lambda = 1 (C = 2), 32 atoms,
    // 200 replicates, every t in {10, 100, 1000}:
    //   mean excess + 2 stderr <= 2 sqrt(ln 16) sqrt(t+1) / t
    let start = Instant::now();
    let config = classification_config(ScheduleSpec::Anytime, vec![10, 100, 1000]);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let reports = pool.install(|| run_experiment(&config)).unwrap();
    let elapsed = start.elapsed();

    assert_eq!(reports.len(), 3);
    for r in &reports {
        let threshold = 2.0 * 16f64.ln().sqrt() * ((r.t + 1) as f64).sqrt() / r.t as f64;
        let observed = r.excess + 2.0 * r.stderr;
        println!(
            "criterion 1 (t = {:>4}): mean excess + 2se = {observed:.6} <= {threshold:.6}",
            r.t
        );
        assert!(
            observed <= threshold,
            "t = {}: {observed} above the Theorem-1 bound {threshold}",
            r.t
        );
    }
    println!("criterion 1: single-threaded runtime {elapsed:?} (must be < 60 s)");
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "runtime {elapsed:?} exceeds 60 s"
    );
}

#[test]
fn criterion_02_fixed_horizon_improvement() {
    // same problem, fixed-horizon tuning at t = 1000:
    //   mean excess + 2 stderr <= sqrt(2 ln 16 / 1000)
    let config = classification_config(ScheduleSpec::Fixed, vec![1000]);
    let reports = run_experiment(&config).unwrap();
    let r = &reports[0];
    let threshold = (2.0 * 16f64.ln() / 1000.0).sqrt();
    let observed = r.excess + 2.0 * r.stderr;
    println!("criterion 2: mean excess + 2se = {observed:.6} <= {threshold:.6}");
    assert!(observed <= threshold);
}

#[test]
fn criterion_03_theorem2_regression() {
    // squared loss, 16-atom regression law with |y| <= 1, K = 1, lambda = 1,
    // L = 4 (since ||2 (theta'H - y) H||_inf <= 2 (K lambda + 1) K),
    // 200 replicates at t = 1000:
    //   mean excess + 2 stderr <= 2 * 4 * sqrt(ln 16) * sqrt(1001) / 1000
    let config = ExperimentConfig {
        distribution: DistributionSpec::Builtin {
            name: "stump-regression-16".into(),
        },
        basis: None,
        loss: LossKind::Squared,
        lambda: 1.0,
        schedule: ScheduleSpec::Anytime,
        algorithm: Algorithm::SmdAveraged,
        t_grid: vec![1000],
        replicates: 200,
        seed: 1_208_050_303,
        schedule_scale: 1.0,
        out: None,
    };
    let reports = run_experiment(&config).unwrap();
    let r = &reports[0];
    let threshold = 2.0 * 4.0 * 16f64.ln().sqrt() * 1001f64.sqrt() / 1000.0;
    let observed = r.excess + 2.0 * r.stderr;
    println!("criterion 3: mean excess + 2se = {observed:.6e} <= {threshold:.6}");
    assert!(observed <= threshold);
}

#[test]
fn criterion_04_mirror_map_analytics() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);

    // finite differences of the conjugate vs the mirror map, 1e-6 relative
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let m = [2usize, 5, 20][rng.random_range(0..3)];
        let lambda = [1.0, 2.0][rng.random_range(0..2)];
        let beta = random_in(&mut rng, 1.0, 2.0);
        let z: Vec<f64> = (0..m).map(|_| random_in(&mut rng, -1.0, 1.0)).collect();
        let map =
            entropy_mirror_map(&DualVector::new(z.clone()).unwrap(), beta, lambda, m).unwrap();
        let h = 1e-5;
        for j in 0..m {
            let mut zp = z.clone();
            zp[j] += h;
            let mut zm = z.clone();
            zm[j] -= h;
            let wp =
                entropy_conjugate_value(&DualVector::new(zp).unwrap(), beta, lambda, m).unwrap();
            let wm =
                entropy_conjugate_value(&DualVector::new(zm).unwrap(), beta, lambda, m).unwrap();
            let fd = (wp - wm) / (2.0 * h);
            max_rel = max_rel.max((fd + map.theta.values()[j]).abs() / map.theta.values()[j]);
        }
    }
    println!("criterion 4a: max relative FD error {max_rel:.3e} (<= 1e-6)");
    assert!(max_rel <= 1e-6);

    // Hessian row sums vanish to 1e-12
    let mut max_row = 0.0f64;
    for _ in 0..100 {
        let m = 7;
        let beta = random_in(&mut rng, 0.5, 2.0);
        let z: Vec<f64> = (0..m).map(|_| random_in(&mut rng, -2.0, 2.0)).collect();
        let h = entropy_hessian(&DualVector::new(z).unwrap(), beta, 1.5, m).unwrap();
        for row in &h {
            max_row = max_row.max(row.iter().sum::<f64>().abs());
        }
    }
    println!("criterion 4b: max |Hessian row sum| {max_row:.3e} (<= 1e-12)");
    assert!(max_row <= 1e-12);

    // Lipschitz bound in dual norms, 1000 pairs, zero violations
    let (m, lambda) = (8usize, 1.5);
    let mut violations = 0u32;
    for _ in 0..1000 {
        let beta = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let z1: Vec<f64> = (0..m).map(|_| random_in(&mut rng, -3.0, 3.0)).collect();
        let z2: Vec<f64> = (0..m).map(|_| random_in(&mut rng, -3.0, 3.0)).collect();
        let g1 =
            entropy_mirror_map(&DualVector::new(z1.clone()).unwrap(), beta, lambda, m).unwrap();
        let g2 =
            entropy_mirror_map(&DualVector::new(z2.clone()).unwrap(), beta, lambda, m).unwrap();
        let diff: Vec<f64> = g1
            .theta
            .values()
            .iter()
            .zip(g2.theta.values())
            .map(|(a, b)| a - b)
            .collect();
        let dz: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a - b).collect();
        let lhs = norm_l1(&diff).unwrap();
        let rhs = (lambda / beta) * norm_linf(&dz).unwrap();
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    println!("criterion 4c: Lipschitz violations {violations}/1000 (must be 0)");
    assert_eq!(violations, 0);
}

#[test]
fn criterion_05_strong_convexity_and_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for lambda in [1.0, 2.0] {
        let m = 6;
        let alpha = 1.0 / lambda;
        let theta_star = Weights::uniform(m, lambda).unwrap();
        let vstar = entropy_value(&theta_star);
        let mut sconv_violations = 0u32;
        let mut lower_violations = 0u32;
        for _ in 0..1000 {
            let x = Weights::new(random_simplex_point(&mut rng, m, lambda), lambda).unwrap();
            let y = Weights::new(random_simplex_point(&mut rng, m, lambda), lambda).unwrap();
            let s: f64 = rng.random();
            let mid_values: Vec<f64> = x
                .values()
                .iter()
                .zip(y.values())
                .map(|(a, b)| s * a + (1.0 - s) * b)
                .collect();
            let mid = Weights::new(mid_values, lambda).unwrap();
            let dxy = l1_distance(x.values(), y.values());
            let rhs = s * entropy_value(&x) + (1.0 - s) * entropy_value(&y)
                - 0.5 * alpha * s * (1.0 - s) * dxy * dxy;
            if entropy_value(&mid) > rhs + 1e-9 {
                sconv_violations += 1;
            }
            let dstar = l1_distance(x.values(), theta_star.values());
            if entropy_value(&x) + 1e-9 < vstar + 0.5 * alpha * dstar * dstar {
                lower_violations += 1;
            }
        }
        println!(
            "criterion 5 (lambda = {lambda}): sconv violations {sconv_violations}, \
             lower-bound violations {lower_violations} (must be 0)"
        );
        assert_eq!(sconv_violations, 0);
        assert_eq!(lower_violations, 0);
    }
}

#[test]
fn criterion_06_regret_diagnostic() {
    // 50 logged runs at t = 100; path-wise inequality at every vertex
    let (dist, basis) = smda::data::builtin::stump_classification_32();
    let dist = Arc::new(dist);
    let basis: Arc<dyn BaseClass> = Arc::new(basis);
    let schedule = Schedule::anytime(1.0, 16).unwrap();
    let logs = logged_runs(
        &dist,
        basis.clone(),
        LossKind::Hinge,
        1.0,
        &schedule,
        100,
        50,
        60,
    )
    .unwrap();
    let proxy = ProxyFunction::entropy(1.0, 16).unwrap();
    let report = regret_diagnostic(
        &logs,
        &dist,
        LossKind::Hinge,
        basis.as_ref(),
        &proxy,
        &schedule,
    )
    .unwrap();
    println!(
        "criterion 6: max path-wise violation {:.3e} (<= 1e-8); mean excess {:.4e} \
         <= oracle bound {:.4e}",
        report.prop1_max_violation, report.mean_excess, report.expectation_bound
    );
    assert!(report.prop1_max_violation <= 1e-8);
    assert!(report.mean_excess <= report.expectation_bound);
}

#[test]
fn criterion_07_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);

    // power mirror map vs refined grid search, M = 4, 50 instances
    let (m, lambda) = (4usize, 1.0);
    let mut max_l1 = 0.0f64;
    for _ in 0..50 {
        let beta = random_in(&mut rng, 0.5, 2.0);
        let z: Vec<f64> = (0..m).map(|_| random_in(&mut rng, -1.0, 1.0)).collect();
        let solved =
            power_mirror_map(&DualVector::new(z.clone()).unwrap(), beta, lambda, m, 1e-12).unwrap();
        let objective = |theta: &[f64]| -> f64 {
            let w = Weights::new(theta.to_vec(), lambda).unwrap();
            theta.iter().zip(&z).map(|(t, zj)| t * zj).sum::<f64>() + beta * power_value(&w)
        };
        let grid = refined_grid_argmin(m, lambda, 40, 8, objective);
        max_l1 = max_l1.max(l1_distance(solved.theta.values(), &grid));
    }
    println!("criterion 7a: power map vs grid, max l1 {max_l1:.3e} (<= 1e-4)");
    assert!(max_l1 <= 1e-4);

    // batch minimizer vs 1e-3 grid in value, M = 2, smooth loss
    let basis = smda::stump_basis(1, &[vec![0.0]], true).unwrap();
    let mut max_value_gap = 0.0f64;
    for _ in 0..50 {
        let n_atoms = 3 + rng.random_range(0..6);
        let points: Vec<(Vec<f64>, f64)> = (0..n_atoms)
            .map(|_| {
                let x = random_in(&mut rng, -2.0, 2.0);
                let y = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                (vec![x], y)
            })
            .collect();
        let dist = FiniteDistribution::empirical(points, DistributionKind::Classification).unwrap();
        let (_, value) = batch_minimizer(&dist, LossKind::Exponential, &basis, 1.0, 1e-9).unwrap();
        let mut grid_best = f64::INFINITY;
        for k in 0..=1000u32 {
            let a = k as f64 / 1000.0;
            let w = Weights::new(vec![a, 1.0 - a], 1.0).unwrap();
            let v = smda::exact_phi_risk(&w, &dist, LossKind::Exponential, &basis).unwrap();
            grid_best = grid_best.min(v);
        }
        max_value_gap = max_value_gap.max((value - grid_best).abs());
    }
    println!("criterion 7b: batch vs grid, max |value gap| {max_value_gap:.3e} (<= 1e-4)");
    assert!(max_value_gap <= 1e-4);

    // exact l2 projection vs refined grid search, M = 3, 50 instances
    let mut max_l1 = 0.0f64;
    for _ in 0..50 {
        let v: Vec<f64> = (0..3).map(|_| random_in(&mut rng, -2.0, 3.0)).collect();
        let projected = project_simplex_l2(&v, 1.0).unwrap();
        let objective = |theta: &[f64]| -> f64 {
            theta
                .iter()
                .zip(&v)
                .map(|(t, vj)| (t - vj) * (t - vj))
                .sum()
        };
        let grid = refined_grid_argmin(3, 1.0, 50, 15, objective);
        max_l1 = max_l1.max(l1_distance(&projected, &grid));
    }
    println!("criterion 7c: projection vs grid, max l1 {max_l1:.3e} (<= 1e-6)");
    assert!(max_l1 <= 1e-6);
}

#[test]
fn criterion_08_scale_invariance() {
    // scaling (gamma_i, beta_i) jointly by 7.3 leaves the averaged
    // trajectory bit-identical over t = 100
    let (dist, basis) = smda::data::builtin::stump_classification_32();
    let dist = Arc::new(dist);
    let basis: Arc<dyn BaseClass> = Arc::new(basis);
    let oracle = smda::ClassificationOracle::new(LossKind::Hinge, basis.clone(), 1.0).unwrap();
    let proxy = ProxyFunction::entropy(1.0, 16).unwrap();
    let schedule = Schedule::anytime(1.0, 16).unwrap();

    let mut base = Engine::new(
        EngineConfig::new(proxy.clone(), schedule.clone(), Algorithm::SmdAveraged).unwrap(),
    )
    .unwrap();
    let mut scaled = Engine::new(
        EngineConfig::new(proxy, schedule.scaled(7.3).unwrap(), Algorithm::SmdAveraged).unwrap(),
    )
    .unwrap();

    let mut sa = SampleStream::new(dist.clone(), 4242);
    let mut sb = SampleStream::new(dist, 4242);
    for _ in 0..100 {
        let (xa, ya) = sa.draw();
        let (xb, yb) = sb.draw();
        assert_eq!(xa, xb);
        let ua = oracle.subgradient(base.state().theta(), &xa, ya).unwrap();
        let ub = oracle.subgradient(scaled.state().theta(), &xb, yb).unwrap();
        base.step(&ua.u).unwrap();
        scaled.step(&ub.u).unwrap();
        for (p, q) in base
            .state()
            .theta_hat()
            .values()
            .iter()
            .zip(scaled.state().theta_hat().values())
        {
            assert_eq!(p.to_bits(), q.to_bits(), "averaged trajectories diverged");
        }
    }
    println!("criterion 8: 7.3-scaled schedule reproduced all 100 averaged iterates bit-exactly");

    // the same invariance surfaced end to end through the CSV
    let mut config = classification_config(ScheduleSpec::Anytime, vec![100]);
    config.replicates = 20;
    let plain = reports_to_csv(&run_experiment(&config).unwrap());
    config.schedule_scale = 7.3;
    let scaled = reports_to_csv(&run_experiment(&config).unwrap());
    assert_eq!(plain, scaled, "CSV changed under joint schedule scaling");
}

#[test]
fn criterion_09_determinism() {
    let mut config = classification_config(ScheduleSpec::Anytime, vec![10, 100]);
    config.replicates = 30;

    let csv_a = reports_to_csv(&run_experiment(&config).unwrap());
    let csv_b = reports_to_csv(&run_experiment(&config).unwrap());
    assert_eq!(
        csv_a.as_bytes(),
        csv_b.as_bytes(),
        "repeat run changed the CSV"
    );

    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let csv_1 = pool1.install(|| reports_to_csv(&run_experiment(&config).unwrap()));
    let csv_8 = pool8.install(|| reports_to_csv(&run_experiment(&config).unwrap()));
    assert_eq!(
        csv_1.as_bytes(),
        csv_a.as_bytes(),
        "thread count 1 changed the CSV"
    );
    assert_eq!(
        csv_8.as_bytes(),
        csv_a.as_bytes(),
        "thread count 8 changed the CSV"
    );

    // byte-identical on disk as well
    let path = std::env::temp_dir().join(format!("smda-acceptance-{}.csv", std::process::id()));
    config.out = Some(path.clone());
    run_experiment(&config).unwrap();
    let first = std::fs::read(&path).unwrap();
    run_experiment(&config).unwrap();
    let second = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(first, second);
    assert_eq!(first, csv_a.as_bytes());
    println!("criterion 9: identical CSV bytes across reruns and thread counts 1/8");
}

#[test]
fn criterion_10_performance_ratios() {
    for (lambda, m) in [(1.0f64, 2usize), (1.0, 16), (2.0, 8)] {
        let entropy = ProxyFunction::entropy(lambda, m)
            .unwrap()
            .performance_ratio()
            .unwrap();
        let euclidean = ProxyFunction::euclidean(lambda, m)
            .unwrap()
            .performance_ratio()
            .unwrap();
        assert_eq!(
            entropy,
            lambda * lambda * (m as f64).ln(),
            "entropy ratio at ({lambda}, {m})"
        );
        assert_eq!(
            euclidean,
            lambda * lambda * m as f64 / 2.0,
            "euclidean ratio at ({lambda}, {m})"
        );
        println!(
            "criterion 10 (lambda = {lambda}, M = {m}): entropy {entropy:.6}, euclidean {euclidean}"
        );
    }
}
