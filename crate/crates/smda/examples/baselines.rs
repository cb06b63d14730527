//! Compares mirror descent with averaging against the exponentiated-gradient
//! and projected-SGD baselines on the same problem, same draws, writing one
//! CSV per algorithm.
//!
//! EG reports two rows per horizon: the raw last iterate (`eg`) and the
//! averaged point (`eg-avg`).
//!
//! ```bash
//! cargo run --release --example baselines
//! ```

use smda::{
    reports_to_csv, run_experiment, Algorithm, DistributionSpec, ExperimentConfig, LossKind,
    ScheduleSpec,
};

fn main() -> smda::Result<()> {
    let base = ExperimentConfig {
        distribution: DistributionSpec::Builtin {
            name: "stump-classification-32".into(),
        },
        basis: None,
        loss: LossKind::Hinge,
        lambda: 1.0,
        schedule: ScheduleSpec::Anytime,
        algorithm: Algorithm::SmdAveraged,
        t_grid: vec![10, 100, 1000],
        replicates: 100,
        seed: 5150,
        schedule_scale: 1.0,
        out: None,
    };

    println!(
        "{:<8} {:>6} {:>14} {:>12} {:>14} {:>10}",
        "algo", "t", "mean_excess", "stderr", "bound", "misclass"
    );
    let mut all = Vec::new();
    for algorithm in [
        Algorithm::SmdAveraged,
        Algorithm::Eg,
        Algorithm::ProjectedSgd,
    ] {
        let config = ExperimentConfig {
            algorithm,
            ..base.clone()
        };
        let reports = run_experiment(&config)?;
        for r in &reports {
            println!(
                "{:<8} {:>6} {:>14.6e} {:>12.3e} {:>14.6e} {:>10.4}",
                r.algorithm, r.t, r.excess, r.stderr, r.bound, r.misclassification
            );
        }
        all.extend(reports);
    }

    let path = std::env::temp_dir().join("smda-baselines.csv");
    std::fs::write(&path, reports_to_csv(&all))?;
    println!("\nwrote {}", path.display());
    Ok(())
}
