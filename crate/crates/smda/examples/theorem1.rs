//! Reproduces the anytime excess-risk bound on the 32-atom stump problem:
//! 16 symmetric stumps, hinge loss, lambda = 1 (so the bound constant is 2),
//! 200 replicates at t in {10, 100, 1000}.
//!
//! ```bash
//! cargo run --release --example theorem1
//! ```

use smda::{run_experiment, Algorithm, DistributionSpec, ExperimentConfig, LossKind, ScheduleSpec};

fn main() -> smda::Result<()> {
    let config = ExperimentConfig {
        distribution: DistributionSpec::Builtin {
            name: "stump-classification-32".into(),
        },
        basis: None,
        loss: LossKind::Hinge,
        lambda: 1.0,
        schedule: ScheduleSpec::Anytime,
        algorithm: Algorithm::SmdAveraged,
        t_grid: vec![10, 100, 1000],
        replicates: 200,
        seed: 20240917,
        schedule_scale: 1.0,
        out: None,
    };
    let reports = run_experiment(&config)?;

    println!("anytime schedule, hinge loss, M = 16, lambda = 1, 200 replicates");
    println!(
        "{:>6} {:>14} {:>12} {:>14} {:>14} {:>10}",
        "t", "mean_excess", "stderr", "mean+2se", "bound", "misclass"
    );
    for r in &reports {
        let two_se = r.excess + 2.0 * r.stderr;
        let ok = if two_se <= r.bound {
            "<= bound"
        } else {
            "ABOVE BOUND"
        };
        println!(
            "{:>6} {:>14.6e} {:>12.3e} {:>14.6e} {:>14.6e} {:>10.4}  {}",
            r.t, r.excess, r.stderr, two_se, r.bound, r.misclassification, ok
        );
    }
    Ok(())
}
