//! Compares the anytime tuning against the known-horizon tuning
//! (`gamma = 1/sqrt(t)`, constant temperature), which improves the bound
//! constant from 2 to sqrt(2), on the same 32-atom stump problem.
//!
//! ```bash
//! cargo run --release --example fixed_horizon
//! ```

use smda::{run_experiment, Algorithm, DistributionSpec, ExperimentConfig, LossKind, ScheduleSpec};

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
        t_grid: vec![1000],
        replicates: 200,
        seed: 31,
        schedule_scale: 1.0,
        out: None,
    };

    println!(
        "{:<10} {:>6} {:>14} {:>12} {:>14} {:>14}",
        "schedule", "t", "mean_excess", "stderr", "mean+2se", "bound"
    );
    for schedule in [ScheduleSpec::Anytime, ScheduleSpec::Fixed] {
        let config = ExperimentConfig {
            schedule,
            ..base.clone()
        };
        for r in run_experiment(&config)? {
            println!(
                "{:<10} {:>6} {:>14.6e} {:>12.3e} {:>14.6e} {:>14.6e}",
                format!("{schedule:?}").to_lowercase(),
                r.t,
                r.excess,
                r.stderr,
                r.excess + 2.0 * r.stderr,
                r.bound
            );
        }
    }
    Ok(())
}
