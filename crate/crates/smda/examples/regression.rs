//! Squared-loss aggregation: the general accuracy bound on a 16-atom
//! regression law with responses in [-1, 1]. The sub-gradient bound is
//! `L = 2 (K lambda + 1) K = 4`, and the anytime tuning at
//! `beta0 = L / sqrt(ln M)` realizes the bound
//! `2 L sqrt(lambda ln M * lambda) sqrt(t+1) / t`.
//!
//! ```bash
//! cargo run --release --example regression
//! ```

use smda::{run_experiment, Algorithm, DistributionSpec, ExperimentConfig, LossKind, ScheduleSpec};

fn main() -> smda::Result<()> {
    let config = ExperimentConfig {
        distribution: DistributionSpec::Builtin {
            name: "stump-regression-16".into(),
        },
        basis: None,
        loss: LossKind::Squared,
        lambda: 1.0,
        schedule: ScheduleSpec::Anytime,
        algorithm: Algorithm::SmdAveraged,
        t_grid: vec![10, 100, 1000],
        replicates: 200,
        seed: 77,
        schedule_scale: 1.0,
        out: None,
    };
    let reports = run_experiment(&config)?;

    println!("squared loss, M = 16, |y| <= 1, L = 4, 200 replicates");
    println!(
        "{:>6} {:>14} {:>12} {:>14} {:>14}",
        "t", "mean_excess", "stderr", "mean+2se", "bound"
    );
    for r in &reports {
        println!(
            "{:>6} {:>14.6e} {:>12.3e} {:>14.6e} {:>14.6e}",
            r.t,
            r.excess,
            r.stderr,
            r.excess + 2.0 * r.stderr,
            r.bound
        );
    }
    Ok(())
}
