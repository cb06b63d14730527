//! Exact risk evaluation and the batch optimum on a finite-support law:
//! the quantities the excess-risk experiments are measured against.
//!
//! Also shows CSV ingestion: the same pipeline works on a dataset file.
//!
//! ```bash
//! cargo run --example batch_oracle
//! ```

use smda::data::builtin;
use smda::{
    batch_minimizer, exact_gradient, exact_misclassification, exact_phi_risk, load_dataset,
    stump_basis, DistributionKind, LossKind, Weights,
};

fn main() -> smda::Result<()> {
    let (dist, basis) = builtin::stump_classification_32();
    let uniform = Weights::uniform(16, 1.0)?;

    println!("uniform point:");
    println!(
        "  A(theta)   = {:.6}",
        exact_phi_risk(&uniform, &dist, LossKind::Hinge, &basis)?
    );
    println!(
        "  P(Y != g)  = {:.6}",
        exact_misclassification(&uniform, &dist, &basis)?
    );
    let grad = exact_gradient(&uniform, &dist, LossKind::Hinge, &basis)?;
    println!("  grad A     = {:?}", &grad[..4]);

    let (theta_star, min_risk) = batch_minimizer(&dist, LossKind::Hinge, &basis, 1.0, 1e-8)?;
    println!("\nbatch optimum:");
    println!("  min A      = {min_risk:.3e}");
    println!(
        "  mass on the separating stump = {:.6}",
        theta_star.values()[6]
    );
    println!(
        "  P(Y != g)  = {:.6}",
        exact_misclassification(&theta_star, &dist, &basis)?
    );

    // the same oracle on a CSV dataset
    let csv = "1,2.5\n1,1.5\n-1,-0.5\n-1,-1.5\n1,0.75\n-1,-0.25\n";
    let path = std::env::temp_dir().join("smda-demo-dataset.csv");
    std::fs::write(&path, csv)?;
    let file_dist = load_dataset(&path, DistributionKind::Classification, false)?;
    let file_basis = stump_basis(1, &[vec![-1.0, 0.0, 1.0]], true)?;
    let (theta_csv, value_csv) =
        batch_minimizer(&file_dist, LossKind::Logit, &file_basis, 1.0, 1e-8)?;
    println!("\nCSV dataset ({} rows):", file_dist.atoms().len());
    println!("  min logit risk = {value_csv:.6}");
    println!("  theta*         = {:?}", theta_csv.values());
    std::fs::remove_file(&path).ok();
    Ok(())
}
