//! Tour of the proxy functions: values, conjugates, mirror maps, and the
//! performance ratios that explain why the entropy proxy wins on the simplex.
//!
//! ```bash
//! cargo run --example mirror_maps
//! ```

use smda::{
    entropy_conjugate_value, entropy_hessian, entropy_mirror_map, generic_mirror_map,
    power_mirror_map, DualVector, ProxyFunction, Weights,
};

fn main() -> smda::Result<()> {
    let (lambda, m) = (1.0, 4);
    let z = DualVector::new(vec![0.8, -0.3, 0.0, 1.4])?;
    let beta = 0.9;

    // closed-form Gibbs map
    let gibbs = entropy_mirror_map(&z, beta, lambda, m)?;
    println!("z        = {:?}", z.values());
    println!("entropy  theta = {:?}", gibbs.theta.values());
    println!("         W_beta(z) = {:.6}", gibbs.wvalue);
    println!(
        "         (matches the conjugate: {:.6})",
        entropy_conjugate_value(&z, beta, lambda, m)?
    );

    // KKT bisection for the power proxy
    let power = power_mirror_map(&z, beta, lambda, m, 1e-10)?;
    println!("power    theta = {:?}", power.theta.values());

    // numerical fallback for the p-norm proxy
    let pnorm = ProxyFunction::pnorm(lambda, m)?;
    let pn = generic_mirror_map(&pnorm, &z, beta, 1e-9)?;
    println!("p-norm   theta = {:?}", pn.theta.values());

    // euclidean map = projection; the baseline SGD geometry
    let euclid = ProxyFunction::euclidean(lambda, m)?;
    let eu = euclid.mirror_map(&z, beta, 1e-10)?;
    println!("euclid   theta = {:?}", eu.theta.values());

    // curvature of the entropy conjugate: rows sum to zero, the quadratic
    // form never exceeds lambda/beta
    let h = entropy_hessian(&z, beta, lambda, m)?;
    println!(
        "hessian row sums = {:?}",
        h.iter().map(|r| r.iter().sum::<f64>()).collect::<Vec<_>>()
    );

    // why entropy: its ratio grows like ln M, the euclidean one like M
    println!("\nperformance ratios (V*/alpha):");
    for m in [4usize, 64, 1024] {
        let entropy = ProxyFunction::entropy(lambda, m)?.performance_ratio()?;
        let euclid = ProxyFunction::euclidean(lambda, m)?.performance_ratio()?;
        println!("  M = {m:>5}: entropy {entropy:>8.4}   euclidean {euclid:>8.1}");
    }

    // proxy values at a vertex and at the uniform minimizer
    let vertex = Weights::vertex(4, 0, lambda)?;
    let uniform = Weights::uniform(4, lambda)?;
    for proxy in [
        ProxyFunction::entropy(lambda, 4)?,
        ProxyFunction::power(lambda, 4)?,
        ProxyFunction::pnorm(lambda, 4)?,
        ProxyFunction::euclidean(lambda, 4)?,
    ] {
        println!(
            "{:?}: V(uniform) = {:.6}, V(vertex) = {:.6}, V* = {:.6}",
            proxy.kind(),
            proxy.value(&uniform)?,
            proxy.value(&vertex)?,
            proxy.vmax()
        );
    }

    // the 1-norm penalty is rejected outright
    match ProxyFunction::l1_penalty(lambda, 4) {
        Err(e) => println!("\nl1 penalty rejected as expected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
