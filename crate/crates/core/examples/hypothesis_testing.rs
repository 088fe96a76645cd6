//! Hypothesis-testing relative entropy against its neighbours, and its
//! second-order expansion for i.i.d. classical pairs.
//!
//! cargo run --release --example hypothesis_testing

use eacap::divergences::{
    classical_dh, collision_d2, hypothesis_dh, info_spectrum_ds, rel_entropy, rel_entropy_variance,
    second_order_value, ClassicalPair,
};
use eacap::linalg::{random, DensityOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> eacap::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random::density(&mut rng, 3, 3);
    let sigma = random::density(&mut rng, 3, 3);
    println!("random qutrit pair: D = {:.6}, D_2 = {:.6}", rel_entropy(&rho, sigma.op())?, collision_d2(&rho, sigma.op())?);
    println!("{:>6} {:>12} {:>12} {:>10} {:>10}", "eps", "D_s", "D_H", "beta", "gap");
    for eps in [0.01, 0.1, 0.3, 0.5, 0.9] {
        let t = hypothesis_dh(&rho, sigma.op(), eps)?;
        let ds = info_spectrum_ds(&rho, sigma.op(), eps)?;
        println!("{eps:>6} {ds:>12.6} {:>12.6} {:>10.3e} {:>10.1e}", t.dh, t.beta, t.duality_gap);
    }

    // D_H of a tensor power, exactly through types, against n D + sqrt(n V) Phi^{-1}(eps)
    let p = [0.7, 0.3];
    let q = [0.4, 0.6];
    let pair = ClassicalPair::new(&p, &q)?;
    let (rp, rq) = (DensityOperator::from_diagonal(&p)?, DensityOperator::from_diagonal(&q)?);
    let d = rel_entropy(&rp, rq.op())?;
    let v = rel_entropy_variance(&rp, rq.op())?;
    println!("\nBernoulli(0.7) vs Bernoulli(0.4): D = {d:.6}, V = {v:.6}");
    println!("{:>6} {:>6} {:>14} {:>14} {:>10}", "n", "eps", "D_H exact", "expansion", "diff");
    for eps in [0.1, 0.9] {
        for n in [16, 128, 1024, 8192] {
            let exact = classical_dh(&pair.tensor_power(n)?, eps)?.dh;
            let approx = second_order_value(d, v, n, eps)?;
            println!("{n:>6} {eps:>6} {exact:>14.6} {approx:>14.6} {:>10.4}", exact - approx);
        }
    }
    Ok(())
}
