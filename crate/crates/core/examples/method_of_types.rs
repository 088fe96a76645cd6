//! Type classes of a Schmidt spectrum and the type-restricted resource.
//!
//! cargo run --release --example method_of_types

use eacap::linalg::{PureStateVector, C64};
use eacap::types::{
    canonical_sector_decomposition, default_mu, enumerate_types, log2_big, restricted_resource, type_bound_margins,
    type_class_size,
};
use nalgebra::DVector;

fn main() -> eacap::Result<()> {
    for t in enumerate_types(4, 3)?.iter().take(6) {
        println!("type {:?}: |T| = {}, H = {:.4}", t.counts(), type_class_size(t), t.entropy());
    }

    let q = [0.8, 0.2];
    let m = type_bound_margins(24, &q, default_mu(24, 2))?;
    println!("\nn = 24, q = {q:?}: type bounds hold: {}", m.all_hold());

    // sqrt(0.8)|00> + sqrt(0.2)|11>
    let amps = DVector::from_vec(vec![C64::new(0.8f64.sqrt(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.2f64.sqrt(), 0.0)]);
    let psi = PureStateVector::new(amps, vec![2, 2])?;
    println!("\n{:>4} {:>8} {:>6} {:>10} {:>10} {:>14}", "n", "mu", "kept", "alpha", "gap", "log2 max |T|");
    for n in [4, 16, 64, 256] {
        let mu = default_mu(n, 2);
        let r = restricted_resource(&psi, n, mu)?;
        let biggest = r.class_sizes.iter().map(log2_big).fold(0.0, f64::max);
        println!("{n:>4} {mu:>8.4} {:>6} {:>10.6} {:>10.6} {biggest:>14.3}", r.kept.len(), r.alpha, r.fidelity_gap());
    }

    let n = 4;
    let dec = canonical_sector_decomposition(&psi, n, 1.0)?;
    println!("\nsectors at n = {n}: dims {:?}, weights {:?}", dec.dims(), dec.weights());
    let kept = restricted_resource(&psi, n, 1.0)?;
    println!("kept mass {:.4}, trace distance to psi^n {:.6}", kept.alpha, kept.fidelity_gap());
    Ok(())
}
