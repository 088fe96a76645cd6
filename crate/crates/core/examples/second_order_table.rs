//! Non-asymptotic bounds on log2 M* next to the Gaussian approximation.
//!
//! cargo run --release --example second_order_table -- 0.1

use eacap::capacity::{dispersion_table, min_feasible_blocklength, optimize_capacity, BoundOptions, CapacityOptions};
use eacap::channels::QuantumChannel;

fn cell(x: Option<f64>) -> String {
    x.map(|b| format!("{b:.3}")).unwrap_or_else(|| "-".into())
}

fn main() -> eacap::Result<()> {
    let eps: f64 = std::env::args().nth(1).map(|s| s.parse().expect("eps")).unwrap_or(0.1);
    for ch in [QuantumChannel::depolarizing(2, 0.2)?, QuantumChannel::dephasing(0.1)?] {
        let cap = optimize_capacity(&ch, &CapacityOptions::default())?;
        let n0 = min_feasible_blocklength(eps);
        println!("{} at eps = {eps}: C_ea = {:.6}, V = {:?}, achievability needs n >= {n0}",
            ch.name().unwrap_or("kraus"), cap.c_ea, cap.selected_dispersion(eps));
        let ns = [16, 64, 256, 1024, 4096];
        let rows = dispersion_table(&ch, &cap, eps, &ns, &BoundOptions::default())?;
        println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "n", "lower", "gaussian", "upper", "n C_ea");
        for r in rows {
            println!("{:>6} {:>12} {:>12.3} {:>12} {:>10.1}",
                r.n, cell(r.lower_bits()), r.gaussian_bits, cell(r.upper_bits()), r.n as f64 * cap.c_ea);
        }
        println!();
    }
    Ok(())
}
