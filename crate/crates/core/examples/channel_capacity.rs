//! Entanglement-assisted capacity and dispersion of the standard channels.
//!
//! cargo run --release --example channel_capacity

use eacap::capacity::{optimize_capacity, CapacityOptions};
use eacap::channels::QuantumChannel;

fn main() -> eacap::Result<()> {
    let channels = [
        QuantumChannel::identity(2),
        QuantumChannel::depolarizing(2, 0.2)?,
        QuantumChannel::depolarizing(3, 0.3)?,
        QuantumChannel::dephasing(0.1)?,
        QuantumChannel::qubit_pauli(0.05, 0.02, 0.1)?,
        QuantumChannel::amplitude_damping(0.3)?,
    ];
    let opts = CapacityOptions::default();
    println!("{:<40} {:>12} {:>12} {:>12}", "channel", "C_ea", "V_min", "V_max");
    for ch in &channels {
        let r = optimize_capacity(ch, &opts)?;
        println!("{:<40} {:>12.8} {:>12.8} {:>12.8}", ch.name().unwrap_or("kraus"), r.c_ea, r.v_min, r.v_max);
        // amplitude damping is the one channel here whose maximizer is not pi
        let m = &r.maximizers[0];
        println!("    maximizer spectrum {:?}", m.state.eigenvalues().iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>());
    }
    Ok(())
}
