//! Heisenberg-Weyl codes decoded with the pretty-good measurement.
//!
//! cargo run --release --example superdense_coding

use eacap::channels::QuantumChannel;
use eacap::coding::{avg_success, mean_and_se, simulate_codes, CodeEnsemble, CodewordLabel, EacCode, SectorDecomposition};
use eacap::linalg::PureStateVector;

fn main() -> eacap::Result<()> {
    // the four Pauli encodings over a noiseless qubit carry two bits
    let id = QuantumChannel::identity(2);
    let dec = SectorDecomposition::single(2);
    let labels = (0..4u128).map(|k| CodewordLabel::from_index(&dec, 2 * k)).collect();
    let code = EacCode::from_labels(&id, &dec, &PureStateVector::maximally_entangled(2), labels)?;
    let r = avg_success(&id, &code)?;
    println!("super-dense coding: p_succ = {:.12} (collision form residual {:.1e})", r.p_succ, r.residual);

    println!("\n{:<28} {:>3} {:>10} {:>10} {:>10}", "channel", "M", "distinct", "iid", "se");
    for p in [0.0, 0.1, 0.3, 1.0] {
        let ch = QuantumChannel::depolarizing(2, p)?;
        for m in [2, 4, 8] {
            let a = simulate_codes(&ch, &dec, m, 200, 1, CodeEnsemble::DistinctWeyl);
            let b = mean_and_se(&simulate_codes(&ch, &dec, m, 200, 1, CodeEnsemble::Iid)?);
            // only four Weyl classes exist for a qubit
            let a = a.map(|xs| format!("{:.4}", mean_and_se(&xs).0)).unwrap_or_else(|_| "-".into());
            println!("{:<28} {m:>3} {a:>10} {:>10.4} {:>10.4}", ch.name().unwrap_or(""), b.0, b.1);
        }
    }
    Ok(())
}
