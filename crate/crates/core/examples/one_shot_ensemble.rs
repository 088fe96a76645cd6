//! Random codes at the size promised by the one-shot bound.
//!
//! cargo run --release --example one_shot_ensemble

use eacap::channels::QuantumChannel;
use eacap::coding::{ensemble_vs_bound, hn_bound, prop1_bound, EnsembleOptions, SectorDecomposition};

fn main() -> eacap::Result<()> {
    let dec = SectorDecomposition::single(2);
    let opts = EnsembleOptions { delta: 0.05, trials: 300, ..Default::default() };
    for ch in [QuantumChannel::identity(2), QuantumChannel::dephasing(0.1)?, QuantumChannel::depolarizing(2, 0.1)?] {
        let name = ch.name().unwrap_or("kraus").to_string();
        for eps in [0.5, 0.9, 0.99] {
            let a = prop1_bound(&ch, &dec, eps, opts.delta)?;
            let b = hn_bound(&ch, &dec, eps, opts.delta)?;
            let r = ensemble_vs_bound(&ch, &dec, &dec.resource(), eps, &opts)?;
            println!(
                "{name:<24} eps {eps:<5} bound {:>7.3} (HN {:>7.3}) bits -> M = {:<3} mean p_succ {:.4} +- {:.4} vs 1 - eps = {:.2} {}",
                a.bits, b.bits, r.m, r.mean, r.std_error, r.target, if r.passed { "ok" } else { "BELOW" }
            );
        }
    }
    Ok(())
}
