//! Load a channel from its JSON description, validate it and optimize.
//!
//! cargo run --release --example kraus_channel [-- path/to/channel.json]

use eacap::capacity::{optimize_capacity, CapacityOptions};
use eacap::channels::{parse_channel_spec, read_channel_file};

// amplitude damping with gamma = 0.36, written out by hand
const DEFAULT: &str = r#"{
  "kind": "kraus", "d_in": 2, "d_out": 2,
  "kraus": [
    [[[1, 0], [0, 0]], [[0, 0], [0.8, 0]]],
    [[[0, 0], [0.6, 0]], [[0, 0], [0, 0]]]
  ]
}"#;

fn main() {
    let ch = match std::env::args().nth(1) {
        Some(p) => read_channel_file(p.as_ref()),
        None => parse_channel_spec(DEFAULT),
    };
    let ch = match ch {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let v = ch.validate();
    println!("d_in = {}, d_out = {}, Kraus rank {}, validation {:?}", ch.d_in(), ch.d_out(), ch.kraus().len(), v);
    let r = optimize_capacity(&ch, &CapacityOptions::default()).expect("optimizer");
    println!("C_ea = {:.10} (converged {}, {} iterations)", r.c_ea, r.converged, r.iterations);

    // a malformed operator is rejected with the path of the bad entry
    let bad = DEFAULT.replace("0.8, 0", "0.9, 0");
    println!("perturbed spec: {}", parse_channel_spec(&bad).unwrap_err());
}
