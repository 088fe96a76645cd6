//! JSON channel specifications.
//!
//! ```json
//! {"kind": "named", "name": "depolarizing", "d": 2, "p": 0.2}
//! {"kind": "kraus", "d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! Kraus operators are row-major arrays of rows of `[re, im]` pairs. A Kraus
//! specification may carry `"covariant_irreducible_input": true`.

use std::path::Path;

use serde_json::Value;

use super::{QuantumChannel, StandardChannel};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

fn parse_err(path: &str, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), message: message.into() }
}

fn field<'a>(obj: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(&format!("{path}.{key}"), "missing field"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn dim_field(obj: &Value, path: &str, key: &str) -> Result<usize> {
    as_usize(field(obj, path, key)?, &format!("{path}.{key}"))
}

/// Named family from a name and optional parameters; shared with the CLI flags.
pub(crate) fn named_family(
    name: &str,
    d: Option<usize>,
    p: Option<f64>,
    gamma: Option<f64>,
    pauli: [Option<f64>; 3],
    path: &str,
) -> Result<StandardChannel> {
    let need = |x: Option<f64>, key: &str| x.ok_or_else(|| parse_err(&format!("{path}.{key}"), "missing field"));
    let family = match name {
        "identity" => StandardChannel::Identity { d: d.unwrap_or(2) },
        "depolarizing" => StandardChannel::Depolarizing { d: d.unwrap_or(2), p: need(p, "p")? },
        "dephasing" => StandardChannel::Dephasing { p: need(p, "p")? },
        "qubit_pauli" => StandardChannel::QubitPauli {
            px: pauli[0].unwrap_or(0.0),
            py: pauli[1].unwrap_or(0.0),
            pz: pauli[2].unwrap_or(0.0),
        },
        "amplitude_damping" => StandardChannel::AmplitudeDamping { gamma: need(gamma, "gamma")? },
        other => return Err(parse_err(&format!("{path}.name"), format!("unknown channel name {other:?}"))),
    };
    let qubit_only = matches!(
        family,
        StandardChannel::Dephasing { .. } | StandardChannel::QubitPauli { .. } | StandardChannel::AmplitudeDamping { .. }
    );
    if qubit_only && d.is_some_and(|d| d != 2) {
        return Err(parse_err(&format!("{path}.d"), format!("{name} is a qubit channel; d must be 2")));
    }
    Ok(family)
}

fn parse_matrix(v: &Value, path: &str, rows: usize, cols: usize) -> Result<CMatrix> {
    let arr = v.as_array().ok_or_else(|| parse_err(path, "expected an array of rows"))?;
    if arr.len() != rows {
        return Err(parse_err(path, format!("expected {rows} rows, found {}", arr.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in arr.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let row = row.as_array().ok_or_else(|| parse_err(&rp, "expected an array of entries"))?;
        if row.len() != cols {
            return Err(parse_err(&rp, format!("expected {cols} entries, found {}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            let ep = format!("{rp}[{j}]");
            let pair = e.as_array().ok_or_else(|| parse_err(&ep, "expected [re, im]"))?;
            if pair.len() != 2 {
                return Err(parse_err(&ep, "expected [re, im]"));
            }
            let re = as_f64(&pair[0], &format!("{ep}[0]"))?;
            let im = as_f64(&pair[1], &format!("{ep}[1]"))?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Parse a channel specification; errors cite the offending field path.
pub fn parse_channel_spec(text: &str) -> Result<QuantumChannel> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err("$", e.to_string()))?;
    if !root.is_object() {
        return Err(parse_err("$", "expected an object"));
    }
    let kind = field(&root, "$", "kind")?.as_str().ok_or_else(|| parse_err("$.kind", "expected a string"))?;
    match kind {
        "named" => {
            let name = field(&root, "$", "name")?.as_str().ok_or_else(|| parse_err("$.name", "expected a string"))?;
            let d = root.get("d").map(|v| as_usize(v, "$.d")).transpose()?;
            let p = root.get("p").map(|v| as_f64(v, "$.p")).transpose()?;
            let gamma = root.get("gamma").map(|v| as_f64(v, "$.gamma")).transpose()?;
            let pauli = [
                root.get("px").map(|v| as_f64(v, "$.px")).transpose()?,
                root.get("py").map(|v| as_f64(v, "$.py")).transpose()?,
                root.get("pz").map(|v| as_f64(v, "$.pz")).transpose()?,
            ];
            let family = named_family(name, d, p, gamma, pauli, "$")?;
            QuantumChannel::standard(family).map_err(|e| parse_err("$", e.to_string()))
        }
        "kraus" => {
            let d_in = dim_field(&root, "$", "d_in")?;
            let d_out = dim_field(&root, "$", "d_out")?;
            if d_in == 0 || d_out == 0 {
                return Err(parse_err("$.d_in", "dimensions must be positive"));
            }
            let list = field(&root, "$", "kraus")?
                .as_array()
                .ok_or_else(|| parse_err("$.kraus", "expected an array of matrices"))?;
            if list.is_empty() {
                return Err(parse_err("$.kraus", "at least one Kraus operator is required"));
            }
            let kraus = list
                .iter()
                .enumerate()
                .map(|(k, m)| parse_matrix(m, &format!("$.kraus[{k}]"), d_out, d_in))
                .collect::<Result<Vec<_>>>()?;
            let flag = match root.get("covariant_irreducible_input") {
                None => false,
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| parse_err("$.covariant_irreducible_input", "expected a boolean"))?,
            };
            QuantumChannel::new(kraus, d_in, d_out)
                .map_err(|e| parse_err("$.kraus", e.to_string()))
                .map(|ch| ch.with_covariance_flag(flag))
        }
        other => Err(parse_err("$.kind", format!("unknown kind {other:?}; expected \"named\" or \"kraus\""))),
    }
}

pub fn read_channel_file(path: &Path) -> Result<QuantumChannel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(&path.display().to_string(), e.to_string()))?;
    parse_channel_spec(&text)
}
