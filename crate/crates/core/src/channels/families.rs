use super::{scaled, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{c, pauli_x, pauli_y, pauli_z, phase_matrix, shift_matrix, CMatrix};

/// Named channel families with their parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StandardChannel {
    Identity { d: usize },
    /// `rho -> (1 - p) rho + p Tr(rho) I/d`.
    Depolarizing { d: usize, p: f64 },
    /// Qubit `rho -> (1 - p) rho + p Z rho Z`.
    Dephasing { p: f64 },
    /// Qubit `rho -> (1 - px - py - pz) rho + px X rho X + py Y rho Y + pz Z rho Z`.
    QubitPauli { px: f64, py: f64, pz: f64 },
    AmplitudeDamping { gamma: f64 },
}

impl StandardChannel {
    pub fn label(&self) -> String {
        match *self {
            Self::Identity { d } => format!("identity(d={d})"),
            Self::Depolarizing { d, p } => format!("depolarizing(d={d}, p={p})"),
            Self::Dephasing { p } => format!("dephasing(p={p})"),
            Self::QubitPauli { px, py, pz } => format!("qubit_pauli(px={px}, py={py}, pz={pz})"),
            Self::AmplitudeDamping { gamma } => format!("amplitude_damping(gamma={gamma})"),
        }
    }
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::OutOfRange(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

fn positive_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::OutOfRange("dimension d must be at least 1".into()));
    }
    Ok(())
}

fn pauli_channel(weights: [f64; 4]) -> Vec<CMatrix> {
    let ops = [CMatrix::identity(2, 2), pauli_x(), pauli_y(), pauli_z()];
    ops.into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0.0)
        .map(|(m, w)| scaled(m, w.sqrt()))
        .collect()
}

pub(super) fn build(family: StandardChannel) -> Result<QuantumChannel> {
    let (kraus, d, covariant) = match family {
        StandardChannel::Identity { d } => {
            positive_dim(d)?;
            (vec![CMatrix::identity(d, d)], d, true)
        }
        StandardChannel::Depolarizing { d, p } => {
            positive_dim(d)?;
            unit_interval("p", p)?;
            let d2 = (d * d) as f64;
            let mut kraus = Vec::with_capacity(d * d);
            for x in 0..d {
                for z in 0..d {
                    let w = if x == 0 && z == 0 { 1.0 - p + p / d2 } else { p / d2 };
                    if w > 0.0 {
                        kraus.push(shift_matrix(d, x) * phase_matrix(d, z) * c(w.sqrt()));
                    }
                }
            }
            (kraus, d, true)
        }
        StandardChannel::Dephasing { p } => {
            unit_interval("p", p)?;
            (pauli_channel([1.0 - p, 0.0, 0.0, p]), 2, true)
        }
        StandardChannel::QubitPauli { px, py, pz } => {
            unit_interval("px", px)?;
            unit_interval("py", py)?;
            unit_interval("pz", pz)?;
            let p0 = 1.0 - px - py - pz;
            if p0 < -1e-12 {
                return Err(Error::OutOfRange(format!("px + py + pz = {} exceeds 1", px + py + pz)));
            }
            (pauli_channel([p0.max(0.0), px, py, pz]), 2, true)
        }
        StandardChannel::AmplitudeDamping { gamma } => {
            unit_interval("gamma", gamma)?;
            let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
            let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
            let kraus = if gamma > 0.0 { vec![k0, k1] } else { vec![k0] };
            (kraus, 2, false)
        }
    };
    Ok(QuantumChannel::new(kraus, d, d)?
        .with_covariance_flag(covariant)
        .with_name(family.label())
        .with_family(family))
}
