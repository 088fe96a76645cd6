//! Channel-level quantities: mutual information and its variance, the
//! entanglement-assisted capacity, Gaussian second-order rates, and exact
//! finite-blocklength bounds.

mod bounds;
mod optimize;

use rayon::prelude::*;

use crate::channels::QuantumChannel;
use crate::divergences::{rel_entropy, rel_entropy_variance, second_order_value};
use crate::error::{Error, Result};
use crate::linalg::{purify, CMatrix, DensityOperator, PureStateVector, SpectralDecomposition};

pub use bounds::{
    achievable_bound_exact, covariant_converse, lemma2_fit, min_feasible_blocklength, BoundOptions, ExactBound, Lemma2Fit, Method,
    QUANTUM_DIM_CAP,
};
pub use optimize::{optimize_capacity, CapacityOptions, CapacityResult, Maximizer};

/// Output state `omega = (N ⊗ id)(psi)` on `B ⊗ A'` and its two marginals
/// as the product `omega_B ⊗ omega_A'`.
pub(crate) fn output_pair(ch: &QuantumChannel, psi: &PureStateVector) -> Result<(DensityOperator, DensityOperator)> {
    if psi.dims().len() != 2 || psi.dims()[0] != ch.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "resource dims {:?} do not match channel input {}",
            psi.dims(),
            ch.d_in()
        )));
    }
    let omega = ch.apply_left(&psi.density())?;
    let b = omega.partial_trace(&[0])?;
    let a = omega.partial_trace(&[1])?;
    Ok((omega, b.tensor(&a)))
}

/// `I(A':B)` for the output of an arbitrary purification `psi` of the input.
pub fn mutual_info_of_purification(ch: &QuantumChannel, psi: &PureStateVector) -> Result<f64> {
    let (omega, prod) = output_pair(ch, psi)?;
    rel_entropy(&omega, prod.op())
}

/// `I(A':B)_omega` with `omega = (N ⊗ id)(psi)` and `psi` purifying `rho_a`.
pub fn mutual_info(ch: &QuantumChannel, rho_a: &DensityOperator) -> Result<f64> {
    mutual_info_of_purification(ch, &purify(rho_a))
}

/// `V(A':B)_omega`, the variance of the log-likelihood ratio.
pub fn mutual_info_variance(ch: &QuantumChannel, rho_a: &DensityOperator) -> Result<f64> {
    let (omega, prod) = output_pair(ch, &purify(rho_a))?;
    Ok(rel_entropy_variance(&omega, prod.op())?.max(0.0))
}

/// `I = S(rho) + S(N(rho)) - S(N^c(rho))`, extended to any Hermitian input
/// for the finite-difference probes.
pub(crate) struct IoFast<'a> {
    kraus: &'a [CMatrix],
}

impl<'a> IoFast<'a> {
    pub(crate) fn new(ch: &'a QuantumChannel) -> Self {
        Self { kraus: ch.kraus() }
    }

    fn entropy(m: &CMatrix) -> f64 {
        let d = m.nrows();
        let sym = (m + m.adjoint()) * crate::linalg::c(0.5);
        // odd extension -x log|x| keeps central differences symmetric on the
        // boundary of the state space; identical to entropy_of on states
        SpectralDecomposition::of_hermitian(&sym, vec![d])
            .eigenvalues()
            .iter()
            .filter(|&&l| l != 0.0)
            .map(|&l| -l * l.abs().log2())
            .sum()
    }

    pub(crate) fn eval(&self, rho: &CMatrix) -> f64 {
        let d_out = self.kraus[0].nrows();
        let k = self.kraus.len();
        let mut out = CMatrix::zeros(d_out, d_out);
        let kr: Vec<CMatrix> = self.kraus.iter().map(|kk| kk * rho).collect();
        for (a, ka) in kr.iter().zip(self.kraus) {
            out += a * ka.adjoint();
        }
        let mut env = CMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                // Tr(K_i rho K_j^dagger)
                env[(i, j)] = kr[i].iter().zip(self.kraus[j].iter()).map(|(x, y)| x * y.conj()).sum();
            }
        }
        Self::entropy(rho) + Self::entropy(&out) - Self::entropy(&env)
    }
}

/// `n C + sqrt(n V_sel) Phi^{-1}(eps)`, the second-order rate in bits.
pub fn gaussian_rate(cap: &CapacityResult, n: usize, eps: f64) -> Result<f64> {
    let v = cap.selected_dispersion(eps).unwrap_or(cap.v_min);
    second_order_value(cap.c_ea, v, n, eps)
}

/// Why a bound could not be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unavailability {
    /// `eps` too small for the blocklength.
    Infeasible,
    /// Dimension or enumeration cap.
    ResourceCap,
    /// The converse needs a covariant channel.
    NotCovariant,
    Other,
}

impl Unavailability {
    fn of(e: &Error) -> Self {
        match e {
            Error::Infeasible(_) => Self::Infeasible,
            Error::DimensionCap { .. } | Error::EnumerationCap { .. } => Self::ResourceCap,
            Error::NotCovariant => Self::NotCovariant,
            _ => Self::Other,
        }
    }
}

/// One bound entry of a [`RateBound`] row.
#[derive(Clone, Debug)]
pub enum BoundEntry {
    Value { bits: f64, method: Method },
    Unavailable { reason: String, kind: Unavailability },
}

impl BoundEntry {
    pub fn bits(&self) -> Option<f64> {
        match self {
            Self::Value { bits, .. } => Some(*bits),
            Self::Unavailable { .. } => None,
        }
    }

    fn from_result(r: Result<ExactBound>) -> Self {
        match r {
            Ok(b) => Self::Value { bits: b.bits, method: b.method },
            Err(e) => Self::Unavailable { kind: Unavailability::of(&e), reason: e.to_string() },
        }
    }
}

#[derive(Clone, Debug)]
pub struct RateBound {
    pub n: usize,
    pub eps: f64,
    pub gaussian_bits: f64,
    pub lower: BoundEntry,
    pub upper: BoundEntry,
    /// `V_sel`; absent at `eps = 1/2` where the dispersion is not defined.
    pub v_sel: Option<f64>,
}

impl RateBound {
    pub fn lower_bits(&self) -> Option<f64> {
        self.lower.bits()
    }

    pub fn upper_bits(&self) -> Option<f64> {
        self.upper.bits()
    }

    pub fn gaussian_rate_per_use(&self) -> f64 {
        self.gaussian_bits / self.n as f64
    }

    pub fn lower_rate_per_use(&self) -> Option<f64> {
        self.lower_bits().map(|b| b / self.n as f64)
    }

    pub fn upper_rate_per_use(&self) -> Option<f64> {
        self.upper_bits().map(|b| b / self.n as f64)
    }
}

/// Resource for the achievability bound: `Phi_d` for a covariant channel,
/// whose maximizer is exactly `pi`, else a purification of the maximizer
/// selected by `eps`.
pub fn bound_resource(ch: &QuantumChannel, cap: &CapacityResult, eps: f64) -> PureStateVector {
    if ch.covariant_irreducible_input() {
        PureStateVector::maximally_entangled(ch.d_in())
    } else {
        purify(&cap.selected_maximizer(eps).state)
    }
}

/// Gaussian rate, exact achievability and (for covariant channels) the exact
/// converse at each blocklength. A missing bound carries the reason.
pub fn dispersion_table(
    ch: &QuantumChannel,
    cap: &CapacityResult,
    eps: f64,
    n_list: &[usize],
    opts: &BoundOptions,
) -> Result<Vec<RateBound>> {
    let psi = bound_resource(ch, cap, eps);
    n_list
        .par_iter()
        .map(|&n| {
            let gaussian_bits = gaussian_rate(cap, n, eps)?;
            let lower = BoundEntry::from_result(achievable_bound_exact(ch, &psi, n, eps, opts));
            let upper = BoundEntry::from_result(covariant_converse(ch, n, eps, opts));
            Ok(RateBound { n, eps, gaussian_bits, lower, upper, v_sel: cap.selected_dispersion(eps) })
        })
        .collect()
}
