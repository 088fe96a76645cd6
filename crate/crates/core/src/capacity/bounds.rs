//! Exact evaluation of the finite-blocklength achievability bound and the
//! covariant-channel converse, both as `D_H` of i.i.d. pairs.

use super::output_pair;
use crate::channels::QuantumChannel;
use crate::divergences::{classical_dh, hypothesis_dh, second_order_value, ClassicalPair};
use crate::error::{Error, Result};
use crate::linalg::{DensityOperator, PureStateVector};

/// Default cap on the matrix dimension `(d_B d_A)^n` of the quantum path.
pub const QUANTUM_DIM_CAP: usize = 64;

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub quantum_dim_cap: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { quantum_dim_cap: QUANTUM_DIM_CAP }
    }
}

/// How the hypothesis-testing term was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Commuting pair, tensor power compressed to this many types.
    ClassicalTypes { types: usize },
    /// Quantum dual search on the full `n`-fold operators.
    QuantumDual,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::ClassicalTypes { .. } => "classical-types",
            Self::QuantumDual => "quantum-dual",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactBound {
    /// The bound on `log2 M*` in bits.
    pub bits: f64,
    /// The `D_H` term.
    pub dh: f64,
    /// What was subtracted from `dh`.
    pub penalty: f64,
    /// Error level at which `D_H` was evaluated.
    pub eps_used: f64,
    pub method: Method,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `D_H^eps(rho^{⊗n} || sigma^{⊗n})`, classically when the pair commutes.
pub(crate) fn dh_iid(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    n: usize,
    eps: f64,
    opts: &BoundOptions,
) -> Result<(f64, Method)> {
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be positive".into()));
    }
    if let Some(pair) = ClassicalPair::from_commuting(rho.op(), sigma.op())? {
        let power = pair.tensor_power(n)?;
        let t = classical_dh(&power, eps)?;
        return Ok((t.dh, Method::ClassicalTypes { types: power.atoms().len() }));
    }
    let needed = (rho.dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > opts.quantum_dim_cap as u128 {
        return Err(Error::DimensionCap { needed, cap: opts.quantum_dim_cap as u128 });
    }
    let t = hypothesis_dh(&rho.tensor_power(n), sigma.tensor_power(n).op(), eps)?;
    Ok((t.dh, Method::QuantumDual))
}

/// Smallest blocklength with `eps > 3 / sqrt(n)`.
pub fn min_feasible_blocklength(eps: f64) -> usize {
    let mut n = (9.0 / (eps * eps)).floor() as usize;
    while eps - 3.0 / (n.max(1) as f64).sqrt() <= 0.0 {
        n += 1;
    }
    n.max(1)
}

/// Achievable `log2 M*(N^{⊗n}, eps)` from the resource `psi` on `A ⊗ A'`:
/// `D_H^{eps - 3/sqrt n}(omega^{⊗n} || (omega_B ⊗ omega_A')^{⊗n})` minus
/// `log2((1 - eps) n) + (2|X| + 1) log2(n + 1)` with `|X|` the Schmidt rank.
pub fn achievable_bound_exact(
    ch: &QuantumChannel,
    psi: &PureStateVector,
    n: usize,
    eps: f64,
    opts: &BoundOptions,
) -> Result<ExactBound> {
    check_eps(eps)?;
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be positive".into()));
    }
    let eps_used = eps - 3.0 / (n as f64).sqrt();
    if eps_used <= 0.0 {
        return Err(Error::Infeasible(format!(
            "eps - 3/sqrt(n) = {eps_used:.6} <= 0 at n = {n}; use n >= {}",
            min_feasible_blocklength(eps)
        )));
    }
    let x = psi.schmidt_decompose()?.rank() as f64;
    let (omega, product) = output_pair(ch, psi)?;
    let (dh, method) = dh_iid(&omega, &product, n, eps_used, opts)?;
    let nf = n as f64;
    let penalty = ((1.0 - eps) * nf).log2() + (2.0 * x + 1.0) * (nf + 1.0).log2();
    Ok(ExactBound { bits: dh - penalty, dh, penalty, eps_used, method })
}

/// Converse `D_H^eps((N ⊗ id)(Phi)^{⊗n} || (N(pi) ⊗ pi)^{⊗n})`, valid when the
/// channel is covariant with respect to an irreducible representation.
pub fn covariant_converse(ch: &QuantumChannel, n: usize, eps: f64, opts: &BoundOptions) -> Result<ExactBound> {
    check_eps(eps)?;
    if !ch.covariant_irreducible_input() {
        return Err(Error::NotCovariant);
    }
    let d = ch.d_in();
    let choi = DensityOperator::new(ch.choi())?;
    let pi = DensityOperator::maximally_mixed(d);
    let product = ch.apply(&pi)?.tensor(&pi);
    let (dh, method) = dh_iid(&choi, &product, n, eps, opts)?;
    Ok(ExactBound { bits: dh, dh, penalty: 0.0, eps_used: eps, method })
}

/// Residuals of the second-order expansion of `D_H` for i.i.d. commuting pairs.
#[derive(Clone, Debug)]
pub struct Lemma2Fit {
    pub relative_entropy: f64,
    pub variance: f64,
    /// `(n, D_H, n D + sqrt(n V) Phi^{-1}(eps))`.
    pub rows: Vec<(usize, f64, f64)>,
    /// Smallest `c` with `|D_H - expansion| <= c log2(n + 1)` on all rows.
    pub c: f64,
}

pub fn lemma2_fit(pair: &ClassicalPair, eps: f64, ns: &[usize]) -> Result<Lemma2Fit> {
    let base = pair.merged();
    let ln2 = std::f64::consts::LN_2;
    let mut d = 0.0;
    let mut second = 0.0;
    for a in base.atoms() {
        let w = (a.ln_p + a.ln_mult).exp();
        if w > 0.0 {
            if a.ln_q == f64::NEG_INFINITY {
                return Err(Error::InfiniteDivergence);
            }
            let r = (a.ln_p - a.ln_q) / ln2;
            d += w * r;
            second += w * r * r;
        }
    }
    let v = (second - d * d).max(0.0);
    let mut rows = Vec::with_capacity(ns.len());
    let mut c: f64 = 0.0;
    for &n in ns {
        let dh = classical_dh(&base.tensor_power(n)?, eps)?.dh;
        let expansion = second_order_value(d, v, n, eps)?;
        c = c.max((dh - expansion).abs() / ((n + 1) as f64).log2());
        rows.push((n, dh, expansion));
    }
    Ok(Lemma2Fit { relative_entropy: d, variance: v, rows, c })
}
