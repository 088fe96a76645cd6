//! Averages over the label set, the one-shot bounds built on them, and a
//! Monte-Carlo check of the random-coding argument.

use rayon::prelude::*;

use super::code::{avg_success, output_state, sample_code, CodeEnsemble};
use super::{encoder_unitary, CodewordLabel, SectorDecomposition};
use crate::channels::QuantumChannel;
use crate::divergences::{hypothesis_dh, info_spectrum_ds, kahan_sum};
use crate::error::{Error, Result};
use crate::linalg::{c, max_abs_diff, CMatrix, ComplexOperator, DensityOperator, PureStateVector};

/// Largest label set enumerated exactly.
pub const TWIRL_CAP: u128 = 1_000_000;

/// `sum_t p(t) N(pi_A^t) ⊗ pi_B'^t` on `B ⊗ B'`.
pub fn decoupled_state(ch: &QuantumChannel, dec: &SectorDecomposition) -> Result<DensityOperator> {
    let d = dec.d_a();
    let mut out = CMatrix::zeros(ch.d_out() * d, ch.d_out() * d);
    for (t, s) in dec.sectors().iter().enumerate() {
        let pi = dec.sector_mixed(t);
        let n_pi = ch.apply_op(&ComplexOperator::from_parts(pi.clone(), vec![d]))?;
        out += n_pi.entries().kronecker(&pi) * c(s.weight);
    }
    DensityOperator::new(ComplexOperator::new(out, vec![ch.d_out(), d])?)
}

fn enumerable(dec: &SectorDecomposition) -> Result<u128> {
    let count = dec.label_count();
    if count > TWIRL_CAP {
        return Err(Error::EnumerationCap { count, cap: TWIRL_CAP });
    }
    Ok(count)
}

#[derive(Clone, Debug)]
pub struct TwirlReport {
    /// Exact average of `N(U(s) phi U(s)^dagger)` over all labels.
    pub state: DensityOperator,
    /// Largest entry of its difference with [`decoupled_state`].
    pub residual: f64,
    pub labels: u128,
}

/// Exact label average of the channel outputs. Above [`TWIRL_CAP`] labels
/// the sector-wise closed form [`decoupled_state`] has to be used instead.
pub fn twirl_average(ch: &QuantumChannel, phi: &PureStateVector, dec: &SectorDecomposition) -> Result<TwirlReport> {
    dec.check_resource(phi)?;
    let count = enumerable(dec)?;
    let states = (0..count)
        .into_par_iter()
        .map(|k| output_state(ch, phi, &CodewordLabel::from_index(dec, k), dec).map(|s| s.op().entries().clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut sum = CMatrix::zeros(states[0].nrows(), states[0].ncols());
    for s in &states {
        sum += s;
    }
    sum /= c(count as f64);
    let state = DensityOperator::new(ComplexOperator::new(sum, vec![ch.d_out(), dec.d_a()])?)?;
    let residual = max_abs_diff(state.op().entries(), decoupled_state(ch, dec)?.op().entries());
    Ok(TwirlReport { state, residual, labels: count })
}

/// Largest residuals over all labels of the unitary pushing identity
/// `N(U phi U^dagger) = (1 ⊗ U^T) N(phi) (1 ⊗ U^T)^dagger` and of the invariance
/// of the decoupled state under `1 ⊗ U^T`.
pub fn pushing_residual(ch: &QuantumChannel, phi: &PureStateVector, dec: &SectorDecomposition) -> Result<(f64, f64)> {
    dec.check_resource(phi)?;
    let count = enumerable(dec)?;
    let base = ch.apply_left(&phi.density())?;
    let bar = decoupled_state(ch, dec)?;
    let id_b = CMatrix::identity(ch.d_out(), ch.d_out());
    let residuals = (0..count)
        .into_par_iter()
        .map(|k| {
            let label = CodewordLabel::from_index(dec, k);
            let u = encoder_unitary(&label, dec)?;
            let w = id_b.kronecker(&u.entries().transpose());
            let pushed = &w * base.op().entries() * w.adjoint();
            let direct = output_state(ch, phi, &label, dec)?;
            let moved = &w * bar.op().entries() * w.adjoint();
            Ok((
                max_abs_diff(direct.op().entries(), &pushed),
                max_abs_diff(&moved, bar.op().entries()),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(residuals.into_iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}

#[derive(Clone, Copy, Debug)]
pub struct OneShotBound {
    pub bits: f64,
    pub dh: f64,
    pub penalty: f64,
    pub eps_used: f64,
}

fn one_shot(ch: &QuantumChannel, dec: &SectorDecomposition, eps_used: f64, penalty: f64) -> Result<OneShotBound> {
    let omega = ch.apply_left(&dec.resource().density())?;
    let bar = decoupled_state(ch, dec)?;
    let dh = hypothesis_dh(&omega, bar.op(), eps_used)?.dh;
    Ok(OneShotBound { bits: dh - penalty, dh, penalty, eps_used })
}

/// `D_H^{eps - 2 delta}(N(theta) || N(kappa)) - log2((1 - eps) / delta^2)`.
pub fn prop1_bound(ch: &QuantumChannel, dec: &SectorDecomposition, eps: f64, delta: f64) -> Result<OneShotBound> {
    if !(eps < 1.0 && delta > 0.0 && 2.0 * delta < eps) {
        return Err(Error::OutOfRange(format!("need 0 < 2 delta < eps < 1, got eps = {eps}, delta = {delta}")));
    }
    one_shot(ch, dec, eps - 2.0 * delta, ((1.0 - eps) / (delta * delta)).log2())
}

/// Hayashi–Nagaoka form: `D_H^{eps - delta}(...) - log2(4 eps / delta^2)`.
pub fn hn_bound(ch: &QuantumChannel, dec: &SectorDecomposition, eps: f64, delta: f64) -> Result<OneShotBound> {
    if !(eps < 1.0 && delta > 0.0 && delta < eps) {
        return Err(Error::OutOfRange(format!("need 0 < delta < eps < 1, got eps = {eps}, delta = {delta}")));
    }
    one_shot(ch, dec, eps - delta, (4.0 * eps / (delta * delta)).log2())
}

/// Exact success probabilities of `trials` independent random codes; trial
/// `i` draws from stream `i` of `seed`, so the result does not depend on the
/// number of worker threads.
pub fn simulate_codes(
    ch: &QuantumChannel,
    dec: &SectorDecomposition,
    m: usize,
    trials: usize,
    seed: u64,
    ensemble: CodeEnsemble,
) -> Result<Vec<f64>> {
    let phi = dec.resource();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let code = sample_code(ch, m, dec, &phi, seed, i as u64, ensemble)?;
            Ok(avg_success(ch, &code)?.p_succ)
        })
        .collect()
}

/// Mean and standard error with compensated summation.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = kahan_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug)]
pub struct EnsembleOptions {
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `|S| d_B d_A` for which the classical-quantum state is built.
    pub cq_dim_cap: u128,
    /// Largest message count simulated.
    pub max_messages: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { delta: 0.1, trials: 500, seed: 0, cq_dim_cap: 64, max_messages: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleReport {
    pub m: usize,
    pub prop1: OneShotBound,
    pub hn: OneShotBound,
    pub successes: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// `1 - eps`.
    pub target: f64,
    /// `mean >= 1 - eps - 3 SE`.
    pub passed: bool,
    /// `D_s^{eps - delta}(N(phi) || rho_BB')`.
    pub ds: f64,
    /// `(1 - eps + delta) / (1 + (M - 1) 2^{-D_s})`, the intermediate bound on the mean.
    pub chain_bound: f64,
    /// `(D_H(rho_SBB' || rho_S ⊗ rho_BB'), min_s D_H(rho^s || rho_BB'))` when small enough.
    pub cq_reduction: Option<(f64, f64)>,
    /// Largest `|D_H(rho^s || rho_BB') - D_H(N(phi) || rho_BB')|` over the checked labels.
    pub invariance_residual: f64,
}

/// Draw codes at `M = floor(2^{prop1_bound})` and compare their mean success
/// probability with `1 - eps`, checking the intermediate steps on the way.
pub fn ensemble_vs_bound(
    ch: &QuantumChannel,
    dec: &SectorDecomposition,
    phi: &PureStateVector,
    eps: f64,
    opts: &EnsembleOptions,
) -> Result<EnsembleReport> {
    dec.check_resource(phi)?;
    let delta = opts.delta;
    let prop1 = prop1_bound(ch, dec, eps, delta)?;
    let hn = hn_bound(ch, dec, eps, delta)?;
    let raw = prop1.bits.exp2().floor();
    if raw > opts.max_messages as f64 {
        return Err(Error::DimensionCap { needed: raw as u128, cap: opts.max_messages as u128 });
    }
    let m = (raw as usize).max(1);
    let successes = simulate_codes(ch, dec, m, opts.trials, opts.seed, CodeEnsemble::Iid)?;
    let (mean, std_error) = mean_and_se(&successes);
    let target = 1.0 - eps;

    let omega = ch.apply_left(&phi.density())?;
    let bar = decoupled_state(ch, dec)?;
    let ds = info_spectrum_ds(&omega, bar.op(), eps - delta)?;
    let chain_bound = (1.0 - (eps - delta)) / (1.0 + (m as f64 - 1.0) * (-ds).exp2());

    let eps2 = eps - 2.0 * delta;
    let reference = hypothesis_dh(&omega, bar.op(), eps2)?.dh;
    let count = dec.label_count();
    let indices: Vec<u128> = if count <= 64 {
        (0..count).collect()
    } else {
        // a fixed spread of labels
        (0..64).map(|k| k * (count / 64)).collect()
    };
    let per_label = indices
        .par_iter()
        .map(|&k| {
            let rho = output_state(ch, phi, &CodewordLabel::from_index(dec, k), dec)?;
            Ok((rho.op().entries().clone(), hypothesis_dh(&rho, bar.op(), eps2)?.dh))
        })
        .collect::<Result<Vec<_>>>()?;
    let invariance_residual = per_label.iter().map(|(_, dh)| (dh - reference).abs()).fold(0.0, f64::max);

    let block = omega.dim();
    let cq_reduction = if count <= 64 && count * block as u128 <= opts.cq_dim_cap {
        let k = count as usize;
        let mut joint = CMatrix::zeros(k * block, k * block);
        let mut product = CMatrix::zeros(k * block, k * block);
        for (i, (rho, _)) in per_label.iter().enumerate() {
            joint.view_mut((i * block, i * block), (block, block)).copy_from(&(rho / c(k as f64)));
            product
                .view_mut((i * block, i * block), (block, block))
                .copy_from(&(bar.op().entries() / c(k as f64)));
        }
        let joint = DensityOperator::new(ComplexOperator::new(joint, vec![k, ch.d_out(), dec.d_a()])?)?;
        let product = ComplexOperator::new(product, vec![k, ch.d_out(), dec.d_a()])?;
        let lhs = hypothesis_dh(&joint, &product, eps2)?.dh;
        let rhs = per_label.iter().map(|(_, dh)| *dh).fold(f64::INFINITY, f64::min);
        Some((lhs, rhs))
    } else {
        None
    };

    Ok(EnsembleReport {
        m,
        prop1,
        hn,
        passed: mean >= target - 3.0 * std_error,
        successes,
        mean,
        std_error,
        target,
        ds,
        chain_bound,
        cq_reduction,
        invariance_residual,
    })
}
