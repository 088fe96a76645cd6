//! Quantum Neyman–Pearson through the scalar Lagrangian dual
//! `beta = max_{t >= 0} t (1 - eps) - Tr (t rho - sigma)_+`.

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ComplexOperator, DensityOperator, SpectralDecomposition};

/// Gap between the recovered primal test and the dual value that we accept.
pub const GAP_TOL: f64 = 1e-7;

const GOLDEN_ITERS: usize = 60;
const BISECT_ITERS: usize = 200;

/// Optimal test for `beta_eps(rho || sigma)`.
#[derive(Clone, Debug)]
pub struct HypothesisTest {
    /// `Tr(Q sigma)` of the recovered optimal test `Q`.
    pub beta: f64,
    /// `-log2 beta`.
    pub dh: f64,
    /// Dual maximizer `t*`; the test is supported on `{t* rho - sigma >= 0}`.
    pub dual_threshold: f64,
    pub type1_error: f64,
    pub duality_gap: f64,
    /// Number of eigenvectors taken with weight one.
    pub positive_rank: usize,
    /// Weight on the boundary eigenvector.
    pub fractional_weight: f64,
    /// The test operator itself (quantum path only).
    pub test: Option<ComplexOperator>,
}

struct Probe {
    spectrum: SpectralDecomposition,
    /// `<v_i| rho |v_i>` for each eigenvector of `t rho - sigma`.
    rho_diag: Vec<f64>,
}

fn probe(rho: &CMatrix, sigma: &CMatrix, t: f64, dims: &[usize]) -> Probe {
    let m = rho * c(t) - sigma;
    let h = (&m + m.adjoint()) * c(0.5);
    let spectrum = SpectralDecomposition::of_hermitian(&h, dims.to_vec());
    let v = spectrum.eigenvectors();
    let rv = rho * v;
    let rho_diag = (0..v.ncols()).map(|j| v.column(j).dotc(&rv.column(j)).re).collect();
    Probe { spectrum, rho_diag }
}

fn dual_value(p: &Probe, t: f64, eps: f64) -> f64 {
    let plus: f64 = p.spectrum.eigenvalues().iter().filter(|&&l| l > 0.0).sum();
    t * (1.0 - eps) - plus
}

/// Supergradient `(1 - eps) - Tr(P_+ rho)` with `P_+` the strictly positive part.
fn supergradient(p: &Probe, eps: f64) -> f64 {
    let mass: f64 = p
        .spectrum
        .eigenvalues()
        .iter()
        .zip(&p.rho_diag)
        .filter(|(&l, _)| l > 0.0)
        .map(|(_, &r)| r)
        .sum();
    (1.0 - eps) - mass
}

struct Primal {
    beta: f64,
    type1: f64,
    rank: usize,
    fraction: f64,
    q: CMatrix,
}

/// Take eigenvectors of `t rho - sigma` in descending order until the
/// accumulated null mass reaches `1 - eps`, the boundary one fractionally.
fn primal(p: &Probe, sigma: &CMatrix, eps: f64) -> Primal {
    let v = p.spectrum.eigenvectors();
    let n = v.ncols();
    let target = 1.0 - eps;
    let mut weights = vec![0.0; n];
    let mut cum = 0.0;
    let mut rank = 0;
    let mut fraction = 0.0;
    for j in 0..n {
        let r = p.rho_diag[j].max(0.0);
        if cum + r >= target {
            fraction = if r > 0.0 { ((target - cum) / r).clamp(0.0, 1.0) } else { 0.0 };
            weights[j] = fraction;
            cum += fraction * r;
            break;
        }
        weights[j] = 1.0;
        cum += r;
        rank += 1;
    }
    let sv = sigma * v;
    let mut beta = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            beta += w * v.column(j).dotc(&sv.column(j)).re;
        }
    }
    let mut scaled = v.clone();
    for (j, &w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w);
    }
    let q = scaled * v.adjoint();
    Primal { beta, type1: 1.0 - cum, rank, fraction, q }
}

/// `beta_eps(rho || sigma)` for a state `rho` and any PSD `sigma`.
pub fn hypothesis_dh(rho: &DensityOperator, sigma: &ComplexOperator, eps: f64) -> Result<HypothesisTest> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    if !sigma.is_hermitian() {
        return Err(Error::NotHermitian { residual: sigma.hermitian_residual() });
    }
    let r = rho.op().entries();
    let s = sigma.hermitian_part().into_entries();
    let dims = rho.dims();
    let tr_sigma = s.trace().re;
    if tr_sigma <= 0.0 {
        return Err(Error::InfiniteDivergence);
    }

    // any maximizer lies in [0, Tr(sigma)/eps] since g(t) <= Tr(sigma) - eps t
    let mut lo = 0.0;
    let mut hi = tr_sigma / eps;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = dual_value(&probe(r, &s, x1, dims), x1, eps);
    let mut f2 = dual_value(&probe(r, &s, x2, dims), x2, eps);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = dual_value(&probe(r, &s, x2, dims), x2, eps);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = dual_value(&probe(r, &s, x1, dims), x1, eps);
        }
    }
    // Golden section on a piecewise-linear concave function stalls at the
    // roundoff level of g; polish on the sign of the supergradient instead.
    // The flat top can also leave the golden bracket off target, so widen
    // both ends until the supergradient changes sign across it.
    let width = (hi - lo).max(1e-12 * hi.max(1.0));
    let mut step = width;
    lo = (lo - step).max(0.0);
    while lo > 0.0 && supergradient(&probe(r, &s, lo, dims), eps) <= 0.0 {
        hi = lo;
        step *= 2.0;
        lo = (lo - step).max(0.0);
    }
    hi += width;
    while supergradient(&probe(r, &s, hi, dims), eps) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 * tr_sigma / eps {
            break;
        }
    }
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if supergradient(&probe(r, &s, mid, dims), eps) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Both ends of the final bracket give feasible tests; keep the tighter one.
    let mut best: Option<(f64, HypothesisTest)> = None;
    for t in [lo, hi] {
        let p = probe(r, &s, t, dims);
        let dual = dual_value(&p, t, eps);
        let pr = primal(&p, &s, eps);
        let gap = pr.beta - dual;
        let candidate = HypothesisTest {
            beta: pr.beta,
            dh: -pr.beta.log2(),
            dual_threshold: t,
            type1_error: pr.type1,
            duality_gap: gap.max(0.0),
            positive_rank: pr.rank,
            fractional_weight: pr.fraction,
            test: Some(ComplexOperator::from_parts(pr.q, dims.to_vec()).hermitian_part()),
        };
        let better = match &best {
            None => true,
            Some((b, _)) => candidate.beta < *b,
        };
        if better {
            best = Some((candidate.beta, candidate));
        }
    }
    let (_, mut test) = best.expect("two candidates evaluated");
    let dual = [lo, hi]
        .iter()
        .map(|&t| dual_value(&probe(r, &s, t, dims), t, eps))
        .fold(f64::NEG_INFINITY, f64::max);
    test.duality_gap = (test.beta - dual).max(0.0);
    if test.beta <= 0.0 {
        return Err(Error::InfiniteDivergence);
    }
    if test.duality_gap > GAP_TOL {
        return Err(Error::DualityGap { gap: test.duality_gap, lo: dual, hi: test.beta });
    }
    Ok(test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{classical_dh, ClassicalPair};
    use crate::linalg::{random, PureStateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2usize, 3, 5] {
            let rho = random::density(&mut rng, d, d);
            for eps in [0.1, 0.5, 0.9] {
                let t = hypothesis_dh(&rho, rho.op(), eps).unwrap();
                assert!((t.dh + (1.0 - eps).log2()).abs() < 1e-8, "d={d} eps={eps} dh={}", t.dh);
            }
        }
    }

    #[test]
    fn scaling_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::density(&mut rng, 3, 3);
        let sigma = random::density(&mut rng, 3, 3);
        let a = hypothesis_dh(&rho, sigma.op(), 0.2).unwrap().dh;
        let b = hypothesis_dh(&rho, &sigma.op().scale(2.0), 0.2).unwrap().dh;
        assert!((b - (a - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn commuting_matches_classical() {
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityOperator::maximally_mixed(2);
        let q = hypothesis_dh(&rho, sigma.op(), 0.1).unwrap();
        let c = classical_dh(&ClassicalPair::new(&[0.9, 0.1], &[0.5, 0.5]).unwrap(), 0.1).unwrap();
        assert!((q.dh - c.dh).abs() < 1e-9);
    }

    #[test]
    fn pure_versus_maximally_mixed() {
        let phi = PureStateVector::maximally_entangled(2).density();
        let pi = DensityOperator::maximally_mixed(4);
        for eps in [0.1, 0.5, 0.9] {
            let t = hypothesis_dh(&phi, pi.op(), eps).unwrap();
            assert!((t.beta - (1.0 - eps) / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn primal_is_a_valid_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rho = random::density(&mut rng, 4, 3);
            let sigma = random::density(&mut rng, 4, 4);
            let eps = 0.3;
            let t = hypothesis_dh(&rho, sigma.op(), eps).unwrap();
            let q = t.test.as_ref().unwrap();
            let ev = q.herm_eig().unwrap();
            assert!(ev.eigenvalues()[0] <= 1.0 + 1e-12);
            assert!(*ev.eigenvalues().last().unwrap() >= -1e-12);
            assert!(q.trace_product(rho.op()).re >= 1.0 - eps - 1e-9);
            assert!((q.trace_product(sigma.op()).re - t.beta).abs() < 1e-7);
            assert!(t.duality_gap <= GAP_TOL);
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!(hypothesis_dh(&rho, rho.op(), 0.0).is_err());
        assert!(hypothesis_dh(&rho, rho.op(), 1.0).is_err());
    }

    #[test]
    fn flat_dual_top_keeps_scaling_exact() {
        // low-rank rho makes the dual smooth and flat at its maximum
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..300 {
            let d = 2 + i % 3;
            let rho = random::density(&mut rng, d, 1 + i % d);
            let sigma = random::density(&mut rng, d, d);
            let eps = 0.05 + 0.9 * (i as f64 / 300.0);
            let base = hypothesis_dh(&rho, sigma.op(), eps).unwrap().dh;
            let scaled = hypothesis_dh(&rho, &sigma.op().scale(10.0), eps).unwrap().dh;
            assert!((scaled - base + 10f64.log2()).abs() < 1e-9, "i={i}");
        }
    }
}
