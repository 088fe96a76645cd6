//! Exact Neyman–Pearson tests for commuting pairs, in the log domain so that
//! tensor powers compressed by type do not underflow.

use statrs::function::gamma::ln_gamma;

use super::HypothesisTest;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ComplexOperator, SpectralDecomposition, KERNEL_TOL};

/// Cap on the number of atoms produced by [`ClassicalPair::tensor_power`].
pub const TYPE_CAP: u128 = 10_000_000;

/// One atom: probability `p` under the null, weight `q` under the
/// alternative, repeated `mult` times. Stored as natural logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub ln_p: f64,
    pub ln_q: f64,
    pub ln_mult: f64,
}

impl Atom {
    pub fn new(p: f64, q: f64, mult: f64) -> Self {
        Self { ln_p: p.ln(), ln_q: q.ln(), ln_mult: mult.ln() }
    }

    pub fn p(&self) -> f64 {
        self.ln_p.exp()
    }

    pub fn q(&self) -> f64 {
        self.ln_q.exp()
    }

    pub fn mult(&self) -> f64 {
        self.ln_mult.exp()
    }

    fn ln_ratio(&self) -> f64 {
        match (self.ln_p == f64::NEG_INFINITY, self.ln_q == f64::NEG_INFINITY) {
            (_, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            _ => self.ln_p - self.ln_q,
        }
    }
}

/// Eigenvalue lists of a commuting pair `(rho, sigma)` in a joint eigenbasis.
#[derive(Clone, Debug)]
pub struct ClassicalPair {
    atoms: Vec<Atom>,
}

impl ClassicalPair {
    /// From plain lists; `sum p = 1` within `1e-12` is required.
    pub fn new(p: &[f64], q: &[f64]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch(format!("{} vs {} atoms", p.len(), q.len())));
        }
        let atoms = p.iter().zip(q).map(|(&p, &q)| Atom::new(p, q, 1.0)).collect();
        Self::from_atoms(atoms)
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if a.ln_p.is_nan() || a.ln_q.is_nan() || a.ln_p > 1e-12 {
                return Err(Error::InvalidState(format!("invalid atom {a:?}")));
            }
        }
        let pair = Self { atoms };
        let total = pair.total_p();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("null weights sum to {total}")));
        }
        Ok(pair)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_p(&self) -> f64 {
        kahan_sum(self.atoms.iter().map(|a| (a.ln_p + a.ln_mult).exp()))
    }

    pub fn total_q(&self) -> f64 {
        kahan_sum(self.atoms.iter().map(|a| (a.ln_q + a.ln_mult).exp()))
    }

    /// Merge atoms with identical `(p, q)` up to a relative `1e-12`.
    pub fn merged(&self) -> Self {
        let mut sorted = self.atoms.clone();
        sorted.sort_by(|a, b| a.ln_p.total_cmp(&b.ln_p).then(a.ln_q.total_cmp(&b.ln_q)));
        let mut out: Vec<Atom> = Vec::new();
        for a in sorted {
            if a.ln_mult == f64::NEG_INFINITY || (a.ln_p == f64::NEG_INFINITY && a.ln_q == f64::NEG_INFINITY) {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if same_log(last.ln_p, a.ln_p) && same_log(last.ln_q, a.ln_q) {
                    last.ln_mult = log_add(last.ln_mult, a.ln_mult);
                    continue;
                }
            }
            out.push(a);
        }
        Self { atoms: out }
    }

    /// `n`-fold product, one atom per type over the merged single-copy atoms.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        let base = self.merged();
        let k = base.atoms.len();
        let count = binomial_u128(n + k - 1, k - 1);
        if count > TYPE_CAP {
            return Err(Error::EnumerationCap { count, cap: TYPE_CAP });
        }
        let ln_fact: Vec<f64> = (0..=n).map(|m| ln_gamma(m as f64 + 1.0)).collect();
        let mut atoms = Vec::with_capacity(count as usize);
        let mut counts = vec![0usize; k];
        counts[0] = n;
        loop {
            let mut ln_p = 0.0;
            let mut ln_q = 0.0;
            let mut ln_mult = ln_fact[n];
            for (c, a) in counts.iter().zip(&base.atoms) {
                if *c > 0 {
                    let cf = *c as f64;
                    ln_p += cf * a.ln_p;
                    ln_q += cf * a.ln_q;
                    ln_mult += cf * a.ln_mult - ln_fact[*c];
                }
            }
            atoms.push(Atom { ln_p, ln_q, ln_mult });
            if !next_composition(&mut counts) {
                break;
            }
        }
        Ok(Self { atoms })
    }

    /// Joint eigenvalues of a commuting pair, or `None` when the commutator
    /// exceeds `1e-12` relative to the operator norms.
    pub fn from_commuting(rho: &ComplexOperator, sigma: &ComplexOperator) -> Result<Option<Self>> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
        }
        let a = rho.entries();
        let b = sigma.entries();
        let comm = a * b - b * a;
        let scale = rho.frobenius_norm() * sigma.frobenius_norm();
        let resid = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if resid > 1e-12 * scale.max(1e-300) {
            return Ok(None);
        }
        let (p, q) = joint_spectrum(rho, sigma)?;
        Ok(Some(Self::new(&p, &q)?))
    }
}

/// Diagonalize `sigma`, then `rho` inside each degenerate eigenspace of `sigma`.
fn joint_spectrum(rho: &ComplexOperator, sigma: &ComplexOperator) -> Result<(Vec<f64>, Vec<f64>)> {
    let ss = sigma.herm_eig()?;
    let vals = ss.eigenvalues();
    let v = ss.eigenvectors();
    let tol = 1e-9 * ss.max_abs_eigenvalue().max(f64::MIN_POSITIVE);
    let mut p = Vec::with_capacity(vals.len());
    let mut q = Vec::with_capacity(vals.len());
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && (vals[end - 1] - vals[end]).abs() <= tol {
            end += 1;
        }
        let block = v.columns(start, end - start).into_owned();
        let restricted: CMatrix = block.adjoint() * rho.entries() * &block;
        let r = ComplexOperator::from_parts(restricted, vec![end - start]).hermitian_part();
        let rs = SpectralDecomposition::of_hermitian(r.entries(), vec![end - start]);
        let mean_sigma = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        for &l in rs.eigenvalues() {
            p.push(l.max(0.0));
            q.push(mean_sigma.max(0.0));
        }
        start = end;
    }
    // eigenvalues at roundoff level belong to the kernel
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let qmax = q.iter().cloned().fold(0.0, f64::max);
    for x in p.iter_mut() {
        if *x <= KERNEL_TOL * pmax {
            *x = 0.0;
        }
    }
    for x in q.iter_mut() {
        if *x <= KERNEL_TOL * qmax {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok((p, q))
}

fn same_log(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0))
}

pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

pub(crate) fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// Next composition in the order where the first count descends.
pub(crate) fn next_composition(counts: &mut [usize]) -> bool {
    let k = counts.len();
    if k < 2 {
        return false;
    }
    // rightmost position (excluding the last) holding a positive count
    let Some(i) = (0..k - 1).rev().find(|&i| counts[i] > 0) else {
        return false;
    };
    counts[i] -= 1;
    let tail: usize = counts[i + 1..].iter().sum::<usize>() + 1;
    for c in &mut counts[i + 1..] {
        *c = 0;
    }
    counts[i + 1] = tail;
    true
}

/// Exact Neyman–Pearson `beta_eps` for a classical pair.
pub fn classical_dh(pair: &ClassicalPair, eps: f64) -> Result<HypothesisTest> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
    }
    let mut atoms: Vec<Atom> = pair
        .atoms
        .iter()
        .copied()
        .filter(|a| a.ln_mult > f64::NEG_INFINITY && a.ln_p > f64::NEG_INFINITY)
        .collect();
    atoms.sort_by(|a, b| b.ln_ratio().total_cmp(&a.ln_ratio()));
    let target = 1.0 - eps;
    let mut cum = 0.0;
    let mut comp = 0.0;
    let mut ln_beta = f64::NEG_INFINITY;
    let mut full = 0usize;
    let mut fraction = 0.0;
    let mut threshold = 0.0;
    for a in &atoms {
        let mass = (a.ln_p + a.ln_mult).exp();
        if cum + mass >= target {
            let x = ((target - cum) / mass).clamp(0.0, 1.0);
            if x > 0.0 {
                ln_beta = log_add(ln_beta, x.ln() + a.ln_q + a.ln_mult);
            }
            fraction = x;
            threshold = (-a.ln_ratio()).exp();
            cum = target;
            break;
        }
        ln_beta = log_add(ln_beta, a.ln_q + a.ln_mult);
        let y = mass - comp;
        let t = cum + y;
        comp = (t - cum) - y;
        cum = t;
        full += 1;
    }
    if ln_beta == f64::NEG_INFINITY {
        return Err(Error::InfiniteDivergence);
    }
    let beta = ln_beta.exp();
    let dh = -ln_beta / std::f64::consts::LN_2;
    // dual value at the boundary threshold
    let dual = if threshold.is_finite() {
        let plus: f64 = kahan_sum(atoms.iter().map(|a| {
            let v = threshold * a.p() - a.q();
            if v > 0.0 {
                v * a.mult()
            } else {
                0.0
            }
        }));
        threshold * target - plus
    } else {
        beta
    };
    Ok(HypothesisTest {
        beta,
        dh,
        dual_threshold: threshold,
        type1_error: 1.0 - cum,
        duality_gap: (beta - dual).max(0.0),
        positive_rank: full,
        fractional_weight: fraction,
        test: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn merge_keeps_zero_weight_atoms_apart() {
        let pair = ClassicalPair::new(&[1.0, 0.0, 0.0], &[0.25, 0.25, 0.5]).unwrap();
        let m = pair.merged();
        assert_eq!(m.atoms().len(), 3);
        assert!((m.total_p() - 1.0).abs() < 1e-15);
        let t = classical_dh(&pair.tensor_power(3).unwrap(), 0.5).unwrap();
        assert!((t.beta - 0.5 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn equal_distributions() {
        let pair = ClassicalPair::new(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let t = classical_dh(&pair, eps).unwrap();
            assert!((t.beta - (1.0 - eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_computed_tests() {
        let pair = ClassicalPair::new(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((classical_dh(&pair, 0.2).unwrap().beta - 0.4).abs() < 1e-15);
        let pair = ClassicalPair::new(&[0.8, 0.2], &[0.5, 0.5]).unwrap();
        let t = classical_dh(&pair, 0.2).unwrap();
        assert!((t.beta - 0.5).abs() < 1e-15);
        assert!(t.type1_error <= 0.2 + 1e-15);
    }

    #[test]
    fn zero_q_atoms_come_first() {
        let pair = ClassicalPair::new(&[0.5, 0.5], &[0.0, 1.0]).unwrap();
        // half the null mass is free; the rest costs q at ratio 0.5
        let t = classical_dh(&pair, 0.25).unwrap();
        assert!((t.beta - 0.5).abs() < 1e-15);
        assert!(matches!(classical_dh(&pair, 0.5), Err(Error::InfiniteDivergence)));
    }

    fn brute_force_beta(p: &[f64], q: &[f64], n: usize, eps: f64) -> f64 {
        let k = p.len();
        let total = k.pow(n as u32);
        let mut atoms = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let (mut pp, mut qq) = (1.0, 1.0);
            for _ in 0..n {
                pp *= p[rem % k];
                qq *= q[rem % k];
                rem /= k;
            }
            atoms.push((pp, qq));
        }
        atoms.sort_by(|a, b| (b.0 / b.1).total_cmp(&(a.0 / a.1)));
        let mut cum = 0.0;
        let mut beta = 0.0;
        for (pp, qq) in atoms {
            if cum + pp >= 1.0 - eps {
                beta += qq * (1.0 - eps - cum) / pp;
                break;
            }
            cum += pp;
            beta += qq;
        }
        beta
    }

    #[test]
    fn type_compression_matches_brute_force() {
        let p = [0.6, 0.3, 0.1];
        let q = [0.2, 0.5, 0.3];
        let pair = ClassicalPair::new(&p, &q).unwrap();
        for n in 1..=7 {
            let pow = pair.tensor_power(n).unwrap();
            assert!((pow.total_p() - 1.0).abs() < 1e-12);
            for eps in [0.05, 0.3, 0.8] {
                let fast = classical_dh(&pow, eps).unwrap().beta;
                let slow = brute_force_beta(&p, &q, n, eps);
                assert!((fast - slow).abs() <= 1e-12 * slow.max(1e-300), "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn large_power_does_not_underflow() {
        let pair = ClassicalPair::new(&[0.9, 0.1], &[0.5, 0.5]).unwrap();
        let pow = pair.tensor_power(1024).unwrap();
        assert_eq!(pow.atoms().len(), 1025);
        let t = classical_dh(&pow, 0.1).unwrap();
        assert!(t.dh.is_finite() && t.dh > 0.0);
        // nD is about 548 bits here; the second-order term is negative at eps = 0.1
        assert!(t.dh < 1024.0 * 0.5310044064107189);
    }

    #[test]
    fn compositions_in_descending_first_count_order() {
        let mut c = vec![2, 0];
        let mut seen = vec![c.clone()];
        while next_composition(&mut c) {
            seen.push(c.clone());
        }
        assert_eq!(seen, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let mut c = vec![4, 0, 0];
        let mut count = 1;
        while next_composition(&mut c) {
            count += 1;
        }
        assert_eq!(count, 15);
    }

    #[test]
    fn commuting_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rho, sigma) = random::commuting_pair(&mut rng, &[0.5, 0.3, 0.2, 0.0], &[0.25, 0.25, 0.4, 0.1]);
        let pair = ClassicalPair::from_commuting(rho.op(), &sigma).unwrap().unwrap();
        let direct = ClassicalPair::new(&[0.5, 0.3, 0.2, 0.0], &[0.25, 0.25, 0.4, 0.1]).unwrap();
        for eps in [0.1, 0.6] {
            let a = classical_dh(&pair, eps).unwrap().dh;
            let b = classical_dh(&direct, eps).unwrap().dh;
            assert!((a - b).abs() < 1e-10);
        }
        let a = random::density(&mut rng, 3, 3);
        let b = random::density(&mut rng, 3, 3);
        assert!(ClassicalPair::from_commuting(a.op(), b.op()).unwrap().is_none());
    }

    #[test]
    fn degenerate_sigma_block_is_rediagonalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // sigma = I/3 commutes with everything
        let rho = random::density(&mut rng, 3, 3);
        let sigma = crate::linalg::DensityOperator::maximally_mixed(3);
        let pair = ClassicalPair::from_commuting(rho.op(), sigma.op()).unwrap().unwrap();
        let direct = ClassicalPair::new(rho.eigenvalues(), &[1.0 / 3.0; 3]).unwrap();
        let a = classical_dh(&pair, 0.3).unwrap().beta;
        let b = classical_dh(&direct, 0.3).unwrap().beta;
        assert!((a - b).abs() < 1e-12);
    }
}
