//! Method of types: enumeration, exact class sizes, i.i.d. masses, the
//! standard counting bounds, and the type-restricted resource state.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use statrs::function::gamma::ln_gamma;

use crate::coding::{Sector, SectorDecomposition};
use crate::divergences::{binomial_u128, kahan_sum, next_composition};
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, CMatrix, PureStateVector};

/// Cap on the number of types enumerated.
pub const TYPE_ENUMERATION_CAP: u128 = 10_000_000;

/// Empirical distribution of a length-`n` sequence, as exact counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDistribution {
    counts: Vec<usize>,
    n: usize,
}

impl TypeDistribution {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::OutOfRange("alphabet must be non-empty".into()));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// `H(t)` in bits.
    pub fn entropy(&self) -> f64 {
        self.probabilities().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// `D(t || q)` in bits with `0 log 0 = 0`; infinite off the support of `q`.
    pub fn kl(&self, q: &[f64]) -> Result<f64> {
        check_alphabet(self, q)?;
        let mut d = 0.0;
        for (p, &qx) in self.probabilities().into_iter().zip(q) {
            if p > 0.0 {
                if qx <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                d += p * (p / qx).log2();
            }
        }
        Ok(d.max(0.0))
    }
}

fn check_alphabet(t: &TypeDistribution, q: &[f64]) -> Result<()> {
    if q.len() != t.alphabet_size() {
        return Err(Error::DimensionMismatch(format!("type over {} symbols, q over {}", t.alphabet_size(), q.len())));
    }
    Ok(())
}

/// Number of types `C(n + k - 1, k - 1)`.
pub fn type_count(n: usize, k: usize) -> u128 {
    binomial_u128(n + k - 1, k - 1)
}

/// All types of length `n` over `k` symbols, first count descending.
pub fn enumerate_types(n: usize, k: usize) -> Result<Vec<TypeDistribution>> {
    if k == 0 {
        return Err(Error::OutOfRange("alphabet must be non-empty".into()));
    }
    let count = type_count(n, k);
    if count > TYPE_ENUMERATION_CAP {
        return Err(Error::EnumerationCap { count, cap: TYPE_ENUMERATION_CAP });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0; k];
    counts[0] = n;
    loop {
        out.push(TypeDistribution { counts: counts.clone(), n });
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(out)
}

/// `|T^t| = n! / prod_x t_x!` exactly.
pub fn type_class_size(t: &TypeDistribution) -> BigUint {
    let mut out = BigUint::one();
    let mut done = 0usize;
    for &c in &t.counts {
        // multiply by C(done + c, c) incrementally
        for i in 1..=c {
            out *= BigUint::from(done + i);
            out /= BigUint::from(i);
        }
        done += c;
    }
    out
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().expect("64 bits").log2() + shift as f64
}

fn ln_multinomial(t: &TypeDistribution) -> f64 {
    ln_gamma(t.n as f64 + 1.0) - t.counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>()
}

#[derive(Clone, Copy, Debug)]
pub struct TypeMass {
    /// `q^n(x^n)` for any `x^n` of type `t`.
    pub per_sequence: f64,
    /// `|T^t| q^n(x^n)`.
    pub total: f64,
}

/// Mass of one sequence and of the whole class of type `t` under `q^n`.
pub fn iid_type_mass(t: &TypeDistribution, q: &[f64]) -> Result<TypeMass> {
    check_alphabet(t, q)?;
    let mut ln_seq = 0.0;
    for (&c, &qx) in t.counts.iter().zip(q) {
        if c > 0 {
            if qx <= 0.0 {
                return Err(Error::InvalidState(format!("type uses a symbol with q = {qx}")));
            }
            ln_seq += c as f64 * qx.ln();
        }
    }
    // direct products where they stay in range; logs otherwise
    let direct: f64 = t.counts.iter().zip(q).map(|(&c, &qx)| qx.powi(c as i32)).product();
    let per_sequence = if direct > 1e-280 { direct } else { ln_seq.exp() };
    let size = type_class_size(t).to_f64().filter(|s| s.is_finite());
    let total = match size {
        Some(s) if direct > 1e-280 => s * direct,
        _ => (ln_seq + ln_multinomial(t)).exp(),
    };
    Ok(TypeMass { per_sequence, total })
}

/// `2^{-n(mu - |X| log2(n + 1) / n)}`.
pub fn tail_bound(n: usize, k: usize, mu: f64) -> f64 {
    let nf = n as f64;
    (-(nf * mu - k as f64 * (nf + 1.0).log2())).exp2()
}

/// `mu = (|X| + 1) log2(n + 1) / n`.
pub fn default_mu(n: usize, k: usize) -> f64 {
    (k as f64 + 1.0) * ((n + 1) as f64).log2() / n as f64
}

/// Exact `q^n`-mass of the types with `D(t || q) > mu`, and the bound on it.
pub fn tail_bound_check(n: usize, q: &[f64], mu: f64) -> Result<(f64, f64)> {
    let types = enumerate_types(n, q.len())?;
    let mut masses = Vec::new();
    for t in &types {
        if t.kl(q)? > mu {
            if let Ok(m) = iid_type_mass(t, q) {
                masses.push(m.total);
            }
        }
    }
    Ok((kahan_sum(masses.into_iter()), tail_bound(n, q.len(), mu)))
}

/// Margins (non-negative when the bound holds) of the four counting bounds
/// at one `(n, q)`.
#[derive(Clone, Copy, Debug)]
pub struct TypeBoundMargins {
    /// `(n + 1)^k - |P_n|`, as a float.
    pub count: f64,
    /// `min_t log2 |T^t| - (n H(t) - k log2(n + 1))`.
    pub class_size: f64,
    /// `min_t k log2(n + 1) + n D(t || q) + log2 q^n(x^n) + log2 |T^t|`.
    pub sequence_mass: f64,
    /// `bound - tail` at `mu`.
    pub tail: f64,
    /// `sum_t |T^t| == k^n` in exact arithmetic.
    pub class_sum_exact: bool,
}

impl TypeBoundMargins {
    pub fn all_hold(&self) -> bool {
        self.count >= 0.0 && self.class_size >= 0.0 && self.sequence_mass >= 0.0 && self.tail >= 0.0 && self.class_sum_exact
    }
}

pub fn type_bound_margins(n: usize, q: &[f64], mu: f64) -> Result<TypeBoundMargins> {
    let k = q.len();
    let types = enumerate_types(n, k)?;
    let bound = BigUint::from(n + 1).pow(k as u32);
    let count = if BigUint::from(types.len()) <= bound { 1.0 } else { -1.0 };
    let mut sum = BigUint::from(0u32);
    let mut class_size = f64::INFINITY;
    let mut sequence_mass = f64::INFINITY;
    let logn1 = ((n + 1) as f64).log2();
    for t in &types {
        let size = type_class_size(t);
        let l = log2_big(&size);
        sum += &size;
        class_size = class_size.min(l - (n as f64 * t.entropy() - k as f64 * logn1));
        if let Ok(m) = iid_type_mass(t, q) {
            let lhs = k as f64 * logn1 + n as f64 * t.kl(q)? + m.per_sequence.log2();
            sequence_mass = sequence_mass.min(lhs + l);
        }
    }
    let (tail, b) = tail_bound_check(n, q, mu)?;
    Ok(TypeBoundMargins {
        count: count * (bound.to_f64().unwrap_or(f64::INFINITY) - types.len() as f64).abs(),
        class_size,
        sequence_mass,
        tail: b - tail,
        class_sum_exact: sum == BigUint::from(k).pow(n as u32),
    })
}

/// The resource `theta = Pi psi^{⊗n} / sqrt(alpha)` restricted to types
/// `mu`-close to the Schmidt spectrum `q` of `psi`.
#[derive(Clone, Debug)]
pub struct RestrictedResource {
    pub n: usize,
    pub mu: f64,
    /// Positive Schmidt probabilities of `psi`.
    pub q: Vec<f64>,
    pub kept: Vec<TypeDistribution>,
    /// `p(t)`, normalized over the kept types.
    pub weights: Vec<f64>,
    /// Total `q^n` mass of the kept types.
    pub alpha: f64,
    /// `2^{-(n/2)(mu - |X| log2(n + 1) / n)}`.
    pub g: f64,
    /// `|T^t|` per kept type.
    pub class_sizes: Vec<BigUint>,
}

impl RestrictedResource {
    /// `sqrt(1 - alpha)`, the trace distance between `theta` and `psi^{⊗n}`.
    pub fn fidelity_gap(&self) -> f64 {
        (1.0 - self.alpha).max(0.0).sqrt()
    }
}

/// Schmidt probabilities of `psi` (zeros removed) and a unitary on `A` taking
/// `|x>` to the `x`-th Schmidt vector.
pub fn schmidt_frame(psi: &PureStateVector) -> Result<(Vec<f64>, CMatrix)> {
    let s = psi.schmidt_decompose()?;
    let q: Vec<f64> = s.probabilities().into_iter().filter(|&p| p > 0.0).collect();
    let total: f64 = q.iter().sum();
    let q = q.into_iter().map(|p| p / total).collect();
    let w = complete_basis(&s.left, psi.dims()[0]);
    Ok((q, w))
}

pub fn restricted_resource(psi: &PureStateVector, n: usize, mu: f64) -> Result<RestrictedResource> {
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be positive".into()));
    }
    let (q, _) = schmidt_frame(psi)?;
    restricted_from_spectrum(&q, n, mu)
}

pub(crate) fn restricted_from_spectrum(q: &[f64], n: usize, mu: f64) -> Result<RestrictedResource> {
    let k = q.len();
    let mut kept = Vec::new();
    let mut masses = Vec::new();
    let mut class_sizes = Vec::new();
    for t in enumerate_types(n, k)? {
        if t.kl(q)? <= mu {
            masses.push(iid_type_mass(&t, q)?.total);
            class_sizes.push(type_class_size(&t));
            kept.push(t);
        }
    }
    if kept.is_empty() {
        return Err(Error::Infeasible(format!("no type lies within mu = {mu} of q")));
    }
    let alpha = kahan_sum(masses.iter().copied()).min(1.0);
    let weights = masses.iter().map(|m| m / alpha).collect();
    let g = if mu.is_finite() { tail_bound(n, k, mu).sqrt() } else { 0.0 };
    Ok(RestrictedResource { n, mu, q: q.to_vec(), kept, weights, alpha, g, class_sizes })
}

/// Cap on `d_A^n` for building sequence-indexed sectors.
pub const SECTOR_DIM_CAP: usize = 4096;

/// Sectors indexed by the kept types, spanned by the sequences of each type
/// in the Schmidt frame of `psi` (see [`schmidt_frame`]); `A^n` is indexed
/// with the first copy most significant.
pub fn canonical_sector_decomposition(psi: &PureStateVector, n: usize, mu: f64) -> Result<SectorDecomposition> {
    let r = restricted_resource(psi, n, mu)?;
    let d = psi.dims()[0];
    let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > SECTOR_DIM_CAP as u128 {
        return Err(Error::DimensionCap { needed: total, cap: SECTOR_DIM_CAP as u128 });
    }
    let k = r.q.len();
    let mut by_type: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
    for (i, t) in r.kept.iter().enumerate() {
        by_type.insert(t.counts.clone(), i);
    }
    let mut bases = vec![Vec::new(); r.kept.len()];
    let mut seq = vec![0usize; n];
    loop {
        let mut counts = vec![0usize; k];
        for &x in &seq {
            counts[x] += 1;
        }
        if let Some(&i) = by_type.get(&counts) {
            bases[i].push(seq.iter().fold(0usize, |acc, &x| acc * d + x));
        }
        // odometer over {0..k-1}^n
        let mut pos = n;
        loop {
            if pos == 0 {
                let sectors =
                    bases.into_iter().zip(&r.weights).map(|(basis, &weight)| Sector { weight, basis }).collect();
                return SectorDecomposition::new(total as usize, sectors);
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < k {
                break;
            }
            seq[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::QuantumChannel;
    use crate::coding::{decoupled_state, twirl_average};
    use crate::linalg::{c, random, trace_distance, CVector, DensityOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counts(ts: &[TypeDistribution]) -> Vec<Vec<usize>> {
        ts.iter().map(|t| t.counts().to_vec()).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(counts(&enumerate_types(2, 2).unwrap()), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let five = enumerate_types(5, 2).unwrap();
        assert_eq!(five.len(), 6);
        assert!(five.len() <= 36);
        // stars and bars: C(6, 2)
        assert_eq!(enumerate_types(4, 3).unwrap().len(), 15);
        assert!(matches!(enumerate_types(200, 5), Err(Error::EnumerationCap { .. })));
    }

    #[test]
    fn class_size_examples() {
        let t = TypeDistribution::new(vec![7, 0]).unwrap();
        assert_eq!(type_class_size(&t), BigUint::one());
        // brute force over all 2^4 sequences
        let brute = (0..16u32).filter(|s| s.count_ones() == 2).count();
        assert_eq!(type_class_size(&TypeDistribution::new(vec![2, 2]).unwrap()), BigUint::from(brute));
        let t = TypeDistribution::new(vec![5, 5]).unwrap();
        assert_eq!(type_class_size(&t), BigUint::from(252u32));
        assert!(252.0 >= 1024.0 / 121.0);
    }

    #[test]
    fn mass_examples() {
        let t = TypeDistribution::new(vec![3, 1]).unwrap();
        let m = iid_type_mass(&t, &t.probabilities()).unwrap();
        assert!((m.per_sequence - (-4.0 * t.entropy()).exp2()).abs() < 1e-15);
        let m = iid_type_mass(&TypeDistribution::new(vec![1, 1]).unwrap(), &[0.5, 0.5]).unwrap();
        assert!((m.total - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [3, 7, 12] {
            let q = random::probability_vector(&mut rng, 3);
            let total = kahan_sum(enumerate_types(n, 3).unwrap().iter().map(|t| iid_type_mass(t, &q).unwrap().total));
            assert!((total - 1.0).abs() < 1e-10);
        }
        assert!(iid_type_mass(&t, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn tail_examples() {
        let (tail, bound) = tail_bound_check(10, &[0.5, 0.5], 1e9).unwrap();
        assert_eq!(tail, 0.0);
        assert!(tail <= bound);
        let (tail, bound) = tail_bound_check(10, &[0.5, 0.5], 0.1).unwrap();
        assert!(tail > 0.0 && tail <= bound);
        let (tail, bound) = tail_bound_check(12, &[0.9, 0.1], 0.05).unwrap();
        assert!(tail <= bound);
    }

    #[test]
    fn exhaustive_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for k in 1..=3 {
            for n in 1..=12 {
                for _ in 0..20 {
                    let q = random::probability_vector(&mut rng, k);
                    let m = type_bound_margins(n, &q, default_mu(n, k)).unwrap();
                    assert!(m.all_hold(), "n={n} k={k} {m:?}");
                }
            }
        }
    }

    #[test]
    fn class_sizes_sum_to_all_sequences() {
        for k in 1..=3usize {
            for n in 0..=20usize {
                let sum = enumerate_types(n, k).unwrap().iter().fold(BigUint::from(0u32), |a, t| a + type_class_size(t));
                assert_eq!(sum, BigUint::from(k).pow(n as u32));
            }
        }
    }

    #[test]
    fn restricted_examples() {
        let phi = PureStateVector::maximally_entangled(2);
        let full = restricted_resource(&phi, 8, f64::INFINITY).unwrap();
        assert!((full.alpha - 1.0).abs() < 1e-12);
        assert_eq!(full.kept.len(), 9);

        let r = restricted_resource(&phi, 8, 0.1).unwrap();
        assert!(r.kept.iter().all(|t| (t.counts()[0] as i64 - 4).abs() <= 1));
        let exact: f64 = [56.0 + 70.0 + 56.0].iter().sum::<f64>() / 256.0;
        assert!((r.alpha - exact).abs() < 1e-12);
        assert!(r.fidelity_gap() <= r.g);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let product = PureStateVector::basis(&[2, 2], 0);
        let p = restricted_resource(&product, 5, 0.01).unwrap();
        assert_eq!(p.kept.len(), 1);
        assert!((p.alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn restricted_trace_distance_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let psi = random::pure_state(&mut rng, &[2, 2]);
            let n = 4;
            let mu = 0.05;
            let Ok(r) = restricted_resource(&psi, n, mu) else { continue };
            // build theta and psi^{⊗n} in the Schmidt frame, where psi = sum sqrt q |x>|x>
            let d = 2usize.pow(n as u32);
            let mut full = CVector::zeros(d * d);
            let mut kept = CVector::zeros(d * d);
            let dec = canonical_sector_decomposition(&psi, n, mu).unwrap();
            for s in 0..d {
                let amp: f64 = (0..n).map(|i| r.q[(s >> (n - 1 - i)) & 1].sqrt()).product();
                full[s * d + s] = c(amp);
                if dec.sectors().iter().any(|sec| sec.basis.contains(&s)) {
                    kept[s * d + s] = c(amp / r.alpha.sqrt());
                }
            }
            let a = DensityOperator::from_pure(&PureStateVector::new(full, vec![d, d]).unwrap());
            let b = DensityOperator::from_pure(&PureStateVector::new(kept.clone(), vec![d, d]).unwrap());
            assert!((trace_distance(&a, &b).unwrap() - r.fidelity_gap()).abs() < 1e-10);
            assert!((dec.resource().amplitudes() - kept).norm() < 1e-10);
        }
    }

    #[test]
    fn sector_examples() {
        let phi = PureStateVector::maximally_entangled(2);
        let one = canonical_sector_decomposition(&phi, 1, f64::INFINITY).unwrap();
        assert_eq!(one.dims(), vec![1, 1]);
        let two = canonical_sector_decomposition(&phi, 2, f64::INFINITY).unwrap();
        assert_eq!(two.dims(), vec![1, 2, 1]);
        let w = two.weights();
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15 && (w[2] - 0.25).abs() < 1e-15);
        assert!(two.dims().iter().sum::<usize>() <= 4);
    }

    #[test]
    fn sectors_feed_the_twirl() {
        let phi = PureStateVector::maximally_entangled(2);
        let dec = canonical_sector_decomposition(&phi, 2, f64::INFINITY).unwrap();
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap().tensor_power(2, 4096).unwrap();
        let t = twirl_average(&ch, &dec.resource(), &dec).unwrap();
        assert!(t.residual <= 1e-11);
        let bar = decoupled_state(&ch, &dec).unwrap();
        assert!(crate::linalg::max_abs_diff(t.state.op().entries(), bar.op().entries()) <= 1e-11);
    }
}
