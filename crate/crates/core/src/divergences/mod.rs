//! Relative entropies in bits: Umegaki, its variance, collision,
//! information spectrum and hypothesis testing.

mod classical;
mod hypothesis;
mod normal;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ComplexOperator, DensityOperator, SpectralDecomposition};

pub use classical::{classical_dh, Atom, ClassicalPair, TYPE_CAP};
#[allow(unused_imports)]
pub(crate) use classical::{binomial_u128, kahan_sum, log_add, next_composition};
pub use hypothesis::{hypothesis_dh, HypothesisTest, GAP_TOL};
pub use normal::{normal_cdf, normal_quantile, second_order_value};

/// Weight of `rho` outside `supp sigma` tolerated before the divergence is
/// declared infinite.
const SUPPORT_TOL: f64 = 1e-9;

fn check_dims(rho: &DensityOperator, sigma: &ComplexOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

/// Spectrum of `sigma` after checking `supp rho ⊆ supp sigma`.
fn support_checked(rho: &DensityOperator, sigma: &ComplexOperator) -> Result<SpectralDecomposition> {
    check_dims(rho, sigma)?;
    let spec = sigma.herm_eig()?;
    let thr = spec.kernel_threshold();
    let v = spec.eigenvectors();
    let rv = rho.op().entries() * v;
    let mut outside = 0.0;
    for (j, &l) in spec.eigenvalues().iter().enumerate() {
        if l <= thr {
            if l < -thr.max(1e-12) {
                return Err(Error::InvalidState(format!("second argument has eigenvalue {l:e}")));
            }
            outside += v.column(j).dotc(&rv.column(j)).re;
        }
    }
    if outside > SUPPORT_TOL {
        return Err(Error::InfiniteDivergence);
    }
    Ok(spec)
}

fn log2_support(spec: &SpectralDecomposition) -> ComplexOperator {
    spec.map_spectrum(f64::log2, true).expect("log is finite on the support")
}

/// `log2 rho - log2 sigma` restricted to the supports.
fn log_ratio(rho: &DensityOperator, sigma_spec: &SpectralDecomposition) -> CMatrix {
    let lr = log2_support(rho.spectrum());
    let ls = log2_support(sigma_spec);
    lr.entries() - ls.entries()
}

/// `D(rho || sigma) = Tr rho (log2 rho - log2 sigma)`.
pub fn rel_entropy(rho: &DensityOperator, sigma: &ComplexOperator) -> Result<f64> {
    let spec = support_checked(rho, sigma)?;
    let s = rho.entropy();
    // Tr rho log sigma = sum_j log(s_j) <v_j|rho|v_j> over the support
    let v = spec.eigenvectors();
    let rv = rho.op().entries() * v;
    let thr = spec.kernel_threshold();
    let mut cross = 0.0;
    for (j, &l) in spec.eigenvalues().iter().enumerate() {
        if l > thr {
            cross += l.log2() * v.column(j).dotc(&rv.column(j)).re;
        }
    }
    Ok(-s - cross)
}

/// `V(rho || sigma) = Tr rho (log2 rho - log2 sigma - D)^2`.
pub fn rel_entropy_variance(rho: &DensityOperator, sigma: &ComplexOperator) -> Result<f64> {
    let spec = support_checked(rho, sigma)?;
    let d = rel_entropy(rho, sigma)?;
    let n = rho.dim();
    let l = log_ratio(rho, &spec) - CMatrix::identity(n, n) * c(d);
    let rl = rho.op().entries() * &l;
    // Tr(rho L L) = sum_ij (rho L)_ij L_ji
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (rl[(i, j)] * l[(j, i)]).re;
        }
    }
    Ok(acc.max(0.0))
}

/// `D_2(rho || sigma) = log2 Tr (sigma^{-1/4} rho sigma^{-1/4})^2`.
pub fn collision_d2(rho: &DensityOperator, sigma: &ComplexOperator) -> Result<f64> {
    let spec = support_checked(rho, sigma)?;
    let s = spec.map_spectrum(|x| x.powf(-0.25), true)?;
    let a = s.entries() * rho.op().entries() * s.entries();
    let tr: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    Ok(tr.log2())
}

/// Resolution of [`info_spectrum_ds`] in `R`.
pub const DS_RESOLUTION: f64 = 1e-7;
const DS_GRID: usize = 512;

/// `h(R) = Tr(rho {rho <= 2^R sigma})`.
fn spectrum_mass(rho: &DensityOperator, sigma: &CMatrix, r: f64) -> f64 {
    let m = sigma * c(r.exp2()) - rho.op().entries();
    let h = (&m + m.adjoint()) * c(0.5);
    let spec = SpectralDecomposition::of_hermitian(&h, rho.dims().to_vec());
    let v = spec.eigenvectors();
    let rv = rho.op().entries() * v;
    // eigenvalues at roundoff level count as zero, so the boundary is included
    let thr = 1e-12 * (r.exp2() * sigma.iter().map(|z| z.norm()).fold(0.0, f64::max)).max(1.0);
    spec.eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= -thr)
        .map(|(j, _)| v.column(j).dotc(&rv.column(j)).re)
        .sum()
}

/// `D_s^eps(rho || sigma) = sup { R : Tr(rho {rho <= 2^R sigma}) <= eps }`.
///
/// `h(R)` need not be monotone for non-commuting pairs, so every breakpoint
/// (a generalized eigenvalue of the pair) and a uniform grid are scanned; the
/// largest admissible candidate is then refined by bisection.
pub fn info_spectrum_ds(rho: &DensityOperator, sigma: &ComplexOperator, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("eps must lie in (0, 1), got {eps}")));
    }
    let spec = support_checked(rho, sigma)?;
    let inv_sqrt = spec.map_spectrum(|x| 1.0 / x.sqrt(), true)?;
    let g = inv_sqrt.entries() * rho.op().entries() * inv_sqrt.entries();
    let g = ComplexOperator::from_parts((&g + g.adjoint()) * c(0.5), rho.dims().to_vec());
    let gen = g.herm_eig()?;
    let thr = gen.kernel_threshold();
    let mut breaks: Vec<f64> = gen.eigenvalues().iter().filter(|&&l| l > thr).map(|l| l.log2()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let s = sigma.entries();
    // h vanishes as R -> -inf, but off the breakpoints it can stay above eps
    // well below the smallest one (pure rho has a single breakpoint)
    let mut lo = breaks[0] - 1.0;
    let mut step = 1.0;
    while spectrum_mass(rho, s, lo) > eps {
        lo -= step;
        step *= 2.0;
        if step > 1e6 {
            return Err(Error::Infeasible(format!("information spectrum stays above eps = {eps}")));
        }
    }
    let hi = breaks[breaks.len() - 1] + 1.0;
    let mut candidates = breaks.clone();
    for i in 0..=DS_GRID {
        candidates.push(lo + (hi - lo) * i as f64 / DS_GRID as f64);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let admissible: Vec<bool> = candidates.iter().map(|&r| spectrum_mass(rho, s, r) <= eps).collect();
    let Some(best) = admissible.iter().rposition(|&ok| ok) else {
        return Ok(lo);
    };
    if best + 1 == candidates.len() {
        return Ok(candidates[best]);
    }
    let (mut a, mut b) = (candidates[best], candidates[best + 1]);
    while b - a > DS_RESOLUTION {
        let mid = 0.5 * (a + b);
        if spectrum_mass(rho, s, mid) <= eps {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random, PureStateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(p).unwrap()
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density(&mut rng, 3, 3);
        assert!(rel_entropy(&rho, rho.op()).unwrap().abs() < 1e-10);
        let kl = 0.5 * (0.5f64 / 0.75).log2() + 0.5 * (0.5f64 / 0.25).log2();
        let d = rel_entropy(&diag(&[0.5, 0.5]), diag(&[0.75, 0.25]).op()).unwrap();
        assert!((d - kl).abs() < 1e-12);
        let phi = PureStateVector::maximally_entangled(2).density();
        let pi = DensityOperator::maximally_mixed(4);
        assert!((rel_entropy(&phi, pi.op()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_infinite() {
        let r = rel_entropy(&diag(&[0.5, 0.5]), diag(&[1.0, 0.0]).op());
        assert!(matches!(r, Err(Error::InfiniteDivergence)));
        assert!(matches!(collision_d2(&diag(&[0.5, 0.5]), diag(&[1.0, 0.0]).op()), Err(Error::InfiniteDivergence)));
    }

    #[test]
    fn variance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::density(&mut rng, 3, 3);
        assert!(rel_entropy_variance(&rho, rho.op()).unwrap().abs() < 1e-10);
        let phi = PureStateVector::maximally_entangled(2).density();
        let pi = DensityOperator::maximally_mixed(4);
        assert!(rel_entropy_variance(&phi, pi.op()).unwrap().abs() < 1e-10);
        let p = [0.7, 0.3];
        let d: f64 = p.iter().map(|x| x * (x / 0.5f64).log2()).sum();
        let v: f64 = p.iter().map(|x| x * ((x / 0.5f64).log2() - d).powi(2)).sum();
        let got = rel_entropy_variance(&diag(&p), DensityOperator::maximally_mixed(2).op()).unwrap();
        assert!((got - v).abs() < 1e-12);
    }

    #[test]
    fn quantum_relative_entropy_against_commuting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = [0.4, 0.35, 0.25];
        let q = [0.2, 0.3, 0.5];
        let (rho, sigma) = random::commuting_pair(&mut rng, &p, &q);
        let d: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).log2()).sum();
        let v: f64 = p.iter().zip(&q).map(|(a, b)| a * ((a / b).log2() - d).powi(2)).sum();
        assert!((rel_entropy(&rho, &sigma).unwrap() - d).abs() < 1e-10);
        assert!((rel_entropy_variance(&rho, &sigma).unwrap() - v).abs() < 1e-10);
        let d2: f64 = p.iter().zip(&q).map(|(a, b)| a * a / b).sum::<f64>().log2();
        assert!((collision_d2(&rho, &sigma).unwrap() - d2).abs() < 1e-10);
    }

    #[test]
    fn collision_examples() {
        for d in [2usize, 3, 4] {
            let pi = DensityOperator::maximally_mixed(d);
            // sigma^{-1/4} pi sigma^{-1/4} = I / sqrt(d), squared trace 1
            assert!(collision_d2(&pi, pi.op()).unwrap().abs() < 1e-12);
        }
        let z = DensityOperator::basis_state(2, 0);
        assert!(collision_d2(&z, z.op()).unwrap().abs() < 1e-12);
        let phi = PureStateVector::maximally_entangled(2).density();
        let pi = DensityOperator::maximally_mixed(4);
        assert!((collision_d2(&phi, pi.op()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn info_spectrum_examples() {
        let ds = info_spectrum_ds(&diag(&[0.8, 0.2]), DensityOperator::maximally_mixed(2).op(), 0.5).unwrap();
        assert!((ds - (0.8f64 / 0.5).log2()).abs() < 1e-6);
        assert!(ds <= (0.8f64 / 0.5).log2());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density(&mut rng, 3, 3);
        assert!(info_spectrum_ds(&rho, rho.op(), 0.5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn information_spectrum_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rho = random::density(&mut rng, 3, 3);
            let sigma = random::density(&mut rng, 3, 3);
            let (eps, delta) = (0.1, 0.05);
            let ds = info_spectrum_ds(&rho, sigma.op(), eps).unwrap();
            let ds2 = info_spectrum_ds(&rho, sigma.op(), eps + delta).unwrap();
            let dh = hypothesis_dh(&rho, sigma.op(), eps).unwrap().dh;
            assert!(dh >= ds - 1e-5);
            // the upper side shifts eps on D_s, not on D_H
            assert!(ds2 >= dh + delta.log2() - 1e-5);
        }
    }

    #[test]
    fn pure_rho_spectrum_below_the_breakpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..=4 {
            for _ in 0..20 {
                let rho = random::density(&mut rng, d, 1);
                let sigma = random::density(&mut rng, d, d);
                let ds = info_spectrum_ds(&rho, sigma.op(), 0.1).unwrap();
                let dh = hypothesis_dh(&rho, sigma.op(), 0.1).unwrap().dh;
                assert!(ds <= dh + 1e-7, "d={d} ds={ds} dh={dh}");
            }
        }
    }
}
