//! Random matrices and states for property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, CMatrix, CVector, ComplexOperator, DensityOperator, PureStateVector, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()) * c(0.5)
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    isometry(rng, d, d)
}

/// `rows x cols` isometry (`cols <= rows`), `V^dagger V = I`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(cols <= rows);
    let mut g = ginibre(rng, rows, cols);
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|i| g[(i, k)].conj() * g[(i, j)]).sum();
            for i in 0..rows {
                let gik = g[(i, k)];
                g[(i, j)] -= gik * proj;
            }
        }
        let norm = (0..rows).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            g[(i, j)] /= norm;
        }
    }
    g
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureStateVector {
    let d: usize = dims.iter().product();
    let mut v = CVector::from_fn(d, |_, _| complex_normal(rng));
    let n = v.norm();
    v /= c(n);
    PureStateVector::new(v, dims.to_vec()).expect("normalized")
}

/// Mixed state `G G^dagger / Tr` with `G` of shape `d x rank`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = ComplexOperator::from_parts(m / c(tr), vec![d]).hermitian_part();
    DensityOperator::new(op).expect("valid random state")
}

/// Probability vector from normalized exponentials (strictly positive).
pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(rng.random::<f64>().max(1e-300)).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Diagonal commuting pair `U diag(p) U^dagger`, `U diag(q) U^dagger`.
pub fn commuting_pair<R: Rng + ?Sized>(
    rng: &mut R,
    p: &[f64],
    q: &[f64],
) -> (DensityOperator, ComplexOperator) {
    let d = p.len();
    let u = unitary(rng, d);
    let dp = CMatrix::from_diagonal(&CVector::from_iterator(d, p.iter().map(|&x| c(x))));
    let dq = CMatrix::from_diagonal(&CVector::from_iterator(d, q.iter().map(|&x| c(x))));
    let rho = ComplexOperator::from_parts(&u * dp * u.adjoint(), vec![d]).hermitian_part();
    let sigma = ComplexOperator::from_parts(&u * dq * u.adjoint(), vec![d]).hermitian_part();
    (DensityOperator::new(rho).expect("valid"), sigma)
}
