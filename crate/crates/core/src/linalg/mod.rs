//! Dense complex linear algebra for operators on small tensor-product spaces.
//!
//! Operators carry the dimensions of their tensor factors, ordered so that the
//! first factor is the most significant digit of the basis index (the
//! convention of `kron`). Subsystem indices are zero-based.

mod eigen;
pub mod random;
mod state;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::SpectralDecomposition;
pub use state::{
    fidelity, purify, trace_distance, transpose_trick_check, DensityOperator, PureStateVector,
    SchmidtDecomposition,
};
pub(crate) use state::complete_basis;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues at or below `KERNEL_TOL * max|eigenvalue|` belong to the kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Hermiticity tolerance relative to the Frobenius norm.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Square complex matrix together with its tensor factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    entries: CMatrix,
    dims: Vec<usize>,
}

impl ComplexOperator {
    pub fn new(entries: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let product: usize = dims.iter().product();
        if dims.is_empty() || product != entries.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions {:?} do not multiply to {}",
                dims,
                entries.nrows()
            )));
        }
        Ok(Self { entries, dims })
    }

    /// Operator on a single factor of dimension `entries.nrows()`.
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, vec![n])
    }

    pub(crate) fn from_parts(entries: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), entries.nrows());
        Self { entries, dims }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self::from_parts(CMatrix::identity(n, n), dims.to_vec())
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self::from_parts(CMatrix::zeros(n, n), dims.to_vec())
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { C64::default() });
        Self::from_parts(m, vec![n])
    }

    /// Rank-one operator `|v><v|`.
    pub fn projector(v: &CVector, dims: &[usize]) -> Result<Self> {
        Self::new(v * v.adjoint(), dims.to_vec())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Reinterpret the factorization; the total dimension must agree.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.entries, dims)
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.entries.adjoint(), self.dims.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_parts(self.entries.transpose(), self.dims.clone())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_parts(self.entries.map(|z| z * a), self.dims.clone())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_parts(&self.entries + &other.entries, self.dims.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_parts(&self.entries - &other.entries, self.dims.clone()))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {} by {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self::from_parts(&self.entries * &other.entries, self.dims.clone()))
    }

    /// `U A U^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary of size {}x{} on operator of dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(Self::from_parts(u * &self.entries * u.adjoint(), self.dims.clone()))
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let a = &self.entries;
        let b = &other.entries;
        let n = a.nrows();
        let mut acc = C64::default();
        for i in 0..n {
            for j in 0..n {
                acc += a[(i, j)] * b[(j, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_residual(&self) -> f64 {
        let a = &self.entries;
        let n = a.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_residual() <= HERMITIAN_TOL * self.frobenius_norm().max(1.0)
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let a = &self.entries;
        Self::from_parts((a + a.adjoint()) * c(0.5), self.dims.clone())
    }

    /// Kronecker product; the factorizations are concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(self.entries.kronecker(&other.entries), dims)
    }

    /// Trace out every factor not listed in `keep` (zero-based, any order;
    /// the kept factors retain their original relative order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let k = self.dims.len();
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&i| i >= k) {
            return Err(Error::InvalidSubsystems(format!(
                "keep set {:?} is not a subset of 0..{}",
                keep, k
            )));
        }
        if keep_sorted.is_empty() {
            let tr = self.trace();
            let m = CMatrix::from_element(1, 1, tr);
            return Ok(Self::from_parts(m, vec![1]));
        }
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| self.dims[i]).collect();
        let traced: Vec<usize> = (0..k).filter(|i| !keep_sorted.contains(i)).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.dims[i]).collect();
        let dk: usize = kept_dims.iter().product();
        let dt: usize = traced_dims.iter().product();

        // full index for every (kept, traced) pair
        let mut full = vec![0usize; dk * dt];
        let mut digits = vec![0usize; k];
        for idx in 0..self.dim() {
            let mut rem = idx;
            for f in (0..k).rev() {
                digits[f] = rem % self.dims[f];
                rem /= self.dims[f];
            }
            let mut ki = 0;
            for &f in &keep_sorted {
                ki = ki * self.dims[f] + digits[f];
            }
            let mut ti = 0;
            for &f in &traced {
                ti = ti * self.dims[f] + digits[f];
            }
            full[ki * dt + ti] = idx;
        }
        let a = &self.entries;
        let out = CMatrix::from_fn(dk, dk, |r, s| {
            let mut acc = C64::default();
            for t in 0..dt {
                acc += a[(full[r * dt + t], full[s * dt + t])];
            }
            acc
        });
        Ok(Self::from_parts(out, kept_dims))
    }

    /// Eigendecomposition of a Hermitian operator.
    pub fn herm_eig(&self) -> Result<SpectralDecomposition> {
        let residual = self.hermitian_residual();
        if residual > HERMITIAN_TOL * self.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(SpectralDecomposition::of_hermitian(&self.entries, self.dims.clone()))
    }

    /// Apply `f` to the spectrum. With `support_only`, eigenvalues at or below
    /// `KERNEL_TOL * max|eigenvalue|` map to zero and `f` is never called on
    /// them.
    pub fn op_func(&self, f: impl Fn(f64) -> f64, support_only: bool) -> Result<Self> {
        self.herm_eig()?.map_spectrum(f, support_only)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        let gram = Self::from_parts(self.entries.adjoint() * &self.entries, self.dims.clone())
            .hermitian_part();
        let spec = SpectralDecomposition::of_hermitian(gram.entries(), gram.dims.clone());
        spec.eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).sum()
    }

    /// `A ⊗ I` on the trailing factors `rest`.
    pub fn extend_right(&self, rest: &[usize]) -> Self {
        self.tensor(&Self::identity(rest))
    }
}

/// Heisenberg–Weyl shift operator `X(x)|j> = |j + x mod d>`.
pub fn shift_matrix(d: usize, x: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == (j + x) % d { c(1.0) } else { C64::default() })
}

/// Heisenberg–Weyl phase operator `Z(z)|j> = exp(2 pi i z j / d)|j>`.
pub fn phase_matrix(d: usize, z: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let angle = 2.0 * std::f64::consts::PI * ((z * j) % d) as f64 / d as f64;
            C64::from_polar(1.0, angle)
        } else {
            C64::default()
        }
    })
}

pub fn pauli_x() -> CMatrix {
    shift_matrix(2, 1)
}

pub fn pauli_z() -> CMatrix {
    phase_matrix(2, 1)
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::default(), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::default()])
}

/// Unnormalized maximally entangled vector `sum_i |i>|i>` scaled to unit norm.
pub fn maximally_entangled_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Operator norm of `U^dagger U - I` bound via the Frobenius norm.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u - CMatrix::identity(n, n);
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (ra, rb) = (a.nrows(), b.nrows());
        CMatrix::from_fn(ra * rb, ra * rb, |i, j| a[(i / rb, j / rb)] * b[(i % rb, j % rb)])
    }

    #[test]
    fn tensor_identity_and_projectors() {
        let i2 = ComplexOperator::identity(&[2]);
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.dims(), &[2, 2]);
        assert!(max_abs_diff(i4.entries(), &CMatrix::identity(4, 4)) == 0.0);

        let p0 = ComplexOperator::from_real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexOperator::from_real_diagonal(&[0.0, 1.0]);
        let t = p0.tensor(&p1);
        let expect = ComplexOperator::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(t.entries(), expect.entries());
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random::ginibre(&mut rng, 2, 2);
            let b = random::ginibre(&mut rng, 2, 2);
            let oa = ComplexOperator::from_matrix(a.clone()).unwrap();
            let ob = ComplexOperator::from_matrix(b.clone()).unwrap();
            let t = oa.tensor(&ob);
            assert!(max_abs_diff(t.entries(), &kron_oracle(&a, &b)) < 1e-15);
            assert!((t.trace() - oa.trace() * ob.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ComplexOperator::from_matrix(random::ginibre(&mut rng, 3, 3)).unwrap();
        let b = ComplexOperator::from_matrix(random::ginibre(&mut rng, 2, 2)).unwrap();
        let ab = a.tensor(&b);
        let left = ab.partial_trace(&[0]).unwrap();
        assert!(max_abs_diff(left.entries(), &(a.entries() * b.trace())) < 1e-12);
        let right = ab.partial_trace(&[1]).unwrap();
        assert!(max_abs_diff(right.entries(), &(b.entries() * a.trace())) < 1e-12);
        assert!((ab.partial_trace(&[]).unwrap().trace() - ab.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_three_factors_middle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ops: Vec<_> = [2usize, 3, 2]
            .iter()
            .map(|&d| ComplexOperator::from_matrix(random::ginibre(&mut rng, d, d)).unwrap())
            .collect();
        let full = ops[0].tensor(&ops[1]).tensor(&ops[2]);
        let kept = full.partial_trace(&[2, 0]).unwrap();
        let expect = ops[0].tensor(&ops[2]).scale(1.0);
        let expect = expect.entries() * ops[1].trace();
        assert!(max_abs_diff(kept.entries(), &expect) < 1e-12);
        assert_eq!(kept.dims(), &[2, 2]);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let op = ComplexOperator::identity(&[2, 2]);
        assert!(op.partial_trace(&[2]).is_err());
        assert!(op.partial_trace(&[0, 0]).is_err());
    }

    #[test]
    fn maximally_entangled_marginal_is_mixed() {
        for d in 2..5 {
            let phi = maximally_entangled_vector(d);
            let p = ComplexOperator::projector(&phi, &[d, d]).unwrap();
            let red = p.partial_trace(&[0]).unwrap();
            let mixed = CMatrix::identity(d, d) * c(1.0 / d as f64);
            assert!(max_abs_diff(red.entries(), &mixed) < 1e-14);
        }
    }

    #[test]
    fn op_func_examples() {
        let sq = ComplexOperator::from_real_diagonal(&[4.0, 9.0]).op_func(f64::sqrt, false).unwrap();
        assert!(max_abs_diff(sq.entries(), ComplexOperator::from_real_diagonal(&[2.0, 3.0]).entries()) < 1e-14);

        let lg = ComplexOperator::identity(&[2]).op_func(f64::log2, true).unwrap();
        assert!(lg.frobenius_norm() < 1e-15);

        let inv = ComplexOperator::from_real_diagonal(&[4.0, 0.0])
            .op_func(|x| 1.0 / x.sqrt(), true)
            .unwrap();
        assert!(max_abs_diff(inv.entries(), ComplexOperator::from_real_diagonal(&[0.5, 0.0]).entries()) < 1e-14);

        let err = ComplexOperator::from_real_diagonal(&[4.0, 0.0]).op_func(f64::log2, false);
        assert!(matches!(err, Err(Error::FunctionUndefined(_))));
    }

    #[test]
    fn weyl_operators_qubit_and_qutrit() {
        let x = shift_matrix(2, 1);
        assert_eq!(x[(1, 0)], c(1.0));
        assert_eq!(x[(0, 0)], C64::default());
        let z = phase_matrix(2, 1);
        assert!((z[(1, 1)] - c(-1.0)).norm() < 1e-15);
        let x3 = shift_matrix(3, 1);
        let z3 = phase_matrix(3, 1);
        let id = CMatrix::identity(3, 3);
        assert!(max_abs_diff(&(&x3 * &x3 * &x3), &id) < 1e-14);
        assert!(max_abs_diff(&(&z3 * &z3 * &z3), &id) < 1e-14);
    }
}
