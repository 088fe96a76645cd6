//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{c, CMatrix, CVector, ComplexOperator, C64, KERNEL_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// `H = V diag(eigenvalues) V^dagger` with eigenvalues in descending order.
///
/// Each eigenvector is normalized so that its first component of modulus
/// above `1e-10 * max|component|` is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    dims: Vec<usize>,
}

impl SpectralDecomposition {
    pub(crate) fn of_hermitian(h: &CMatrix, dims: Vec<usize>) -> Self {
        let (values, vectors) = jacobi(h);
        Self::assemble(values, vectors, dims)
    }

    /// Build from an already-diagonalizing basis (columns of `vectors`).
    pub(crate) fn assemble(values: Vec<f64>, vectors: CMatrix, dims: Vec<usize>) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut eigenvectors = CMatrix::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvalues.push(values[src]);
            let mut col = vectors.column(src).into_owned();
            fix_phase(&mut col);
            eigenvectors.set_column(dst, &col);
        }
        Self { eigenvalues, eigenvectors, dims }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, &l| m.max(l.abs()))
    }

    /// Absolute kernel threshold for this spectrum.
    pub fn kernel_threshold(&self) -> f64 {
        KERNEL_TOL * self.max_abs_eigenvalue()
    }

    /// `V diag(w) V^dagger`.
    pub fn compose(&self, weights: &[f64]) -> ComplexOperator {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &w) in weights.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        let m = scaled * self.eigenvectors.adjoint();
        ComplexOperator::from_parts(m, self.dims.clone()).hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexOperator {
        self.compose(&self.eigenvalues)
    }

    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64, support_only: bool) -> Result<ComplexOperator> {
        let thr = self.kernel_threshold();
        let mut w = Vec::with_capacity(self.eigenvalues.len());
        for &l in &self.eigenvalues {
            if support_only && l <= thr {
                w.push(0.0);
                continue;
            }
            let v = f(l);
            if !v.is_finite() {
                return Err(Error::FunctionUndefined(l));
            }
            w.push(v);
        }
        Ok(self.compose(&w))
    }

    /// Projector onto eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> ComplexOperator {
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| if keep(l) { 1.0 } else { 0.0 }).collect();
        self.compose(&w)
    }

    /// Spectral-norm bound `||V^dagger V - I||_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        super::unitarity_residual(&self.eigenvectors)
    }
}

fn fix_phase(col: &mut CVector) {
    let scale = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    if let Some(first) = col.iter().find(|z| z.norm() > 1e-10 * scale).copied() {
        let phase = first.conj() / first.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
}

/// Returns unsorted eigenvalues and the matching eigenvector columns.
fn jacobi(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let mut a = (h + h.adjoint()) * c(0.5);
    let mut v = CMatrix::identity(n, n);
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if sweep > 3 && app.abs() + 100.0 * abs == app.abs() && aqq.abs() + 100.0 * abs == aqq.abs() {
                    a[(p, q)] = C64::default();
                    a[(q, p)] = C64::default();
                    continue;
                }
                let theta = (aqq - app) / (2.0 * abs);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let e = apq / abs;
                let ec = e.conj();
                // columns: A <- A G with G = [[c, s], [-s conj(e), c conj(e)]]
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * ec * sn;
                    a[(k, q)] = akp * sn + akq * ec * cs;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * ec * sn;
                    v[(k, q)] = vkp * sn + vkq * ec * cs;
                }
                // rows: A <- G^dagger A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * e * sn;
                    a[(q, k)] = apk * sn + aqk * e * cs;
                }
                a[(p, q)] = C64::default();
                a[(q, p)] = C64::default();
                a[(p, p)] = c(a[(p, p)].re);
                a[(q, q)] = c(a[(q, q)].re);
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    (values, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_input_sorted() {
        let op = ComplexOperator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let s = op.herm_eig().unwrap();
        assert_eq!(s.eigenvalues(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let op = ComplexOperator::from_matrix(crate::linalg::pauli_x()).unwrap();
        let s = op.herm_eig().unwrap();
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!((s.eigenvalues()[1] + 1.0).abs() < 1e-15);
        // phase convention: first component real positive
        for i in 0..2 {
            let v = s.eigenvector(i);
            assert!(v[0].im.abs() < 1e-15 && v[0].re > 0.0);
        }
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1usize, 2, 5, 8, 16, 33] {
            let h = random::hermitian(&mut rng, d);
            let op = ComplexOperator::from_matrix(h.clone()).unwrap();
            let s = op.herm_eig().unwrap();
            let norm = op.frobenius_norm();
            let r = s.reconstruct();
            let resid = (r.entries() - &h).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(resid <= 1e-10 * norm, "d={d} resid={resid}");
            assert!(s.orthonormality_residual() <= 1e-10);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let op = ComplexOperator::from_matrix(m).unwrap();
        assert!(matches!(op.herm_eig(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum_keeps_orthonormal_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random::unitary(&mut rng, 6);
        let d = CMatrix::from_diagonal(&CVector::from_vec(
            [1.0, 1.0, 1.0, 0.0, 0.0, -2.0].iter().map(|&x| c(x)).collect(),
        ));
        let h = &u * d * u.adjoint();
        let s = ComplexOperator::from_matrix(h.clone()).unwrap().herm_eig().unwrap();
        assert!(s.orthonormality_residual() < 1e-12);
        assert!(max_abs_diff(s.reconstruct().entries(), &h) < 1e-12);
    }
}
