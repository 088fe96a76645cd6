use super::{c, CMatrix, CVector, ComplexOperator, SpectralDecomposition, C64, KERNEL_TOL};
use crate::error::{Error, Result};

const EIGEN_FLOOR: f64 = -1e-10;
const TRACE_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// Positive unit-trace Hermitian operator with its spectrum cached.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: ComplexOperator,
    spectrum: SpectralDecomposition,
    pure: bool,
}

impl DensityOperator {
    /// Validates Hermiticity, eigenvalues `>= -1e-10` and trace within `1e-10`
    /// of one. Slightly negative eigenvalues are clamped to zero afterwards.
    pub fn new(op: ComplexOperator) -> Result<Self> {
        let spectrum = op.herm_eig()?;
        let min = spectrum.eigenvalues().last().copied().unwrap_or(0.0);
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(Self::from_spectrum_unchecked(op, spectrum))
    }

    fn from_spectrum_unchecked(op: ComplexOperator, spectrum: SpectralDecomposition) -> Self {
        let needs_clamp = spectrum.eigenvalues().iter().any(|&l| l < 0.0);
        let (op, spectrum) = if needs_clamp {
            let clamped: Vec<f64> = spectrum.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
            let op = spectrum.compose(&clamped);
            let spec = SpectralDecomposition::assemble(
                clamped,
                spectrum.eigenvectors().clone(),
                spectrum.dims().to_vec(),
            );
            (op, spec)
        } else {
            (op.hermitian_part(), spectrum)
        };
        let pure = spectrum.eigenvalues().get(1).map_or(true, |&l| l <= KERNEL_TOL);
        Self { op, spectrum, pure }
    }

    pub fn from_pure(psi: &PureStateVector) -> Self {
        let op = ComplexOperator::from_parts(psi.amplitudes() * psi.amplitudes().adjoint(), psi.dims().to_vec());
        let d = psi.dim();
        // the spectrum of a rank-one projector is known: complete psi to a basis
        let mut basis = CMatrix::zeros(d, d);
        basis.set_column(0, psi.amplitudes());
        let mut filled = 1;
        for k in 0..d {
            if filled == d {
                break;
            }
            let mut v = CVector::zeros(d);
            v[k] = c(1.0);
            for j in 0..filled {
                let col = basis.column(j).into_owned();
                let proj = col.dotc(&v);
                v -= col * proj;
            }
            let n = v.norm();
            if n > 1e-8 {
                basis.set_column(filled, &(v / c(n)));
                filled += 1;
            }
        }
        let mut values = vec![0.0; d];
        values[0] = 1.0;
        let spectrum = SpectralDecomposition::assemble(values, basis, psi.dims().to_vec());
        Self { op: op.hermitian_part(), spectrum, pure: true }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_diagonal(&vec![1.0 / d as f64; d]).expect("valid")
    }

    pub fn basis_state(d: usize, i: usize) -> Self {
        let mut p = vec![0.0; d];
        p[i] = 1.0;
        Self::from_diagonal(&p).expect("valid")
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        if probs.iter().any(|&p| p < EIGEN_FLOOR) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {s}")));
        }
        let op = ComplexOperator::from_real_diagonal(probs);
        let spectrum = SpectralDecomposition::assemble(probs.to_vec(), CMatrix::identity(d, d), vec![d]);
        Ok(Self::from_spectrum_unchecked(op, spectrum))
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Reinterpret the tensor factorization.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        let op = self.op.with_dims(dims.clone())?;
        let spectrum = SpectralDecomposition::assemble(
            self.spectrum.eigenvalues().to_vec(),
            self.spectrum.eigenvectors().clone(),
            dims,
        );
        Ok(Self { op, spectrum, pure: self.pure })
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(self.eigenvalues())
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        Self::new(self.op.partial_trace(keep)?)
    }

    /// Product state; the spectrum is formed from the factors directly.
    pub fn tensor(&self, other: &Self) -> Self {
        let op = self.op.tensor(&other.op);
        let ea = self.eigenvalues();
        let eb = other.eigenvalues();
        let mut values = Vec::with_capacity(ea.len() * eb.len());
        for &a in ea {
            for &b in eb {
                values.push(a * b);
            }
        }
        let vectors = self.spectrum.eigenvectors().kronecker(other.spectrum.eigenvectors());
        let spectrum = SpectralDecomposition::assemble(values, vectors, op.dims().to_vec());
        let pure = self.pure && other.pure;
        Self { op, spectrum, pure }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        out
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let op = self.op.conjugate_by(u)?;
        let vectors = u * self.spectrum.eigenvectors();
        let spectrum =
            SpectralDecomposition::assemble(self.eigenvalues().to_vec(), vectors, self.dims().to_vec());
        Ok(Self { op, spectrum, pure: self.pure })
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        let op = self.op.scale(lambda).add(&other.op.scale(1.0 - lambda))?;
        Self::new(op)
    }
}

/// Shannon entropy (bits) of a spectrum; non-positive entries contribute zero.
pub(crate) fn entropy_of(values: &[f64]) -> f64 {
    values.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum()
}

/// Unit vector with a tensor factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureStateVector {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || d != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} for vector of length {}",
                dims,
                amplitudes.len()
            )));
        }
        let n = amplitudes.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("vector norm {n} differs from 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Maximally entangled state of Schmidt rank `d` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self { amplitudes: super::maximally_entangled_vector(d), dims: vec![d, d] }
    }

    pub fn basis(dims: &[usize], index: usize) -> Self {
        let d: usize = dims.iter().product();
        let mut v = CVector::zeros(d);
        v[index] = c(1.0);
        Self { amplitudes: v, dims: dims.to_vec() }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes: self.amplitudes.kronecker(&other.amplitudes), dims }
    }

    /// `(U ⊗ I)|psi>` style application of a full-space operator.
    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of size {} on vector of dimension {}",
                u.nrows(),
                self.dim()
            )));
        }
        Self::new(u * &self.amplitudes, self.dims.clone())
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Schmidt decomposition of a bipartite vector `sum_k s_k |u_k>|w_k>`.
    pub fn schmidt_decompose(&self) -> Result<SchmidtDecomposition> {
        if self.dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "Schmidt decomposition needs two factors, got {:?}",
                self.dims
            )));
        }
        let (da, db) = (self.dims[0], self.dims[1]);
        let m = CMatrix::from_fn(da, db, |i, j| self.amplitudes[i * db + j]);
        let gram = ComplexOperator::from_parts(&m * m.adjoint(), vec![da]).hermitian_part();
        let spec = gram.herm_eig()?;
        let thr = KERNEL_TOL * spec.max_abs_eigenvalue().max(f64::MIN_POSITIVE);
        let mut coefficients = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (k, &l) in spec.eigenvalues().iter().enumerate() {
            if l <= thr {
                break;
            }
            let s = l.sqrt();
            let u = spec.eigenvector(k);
            let w = CVector::from_fn(db, |j, _| {
                (0..da).map(|i| u[i].conj() * m[(i, j)]).sum::<C64>() / s
            });
            coefficients.push(s);
            left.push(u);
            right.push(w);
        }
        Ok(SchmidtDecomposition { coefficients, left, right, dims: [da, db] })
    }
}

/// `|psi> = sum_k coefficients[k] |left[k]> ⊗ |right[k]>`, coefficients descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
    dims: [usize; 2],
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Squared coefficients (the spectrum of either marginal).
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    pub fn reconstruct(&self) -> CVector {
        let mut v = CVector::zeros(self.dims[0] * self.dims[1]);
        for k in 0..self.rank() {
            v += self.left[k].kronecker(&self.right[k]) * c(self.coefficients[k]);
        }
        v
    }

    /// Unitary whose first `rank` columns are the left Schmidt vectors.
    pub fn left_basis(&self) -> CMatrix {
        complete_basis(&self.left, self.dims[0])
    }
}

pub(crate) fn complete_basis(vectors: &[CVector], d: usize) -> CMatrix {
    let mut basis = CMatrix::zeros(d, d);
    let mut filled = 0;
    for v in vectors {
        basis.set_column(filled, v);
        filled += 1;
    }
    for k in 0..d {
        if filled == d {
            break;
        }
        let mut v = CVector::zeros(d);
        v[k] = c(1.0);
        for j in 0..filled {
            let col = basis.column(j).into_owned();
            let proj = col.dotc(&v);
            v -= col * proj;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.set_column(filled, &(v / c(n)));
            filled += 1;
        }
    }
    basis
}

fn same_dims(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

/// `Tr[{rho >= sigma}(rho - sigma)]`, i.e. half the trace norm of the difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dims(rho, sigma)?;
    let diff = rho.op().sub(sigma.op()).or_else(|_| {
        Ok::<_, Error>(ComplexOperator::from_parts(
            rho.op().entries() - sigma.op().entries(),
            rho.dims().to_vec(),
        ))
    })?;
    let spec = diff.hermitian_part().herm_eig()?;
    let positive: f64 = spec.eigenvalues().iter().filter(|&&l| l > 0.0).sum();
    Ok(positive.clamp(0.0, 1.0))
}

/// `F = || sqrt(rho) sqrt(sigma) ||_1`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dims(rho, sigma)?;
    let sqrt_sigma = sigma.spectrum().compose(
        &sigma.eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).collect::<Vec<_>>(),
    );
    let inner = ComplexOperator::from_parts(
        sqrt_sigma.entries() * rho.op().entries() * sqrt_sigma.entries(),
        rho.dims().to_vec(),
    )
    .hermitian_part();
    let spec = inner.herm_eig()?;
    // roundoff eigenvalues near zero would be amplified by the square root
    let thr = spec.kernel_threshold();
    let f: f64 = spec.eigenvalues().iter().filter(|&&l| l > thr).map(|&l| l.sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Canonical purification `sum_i sqrt(lambda_i) |e_i> ⊗ |i>` on `A ⊗ A'`.
pub fn purify(rho: &DensityOperator) -> PureStateVector {
    let d = rho.dim();
    let spec = rho.spectrum();
    let mut v = CVector::zeros(d * d);
    for (i, &l) in spec.eigenvalues().iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let e = spec.eigenvector(i);
        let s = l.sqrt();
        for a in 0..d {
            v[a * d + i] += e[a] * s;
        }
    }
    let n = v.norm();
    v /= c(n);
    PureStateVector { amplitudes: v, dims: vec![d, d] }
}

/// `||(M ⊗ I)|Phi> - (I ⊗ M^T)|Phi>||` for the maximally entangled `|Phi>`.
pub fn transpose_trick_check(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let phi = super::maximally_entangled_vector(d);
    let id = CMatrix::identity(d, d);
    let lhs = m.kronecker(&id) * &phi;
    let rhs = id.kronecker(&m.transpose()) * &phi;
    (lhs - rhs).norm()
}
