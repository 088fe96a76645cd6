//! Quantum channels in Kraus form.

mod families;
mod spec_file;

use crate::error::{Error, Result};
use crate::linalg::{
    c, max_abs_diff, phase_matrix, shift_matrix, CMatrix, ComplexOperator, DensityOperator,
};

pub use families::StandardChannel;
pub use spec_file::{parse_channel_spec, read_channel_file};
pub(crate) use spec_file::named_family;

/// Default cap on the total dimension `d_in^n * d_out^n` of a tensor power.
pub const DEFAULT_DIM_CAP: usize = 4096;

const TP_TOL: f64 = 1e-9;
const CP_TOL: f64 = -1e-9;

/// CPTP map `rho -> sum_k K_k rho K_k^dagger`.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
    covariant_irreducible_input: bool,
    name: Option<String>,
    family: Option<StandardChannel>,
}

/// Outcome of [`QuantumChannel::validate`].
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Largest entry of `sum K^dagger K - I`.
    pub trace_preservation_residual: f64,
    pub min_choi_eigenvalue: f64,
    pub passed: bool,
}

impl QuantumChannel {
    /// Validated construction; fails when `sum_k K^dagger K != I`. Complete
    /// positivity holds for any Kraus form, so the Choi spectrum is left to
    /// [`validate`](Self::validate).
    pub fn new(kraus: Vec<CMatrix>, d_in: usize, d_out: usize) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus, d_in, d_out)?;
        let tp = ch.trace_preservation_residual();
        if tp > TP_TOL {
            return Err(Error::InvalidState(format!(
                "Kraus set is not trace preserving (residual {tp:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only; call [`validate`](Self::validate) for CPTP.
    pub fn from_kraus_unchecked(kraus: Vec<CMatrix>, d_in: usize, d_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::DimensionMismatch("empty Kraus set".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        Ok(Self { kraus, d_in, d_out, covariant_irreducible_input: false, name: None, family: None })
    }

    pub fn standard(family: StandardChannel) -> Result<Self> {
        families::build(family)
    }

    pub fn identity(d: usize) -> Self {
        Self::standard(StandardChannel::Identity { d }).expect("identity is valid")
    }

    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        Self::standard(StandardChannel::Depolarizing { d, p })
    }

    pub fn dephasing(p: f64) -> Result<Self> {
        Self::standard(StandardChannel::Dephasing { p })
    }

    pub fn qubit_pauli(px: f64, py: f64, pz: f64) -> Result<Self> {
        Self::standard(StandardChannel::QubitPauli { px, py, pz })
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        Self::standard(StandardChannel::AmplitudeDamping { gamma })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Assert (not detect) covariance with an irreducible input representation.
    pub fn with_covariance_flag(mut self, flag: bool) -> Self {
        self.covariant_irreducible_input = flag;
        self
    }

    pub(crate) fn with_family(mut self, family: StandardChannel) -> Self {
        self.family = Some(family);
        self
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn covariant_irreducible_input(&self) -> bool {
        self.covariant_irreducible_input
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn family(&self) -> Option<StandardChannel> {
        self.family
    }

    /// `sum_k K rho K^dagger` on an operator over `d_in`.
    pub fn apply_op(&self, rho: &ComplexOperator) -> Result<ComplexOperator> {
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but operator dimension {}",
                self.d_in,
                rho.dim()
            )));
        }
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho.entries() * k.adjoint();
        }
        Ok(ComplexOperator::from_parts(out, vec![self.d_out]).hermitian_part())
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply_op(rho.op())?)
    }

    /// `(N ⊗ id)` on an operator whose first factor is the channel input.
    pub fn apply_left_op(&self, rho: &ComplexOperator) -> Result<ComplexOperator> {
        let dims = rho.dims();
        if dims[0] != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "first factor has dimension {} but channel input is {}",
                dims[0], self.d_in
            )));
        }
        let rest: usize = dims[1..].iter().product();
        let m = rho.entries();
        let mut out = CMatrix::zeros(self.d_out * rest, self.d_out * rest);
        // block form: rho = sum_{ij} |i><j| ⊗ R_ij, so the output blocks are
        // (sum_k K |i><j| K^dagger) ⊗ R_ij
        for k in &self.kraus {
            let kk = k.kronecker(&CMatrix::identity(rest, rest));
            out += &kk * m * kk.adjoint();
        }
        let mut out_dims = vec![self.d_out];
        out_dims.extend_from_slice(&dims[1..]);
        Ok(ComplexOperator::from_parts(out, out_dims).hermitian_part())
    }

    pub fn apply_left(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply_left_op(rho.op())?)
    }

    /// `N^{⊗n}` with all `|K|^n` Kraus products.
    pub fn tensor_power(&self, n: usize, dim_cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("tensor power needs n >= 1".into()));
        }
        let needed = (self.d_in as u128).pow(n as u32) * (self.d_out as u128).pow(n as u32);
        if needed > dim_cap as u128 {
            return Err(Error::DimensionCap { needed, cap: dim_cap as u128 });
        }
        let mut kraus = self.kraus.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(kraus.len() * self.kraus.len());
            for a in &kraus {
                for b in &self.kraus {
                    next.push(a.kronecker(b));
                }
            }
            kraus = next;
        }
        let d_in = self.d_in.pow(n as u32);
        let d_out = self.d_out.pow(n as u32);
        Ok(Self {
            kraus,
            d_in,
            d_out,
            covariant_irreducible_input: self.covariant_irreducible_input,
            name: self.name.as_ref().map(|s| format!("{s}^{n}")),
            family: None,
        })
    }

    /// Channel `rho -> N(U rho U^dagger)`.
    pub fn precompose_unitary(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.d_in || u.ncols() != self.d_in {
            return Err(Error::DimensionMismatch("unitary does not match channel input".into()));
        }
        let kraus = self.kraus.iter().map(|k| k * u).collect();
        Ok(Self { kraus, family: None, ..self.clone() })
    }

    /// Trace-one Choi state `(N ⊗ id)(Phi)` on `B ⊗ A`.
    pub fn choi(&self) -> ComplexOperator {
        let d = self.d_in;
        let phi = crate::linalg::maximally_entangled_vector(d);
        let p = ComplexOperator::from_parts(&phi * phi.adjoint(), vec![d, d]);
        self.apply_left_op(&p).expect("dimensions agree by construction")
    }

    /// Largest entry of `sum_k K^dagger K - I`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &CMatrix::identity(self.d_in, self.d_in))
    }

    pub fn validate(&self) -> ValidationReport {
        let tp = self.trace_preservation_residual();
        let choi = self.choi();
        let min_eig = choi
            .herm_eig()
            .map(|s| s.eigenvalues().last().copied().unwrap_or(0.0))
            .unwrap_or(f64::NEG_INFINITY);
        ValidationReport {
            trace_preservation_residual: tp,
            min_choi_eigenvalue: min_eig,
            passed: tp <= TP_TOL && min_eig >= CP_TOL,
        }
    }

    /// Pairs `(U_g, V_g)` with `N(U rho U^dagger) = V N(rho) V^dagger`, known
    /// for the Weyl-covariant standard families.
    pub fn covariance_group(&self) -> Option<Vec<(CMatrix, CMatrix)>> {
        let d = match self.family? {
            StandardChannel::Identity { d } | StandardChannel::Depolarizing { d, .. } => d,
            StandardChannel::Dephasing { .. } | StandardChannel::QubitPauli { .. } => 2,
            StandardChannel::AmplitudeDamping { .. } => return None,
        };
        let mut group = Vec::with_capacity(d * d);
        for x in 0..d {
            for z in 0..d {
                let u = shift_matrix(d, x) * phase_matrix(d, z);
                group.push((u.clone(), u));
            }
        }
        Some(group)
    }
}

/// Stinespring construction `K_k = (<k| ⊗ I) V` from an isometry
/// `V: C^{d_in} -> C^{env} ⊗ C^{d_out}`.
pub fn from_isometry(v: &CMatrix, d_in: usize, d_out: usize) -> Result<QuantumChannel> {
    if v.ncols() != d_in || v.nrows() % d_out != 0 {
        return Err(Error::DimensionMismatch("isometry shape".into()));
    }
    let env = v.nrows() / d_out;
    let kraus = (0..env)
        .map(|k| CMatrix::from_fn(d_out, d_in, |i, j| v[(k * d_out + i, j)]))
        .collect();
    QuantumChannel::new(kraus, d_in, d_out)
}

pub(crate) fn scaled(m: CMatrix, s: f64) -> CMatrix {
    m * c(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random, trace_distance, PureStateVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &ComplexOperator, b: &ComplexOperator, tol: f64) -> bool {
        max_abs_diff(a.entries(), b.entries()) <= tol
    }

    #[test]
    fn identity_and_completely_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density(&mut rng, 2, 2);
        let id = QuantumChannel::identity(2);
        assert!(close(id.apply(&rho).unwrap().op(), rho.op(), 1e-14));
        let dep = QuantumChannel::depolarizing(2, 1.0).unwrap();
        let out = dep.apply(&rho).unwrap();
        assert!(close(out.op(), DensityOperator::maximally_mixed(2).op(), 1e-14));
    }

    #[test]
    fn depolarizing_on_basis_state() {
        let dep = QuantumChannel::depolarizing(2, 0.2).unwrap();
        let out = dep.apply(&DensityOperator::basis_state(2, 0)).unwrap();
        let expect = ComplexOperator::from_real_diagonal(&[0.9, 0.1]);
        assert!(close(out.op(), &expect, 1e-14));
    }

    #[test]
    fn apply_left_isotropic_spectrum() {
        let phi = PureStateVector::maximally_entangled(2).density();
        let id = QuantumChannel::identity(2);
        assert!(close(id.apply_left(&phi).unwrap().op(), phi.op(), 1e-14));
        let p = 0.3;
        let out = QuantumChannel::depolarizing(2, p).unwrap().apply_left(&phi).unwrap();
        let ev = out.eigenvalues();
        assert!((ev[0] - (1.0 - 0.75 * p)).abs() < 1e-12);
        for &l in &ev[1..] {
            assert!((l - p / 4.0).abs() < 1e-12);
        }
        let full = QuantumChannel::depolarizing(2, 1.0).unwrap().apply_left(&phi).unwrap();
        assert!(close(full.op(), DensityOperator::maximally_mixed(4).op(), 1e-14));
        assert!(close(&full.op().clone(), &QuantumChannel::depolarizing(2, 1.0).unwrap().choi(), 1e-14));
    }

    #[test]
    fn tensor_power_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = QuantumChannel::depolarizing(2, 0.37).unwrap();
        let a = random::density(&mut rng, 2, 2);
        let b = random::density(&mut rng, 2, 1);
        let ch2 = ch.tensor_power(2, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(ch2.kraus().len(), 16);
        let lhs = ch2.apply(&a.tensor(&b)).unwrap();
        let rhs = ch.apply(&a).unwrap().tensor(&ch.apply(&b).unwrap());
        assert!(close(lhs.op(), rhs.op(), 1e-12));
        let id2 = QuantumChannel::identity(2).tensor_power(2, DEFAULT_DIM_CAP).unwrap();
        assert!(max_abs_diff(&id2.kraus()[0], &CMatrix::identity(4, 4)) == 0.0);
        assert_eq!(ch.tensor_power(1, DEFAULT_DIM_CAP).unwrap().kraus().len(), 4);
        assert!(matches!(ch.tensor_power(7, DEFAULT_DIM_CAP), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn tensor_power_on_powers_up_to_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = QuantumChannel::amplitude_damping(0.4).unwrap();
        let rho = random::density(&mut rng, 2, 2);
        for n in 1..=3 {
            let lhs = ch.tensor_power(n, DEFAULT_DIM_CAP).unwrap().apply(&rho.tensor_power(n)).unwrap();
            let rhs = ch.apply(&rho).unwrap().tensor_power(n);
            assert!(close(lhs.op(), rhs.op(), 1e-10));
        }
    }

    #[test]
    fn amplitude_damping_full_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = QuantumChannel::amplitude_damping(1.0).unwrap();
        for _ in 0..10 {
            let rho = random::density(&mut rng, 2, 2);
            let out = ch.apply(&rho).unwrap();
            assert!(trace_distance(&out, &DensityOperator::basis_state(2, 0)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn validation_reports() {
        let r = QuantumChannel::identity(2).validate();
        assert!(r.passed && r.trace_preservation_residual <= 1e-14);
        let bad = QuantumChannel::from_kraus_unchecked(vec![scaled(CMatrix::identity(2, 2), 1.01)], 2, 2).unwrap();
        assert!(!bad.validate().passed);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random::isometry(&mut rng, 6, 2);
        assert!(from_isometry(&v, 2, 2).unwrap().validate().passed);
    }

    #[test]
    fn standard_families_validate_at_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..25 {
            let p: f64 = rng.random();
            let d = rng.random_range(2..5);
            let probs = random::probability_vector(&mut rng, 4);
            let family = [
                StandardChannel::Identity { d },
                StandardChannel::Depolarizing { d, p },
                StandardChannel::Dephasing { p },
                StandardChannel::QubitPauli { px: probs[0], py: probs[1], pz: probs[2] },
                StandardChannel::AmplitudeDamping { gamma: p },
            ];
            for f in family {
                assert!(QuantumChannel::standard(f).unwrap().validate().passed, "{f:?}");
            }
        }
    }

    #[test]
    fn declared_covariance_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ch in [
            QuantumChannel::depolarizing(3, 0.4).unwrap(),
            QuantumChannel::qubit_pauli(0.1, 0.2, 0.3).unwrap(),
            QuantumChannel::dephasing(0.3).unwrap(),
            QuantumChannel::identity(2),
        ] {
            assert!(ch.covariant_irreducible_input());
            let rho = random::density(&mut rng, ch.d_in(), ch.d_in());
            for (u, v) in ch.covariance_group().unwrap() {
                let lhs = ch.apply(&rho.conjugate_by(&u).unwrap()).unwrap();
                let rhs = ch.apply(&rho).unwrap().conjugate_by(&v).unwrap();
                assert!(close(lhs.op(), rhs.op(), 1e-10));
            }
        }
        assert!(!QuantumChannel::amplitude_damping(0.3).unwrap().covariant_irreducible_input());
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(QuantumChannel::depolarizing(2, 1.5).is_err());
        assert!(QuantumChannel::amplitude_damping(-0.1).is_err());
        assert!(QuantumChannel::qubit_pauli(0.5, 0.5, 0.5).is_err());
        assert!(QuantumChannel::standard(StandardChannel::Identity { d: 0 }).is_err());
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let ch = QuantumChannel::depolarizing(2, 0.0).unwrap();
        let choi = ch.choi();
        assert!(close(&choi, &QuantumChannel::identity(2).choi(), 1e-14));
    }
}
