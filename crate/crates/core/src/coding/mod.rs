//! The random entanglement-assisted code built from Heisenberg–Weyl
//! operators on the sectors of a resource state, decoded with the pretty good
//! measurement.

mod code;
mod protocol;

use crate::error::{Error, Result};
use crate::linalg::{c, phase_matrix, shift_matrix, CMatrix, CVector, ComplexOperator, PureStateVector};

pub use code::{avg_success, pgm_decoder, sample_code, CodeEnsemble, EacCode, Pgm, SuccessReport};
pub use protocol::{
    decoupled_state, ensemble_vs_bound, hn_bound, mean_and_se, prop1_bound, pushing_residual, simulate_codes,
    twirl_average, EnsembleOptions,
    EnsembleReport, OneShotBound, TwirlReport, TWIRL_CAP,
};

/// `X(x) Z(z)` on `C^d`; the identity for `d = 1`.
pub fn heisenberg_weyl(d: usize, x: usize, z: usize) -> Result<ComplexOperator> {
    if d == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    if x >= d || z >= d {
        return Err(Error::OutOfRange(format!("x = {x}, z = {z} must be below d = {d}")));
    }
    Ok(ComplexOperator::from_parts(shift_matrix(d, x) * phase_matrix(d, z), vec![d]))
}

/// One block `H_A^t ⊗ H_A'^t` of a resource decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub weight: f64,
    /// Computational basis indices of `A` spanning `H_A^t`; the same indices
    /// on `A'` span `H_A'^t`, paired in order.
    pub basis: Vec<usize>,
}

impl Sector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Decomposition `H_A ⊗ H_A' = ⊕_t H_A^t ⊗ H_A'^t` with weights `p(t)`,
/// describing the resource `sum_t sqrt p(t) |Phi^t>`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorDecomposition {
    d_a: usize,
    sectors: Vec<Sector>,
}

impl SectorDecomposition {
    /// Weights must sum to one within `1e-12`; sectors must be disjoint.
    pub fn new(d_a: usize, sectors: Vec<Sector>) -> Result<Self> {
        if sectors.is_empty() {
            return Err(Error::InvalidState("a decomposition needs at least one sector".into()));
        }
        let total: f64 = sectors.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-12 || sectors.iter().any(|s| s.weight < 0.0) {
            return Err(Error::InvalidState(format!("sector weights sum to {total}")));
        }
        let mut used = vec![false; d_a];
        for s in &sectors {
            if s.basis.is_empty() {
                return Err(Error::InvalidState("empty sector".into()));
            }
            for &i in &s.basis {
                if i >= d_a || used[i] {
                    return Err(Error::InvalidState(format!("basis index {i} is out of range or shared")));
                }
                used[i] = true;
            }
        }
        Ok(Self { d_a, sectors })
    }

    /// One sector holding all of `C^d`, i.e. the resource `Phi_d`.
    pub fn single(d: usize) -> Self {
        Self { d_a: d, sectors: vec![Sector { weight: 1.0, basis: (0..d).collect()}] }
    }

    /// Sectors of contiguous index ranges with the given sizes and weights.
    pub fn from_blocks(dims: &[usize], weights: &[f64]) -> Result<Self> {
        if dims.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!("{} blocks, {} weights", dims.len(), weights.len())));
        }
        let mut start = 0;
        let sectors = dims
            .iter()
            .zip(weights)
            .map(|(&d, &w)| {
                let s = Sector { weight: w, basis: (start..start + d).collect() };
                start += d;
                s
            })
            .collect();
        Self::new(start, sectors)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sectors.iter().map(Sector::dim).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.weight).collect()
    }

    /// `|S| = prod_t 2 d_t^2`, saturating.
    pub fn label_count(&self) -> u128 {
        self.sectors
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(2 * (s.dim() as u128).pow(2)))
    }

    /// Number of distinct Weyl classes `prod_t d_t^2`, ignoring sign bits.
    pub fn weyl_class_count(&self) -> u128 {
        self.sectors.iter().fold(1u128, |acc, s| acc.saturating_mul((s.dim() as u128).pow(2)))
    }

    /// The resource `sum_t sqrt p(t) |Phi^t>` on `A ⊗ A'`.
    pub fn resource(&self) -> PureStateVector {
        let d = self.d_a;
        let mut v = CVector::zeros(d * d);
        for s in &self.sectors {
            let amp = (s.weight / s.dim() as f64).sqrt();
            for &i in &s.basis {
                v[i * d + i] = c(amp);
            }
        }
        PureStateVector::new(v, vec![d, d]).expect("unit norm by construction")
    }

    /// Maximally mixed state on `H_A^t` as a `d_A x d_A` matrix.
    pub fn sector_mixed(&self, t: usize) -> CMatrix {
        let s = &self.sectors[t];
        let mut m = CMatrix::zeros(self.d_a, self.d_a);
        for &i in &s.basis {
            m[(i, i)] = c(1.0 / s.dim() as f64);
        }
        m
    }

    /// Error unless `phi` equals the resource of this decomposition.
    pub fn check_resource(&self, phi: &PureStateVector) -> Result<()> {
        let r = self.resource();
        if phi.dims() != r.dims() {
            return Err(Error::DimensionMismatch(format!("resource dims {:?} vs {:?}", phi.dims(), r.dims())));
        }
        let diff = (phi.amplitudes() - r.amplitudes()).norm();
        if diff > 1e-10 {
            return Err(Error::InvalidState(format!(
                "resource is not of the decomposed form (distance {diff:.3e})"
            )));
        }
        Ok(())
    }
}

/// One `(x_t, z_t, b_t)` per sector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodewordLabel(pub Vec<(usize, usize, u8)>);

impl CodewordLabel {
    pub fn zero(dec: &SectorDecomposition) -> Self {
        Self(vec![(0, 0, 0); dec.sectors().len()])
    }

    fn check(&self, dec: &SectorDecomposition) -> Result<()> {
        if self.0.len() != dec.sectors().len() {
            return Err(Error::DimensionMismatch(format!(
                "label has {} components for {} sectors",
                self.0.len(),
                dec.sectors().len()
            )));
        }
        for (&(x, z, b), s) in self.0.iter().zip(dec.sectors()) {
            if x >= s.dim() || z >= s.dim() || b > 1 {
                return Err(Error::OutOfRange(format!("label ({x}, {z}, {b}) for a sector of dimension {}", s.dim())));
            }
        }
        Ok(())
    }

    /// The Weyl part without the sign bits.
    pub fn weyl_class(&self) -> Vec<(usize, usize)> {
        self.0.iter().map(|&(x, z, _)| (x, z)).collect()
    }

    /// Label number `k` in mixed radix over `(x_t, z_t, b_t)`, last sector fastest.
    pub fn from_index(dec: &SectorDecomposition, mut k: u128) -> Self {
        let mut out = vec![(0, 0, 0); dec.sectors().len()];
        for (slot, s) in out.iter_mut().zip(dec.sectors()).rev() {
            let d = s.dim() as u128;
            let b = (k % 2) as u8;
            k /= 2;
            let z = (k % d) as usize;
            k /= d;
            let x = (k % d) as usize;
            k /= d;
            *slot = (x, z, b);
        }
        Self(out)
    }
}

/// `U(s) = ⊕_t (-1)^{b_t} X(x_t) Z(z_t)`, the identity outside all sectors.
pub fn encoder_unitary(s: &CodewordLabel, dec: &SectorDecomposition) -> Result<ComplexOperator> {
    s.check(dec)?;
    let d = dec.d_a();
    let mut u = CMatrix::identity(d, d);
    for (&(x, z, b), sec) in s.0.iter().zip(dec.sectors()) {
        let block = heisenberg_weyl(sec.dim(), x, z)?.into_entries();
        let sign = if b == 1 { -1.0 } else { 1.0 };
        for (i, &gi) in sec.basis.iter().enumerate() {
            for (j, &gj) in sec.basis.iter().enumerate() {
                u[(gi, gj)] = block[(i, j)] * sign;
            }
        }
    }
    Ok(ComplexOperator::from_parts(u, vec![d]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, pauli_x, unitarity_residual};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ket(d: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(d);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn weyl_examples() {
        let x = heisenberg_weyl(2, 1, 0).unwrap();
        assert_eq!(x.entries() * ket(2, 0), ket(2, 1));
        let z = heisenberg_weyl(2, 0, 1).unwrap();
        assert!((z.entries() * ket(2, 1) + ket(2, 1)).norm() < 1e-15);
        let x3 = heisenberg_weyl(3, 1, 0).unwrap().into_entries();
        let z3 = heisenberg_weyl(3, 0, 1).unwrap().into_entries();
        let id = CMatrix::identity(3, 3);
        assert!(max_abs_diff(&(&x3 * &x3 * &x3), &id) < 1e-15);
        assert!(max_abs_diff(&(&z3 * &z3 * &z3), &id) < 1e-14);
        assert_eq!(heisenberg_weyl(1, 0, 0).unwrap().entries(), &CMatrix::identity(1, 1));
        assert!(heisenberg_weyl(2, 2, 0).is_err());
        assert!(heisenberg_weyl(0, 0, 0).is_err());
    }

    #[test]
    fn encoder_examples() {
        let dec = SectorDecomposition::single(2);
        let zero = encoder_unitary(&CodewordLabel::zero(&dec), &dec).unwrap();
        assert_eq!(zero.entries(), &CMatrix::identity(2, 2));
        let x = encoder_unitary(&CodewordLabel(vec![(1, 0, 0)]), &dec).unwrap();
        assert!(max_abs_diff(x.entries(), &pauli_x()) < 1e-15);
        assert!(encoder_unitary(&CodewordLabel(vec![(2, 0, 0)]), &dec).is_err());
        assert!(encoder_unitary(&CodewordLabel(vec![(0, 0, 0), (0, 0, 0)]), &dec).is_err());
    }

    #[test]
    fn encoders_are_unitary() {
        let dec = SectorDecomposition::from_blocks(&[1, 3, 2], &[0.2, 0.5, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let k = rng.random_range(0..dec.label_count());
            let u = encoder_unitary(&CodewordLabel::from_index(&dec, k), &dec).unwrap();
            assert!(unitarity_residual(u.entries()) <= 1e-12);
        }
    }

    #[test]
    fn label_indexing_is_a_bijection() {
        let dec = SectorDecomposition::from_blocks(&[1, 2], &[0.5, 0.5]).unwrap();
        assert_eq!(dec.label_count(), 16);
        let labels: std::collections::HashSet<_> = (0..16).map(|k| CodewordLabel::from_index(&dec, k)).collect();
        assert_eq!(labels.len(), 16);
    }

    #[test]
    fn decomposition_checks() {
        assert!(SectorDecomposition::from_blocks(&[1, 1], &[0.5, 0.6]).is_err());
        let shared = vec![Sector { weight: 0.5, basis: vec![0] }, Sector { weight: 0.5, basis: vec![0] }];
        assert!(SectorDecomposition::new(2, shared).is_err());
        let dec = SectorDecomposition::single(2);
        assert!(dec.check_resource(&PureStateVector::maximally_entangled(2)).is_ok());
        let dec2 = SectorDecomposition::from_blocks(&[1, 1], &[0.5, 0.5]).unwrap();
        assert!(dec2.check_resource(&PureStateVector::maximally_entangled(2)).is_ok());
        let uneven = SectorDecomposition::from_blocks(&[1, 1], &[0.9, 0.1]).unwrap();
        assert!(uneven.check_resource(&PureStateVector::maximally_entangled(2)).is_err());
    }
}
