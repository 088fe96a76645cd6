//! Codes, the pretty good measurement, and exact success probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{encoder_unitary, CodewordLabel, SectorDecomposition};
use crate::channels::QuantumChannel;
use crate::divergences::collision_d2;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMatrix, ComplexOperator, DensityOperator, PureStateVector};

/// How codeword labels are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CodeEnsemble {
    /// Independent and uniform over all labels, as in the random-coding argument.
    #[default]
    Iid,
    /// Uniform, conditioned on pairwise distinct Weyl classes; needs
    /// `M <= prod_t d_t^2`.
    DistinctWeyl,
}

/// Decoder with one element per message and a failure outcome on the kernel
/// of the ensemble sum.
#[derive(Clone, Debug)]
pub struct Pgm {
    pub elements: Vec<ComplexOperator>,
    pub completion: ComplexOperator,
}

impl Pgm {
    /// `|| sum_m Lambda^m + completion - I ||` entrywise.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = self.completion.entries().clone();
        for e in &self.elements {
            sum += e.entries();
        }
        let d = sum.nrows();
        max_abs_diff(&sum, &CMatrix::identity(d, d))
    }
}

/// `Lambda^m = S^{-1/2} rho_m S^{-1/2}`, `S = sum_m rho_m`, inverse on the support.
pub fn pgm_decoder(states: &[DensityOperator]) -> Result<Pgm> {
    let first = states.first().ok_or_else(|| Error::InvalidState("no states to decode".into()))?;
    let dims = first.dims().to_vec();
    let d = first.dim();
    let mut s = CMatrix::zeros(d, d);
    for st in states {
        if st.dim() != d {
            return Err(Error::DimensionMismatch(format!("{} vs {d}", st.dim())));
        }
        s += st.op().entries();
    }
    let spec = ComplexOperator::from_parts(s, dims.clone()).herm_eig()?;
    let thr = spec.kernel_threshold();
    let inv_sqrt = spec.map_spectrum(|x| 1.0 / x.sqrt(), true)?;
    let support = spec.spectral_projector(|l| l > thr);
    let elements = states
        .iter()
        .map(|st| {
            let m = inv_sqrt.entries() * st.op().entries() * inv_sqrt.entries();
            ComplexOperator::from_parts(m, dims.clone()).hermitian_part()
        })
        .collect();
    let completion = ComplexOperator::identity(&dims).sub(&support)?;
    Ok(Pgm { elements, completion })
}

/// `N(U(s) phi U(s)^dagger)` on `B ⊗ B'`.
pub(crate) fn output_state(
    ch: &QuantumChannel,
    phi: &PureStateVector,
    label: &CodewordLabel,
    dec: &SectorDecomposition,
) -> Result<DensityOperator> {
    let u = encoder_unitary(label, dec)?;
    let d = dec.d_a();
    let encoded = phi.apply(&u.entries().kronecker(&CMatrix::identity(d, d)))?;
    ch.apply_left(&encoded.density())
}

/// Resource, encoder labels and decoder of an entanglement-assisted code.
#[derive(Clone, Debug)]
pub struct EacCode {
    pub resource: PureStateVector,
    pub decomposition: SectorDecomposition,
    pub labels: Vec<CodewordLabel>,
    pub decoder: Pgm,
}

impl EacCode {
    pub fn message_count(&self) -> usize {
        self.labels.len()
    }

    /// Code with the given labels and the pretty good measurement for `ch`.
    pub fn from_labels(
        ch: &QuantumChannel,
        dec: &SectorDecomposition,
        phi: &PureStateVector,
        labels: Vec<CodewordLabel>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::OutOfRange("a code needs at least one message".into()));
        }
        dec.check_resource(phi)?;
        if ch.d_in() != dec.d_a() {
            return Err(Error::DimensionMismatch(format!("channel input {} vs resource {}", ch.d_in(), dec.d_a())));
        }
        let outputs = labels.iter().map(|l| output_state(ch, phi, l, dec)).collect::<Result<Vec<_>>>()?;
        let decoder = pgm_decoder(&outputs)?;
        Ok(Self { resource: phi.clone(), decomposition: dec.clone(), labels, decoder })
    }
}

fn random_label<R: Rng + ?Sized>(rng: &mut R, dec: &SectorDecomposition) -> CodewordLabel {
    CodewordLabel(
        dec.sectors()
            .iter()
            .map(|s| {
                let x = rng.random_range(0..s.dim());
                let z = rng.random_range(0..s.dim());
                let b = rng.random_range(0..2u8);
                (x, z, b)
            })
            .collect(),
    )
}

pub(crate) fn sample_labels<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    dec: &SectorDecomposition,
    ensemble: CodeEnsemble,
) -> Result<Vec<CodewordLabel>> {
    match ensemble {
        CodeEnsemble::Iid => Ok((0..m).map(|_| random_label(rng, dec)).collect()),
        CodeEnsemble::DistinctWeyl => {
            if m as u128 > dec.weyl_class_count() {
                return Err(Error::Infeasible(format!(
                    "{m} messages exceed the {} distinct Weyl classes",
                    dec.weyl_class_count()
                )));
            }
            let mut seen = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(m);
            while out.len() < m {
                let l = random_label(rng, dec);
                if seen.insert(l.weyl_class()) {
                    out.push(l);
                }
            }
            Ok(out)
        }
    }
}

/// Random code with `m` messages, reproducible from `seed` and `stream`.
pub fn sample_code(
    ch: &QuantumChannel,
    m: usize,
    dec: &SectorDecomposition,
    phi: &PureStateVector,
    seed: u64,
    stream: u64,
    ensemble: CodeEnsemble,
) -> Result<EacCode> {
    if m == 0 {
        return Err(Error::OutOfRange("a code needs at least one message".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let labels = sample_labels(&mut rng, m, dec, ensemble)?;
    EacCode::from_labels(ch, dec, phi, labels)
}

#[derive(Clone, Copy, Debug)]
pub struct SuccessReport {
    /// `(1/M) sum_m Tr(Lambda^m rho_m)`.
    pub p_succ: f64,
    /// `(1/M) 2^{D_2(sigma_MSBB' || sigma_MS ⊗ sigma_BB')}`.
    pub collision: f64,
    pub residual: f64,
}

/// Exact average success probability of `code` over `ch`, with the collision
/// form evaluated on the code's classical-quantum state.
pub fn avg_success(ch: &QuantumChannel, code: &EacCode) -> Result<SuccessReport> {
    let dec = &code.decomposition;
    if ch.d_in() != dec.d_a() {
        return Err(Error::DimensionMismatch(format!("channel input {} vs code {}", ch.d_in(), dec.d_a())));
    }
    let outputs = code
        .labels
        .iter()
        .map(|l| output_state(ch, &code.resource, l, dec))
        .collect::<Result<Vec<_>>>()?;
    let m = outputs.len() as f64;
    if code.decoder.elements.len() != outputs.len() || code.decoder.elements[0].dim() != outputs[0].dim() {
        return Err(Error::DimensionMismatch("decoder does not match the code outputs".into()));
    }
    let p_succ = code
        .decoder
        .elements
        .iter()
        .zip(&outputs)
        .map(|(l, r)| l.trace_product(r.op()).re)
        .sum::<f64>()
        / m;
    // sigma is block diagonal in the message register: blocks rho_m / M against
    // rho_bar / M, and each block contributes 2^{D_2(rho_m || rho_bar)} / M
    let mut bar = CMatrix::zeros(outputs[0].dim(), outputs[0].dim());
    for r in &outputs {
        bar += r.op().entries();
    }
    let bar = ComplexOperator::from_parts(bar / crate::linalg::c(m), outputs[0].dims().to_vec());
    let mut tr = 0.0;
    for r in &outputs {
        tr += collision_d2(r, &bar)?.exp2();
    }
    let collision = tr / (m * m);
    Ok(SuccessReport { p_succ, collision, residual: (p_succ - collision).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random;
    use rand::SeedableRng;

    fn superdense(ch: &QuantumChannel) -> EacCode {
        let dec = SectorDecomposition::single(2);
        let labels = [(0, 0), (1, 0), (0, 1), (1, 1)].iter().map(|&(x, z)| CodewordLabel(vec![(x, z, 0)])).collect();
        EacCode::from_labels(ch, &dec, &dec.resource(), labels).unwrap()
    }

    #[test]
    fn superdense_coding() {
        let ch = QuantumChannel::identity(2);
        let r = avg_success(&ch, &superdense(&ch)).unwrap();
        assert!((r.p_succ - 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn uniform_guessing_when_outputs_coincide() {
        let ch = QuantumChannel::depolarizing(2, 1.0).unwrap();
        let r = avg_success(&ch, &superdense(&ch)).unwrap();
        assert!((r.p_succ - 0.25).abs() < 1e-12);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn single_message() {
        let ch = QuantumChannel::identity(2);
        let dec = SectorDecomposition::single(2);
        let code = sample_code(&ch, 1, &dec, &dec.resource(), 3, 0, CodeEnsemble::Iid).unwrap();
        // the only element is the support projector of the (pure) output
        let out = output_state(&ch, &code.resource, &code.labels[0], &dec).unwrap();
        assert!(max_abs_diff(code.decoder.elements[0].entries(), out.op().entries()) < 1e-10);
        assert!((avg_success(&ch, &code).unwrap().p_succ - 1.0).abs() < 1e-12);
    }

    #[test]
    fn codes_are_reproducible() {
        let ch = QuantumChannel::dephasing(0.3).unwrap();
        let dec = SectorDecomposition::single(2);
        let a = sample_code(&ch, 4, &dec, &dec.resource(), 11, 2, CodeEnsemble::Iid).unwrap();
        let b = sample_code(&ch, 4, &dec, &dec.resource(), 11, 2, CodeEnsemble::Iid).unwrap();
        assert_eq!(a.labels, b.labels);
        let c = sample_code(&ch, 4, &dec, &dec.resource(), 11, 3, CodeEnsemble::Iid).unwrap();
        assert_ne!(a.labels, c.labels);
    }

    #[test]
    fn distinct_labels_give_orthogonal_outputs() {
        let ch = QuantumChannel::identity(2);
        let dec = SectorDecomposition::single(2);
        for seed in 0..5 {
            let code = sample_code(&ch, 4, &dec, &dec.resource(), seed, 0, CodeEnsemble::DistinctWeyl).unwrap();
            assert!((avg_success(&ch, &code).unwrap().p_succ - 1.0).abs() < 1e-10);
        }
        assert!(sample_code(&ch, 5, &dec, &dec.resource(), 0, 0, CodeEnsemble::DistinctWeyl).is_err());
    }

    #[test]
    fn pgm_examples() {
        let a = DensityOperator::basis_state(2, 0);
        let b = DensityOperator::basis_state(2, 1);
        let p = pgm_decoder(&[a.clone(), b.clone()]).unwrap();
        assert!(max_abs_diff(p.elements[0].entries(), a.op().entries()) < 1e-12);
        assert!(max_abs_diff(p.elements[1].entries(), b.op().entries()) < 1e-12);

        let p = pgm_decoder(&[a.clone(), a.clone()]).unwrap();
        let half = a.op().scale(0.5);
        assert!(max_abs_diff(p.elements[0].entries(), half.entries()) < 1e-12);
        assert!(max_abs_diff(p.elements[1].entries(), half.entries()) < 1e-12);
        assert!(max_abs_diff(p.completion.entries(), b.op().entries()) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let s = [random::density(&mut rng, 3, 1), random::density(&mut rng, 3, 2)];
            assert!(pgm_decoder(&s).unwrap().completeness_residual() < 1e-10);
        }
    }

    #[test]
    fn collision_identity_on_random_codes() {
        let dec = SectorDecomposition::single(2);
        let chans = [
            QuantumChannel::amplitude_damping(0.3).unwrap(),
            QuantumChannel::depolarizing(2, 0.2).unwrap(),
            QuantumChannel::dephasing(0.3).unwrap(),
        ];
        for (i, ch) in chans.iter().enumerate() {
            for m in 1..=8 {
                let code = sample_code(ch, m, &dec, &dec.resource(), 7, (10 * i + m) as u64, CodeEnsemble::Iid).unwrap();
                let r = avg_success(ch, &code).unwrap();
                assert!(r.residual <= 1e-8, "m={m} residual={}", r.residual);
                assert!(code.decoder.completeness_residual() <= 1e-10);
            }
        }
    }
}
