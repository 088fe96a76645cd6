//! Property suites run by `eacap verify` and by the acceptance target.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::QuantumChannel;
use crate::coding::{
    avg_success, decoupled_state, encoder_unitary, heisenberg_weyl, pushing_residual, sample_code, twirl_average,
    CodeEnsemble, CodewordLabel, SectorDecomposition,
};
use crate::divergences::{classical_dh, collision_d2, hypothesis_dh, info_spectrum_ds, ClassicalPair, GAP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    c, max_abs_diff, random, trace_distance, unitarity_residual, CMatrix, ComplexOperator, DensityOperator,
    PureStateVector,
};
use crate::types::{default_mu, enumerate_types, type_bound_margins, type_class_size};
use num_bigint::BigUint;

pub const SUITES: [&str; 6] = ["validate", "divergences", "lemmas", "types", "twirl", "identities"];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per property.
    pub instances: usize,
    /// Largest blocklength for the exhaustive type sweep.
    pub types_n: usize,
    /// Perturb one Kraus operator before the validate suite (negative control).
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, instances: 50, types_n: 12, inject_fault: false }
    }
}

/// One named check group inside a suite.
#[derive(Clone, Debug)]
pub struct CheckGroup {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    /// Worst observed value of the checked quantity (residual or violation).
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl CheckGroup {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub groups: Vec<CheckGroup>,
    /// Informational lines that do not affect the verdict.
    pub info: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(CheckGroup::passed)
    }

    pub fn checks(&self) -> usize {
        self.groups.iter().map(|g| g.checks).sum()
    }

    pub fn failures(&self) -> usize {
        self.groups.iter().map(|g| g.failures).sum()
    }

    pub fn group(&self, name: &str) -> Option<&CheckGroup> {
        self.groups.iter().find(|g| g.name == name)
    }
}

struct Recorder {
    groups: Vec<CheckGroup>,
    info: Vec<String>,
}

impl Recorder {
    fn new() -> Self {
        Self { groups: Vec::new(), info: Vec::new() }
    }

    fn group(&mut self, name: &str) -> &mut CheckGroup {
        if let Some(i) = self.groups.iter().position(|g| g.name == name) {
            return &mut self.groups[i];
        }
        self.groups.push(CheckGroup {
            name: name.to_string(),
            checks: 0,
            failures: 0,
            worst: 0.0,
            first_failure: None,
        });
        self.groups.last_mut().unwrap()
    }

    /// Record `value <= tol`; NaN counts as a failure.
    fn le(&mut self, name: &str, value: f64, tol: f64, context: impl FnOnce() -> String) {
        let g = self.group(name);
        g.checks += 1;
        if value > g.worst || value.is_nan() {
            g.worst = value;
        }
        if !(value <= tol) {
            g.failures += 1;
            if g.first_failure.is_none() {
                g.first_failure = Some(format!("{} (value {value:.3e} > {tol:.1e})", context()));
            }
        }
    }

    fn ok(&mut self, name: &str, cond: bool, context: impl FnOnce() -> String) {
        self.le(name, if cond { 0.0 } else { 1.0 }, 0.0, context)
    }

    /// An error from the library counts as a failed check.
    fn fallible(&mut self, name: &str, r: Result<()>) {
        if let Err(e) = r {
            let g = self.group(name);
            g.checks += 1;
            g.failures += 1;
            g.first_failure.get_or_insert_with(|| e.to_string());
        }
    }

    fn finish(self, suite: &str, start: Instant) -> SuiteReport {
        SuiteReport { suite: suite.to_string(), groups: self.groups, info: self.info, elapsed: start.elapsed() }
    }
}

fn suite_rng(opts: &VerifyOptions, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    rng
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<SuiteReport> {
    match name {
        "validate" => Ok(validate_suite(opts)),
        "divergences" => Ok(divergence_suite(opts)),
        "lemmas" => Ok(lemma_suite(opts)),
        "types" => Ok(types_suite(opts)),
        "twirl" => Ok(twirl_suite(opts)),
        "identities" => Ok(identity_suite(opts)),
        other => Err(Error::OutOfRange(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    SUITES.iter().map(|s| run_suite(s, opts).expect("known suite")).collect()
}

pub(crate) fn standard_channels() -> Vec<QuantumChannel> {
    vec![
        QuantumChannel::identity(2),
        QuantumChannel::identity(3),
        QuantumChannel::depolarizing(2, 0.2).unwrap(),
        QuantumChannel::depolarizing(3, 0.5).unwrap(),
        QuantumChannel::depolarizing(2, 1.0).unwrap(),
        QuantumChannel::dephasing(0.3).unwrap(),
        QuantumChannel::qubit_pauli(0.1, 0.05, 0.2).unwrap(),
        QuantumChannel::amplitude_damping(0.3).unwrap(),
    ]
}

fn validate_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let mut channels = standard_channels();
    let mut rng = suite_rng(opts, 1);
    for (d_in, d_out, env) in [(2, 2, 3), (2, 3, 2), (3, 2, 4)] {
        let v = random::isometry(&mut rng, d_out * env, d_in);
        channels.push(crate::channels::from_isometry(&v, d_in, d_out).expect("isometry"));
    }
    if opts.inject_fault {
        let ch = QuantumChannel::depolarizing(2, 0.2).unwrap();
        let mut kraus = ch.kraus().to_vec();
        kraus[0][(0, 0)] += c(1e-3);
        channels.push(QuantumChannel::from_kraus_unchecked(kraus, 2, 2).unwrap().with_name("perturbed depolarizing"));
    }
    for ch in &channels {
        let rep = ch.validate();
        let label = ch.name().unwrap_or("kraus").to_string();
        r.le("trace preservation", rep.trace_preservation_residual, 1e-10, || label.clone());
        r.le("choi positivity", -rep.min_choi_eigenvalue, 1e-10, || label.clone());
    }
    r.finish("validate", start)
}

fn divergence_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let mut rng = suite_rng(opts, 2);
    for i in 0..20 {
        let d = 2 + i % 3;
        let rho = random::density(&mut rng, d, 1 + i % d);
        for eps in [0.1, 0.5, 0.9] {
            match hypothesis_dh(&rho, rho.op(), eps) {
                Ok(t) => r.le("D_H(rho||rho) = -log(1 - eps)", (t.dh + (1.0 - eps).log2()).abs(), 1e-8, || {
                    format!("d={d} eps={eps}")
                }),
                Err(e) => r.fallible("D_H(rho||rho) = -log(1 - eps)", Err(e)),
            }
        }
    }
    for i in 0..opts.instances {
        let d = 2 + i % 15;
        let p = random::probability_vector(&mut rng, d);
        let q = random::probability_vector(&mut rng, d);
        let (rho, sigma) = random::commuting_pair(&mut rng, &p, &q);
        let eps = [0.1, 0.5, 0.9][i % 3];
        let res = (|| {
            let quantum = hypothesis_dh(&rho, &sigma, eps)?.dh;
            let classical = classical_dh(&ClassicalPair::new(&p, &q)?, eps)?.dh;
            r.le("quantum vs classical path", (quantum - classical).abs(), 1e-8, || format!("d={d} eps={eps}"));
            Ok(())
        })();
        r.fallible("quantum vs classical path", res);
    }
    for i in 0..opts.instances {
        let d = 2 + i % 7;
        let rho = random::density(&mut rng, d, 1 + i % d);
        let sigma = random::density(&mut rng, d, d);
        let eps = [0.1, 0.5, 0.9][i % 3];
        match hypothesis_dh(&rho, sigma.op(), eps) {
            Ok(t) => r.le("primal-dual gap", t.duality_gap, GAP_TOL, || format!("d={d} eps={eps}")),
            Err(e) => r.fallible("primal-dual gap", Err(e)),
        }
    }
    r.finish("divergences", start)
}

fn random_psd(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> ComplexOperator {
    random::density(rng, d, d).op().scale(scale)
}

fn lemma_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let mut rng = suite_rng(opts, 3);
    let n = opts.instances;
    let dh = |rho: &DensityOperator, sigma: &ComplexOperator, eps: f64| hypothesis_dh(rho, sigma, eps).map(|t| t.dh);

    for i in 0..n {
        let d = 2 + i % 3;
        let eps = rng.random_range(0.05..0.95);
        let rho = random::density(&mut rng, d, 1 + i % d);
        let sigma = random_psd(&mut rng, d, 1.0);
        let extra = rng.random_range(0.01..1.0);
        let bigger = sigma.add(&random_psd(&mut rng, d, extra)).unwrap();
        let res = (|| {
            let (a, b) = (dh(&rho, &sigma, eps)?, dh(&rho, &bigger, eps)?);
            r.le("item 1 (monotone in sigma)", b - a, 1e-7, || format!("d={d} eps={eps:.3}"));
            Ok(())
        })();
        r.fallible("item 1 (monotone in sigma)", res);
    }

    for i in 0..n {
        let d = 2 + i % 3;
        let eps = rng.random_range(0.05..0.95);
        let rho = random::density(&mut rng, d, 1 + i % d);
        let sigma = random_psd(&mut rng, d, 1.0);
        let res = (|| {
            let base = dh(&rho, &sigma, eps)?;
            for alpha in [0.5, 2.0, 10.0] {
                let scaled = dh(&rho, &sigma.scale(alpha), eps)?;
                r.le("item 2 (scaling)", (scaled - (base - alpha.log2())).abs(), 1e-8, || {
                    format!("d={d} alpha={alpha}")
                });
            }
            Ok(())
        })();
        r.fallible("item 2 (scaling)", res);
    }

    for i in 0..n {
        let k = 2 + i % 2;
        let db = 2;
        let eps = rng.random_range(0.05..0.95);
        let p = random::probability_vector(&mut rng, k);
        let q = random::probability_vector(&mut rng, k);
        let states: Vec<DensityOperator> = (0..k).map(|_| random::density(&mut rng, db, 1 + i % db)).collect();
        let sigma_b = random::density(&mut rng, db, db);
        let res = (|| {
            let dim = k * db;
            let mut m = CMatrix::zeros(dim, dim);
            for (x, st) in states.iter().enumerate() {
                let e = st.op().entries();
                for a in 0..db {
                    for b in 0..db {
                        m[(x * db + a, x * db + b)] = e[(a, b)] * c(p[x]);
                    }
                }
            }
            let rho = DensityOperator::new(ComplexOperator::new(m, vec![k, db])?)?;
            let sigma = ComplexOperator::from_real_diagonal(&q).tensor(sigma_b.op());
            let joint = dh(&rho, &sigma, eps)?;
            let mut worst = f64::INFINITY;
            for st in &states {
                worst = worst.min(dh(st, sigma_b.op(), eps)?);
            }
            r.le("item 3 (classical-quantum)", worst - joint, 1e-7, || format!("|X|={k} eps={eps:.3}"));
            Ok(())
        })();
        r.fallible("item 3 (classical-quantum)", res);
    }

    for i in 0..n {
        let d = 2 + i % 3;
        let eps = rng.random_range(0.05..0.6);
        let rho = random::density(&mut rng, d, 1 + i % d);
        let tau = random::density(&mut rng, d, d);
        let lambda = rng.random_range(0.0..0.3);
        let sigma = random_psd(&mut rng, d, 1.0);
        let res = (|| {
            let rho2 = tau.mix(&rho, lambda)?;
            let delta = trace_distance(&rho, &rho2)?;
            if eps + delta >= 1.0 {
                return Ok(());
            }
            let lhs = dh(&rho2, &sigma, eps)?;
            let rhs = dh(&rho, &sigma, eps + delta)?;
            r.le("item 4 (continuity in rho)", lhs - rhs, 1e-7, || format!("d={d} delta={delta:.3}"));
            Ok(())
        })();
        r.fallible("item 4 (continuity in rho)", res);
    }

    for i in 0..n {
        let d = 2 + i % 3;
        let rho = random::density(&mut rng, d, 1 + i % d);
        let sigma = random::density(&mut rng, d, d);
        let res = (|| {
            for lambda in [0.1, 0.5, 0.9] {
                let mix = rho.mix(&sigma, lambda)?;
                let lhs = collision_d2(&rho, mix.op())?.exp2();
                for eps in [0.1, 0.5, 0.9] {
                    let ds = info_spectrum_ds(&rho, sigma.op(), eps)?;
                    let rhs = (1.0 - eps) / (lambda + (1.0 - lambda) * (-ds).exp2());
                    r.le("collision vs information spectrum", rhs - lhs, 1e-6, || {
                        format!("d={d} lambda={lambda} eps={eps}")
                    });
                }
            }
            Ok(())
        })();
        r.fallible("collision vs information spectrum", res);
    }

    let (eps, delta) = (0.1, 0.05);
    let mut literal_violations = 0usize;
    for i in 0..n {
        let d = 2 + i % 3;
        let rho = random::density(&mut rng, d, 1 + i % d);
        let sigma = random::density(&mut rng, d, d);
        let res = (|| {
            let ds = info_spectrum_ds(&rho, sigma.op(), eps)?;
            let ds_shift = info_spectrum_ds(&rho, sigma.op(), eps + delta)?;
            let h = dh(&rho, sigma.op(), eps)?;
            let h_shift = dh(&rho, sigma.op(), eps + delta)?;
            r.le("hypothesis testing dominates information spectrum", ds - h, 1e-5, || format!("d={d}"));
            r.le("information spectrum dominates shifted hypothesis testing", h + delta.log2() - ds_shift, 1e-5, || {
                format!("d={d}")
            });
            if h_shift + delta.log2() - ds > 1e-5 {
                literal_violations += 1;
            }
            Ok(())
        })();
        r.fallible("hypothesis testing dominates information spectrum", res);
    }
    r.info.push(format!(
        "literal form D_s^eps >= D_H^(eps+delta) + log delta at eps={eps}, delta={delta}: violated on {literal_violations}/{n} instances (not a criterion)"
    ));
    r.finish("lemmas", start)
}

fn types_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let mut rng = suite_rng(opts, 4);
    for k in 1..=3usize {
        for n in 1..=opts.types_n {
            for _ in 0..20 {
                let q = random::probability_vector(&mut rng, k);
                match type_bound_margins(n, &q, default_mu(n, k)) {
                    Ok(m) => {
                        let ctx = || format!("n={n} |X|={k} q={q:?}");
                        r.le("type count", -m.count, 0.0, ctx);
                        r.le("class size lower bound", -m.class_size, 0.0, ctx);
                        r.le("sequence mass bound", -m.sequence_mass, 0.0, ctx);
                        r.le("tail bound", -m.tail, 0.0, ctx);
                    }
                    Err(e) => r.fallible("type count", Err(e)),
                }
            }
        }
    }
    for k in 1..=3usize {
        for n in 0..=20usize.max(opts.types_n) {
            match enumerate_types(n, k) {
                Ok(ts) => {
                    let sum = ts.iter().fold(BigUint::from(0u32), |a, t| a + type_class_size(t));
                    r.ok("class sizes sum to |X|^n", sum == BigUint::from(k).pow(n as u32), || format!("n={n} |X|={k}"));
                }
                Err(e) => r.fallible("class sizes sum to |X|^n", Err(e)),
            }
        }
    }
    r.finish("types", start)
}

fn twirl_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let mut rng = suite_rng(opts, 5);
    for d in [2usize, 3, 5] {
        let rho = random::density(&mut rng, d, d);
        let mut acc = CMatrix::zeros(d, d);
        for x in 0..d {
            for z in 0..d {
                let w = heisenberg_weyl(d, x, z).unwrap();
                acc += rho.op().conjugate_by(w.entries()).unwrap().entries();
            }
        }
        let avg = acc / c((d * d) as f64);
        let pi = DensityOperator::maximally_mixed(d);
        r.le("Heisenberg-Weyl twirl is maximally mixed", max_abs_diff(&avg, pi.op().entries()), 1e-12, || {
            format!("d={d}")
        });
    }
    let decs = [SectorDecomposition::single(2), SectorDecomposition::from_blocks(&[1, 1], &[0.7, 0.3]).unwrap()];
    for ch in standard_channels().into_iter().filter(|ch| ch.d_in() == 2) {
        let label = ch.name().unwrap_or("kraus").to_string();
        for dec in &decs {
            let res = (|| {
                let phi = dec.resource();
                let t = twirl_average(&ch, &phi, dec)?;
                let bar = decoupled_state(&ch, dec)?;
                let diff = max_abs_diff(t.state.op().entries(), bar.op().entries()).max(t.residual);
                r.le("decoupling", diff, 1e-11, || format!("{label} sectors={:?}", dec.dims()));
                let (eqi, eqii) = pushing_residual(&ch, &phi, dec)?;
                r.le("unitary pushing", eqi, 1e-10, || format!("{label} sectors={:?}", dec.dims()));
                r.le("decoupled state invariance", eqii, 1e-10, || format!("{label} sectors={:?}", dec.dims()));
                Ok(())
            })();
            r.fallible("decoupling", res);
        }
    }
    r.finish("twirl", start)
}

fn identity_suite(opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let mut r = Recorder::new();
    let channels = standard_channels();
    let qubit: Vec<&QuantumChannel> = channels.iter().filter(|ch| ch.d_in() == 2).collect();
    let decs = [SectorDecomposition::single(2), SectorDecomposition::from_blocks(&[1, 1], &[0.6, 0.4]).unwrap()];
    for i in 0..200u64 {
        let ch = qubit[i as usize % qubit.len()];
        let dec = &decs[(i as usize / qubit.len()) % 2];
        let m = 1 + (i as usize % 8);
        let res = (|| {
            let code = sample_code(ch, m, dec, &dec.resource(), opts.seed, i, CodeEnsemble::Iid)?;
            let rep = avg_success(ch, &code)?;
            r.le("success equals collision form", rep.residual, 1e-8, || format!("trial {i} M={m}"));
            r.le("PGM completeness", code.decoder.completeness_residual(), 1e-10, || format!("trial {i}"));
            for l in &code.labels {
                let u = encoder_unitary(l, dec)?;
                r.le("encoder unitarity", unitarity_residual(u.entries()), 1e-12, || format!("trial {i}"));
            }
            Ok(())
        })();
        r.fallible("success equals collision form", res);
    }
    let res = (|| {
        let dec = SectorDecomposition::single(2);
        let labels = (0..4u128).map(|k| CodewordLabel::from_index(&dec, 2 * k)).collect::<Vec<_>>();
        let ch = QuantumChannel::identity(2);
        let code = crate::coding::EacCode::from_labels(&ch, &dec, &PureStateVector::maximally_entangled(2), labels)?;
        let p = avg_success(&ch, &code)?.p_succ;
        r.le("super-dense coding", (p - 1.0).abs(), 1e-10, || format!("p_succ={p}"));
        Ok(())
    })();
    r.fallible("super-dense coding", res);
    r.finish("identities", start)
}
