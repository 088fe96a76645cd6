//! Projected gradient ascent for `max_rho I(rho, N)` over input states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mutual_info_variance, IoFast};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{c, random, trace_distance, CMatrix, ComplexOperator, DensityOperator, SpectralDecomposition};

#[derive(Clone, Debug)]
pub struct CapacityOptions {
    /// Random restarts on top of the maximally mixed and basis-state seeds.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Exit when the projected gradient step falls below this norm.
    pub grad_tol: f64,
    pub fd_step: f64,
    /// Largest input dimension accepted.
    pub dim_cap: usize,
    /// Trace distance below which two optimizer outputs are one maximizer.
    pub cluster_radius: f64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            max_iter: 10_000,
            grad_tol: 1e-8,
            fd_step: 1e-5,
            dim_cap: 8,
            cluster_radius: 1e-6,
        }
    }
}

/// One maximizer representative with its mutual information variance.
#[derive(Clone, Debug)]
pub struct Maximizer {
    pub state: DensityOperator,
    pub mutual_info: f64,
    pub variance: f64,
    /// Number of restarts that landed in this cluster.
    pub hits: usize,
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub c_ea: f64,
    pub maximizers: Vec<Maximizer>,
    pub v_min: f64,
    pub v_max: f64,
    pub restarts: usize,
    /// All restarts met the gradient tolerance.
    pub converged: bool,
    /// Projected gradient norm at the best restart.
    pub grad_norm: f64,
    pub iterations: usize,
    /// Largest gap between gradients taken with step `h` and `h / 10` at the optimum.
    pub richardson_residual: f64,
    /// More than one cluster reached the optimum; the maximizer set may be a
    /// continuum and `v_min`, `v_max` are then only estimates.
    pub degenerate: bool,
}

impl CapacityResult {
    /// `V_min` below one half, `V_max` above. At exactly one half the choice
    /// is only defined when the two agree; otherwise `None`.
    pub fn selected_dispersion(&self, eps: f64) -> Option<f64> {
        if eps < 0.5 {
            Some(self.v_min)
        } else if eps > 0.5 {
            Some(self.v_max)
        } else if self.v_max - self.v_min <= 1e-9 * self.v_max.max(1.0) {
            Some(self.v_min)
        } else {
            None
        }
    }

    /// Maximizer attaining the selected dispersion.
    pub fn selected_maximizer(&self, eps: f64) -> &Maximizer {
        let by_var = |a: &&Maximizer, b: &&Maximizer| a.variance.total_cmp(&b.variance);
        let pick = if eps < 0.5 { self.maximizers.iter().min_by(by_var) } else { self.maximizers.iter().max_by(by_var) };
        pick.expect("at least one maximizer")
    }
}

/// Orthonormal basis of traceless Hermitian `d x d` matrices.
pub(crate) fn traceless_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let mut re = CMatrix::zeros(d, d);
            re[(i, j)] = c(s);
            re[(j, i)] = c(s);
            basis.push(re);
            let mut im = CMatrix::zeros(d, d);
            im[(i, j)] = crate::linalg::C64::new(0.0, -s);
            im[(j, i)] = crate::linalg::C64::new(0.0, s);
            basis.push(im);
        }
    }
    for k in 1..d {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..k {
            m[(i, i)] = c(1.0 / norm);
        }
        m[(k, k)] = c(-(k as f64) / norm);
        basis.push(m);
    }
    basis
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Frobenius-nearest density matrix to a Hermitian matrix.
pub(crate) fn project_density(h: &CMatrix) -> CMatrix {
    let d = h.nrows();
    let sym = (h + h.adjoint()) * c(0.5);
    let spec = SpectralDecomposition::of_hermitian(&sym, vec![d]);
    let w = project_simplex(spec.eigenvalues());
    spec.compose(&w).into_entries()
}

/// Central finite-difference gradient of `f` in the traceless basis.
pub(crate) fn fd_gradient(f: &IoFast, rho: &CMatrix, basis: &[CMatrix], h: f64) -> Vec<f64> {
    basis
        .iter()
        .map(|b| {
            let plus = f.eval(&(rho + b * c(h)));
            let minus = f.eval(&(rho - b * c(h)));
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

fn combine(basis: &[CMatrix], g: &[f64]) -> CMatrix {
    let d = basis.first().map_or(1, |b| b.nrows());
    let mut out = CMatrix::zeros(d, d);
    for (b, &x) in basis.iter().zip(g) {
        out += b * c(x);
    }
    out
}

struct Run {
    rho: CMatrix,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(f: &IoFast, start: CMatrix, basis: &[CMatrix], opts: &CapacityOptions) -> Run {
    let mut rho = project_density(&start);
    let mut value = f.eval(&rho);
    let mut step = 1.0;
    let mut grad_norm = f64::INFINITY;
    for it in 0..opts.max_iter {
        let g = combine(basis, &fd_gradient(f, &rho, basis, opts.fd_step));
        // unit-step projected gradient as the stationarity measure
        grad_norm = (project_density(&(&rho + &g)) - &rho).norm();
        if grad_norm <= opts.grad_tol {
            return Run { rho, value, grad_norm, iterations: it, converged: true };
        }
        let mut accepted = false;
        while step > 1e-16 {
            let cand = project_density(&(&rho + &g * c(step)));
            let diff = &cand - &rho;
            let ascent = diff.dotc(&g).re;
            let v = f.eval(&cand);
            if v >= value + 1e-4 * ascent && ascent > 0.0 {
                rho = cand;
                value = v;
                step = (step * 2.0).min(1e6);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent direction at floating-point resolution
            return Run { rho, value, grad_norm, iterations: it, converged: grad_norm <= 1e3 * opts.grad_tol };
        }
    }
    Run { rho, value, grad_norm, iterations: opts.max_iter, converged: false }
}

fn seeds(d: usize, opts: &CapacityOptions) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::identity(d, d) / c(d as f64)];
    for i in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = c(1.0);
        out.push(m);
    }
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        out.push(random::density(&mut rng, d, d).op().entries().clone());
    }
    out
}

fn to_density(m: &CMatrix) -> Result<DensityOperator> {
    let d = m.nrows();
    DensityOperator::new(ComplexOperator::new(m.clone(), vec![d])?.hermitian_part())
}

/// Maximize the mutual information over input states.
pub fn optimize_capacity(ch: &QuantumChannel, opts: &CapacityOptions) -> Result<CapacityResult> {
    let d = ch.d_in();
    if d > opts.dim_cap {
        return Err(Error::DimensionCap { needed: d as u128, cap: opts.dim_cap as u128 });
    }
    let f = IoFast::new(ch);
    let basis = traceless_basis(d);
    let starts = seeds(d, opts);
    let runs: Vec<Run> = starts.into_par_iter().map(|s| ascend(&f, s, &basis, opts)).collect();

    let best = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("at least one seed");
    let c_ea = runs[best].value;

    let mut order: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].value >= c_ea - 1e-7).collect();
    order.sort_by(|&a, &b| runs[b].value.total_cmp(&runs[a].value).then(a.cmp(&b)));
    let mut clusters: Vec<(DensityOperator, f64, usize)> = Vec::new();
    for i in order {
        let state = to_density(&runs[i].rho)?;
        let mut joined = false;
        for cl in clusters.iter_mut() {
            if trace_distance(&cl.0, &state)? <= opts.cluster_radius {
                cl.2 += 1;
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push((state, runs[i].value, 1));
        }
    }
    let maximizers = clusters
        .into_iter()
        .map(|(state, value, hits)| {
            let variance = mutual_info_variance(ch, &state)?;
            Ok(Maximizer { state, mutual_info: value, variance, hits })
        })
        .collect::<Result<Vec<_>>>()?;
    let v_min = maximizers.iter().map(|m| m.variance).fold(f64::INFINITY, f64::min).max(0.0);
    let v_max = maximizers.iter().map(|m| m.variance).fold(0.0, f64::max);

    let rho = &runs[best].rho;
    let g1 = fd_gradient(&f, rho, &basis, opts.fd_step);
    let g2 = fd_gradient(&f, rho, &basis, opts.fd_step / 10.0);
    let richardson_residual = g1.iter().zip(&g2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Ok(CapacityResult {
        c_ea,
        degenerate: maximizers.len() > 1,
        maximizers,
        v_min,
        v_max,
        restarts: runs.len(),
        converged: runs.iter().all(|r| r.converged),
        grad_norm: runs[best].grad_norm,
        iterations: runs.iter().map(|r| r.iterations).max().unwrap_or(0),
        richardson_residual,
    })
}
