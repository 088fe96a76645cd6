//! Command-line front end behind the `eacap` binary.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 ok, 1 verify failure, 2 parse or usage error, 3 optimizer
//! non-convergence, 4 infeasible parameters, 5 resource cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::capacity::{
    dispersion_table, optimize_capacity, BoundEntry, BoundOptions, CapacityOptions, CapacityResult, Unavailability,
};
use crate::channels::{named_family, read_channel_file, QuantumChannel};
use crate::coding::{hn_bound, mean_and_se, prop1_bound, simulate_codes, CodeEnsemble, SectorDecomposition};
use crate::error::Error;
use crate::verify::{run_all, run_suite, SuiteReport, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_RESOURCE: i32 = 5;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::DimensionCap { .. } | Error::EnumerationCap { .. } => EXIT_RESOURCE,
        Error::DualityGap { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_PARSE,
    }
}

#[derive(Parser, Debug)]
#[command(name = "eacap", version, about = "Entanglement-assisted capacity and second-order rates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entanglement-assisted capacity, dispersions and maximizers.
    Capacity(CapacityArgs),
    /// CSV of Gaussian, achievable and converse bounds per blocklength.
    Secondorder(SecondOrderArgs),
    /// Monte-Carlo over random entanglement-assisted codes.
    Simulate(SimulateArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// JSON channel file.
    #[arg(long, conflicts_with = "named")]
    pub channel: Option<PathBuf>,
    /// Named family: identity, depolarizing, dephasing, qubit_pauli, amplitude_damping.
    #[arg(long)]
    pub named: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub px: Option<f64>,
    #[arg(long)]
    pub py: Option<f64>,
    #[arg(long)]
    pub pz: Option<f64>,
}

impl ChannelArgs {
    pub fn load(&self) -> crate::Result<QuantumChannel> {
        match (&self.channel, &self.named) {
            (Some(path), _) => read_channel_file(path),
            (None, Some(name)) => {
                let family = named_family(name, self.d, self.p, self.gamma, [self.px, self.py, self.pz], "--named")
                    .map_err(|e| match e {
                        Error::Parse { path, message } => Error::Parse { path: flag_of(&path), message },
                        other => other,
                    })?;
                QuantumChannel::standard(family)
                    .map_err(|e| Error::Parse { path: "--named".into(), message: e.to_string() })
            }
            (None, None) => Err(Error::Parse { path: "--channel".into(), message: "give --channel FILE or --named NAME".into() }),
        }
    }
}

/// `--named.p` to `--p`.
fn flag_of(path: &str) -> String {
    match path.strip_prefix("--named.") {
        Some("name") => "--named".into(),
        Some(field) => format!("--{field}"),
        None => path.to_string(),
    }
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest input dimension the optimizer accepts.
    #[arg(long, default_value_t = 8)]
    pub dim_cap: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Write the result as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SecondOrderArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    /// Comma-separated blocklengths.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the joint dimension of the quantum hypothesis test.
    #[arg(long, default_value_t = crate::capacity::QUANTUM_DIM_CAP)]
    pub dim_cap: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CodeArg {
    /// Distinct Heisenberg-Weyl classes drawn without replacement.
    Distinct,
    /// Independent uniform labels.
    Iid,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of messages.
    #[arg(long = "M", default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CodeArg::Distinct)]
    pub code: CodeArg,
    /// Error level for the one-shot bounds in the report.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Cap on the output dimension `d_out * d_in`.
    #[arg(long, default_value_t = 64)]
    pub dim_cap: usize,
    /// Write the per-trial CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// One of validate, divergences, lemmas, types, twirl, identities.
    #[arg(long)]
    pub suite: Option<String>,
    /// Largest blocklength in the types suite.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Perturb a Kraus operator before validation (negative control).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// `x` with 12 significant digits, round-half-even on the exact binary value.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..12).contains(&exp) {
        format!("{x:.*}", (11 - exp) as usize)
    } else {
        sci
    }
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Size the global rayon pool from `EACAP_THREADS`; a no-op once the pool exists.
pub fn configure_threads() {
    if let Some(n) = std::env::var("EACAP_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parse `args` and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => EXIT_PARSE,
            };
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Capacity(a) => cmd_capacity(a, out, err),
        Command::Secondorder(a) => cmd_secondorder(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn sink<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> crate::Result<Box<dyn Write + 'a>> {
    match path {
        Some(p) => Ok(Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))),
        None => Ok(Box::new(out)),
    }
}

fn channel_label(ch: &QuantumChannel) -> String {
    ch.name().map(str::to_string).unwrap_or_else(|| format!("kraus(d_in={}, d_out={})", ch.d_in(), ch.d_out()))
}

fn capacity_json(ch: &QuantumChannel, r: &CapacityResult) -> serde_json::Value {
    let maximizers: Vec<_> = r
        .maximizers
        .iter()
        .map(|m| json!({"spectrum": m.state.eigenvalues(), "mutual_info": m.mutual_info, "variance": m.variance, "hits": m.hits}))
        .collect();
    json!({
        "channel": channel_label(ch),
        "c_ea": r.c_ea,
        "v_min": r.v_min,
        "v_max": r.v_max,
        "maximizers": maximizers,
        "degenerate": r.degenerate,
        "converged": r.converged,
        "grad_norm": r.grad_norm,
        "iterations": r.iterations,
        "richardson_residual": r.richardson_residual,
        "restarts": r.restarts,
    })
}

pub fn cmd_capacity(a: &CapacityArgs, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let ch = a.channel.load()?;
    let opts = CapacityOptions { seed: a.seed, dim_cap: a.dim_cap, restarts: a.restarts, ..Default::default() };
    let r = optimize_capacity(&ch, &opts)?;
    writeln!(out, "channel: {}", channel_label(&ch))?;
    writeln!(out, "C_ea = {}", fmt_sig(r.c_ea))?;
    writeln!(out, "V_min = {}", fmt_sig(r.v_min))?;
    writeln!(out, "V_max = {}", fmt_sig(r.v_max))?;
    for (i, m) in r.maximizers.iter().enumerate() {
        let spec: Vec<String> = m.state.eigenvalues().iter().map(|&l| fmt_sig(l)).collect();
        writeln!(out, "maximizer {i}: spectrum [{}] V = {} hits = {}", spec.join(", "), fmt_sig(m.variance), m.hits)?;
    }
    writeln!(
        out,
        "converged = {} grad_norm = {} iterations = {} richardson = {} degenerate = {}",
        r.converged,
        fmt_sig(r.grad_norm),
        r.iterations,
        fmt_sig(r.richardson_residual),
        r.degenerate
    )?;
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&capacity_json(&ch, &r)).expect("json") + "\n")?;
    }
    if !r.converged {
        writeln!(err, "warning: optimizer did not meet the gradient tolerance (norm {:e})", r.grad_norm)?;
        return Ok(EXIT_NONCONVERGENCE);
    }
    Ok(EXIT_OK)
}

pub const SECONDORDER_HEADER: &str = "n,eps,gaussian_bits,lower_bits,upper_bits,c_ea,v_sel";

pub fn cmd_secondorder(a: &SecondOrderArgs, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(Error::Parse { path: "--eps".into(), message: format!("must lie in (0, 1), got {}", a.eps) });
    }
    let mut ns = match (&a.n, &a.n_list) {
        (Some(n), _) => vec![*n],
        (None, Some(list)) => list.clone(),
        (None, None) => return Err(Error::Parse { path: "--n".into(), message: "give --n or --n-list".into() }),
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::Parse { path: "--n-list".into(), message: "blocklengths must be positive".into() });
    }
    ns.sort_unstable();
    ns.dedup();
    let ch = a.channel.load()?;
    let cap = optimize_capacity(&ch, &CapacityOptions { seed: a.seed, ..Default::default() })?;
    let rows = dispersion_table(&ch, &cap, a.eps, &ns, &BoundOptions { quantum_dim_cap: a.dim_cap })?;
    let mut w = sink(&a.out, out)?;
    writeln!(w, "{SECONDORDER_HEADER}")?;
    let mut code = if cap.converged { EXIT_OK } else { EXIT_NONCONVERGENCE };
    for row in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            row.n,
            fmt_sig(row.eps),
            fmt_sig(row.gaussian_bits),
            opt_cell(row.lower_bits()),
            opt_cell(row.upper_bits()),
            fmt_sig(cap.c_ea),
            opt_cell(row.v_sel)
        )?;
        for (which, entry) in [("lower", &row.lower), ("upper", &row.upper)] {
            if let BoundEntry::Unavailable { reason, kind } = entry {
                writeln!(err, "warning: n={} {which} bound unavailable: {reason}", row.n)?;
                let c = match kind {
                    Unavailability::Infeasible => EXIT_INFEASIBLE,
                    Unavailability::ResourceCap => EXIT_RESOURCE,
                    _ => EXIT_OK,
                };
                code = code.max(c);
            }
        }
    }
    w.flush()?;
    if !cap.converged {
        writeln!(err, "warning: optimizer did not meet the gradient tolerance")?;
    }
    Ok(code)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let ch = a.channel.load()?;
    let d = ch.d_in();
    let needed = (ch.d_out() * d) as u128;
    if needed > a.dim_cap as u128 {
        return Err(Error::DimensionCap { needed, cap: a.dim_cap as u128 });
    }
    if a.m == 0 || a.trials == 0 {
        return Err(Error::Parse { path: "--M".into(), message: "messages and trials must be positive".into() });
    }
    let dec = SectorDecomposition::single(d);
    let ensemble = match a.code {
        CodeArg::Distinct => CodeEnsemble::DistinctWeyl,
        CodeArg::Iid => CodeEnsemble::Iid,
    };
    let p = simulate_codes(&ch, &dec, a.m, a.trials, a.seed, ensemble)?;
    let (mean, se) = mean_and_se(&p);
    let mut w = sink(&a.out, out)?;
    writeln!(w, "trial,p_succ")?;
    for (i, x) in p.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_sig(*x))?;
    }
    w.flush()?;
    writeln!(err, "channel: {} M = {} trials = {} seed = {}", channel_label(&ch), a.m, a.trials, a.seed)?;
    writeln!(err, "mean p_succ = {} standard error = {}", fmt_sig(mean), fmt_sig(se))?;
    for (name, b) in [("prop1", prop1_bound(&ch, &dec, a.eps, a.delta)), ("hn", hn_bound(&ch, &dec, a.eps, a.delta))] {
        match b {
            Ok(b) => writeln!(err, "{name} bound (eps = {}, delta = {}) = {} bits", a.eps, a.delta, fmt_sig(b.bits))?,
            Err(e) => writeln!(err, "{name} bound unavailable: {e}")?,
        }
    }
    Ok(EXIT_OK)
}

fn print_suite(rep: &SuiteReport, out: &mut dyn Write) -> std::io::Result<()> {
    let verdict = if rep.passed() { "PASS" } else { "FAIL" };
    writeln!(
        out,
        "{verdict} {} checks={} failures={} ({:.2} s)",
        rep.suite,
        rep.checks(),
        rep.failures(),
        rep.elapsed.as_secs_f64()
    )?;
    for g in &rep.groups {
        let v = if g.passed() { "ok" } else { "FAIL" };
        write!(out, "  {v:4} {} checks={} failures={} worst={:.3e}", g.name, g.checks, g.failures, g.worst)?;
        if let Some(f) = &g.first_failure {
            write!(out, " first: {f}")?;
        }
        writeln!(out)?;
    }
    for line in &rep.info {
        writeln!(out, "  INFO {line}")?;
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write, _err: &mut dyn Write) -> crate::Result<i32> {
    let opts = VerifyOptions { seed: a.seed, instances: a.instances, types_n: a.n, inject_fault: a.inject_fault };
    let reports = match &a.suite {
        Some(s) => vec![run_suite(s, &opts).map_err(|e| Error::Parse { path: "--suite".into(), message: e.to_string() })?],
        None => run_all(&opts),
    };
    for r in &reports {
        print_suite(r, out)?;
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    writeln!(out, "{} of {} suites passed", reports.len() - failed, reports.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}
