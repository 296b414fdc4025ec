//! Batch command-line front-end: parse job configurations, dispatch the
//! builders and experiments, and emit machine-readable JSON/CSV results.
//! One job per process; reruns with identical config and seed produce
//! byte-identical result files.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::compress::{compress_mpo, truncation_study, CompressOptions, Init};
use crate::groundstate::{ground_state, GroundStateOptions};
use crate::hamiltonians;
use crate::io::{self, GroundResultFile, HamiltonianSpec, ProbeResult, ProbeTracePoint};
use crate::mpo::Mpo;
use crate::mps::Mps;
use crate::optimality::certify_builder;
use crate::peps::builders::{pepo_long_range, pepo_nearest_neighbor, LongRangeMode};
use crate::peps::{boundary_contract_expectation, Peps};
use crate::tensor::{DenseTensor, C64};
use crate::timeevo::{double_time, evolve, taylor_mpo, EvolveOptions};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mpotools", about = "Tensor-network operator toolkit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Job configuration file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Top-level seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for embarrassingly parallel sweeps; defaults to the
    /// MPOTOOLS_WORKERS environment variable, then 1.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the configured Hamiltonian MPO and report its bond dimensions.
    Build,
    /// Compress the configured MPO to a target bond dimension.
    Compress,
    /// Operator/fidelity/energy errors across a list of target bonds (CSV).
    TruncationStudy,
    /// Variational ground-state search.
    Ground,
    /// Taylor-Horner time evolution with time doubling (CSV record).
    Evolve,
    /// Exact bond dimension of H^n versus compression cut (JSON trace).
    ProbePower,
    /// Operator Schmidt ranks against MPO bonds at every cut (JSON).
    RankCheck,
    /// Build a 2D PEPO and report its bond extents.
    PepsBuild,
    /// Boundary-MPS expectation value of a 2D PEPO.
    PepsExpect,
    /// Dense-oracle invariant suite at small sizes; prints pass/fail lines.
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CompressConfig {
    pub target_d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// "svd" (default) or "random".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GroundConfig {
    pub chi: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvolutionConfig {
    /// Taylor polynomial order m.
    pub order: usize,
    pub doublings: usize,
    pub base_step: f64,
    pub operator_d: usize,
    /// State bond cap during the evolution.
    pub chi: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<(usize, usize)>,
    /// Single-site correlation operator: "X", "Y", "Z", or "N".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr_op: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alarm: Option<f64>,
    /// Initial basis state, one digit per site (default: all zeros).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProbeConfig {
    pub power: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PepsConfig {
    /// "nearest_neighbor", "long_range_linear", or "long_range_sqrt".
    pub builder: String,
    pub grid_n: usize,
    /// Coupling operator: "X", "Y", "Z", or "N".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    /// Long-range coupling profile: "uniform" (default) or "inverse_cube"
    /// in the raster distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_cut: Option<usize>,
    /// State for peps-expect: "zeros" (default) or "random" with `chi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<usize>,
}

/// Everything a job may need; each subcommand validates the sections it
/// requires before any computation starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression: Option<CompressConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groundstate: Option<GroundConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peps: Option<PepsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

struct Job {
    config: JobConfig,
    out: PathBuf,
    seed: u64,
    workers: usize,
    verbose: bool,
}

impl Job {
    fn hamiltonian(&self) -> Result<(HamiltonianSpec, Mpo)> {
        let mut spec = self
            .config
            .hamiltonian
            .clone()
            .ok_or_else(|| Error::Config("job needs a `hamiltonian` section".into()))?;
        // the top-level seed feeds any model that draws randomness and has
        // no explicit seed of its own
        if let Some(m) = spec.model.as_mut() {
            if m.seed.is_none() {
                m.seed = Some(substream(self.seed, "builder"));
            }
        }
        let h = spec.build()?;
        Ok((spec, h))
    }

    fn ground_opts(&self) -> Result<GroundStateOptions> {
        let g = self
            .config
            .groundstate
            .as_ref()
            .ok_or_else(|| Error::Config("job needs a `groundstate` section".into()))?;
        let mut opts = GroundStateOptions::new(g.chi);
        if let Some(s) = g.max_sweeps {
            opts.max_sweeps = s;
        }
        if let Some(t) = g.energy_tol {
            opts.energy_tol = t;
        }
        opts.seed = substream(self.seed, "solver");
        Ok(opts)
    }

    fn compress_opts(&self) -> Result<CompressOptions> {
        let c = self
            .config
            .compression
            .as_ref()
            .ok_or_else(|| Error::Config("job needs a `compression` section".into()))?;
        let mut opts = CompressOptions::new(c.target_d);
        if let Some(s) = c.max_sweeps {
            opts.max_sweeps = s;
        }
        if let Some(t) = c.tol {
            opts.tol = t;
        }
        match c.init.as_deref() {
            None | Some("svd") => {}
            Some("random") => opts.init = Init::Random { seed: substream(self.seed, "compressor") },
            Some(other) => {
                return Err(Error::Config(format!("unknown init mode `{other}`")));
            }
        }
        Ok(opts)
    }
}

/// Named derived seed, so component-level reruns reproduce independently
/// of the other components' draw counts.
fn substream(seed: u64, name: &str) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for b in name.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100_0000_01B3);
    }
    h
}

fn site_op(name: &str) -> Result<DenseTensor> {
    Ok(match name {
        "X" | "Y" | "Z" | "I" => hamiltonians::pauli(name.chars().next().unwrap()),
        "N" => hamiltonians::number_op(),
        other => return Err(Error::Config(format!("unknown operator `{other}`"))),
    })
}

/// Parse the command line and run the job; returns the process exit code
/// (0 success, 2 config error, 3 non-convergence, 4 size guard).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let config: JobConfig = match &cli.config {
        Some(path) => io::read_json(path)?,
        None => JobConfig::default(),
    };
    let workers = cli
        .workers
        .or_else(|| std::env::var("MPOTOOLS_WORKERS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
        .max(1);
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let job = Job { config, out, seed, workers, verbose: cli.verbose };
    match cli.command {
        Command::Build => cmd_build(&job),
        Command::Compress => cmd_compress(&job),
        Command::TruncationStudy => cmd_truncation_study(&job),
        Command::Ground => cmd_ground(&job),
        Command::Evolve => cmd_evolve(&job),
        Command::ProbePower => cmd_probe_power(&job),
        Command::RankCheck => cmd_rank_check(&job),
        Command::PepsBuild => cmd_peps_build(&job),
        Command::PepsExpect => cmd_peps_expect(&job),
        Command::Selftest => cmd_selftest(),
    }
}

#[derive(Debug, Serialize)]
struct BuildReport {
    kind: String,
    n_sites: usize,
    phys_dim: usize,
    bond_dims: Vec<usize>,
    max_bond: usize,
}

fn cmd_build(job: &Job) -> Result<()> {
    let (spec, h) = job.hamiltonian()?;
    io::write_mpo(&job.out.join("hamiltonian.mpo"), &h, Some(job.seed))?;
    let report = BuildReport {
        kind: spec.kind.clone(),
        n_sites: h.n_sites(),
        phys_dim: h.phys_dim(),
        bond_dims: h.bond_dims(),
        max_bond: h.max_bond(),
    };
    io::write_json(&job.out.join("build.json"), &report)?;
    println!("D={}", report.max_bond);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompressResult {
    target_d: usize,
    distance: f64,
    relative_distance: f64,
    sweeps: usize,
    converged: bool,
}

fn cmd_compress(job: &Job) -> Result<()> {
    let (_, h) = job.hamiltonian()?;
    let opts = job.compress_opts()?;
    let (compressed, rep) = compress_mpo(&h, &opts);
    io::write_mpo(&job.out.join("compressed.mpo"), &compressed, Some(job.seed))?;
    io::write_json(
        &job.out.join("compress.json"),
        &CompressResult {
            target_d: opts.target_d,
            distance: rep.distance,
            relative_distance: rep.relative_distance,
            sweeps: rep.sweeps,
            converged: rep.converged,
        },
    )?;
    if job.verbose {
        for (k, d) in rep.distance_trace.iter().enumerate() {
            println!("sweep {k}: distance {}", io::fmt_f64(*d));
        }
    }
    println!("distance={}", io::fmt_f64(rep.relative_distance));
    if !rep.converged {
        return Err(Error::NoConvergence("compression hit the sweep limit".into()));
    }
    Ok(())
}

fn cmd_truncation_study(job: &Job) -> Result<()> {
    let (_, h) = job.hamiltonian()?;
    let d_list = job
        .config
        .d_list
        .clone()
        .ok_or_else(|| Error::Config("truncation-study needs `d_list`".into()))?;
    let gs_opts = job.ground_opts()?;
    let reference = ground_state(&h, &gs_opts)?;
    // rows are independent; chunk them over the workers and reassemble in
    // list order so the CSV is deterministic
    let rows = if job.workers == 1 || d_list.len() <= 1 {
        truncation_study(&h, &d_list, &reference.state, reference.energy, &gs_opts)?
    } else {
        let chunk = d_list.len().div_ceil(job.workers);
        let mut rows = Vec::new();
        let parts: Vec<Result<Vec<_>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = d_list
                .chunks(chunk)
                .map(|ds| {
                    let (h, st, opts) = (&h, &reference.state, &gs_opts);
                    scope.spawn(move || truncation_study(h, ds, st, reference.energy, opts))
                })
                .collect();
            handles.into_iter().map(|j| j.join().expect("worker panicked")).collect()
        });
        for part in parts {
            rows.extend(part?);
        }
        rows
    };
    let csv = io::truncation_study_csv(&rows);
    std::fs::write(job.out.join("truncation_study.csv"), csv)?;
    if rows.iter().any(|r| !r.converged) {
        return Err(Error::NoConvergence("one or more study rows flagged".into()));
    }
    Ok(())
}

fn cmd_ground(job: &Job) -> Result<()> {
    let (_, h) = job.hamiltonian()?;
    let opts = job.ground_opts()?;
    let rep = ground_state(&h, &opts)?;
    io::write_mps(&job.out.join("ground.mps"), &rep.state, Some(job.seed))?;
    io::write_json(
        &job.out.join("ground.json"),
        &GroundResultFile {
            energy: rep.energy,
            sweeps: rep.sweeps,
            converged: rep.converged,
            chi: opts.chi,
            seed: job.seed,
        },
    )?;
    println!("energy={}", io::fmt_f64(rep.energy));
    if !rep.converged {
        return Err(Error::NoConvergence("ground-state search hit the sweep limit".into()));
    }
    Ok(())
}

fn cmd_evolve(job: &Job) -> Result<()> {
    let (_, h) = job.hamiltonian()?;
    let ev = job
        .config
        .evolution
        .clone()
        .ok_or_else(|| Error::Config("job needs an `evolution` section".into()))?;
    let base = taylor_mpo(&h, ev.base_step, ev.order, ev.operator_d)?;
    let (u, _) = double_time(&base, ev.doublings, ev.operator_d);
    let dt = ev.base_step * (1u64 << ev.doublings) as f64;
    let n = h.n_sites();
    let bits = ev.initial.clone().unwrap_or_else(|| vec![0; n]);
    if bits.len() != n {
        return Err(Error::Config("initial state length must equal n_sites".into()));
    }
    let psi0 = Mps::basis_state(h.phys_dim(), &bits);
    let mut opts = EvolveOptions::new(ev.chi, ev.steps, dt);
    if let Some(a) = ev.alarm {
        opts.alarm = a;
    }
    opts.pairs = ev.pairs.clone();
    if !ev.pairs.is_empty() {
        let name = ev.corr_op.as_deref().unwrap_or("Z");
        opts.corr_op = Some(site_op(name)?);
    }
    let rec = evolve(&psi0, &u, &h, &opts);
    let labels: Vec<String> = ev
        .pairs
        .iter()
        .map(|(i, j)| format!("corr_{i}_{j}"))
        .collect();
    std::fs::write(job.out.join("evolution.csv"), io::evolution_csv(&rec, &labels))?;
    if !rec.flagged_steps.is_empty() {
        return Err(Error::NoConvergence(format!(
            "{} steps exceeded the compression alarm",
            rec.flagged_steps.len()
        )));
    }
    Ok(())
}

fn cmd_probe_power(job: &Job) -> Result<()> {
    let (spec, h) = job.hamiltonian()?;
    let p = job
        .config
        .probe
        .clone()
        .ok_or_else(|| Error::Config("job needs a `probe` section".into()))?;
    let (d_exact, trace) = crate::timeevo::probe_power_bond_dim(
        &h,
        p.power,
        p.d_start.unwrap_or(2),
        p.tol.unwrap_or(1e-10),
    )?;
    let model = spec
        .model
        .as_ref()
        .map(|m| m.name.clone())
        .unwrap_or_else(|| spec.kind.clone());
    let result = ProbeResult {
        model,
        n: p.power,
        d_exact,
        trace: trace
            .into_iter()
            .map(|(d_cut, distance)| ProbeTracePoint { d_cut, distance })
            .collect(),
    };
    io::write_json(&job.out.join("probe.json"), &result)?;
    println!("D_exact={d_exact}");
    Ok(())
}

fn cmd_rank_check(job: &Job) -> Result<()> {
    let (_, h) = job.hamiltonian()?;
    let tol = job.config.tolerance.unwrap_or(1e-10);
    let report = certify_builder(&h, tol)?;
    io::write_json(&job.out.join("rank.json"), &io::RankReportFile::from(&report))?;
    println!("optimal={}", report.optimal);
    Ok(())
}

fn build_pepo(cfg: &PepsConfig) -> Result<crate::peps::Pepo> {
    let op = site_op(cfg.op.as_deref().unwrap_or("X"))?;
    match cfg.builder.as_str() {
        "nearest_neighbor" => pepo_nearest_neighbor(&op, cfg.grid_n),
        "long_range_linear" | "long_range_sqrt" => {
            let n = cfg.grid_n;
            let coeff: Box<dyn Fn(usize, usize) -> C64> =
                match cfg.coupling.as_deref().unwrap_or("uniform") {
                    "uniform" => Box::new(|_, _| C64::new(1.0, 0.0)),
                    "inverse_cube" => Box::new(move |i: usize, j: usize| {
                        let (r1, c1) = ((i / n) as f64, (i % n) as f64);
                        let (r2, c2) = ((j / n) as f64, (j % n) as f64);
                        let dist = ((r2 - r1).powi(2) + (c2 - c1).powi(2)).sqrt();
                        C64::new(dist.powi(-3), 0.0)
                    }),
                    other => {
                        return Err(Error::Config(format!("unknown coupling `{other}`")));
                    }
                };
            let mode = if cfg.builder == "long_range_linear" {
                LongRangeMode::Linear
            } else {
                LongRangeMode::Sqrt
            };
            pepo_long_range(&*coeff, &op, None, cfg.grid_n, mode)
        }
        other => Err(Error::Config(format!("unknown 2D builder `{other}`"))),
    }
}

#[derive(Debug, Serialize)]
struct PepsBuildReport {
    builder: String,
    grid_n: usize,
    max_horizontal_bond: usize,
    max_vertical_bond: usize,
}

fn cmd_peps_build(job: &Job) -> Result<()> {
    let cfg = job
        .config
        .peps
        .clone()
        .ok_or_else(|| Error::Config("job needs a `peps` section".into()))?;
    let m = build_pepo(&cfg)?;
    let report = PepsBuildReport {
        builder: cfg.builder.clone(),
        grid_n: cfg.grid_n,
        max_horizontal_bond: m.max_horizontal_bond(),
        max_vertical_bond: m.max_vertical_bond(),
    };
    io::write_json(&job.out.join("peps_build.json"), &report)?;
    println!(
        "horizontal={} vertical={}",
        report.max_horizontal_bond, report.max_vertical_bond
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct PepsExpectReport {
    value_re: f64,
    value_im: f64,
    max_column_error: f64,
    converged: bool,
}

fn cmd_peps_expect(job: &Job) -> Result<()> {
    let cfg = job
        .config
        .peps
        .clone()
        .ok_or_else(|| Error::Config("job needs a `peps` section".into()))?;
    let m = build_pepo(&cfg)?;
    let n = cfg.grid_n;
    let psi = match cfg.state.as_deref().unwrap_or("zeros") {
        "zeros" => {
            let d = m.sites[0].shape()[4];
            let mut local = vec![C64::new(0.0, 0.0); d];
            local[0] = C64::new(1.0, 0.0);
            Peps::product(n, n, &vec![local; n * n])
        }
        "random" => Peps::random(n, n, 2, cfg.chi.unwrap_or(2), substream(job.seed, "state")),
        other => return Err(Error::Config(format!("unknown state `{other}`"))),
    };
    let d_cut = cfg.d_cut.unwrap_or(4 * n);
    let rep = boundary_contract_expectation(&psi, &m, d_cut)?;
    let report = PepsExpectReport {
        value_re: rep.value.re,
        value_im: rep.value.im,
        max_column_error: rep.column_errors.iter().cloned().fold(0.0, f64::max),
        converged: rep.column_converged.iter().all(|&c| c),
    };
    io::write_json(&job.out.join("peps_expect.json"), &report)?;
    println!("value={} {}", io::fmt_f64(report.value_re), io::fmt_f64(report.value_im));
    if !report.converged {
        return Err(Error::NoConvergence("a column compression was flagged".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// selftest: dense-oracle invariants at N <= 8

fn dense_pair_oracle(
    n: usize,
    coeff: &dyn Fn(usize, usize) -> f64,
    x: &DenseTensor,
    y: &DenseTensor,
) -> DenseTensor {
    let dim = 1usize << n;
    let mut acc = DenseTensor::from_data(
        &[dim, dim],
        vec![C64::new(0.0, 0.0); dim * dim],
    );
    for i in 0..n {
        for j in i + 1..n {
            let w = coeff(i, j);
            if w == 0.0 {
                continue;
            }
            let mut term = DenseTensor::eye(1);
            for k in 0..n {
                let f = if k == i {
                    x.clone()
                } else if k == j {
                    y.clone()
                } else {
                    DenseTensor::eye(2)
                };
                term = crate::tensor::kron(&term, &f);
            }
            acc = acc.add(&term.scale(C64::new(w, 0.0)));
        }
    }
    acc
}

fn rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    let nb = b.norm().max(1e-300);
    a.add(&b.scale(C64::new(-1.0, 0.0))).norm() / nb
}

fn cmd_selftest() -> Result<()> {
    let x = hamiltonians::pauli('X');
    let y = hamiltonians::pauli('Y');
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    {
        let h = hamiltonians::nearest_neighbor(&x, &y, 6).unwrap();
        let want = dense_pair_oracle(6, &|i, j| if j == i + 1 { 1.0 } else { 0.0 }, &x, &y);
        check("nearest_neighbor dense oracle (N=6)", rel_diff(&h.to_dense()?, &want) < 1e-12);
    }
    {
        let h = hamiltonians::fixed_range(&x, &y, 3, 8).unwrap();
        let want = dense_pair_oracle(8, &|i, j| if j - i == 3 { 1.0 } else { 0.0 }, &x, &y);
        check("fixed_range r=3 dense oracle (N=8)", rel_diff(&h.to_dense()?, &want) < 1e-12);
    }
    {
        let beta = 0.6;
        let h = hamiltonians::exp_decay(&x, &y, beta, 7, false).unwrap();
        let want = dense_pair_oracle(7, &|i, j| beta.powi((j - i) as i32), &x, &y);
        check("exp_decay dense oracle (N=7)", rel_diff(&h.to_dense()?, &want) < 1e-12);
    }
    {
        let h = hamiltonians::ising(6, 1.3).unwrap();
        let z = hamiltonians::pauli('Z');
        let mut want = dense_pair_oracle(6, &|i, j| if j == i + 1 { -1.0 } else { 0.0 }, &z, &z);
        for k in 0..6 {
            let mut term = DenseTensor::eye(1);
            for s in 0..6 {
                let f = if s == k { x.clone() } else { DenseTensor::eye(2) };
                term = crate::tensor::kron(&term, &f);
            }
            want = want.add(&term.scale(C64::new(-1.3, 0.0)));
        }
        check("ising dense oracle (N=6)", rel_diff(&h.to_dense()?, &want) < 1e-12);
    }
    {
        let h = hamiltonians::ising(8, 0.9).unwrap();
        let (c, rep) = compress_mpo(&h, &CompressOptions::new(h.max_bond()));
        check(
            "compression exact at native bond (N=8)",
            rep.relative_distance < 1e-7 && rel_diff(&c.to_dense()?, &h.to_dense()?) < 1e-9,
        );
    }
    {
        let z = hamiltonians::pauli('Z');
        let local = z.scale(C64::new(0.83, 0.0)).add(&x.scale(C64::new(0.41, 0.0)));
        let h = hamiltonians::ranged_all(&x, std::slice::from_ref(&y), Some(&local), 6).unwrap();
        let report = certify_builder(&h, 1e-10)?;
        check("nearest-neighbor Schmidt-rank optimality (N=6)", report.optimal);
    }
    {
        let h = hamiltonians::ising(6, 1.1).unwrap();
        let u = taylor_mpo(&h, 0.05, 8, 64)?;
        let exact = crate::timeevo::dense_expm_hermitian(&h.to_dense()?, 0.05);
        check("taylor step matches dense exponential (N=6)", rel_diff(&u.to_dense()?, &exact) < 1e-9);
    }
    {
        let m = pepo_nearest_neighbor(&hamiltonians::pauli('Z'), 2)?;
        let z = hamiltonians::pauli('Z');
        let mut want = DenseTensor::from_data(&[16, 16], vec![C64::new(0.0, 0.0); 256]);
        for (i, j) in [(0usize, 1usize), (2, 3), (0, 2), (1, 3)] {
            let mut term = DenseTensor::eye(1);
            for k in 0..4 {
                let f = if k == i || k == j { z.clone() } else { DenseTensor::eye(2) };
                term = crate::tensor::kron(&term, &f);
            }
            want = want.add(&term);
        }
        check("2D nearest-neighbor dense oracle (2x2)", rel_diff(&m.to_dense()?, &want) < 1e-12);
    }

    if failures > 0 {
        return Err(Error::NoConvergence(format!("{failures} selftest invariants failed")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn tmp_out(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("mpotools-cli-{tag}"));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
        let path = dir.join("config.json");
        std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
        path
    }

    #[test]
    fn build_reports_nearest_neighbor_bond() {
        let dir = tmp_out("build");
        let cfg = write_config(
            &dir,
            &serde_json::json!({"hamiltonian": {"kind": "nearest_neighbor", "n_sites": 8}}),
        );
        let code = run([
            "mpotools",
            "build",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let report: serde_json::Value = io::read_json(&dir.join("build.json")).unwrap();
        assert_eq!(report["max_bond"], 3);
        let back = io::read_mpo(&dir.join("hamiltonian.mpo")).unwrap();
        assert_eq!(back.n_sites(), 8);
    }

    #[test]
    fn missing_config_section_exits_2() {
        let dir = tmp_out("missing");
        let cfg = write_config(&dir, &serde_json::json!({}));
        let code = run([
            "mpotools",
            "ground",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn config_round_trip_is_identity() {
        let text = r#"{
            "hamiltonian": {"kind": "model", "n_sites": 10,
                            "model": {"name": "xxz", "theta": 0.35, "delta": 0.1}},
            "groundstate": {"chi": 16},
            "d_list": [2, 3, 4],
            "seed": 11
        }"#;
        let a: JobConfig = serde_json::from_str(text).unwrap();
        let b: JobConfig = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tmp_out("rerun");
        let cfg = write_config(
            &dir,
            &serde_json::json!({
                "hamiltonian": {"kind": "model", "n_sites": 8,
                                "model": {"name": "ising", "B": 1.1}},
                "groundstate": {"chi": 8}
            }),
        );
        let args = [
            "mpotools",
            "ground",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "5",
        ];
        assert_eq!(run(args), 0);
        let first_json = std::fs::read(dir.join("ground.json")).unwrap();
        let first_mps = std::fs::read(dir.join("ground.mps")).unwrap();
        assert_eq!(run(args), 0);
        assert_eq!(first_json, std::fs::read(dir.join("ground.json")).unwrap());
        assert_eq!(first_mps, std::fs::read(dir.join("ground.mps")).unwrap());
    }

    #[test]
    fn probe_power_ising_matches_table() {
        let dir = tmp_out("probe");
        let cfg = write_config(
            &dir,
            &serde_json::json!({
                "hamiltonian": {"kind": "model", "n_sites": 40,
                                "model": {"name": "ising", "B": 1.0}},
                "probe": {"power": 4}
            }),
        );
        let code = run([
            "mpotools",
            "probe-power",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let result: serde_json::Value = io::read_json(&dir.join("probe.json")).unwrap();
        assert_eq!(result["D_exact"], 12);
        assert_eq!(result["model"], "ising");
    }

    #[test]
    fn truncation_study_csv_has_contracted_header() {
        let dir = tmp_out("study");
        let cfg = write_config(
            &dir,
            &serde_json::json!({
                "hamiltonian": {"kind": "model", "n_sites": 10,
                                "model": {"name": "ising", "B": 1.1}},
                "groundstate": {"chi": 8},
                "d_list": [2, 3]
            }),
        );
        let code = run([
            "mpotools",
            "truncation-study",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--workers",
            "2",
        ]);
        assert_eq!(code, 0);
        let csv = std::fs::read_to_string(dir.join("truncation_study.csv")).unwrap();
        assert!(csv.starts_with("target_D, op_error, gs_fidelity_error, energy_rel_error, converged\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn peps_build_reports_extents() {
        let dir = tmp_out("peps");
        let cfg = write_config(
            &dir,
            &serde_json::json!({
                "peps": {"builder": "long_range_sqrt", "grid_n": 3, "op": "Z"}
            }),
        );
        let code = run([
            "mpotools",
            "peps-build",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let report: serde_json::Value = io::read_json(&dir.join("peps_build.json")).unwrap();
        assert_eq!(report["max_horizontal_bond"], 10);
        assert_eq!(report["max_vertical_bond"], 8);
    }

    #[test]
    fn selftest_passes() {
        assert_eq!(run(["mpotools", "selftest"]), 0);
    }
}
