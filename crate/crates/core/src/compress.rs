//! Variational compression of MPOs and MPSs to a prescribed bond
//! dimension, in the Hilbert-Schmidt respectively Hilbert-space norm.

use crate::chain::{
    svd_truncate, variational_fit, zip_up, Chain, FitOptions, FitReport, FitTarget,
};
use crate::mpo::Mpo;
use crate::mps::Mps;
use crate::tensor::{DenseTensor, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Seed with sequential SVD truncation of the target. Deterministic,
    /// and already exact whenever the target fits in the requested bond.
    SvdSeed,
    /// Seed with a random chain (for basin-of-attraction experiments).
    Random { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct CompressOptions {
    pub target_d: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub init: Init,
}

impl CompressOptions {
    pub fn new(target_d: usize) -> Self {
        CompressOptions {
            target_d,
            max_sweeps: 60,
            tol: 1e-14,
            init: Init::SvdSeed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompressReport {
    pub distance: f64,
    /// Distance divided by the norm of the target.
    pub relative_distance: f64,
    pub distance_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl From<FitReport> for CompressReport {
    fn from(r: FitReport) -> Self {
        let rel = if r.target_norm > 0.0 {
            r.distance / r.target_norm
        } else {
            0.0
        };
        CompressReport {
            distance: r.distance,
            relative_distance: rel,
            distance_trace: r.distance_trace,
            sweeps: r.sweeps,
            converged: r.converged,
        }
    }
}

fn random_chain(n: usize, phys: usize, chi: usize, seed: u64) -> Chain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bond = |k: usize| -> usize {
        let left = phys.checked_pow(k as u32).unwrap_or(usize::MAX);
        let right = phys.checked_pow((n - k) as u32).unwrap_or(usize::MAX);
        chi.min(left).min(right)
    };
    (0..n)
        .map(|k| {
            let (l, r) = (bond(k), bond(k + 1));
            let data: Vec<C64> = (0..l * phys * r)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            DenseTensor::from_data(&[l, phys, r], data)
        })
        .collect()
}

fn seed_chain(target: &[DenseTensor], opts: &CompressOptions) -> Chain {
    match opts.init {
        Init::SvdSeed => svd_truncate(target, opts.target_d, 0.0).0,
        Init::Random { seed } => {
            random_chain(target.len(), target[0].shape()[1], opts.target_d, seed)
        }
    }
}

/// Compress an MPO to bond dimension at most `target_d`, minimizing the
/// Hilbert-Schmidt distance.
pub fn compress_mpo(op: &Mpo, opts: &CompressOptions) -> (Mpo, CompressReport) {
    let d = op.phys_dim();
    let chain = op.to_chain();
    let init = seed_chain(&chain, opts);
    let (fitted, report) =
        variational_fit(&FitTarget::Chain(&chain), init, &fit_opts(opts));
    (Mpo::from_chain(fitted, d), report.into())
}

/// Compress an MPS to bond dimension at most `target_d`.
pub fn compress_mps(state: &Mps, opts: &CompressOptions) -> (Mps, CompressReport) {
    let init = seed_chain(&state.sites, opts);
    let (fitted, report) =
        variational_fit(&FitTarget::Chain(&state.sites), init, &fit_opts(opts));
    (Mps { sites: fitted }, report.into())
}

/// Fit `op |state>` at bond dimension `target_d` without materializing the
/// product bond; seeded by a single zip-up pass.
pub fn apply_compress(op: &Mpo, state: &Mps, opts: &CompressOptions) -> (Mps, CompressReport) {
    let init = match opts.init {
        Init::SvdSeed => zip_up(op, state, opts.target_d, 1e-14),
        Init::Random { seed } => {
            random_chain(op.n_sites(), op.phys_dim(), opts.target_d, seed)
        }
    };
    let target = FitTarget::MpoMps { op, state };
    let (fitted, report) = variational_fit(&target, init, &fit_opts(opts));
    (Mps { sites: fitted }, report.into())
}

fn fit_opts(opts: &CompressOptions) -> FitOptions {
    FitOptions { max_sweeps: opts.max_sweeps, tol: opts.tol }
}

/// Normalized Hilbert-Schmidt distance ‖M − A‖ / ‖M‖, computed from bond
/// contractions without densifying either operator.
pub fn mpo_distance(target: &Mpo, approx: &Mpo) -> crate::Result<f64> {
    let nm2 = target.hs_inner(target).re;
    if nm2 <= 0.0 {
        return Err(crate::Error::Config(
            "distance normalization undefined for a zero operator".into(),
        ));
    }
    let na2 = approx.hs_inner(approx).re;
    let cross = target.hs_inner(approx).re;
    Ok((nm2 + na2 - 2.0 * cross).max(0.0).sqrt() / nm2.sqrt())
}

/// One row of a truncation study: the three error measures of a
/// compression to `target_d` against full-bond references.
#[derive(Debug, Clone)]
pub struct TruncationRow {
    pub target_d: usize,
    /// Normalized operator distance ‖H − H_D'‖ / ‖H‖.
    pub op_error: f64,
    /// 1 − |⟨ψ_ref|ψ_D'⟩| for normalized ground states.
    pub gs_fidelity_error: f64,
    /// |E_D' − E_ref| / |E_ref|.
    pub energy_rel_error: f64,
    pub converged: bool,
}

/// Compress `h` to every bond dimension in `d_list` and measure, per row,
/// the operator distance plus the ground-state fidelity and energy errors
/// of the truncated operator against the supplied references.
pub fn truncation_study(
    h: &Mpo,
    d_list: &[usize],
    gs_ref: &Mps,
    energy_ref: f64,
    gs_opts: &crate::groundstate::GroundStateOptions,
) -> crate::Result<Vec<TruncationRow>> {
    let mut ref_state = gs_ref.clone();
    ref_state.normalize();
    let mut rows = Vec::with_capacity(d_list.len());
    for &target_d in d_list {
        let (truncated, rep) = compress_mpo(h, &CompressOptions::new(target_d));
        let gs = crate::groundstate::ground_state(&truncated, gs_opts)?;
        let mut state = gs.state.clone();
        state.normalize();
        let fidelity_error = (1.0 - ref_state.inner(&state).norm()).max(0.0);
        let energy_rel_error = if energy_ref != 0.0 {
            (gs.energy - energy_ref).abs() / energy_ref.abs()
        } else {
            (gs.energy - energy_ref).abs()
        };
        rows.push(TruncationRow {
            target_d,
            op_error: rep.relative_distance,
            gs_fidelity_error: fidelity_error,
            energy_rel_error,
            converged: rep.converged && gs.converged,
        });
    }
    Ok(rows)
}
