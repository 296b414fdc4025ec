//! Variational ground-state search: single-site DMRG-style sweeps over an
//! MPS against an MPO Hamiltonian, with dense or iterative local
//! eigensolves chosen by the effective local dimension.

use crate::mpo::Mpo;
use crate::mps::Mps;
use crate::tensor::{contract, eigh, lanczos_lowest, lq_thin, qr_thin, DenseTensor, ONE};
use crate::{Error, Result};

/// Local problems up to this dimension are solved densely.
const DENSE_SOLVE_LIMIT: usize = 512;

#[derive(Debug, Clone)]
pub struct GroundStateOptions {
    pub chi: usize,
    pub max_sweeps: usize,
    /// Relative energy change per sweep below which the search stops.
    pub energy_tol: f64,
    pub seed: u64,
}

impl GroundStateOptions {
    pub fn new(chi: usize) -> Self {
        GroundStateOptions { chi, max_sweeps: 100, energy_tol: 1e-10, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateReport {
    pub state: Mps,
    pub energy: f64,
    /// Energy after each full (left-right plus right-left) sweep.
    pub energy_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩. The imaginary residue must vanish to rounding.
pub fn energy(state: &Mps, h: &Mpo) -> f64 {
    let e = state.expectation(h);
    let n2 = state.inner(state).re;
    let val = e / n2;
    assert!(
        val.im.abs() <= 1e-9 * val.re.abs().max(1.0),
        "imaginary energy residue {}",
        val.im
    );
    val.re
}

fn check_hermitian(h: &Mpo) -> Result<()> {
    let delta = h.add(&h.dagger().scale(-ONE));
    let scale = h.hs_norm().max(1.0);
    if delta.hs_norm() > 1e-10 * scale {
        return Err(Error::Config("Hamiltonian is not Hermitian".into()));
    }
    Ok(())
}

/// Grow the left environment (bra, w, ket) past one left-canonical site.
fn left_env_step(env: &DenseTensor, a: &DenseTensor, w: &DenseTensor) -> DenseTensor {
    let t = contract(env, a, &[2], &[0]);
    let t = contract(&t, w, &[1, 2], &[0, 2]);
    contract(&t, &a.conj(), &[0, 2], &[0, 1]).permute(&[2, 1, 0])
}

/// Grow the right environment (bra, w, ket) past one right-canonical site.
fn right_env_step(env: &DenseTensor, b: &DenseTensor, w: &DenseTensor) -> DenseTensor {
    let t = contract(b, env, &[2], &[2]);
    let t = contract(&t, w, &[3, 1], &[3, 2]);
    contract(&t, &b.conj(), &[3, 1], &[1, 2]).permute(&[2, 1, 0])
}

/// Effective local Hamiltonian applied to a site tensor (l, p, r).
fn local_apply(
    left: &DenseTensor,
    w: &DenseTensor,
    right: &DenseTensor,
    v: &DenseTensor,
) -> DenseTensor {
    let t = contract(left, v, &[2], &[0]);
    let t = contract(&t, w, &[1, 2], &[0, 2]);
    contract(&t, right, &[3, 1], &[1, 2])
}

/// Lowest eigenpair of the effective local problem.
fn local_ground(
    left: &DenseTensor,
    w: &DenseTensor,
    right: &DenseTensor,
    cur: &DenseTensor,
) -> Result<(f64, DenseTensor)> {
    let shape = cur.shape().to_vec();
    let dim = cur.size();
    if dim <= DENSE_SOLVE_LIMIT {
        let m = contract(left, w, &[1], &[0]);
        let m = contract(&m, right, &[4], &[1]);
        let m = m.permute(&[0, 2, 4, 1, 3, 5]).reshape(&[dim, dim]);
        let (vals, vecs) = eigh(&m);
        let mut data = Vec::with_capacity(dim);
        for i in 0..dim {
            data.push(vecs.at(&[i, 0]));
        }
        Ok((vals[0], DenseTensor::from_data(&shape, data)))
    } else {
        let apply = |x: &[crate::tensor::C64]| {
            let v = DenseTensor::from_data(&shape, x.to_vec());
            local_apply(left, w, right, &v).into_data()
        };
        let (val, vec) = lanczos_lowest(dim, apply, cur.data(), 1e-12, 40)?;
        Ok((val, DenseTensor::from_data(&shape, vec)))
    }
}

pub fn ground_state(h: &Mpo, opts: &GroundStateOptions) -> Result<GroundStateReport> {
    if opts.chi < 1 {
        return Err(Error::Config("chi must be at least 1".into()));
    }
    check_hermitian(h)?;
    let n = h.n_sites();
    let d = h.phys_dim();
    let mut sites = Mps::random(n, d, opts.chi, opts.seed).sites;
    crate::chain::right_canonicalize(&mut sites);

    // right environments for sites 1..n relative to the right edge
    let edge = DenseTensor::from_data(&[1, 1, 1], vec![ONE]);
    let mut right_envs = vec![edge.clone(); n + 1];
    for k in (1..n).rev() {
        right_envs[k] = right_env_step(&right_envs[k + 1], &sites[k], &h.sites[k]);
    }
    let mut left_envs = vec![edge; n + 1];

    let mut energy_trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let mut e = last;
        for k in 0..n {
            let (val, v) = local_ground(&left_envs[k], &h.sites[k], &right_envs[k + 1], &sites[k])?;
            e = val;
            let (l, p, r) = (v.shape()[0], v.shape()[1], v.shape()[2]);
            if k + 1 < n {
                let (q, rm) = qr_thin(&v.reshape(&[l * p, r]));
                let m = q.shape()[1];
                sites[k] = q.reshape(&[l, p, m]);
                sites[k + 1] = contract(&rm, &sites[k + 1], &[1], &[0]);
                left_envs[k + 1] = left_env_step(&left_envs[k], &sites[k], &h.sites[k]);
            } else {
                sites[k] = v;
            }
        }
        for k in (0..n).rev() {
            let (val, v) = local_ground(&left_envs[k], &h.sites[k], &right_envs[k + 1], &sites[k])?;
            e = val;
            let (l, p, r) = (v.shape()[0], v.shape()[1], v.shape()[2]);
            if k > 0 {
                let (lm, q) = lq_thin(&v.reshape(&[l, p * r]));
                let m = q.shape()[0];
                sites[k] = q.reshape(&[m, p, r]);
                sites[k - 1] = contract(&sites[k - 1], &lm, &[2], &[0]);
                right_envs[k] = right_env_step(&right_envs[k + 1], &sites[k], &h.sites[k]);
            } else {
                sites[k] = v;
            }
        }
        sweeps += 1;
        energy_trace.push(e);
        if (last - e).abs() <= opts.energy_tol * e.abs().max(1.0) {
            converged = true;
            last = e;
            break;
        }
        last = e;
    }

    let mut state = Mps { sites };
    state.normalize();
    Ok(GroundStateReport { energy: last, state, energy_trace, sweeps, converged })
}
