//! Matrix product states: site tensors of shape (left bond, physical,
//! right bond) with unit outer bonds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mpo::Mpo;
use crate::tensor::{contract, DenseTensor, C64, ONE};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mps {
    pub sites: Vec<DenseTensor>,
}

impl Mps {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.sites[0].shape()[1]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1]
            .iter()
            .map(|t| t.shape()[2])
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Random state with bonds capped both by `chi` and by the exact
    /// Schmidt bound from either edge.
    pub fn random(n: usize, d: usize, chi: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sites = Vec::with_capacity(n);
        let bond = |k: usize| -> usize {
            let left = d.checked_pow(k as u32).unwrap_or(usize::MAX);
            let right = d.checked_pow((n - k) as u32).unwrap_or(usize::MAX);
            chi.min(left).min(right)
        };
        for k in 0..n {
            let (l, r) = (bond(k), bond(k + 1));
            let data: Vec<C64> = (0..l * d * r)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            sites.push(DenseTensor::from_data(&[l, d, r], data));
        }
        let mut mps = Mps { sites };
        mps.normalize();
        mps
    }

    /// Product state from one local vector per site.
    pub fn product(locals: &[Vec<C64>]) -> Self {
        let sites = locals
            .iter()
            .map(|v| DenseTensor::from_data(&[1, v.len(), 1], v.clone()))
            .collect();
        Mps { sites }
    }

    /// Computational basis state |b_0 b_1 ...> for local dimension d.
    pub fn basis_state(d: usize, bits: &[usize]) -> Self {
        let locals: Vec<Vec<C64>> = bits
            .iter()
            .map(|&b| {
                let mut v = vec![crate::tensor::ZERO; d];
                v[b] = ONE;
                v
            })
            .collect();
        Mps::product(&locals)
    }

    pub fn inner(&self, other: &Self) -> C64 {
        crate::chain::chain_inner(&self.sites, &other.sites)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let k = self.sites.len();
            // spread the factor so no single tensor under/overflows
            let f = C64::new((1.0 / n).powf(1.0 / k as f64), 0.0);
            for s in self.sites.iter_mut() {
                *s = s.scale(f);
            }
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = self.clone();
        out.sites[0] = out.sites[0].scale(a);
        out
    }

    /// <self | op | self> via the three-layer transfer contraction.
    pub fn expectation(&self, op: &Mpo) -> C64 {
        assert_eq!(self.n_sites(), op.n_sites());
        // env axes: (bra bond, operator bond, ket bond)
        let mut env = DenseTensor::from_data(&[1, 1, 1], vec![ONE]);
        for (m, w) in self.sites.iter().zip(&op.sites) {
            let t = contract(&env, &m.conj(), &[0], &[0]);
            // t: (w, ket, j, bra')
            let t = contract(&t, w, &[0, 2], &[0, 1]);
            // t: (ket, bra', i, w')
            env = contract(&t, m, &[0, 2], &[0, 1]).permute(&[0, 1, 2]);
            // env: (bra', w', ket')
        }
        env.data()[0]
    }

    /// Dense state vector, guarded at dimension 4096.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let n = self.n_sites();
        let d = self.phys_dim();
        let dim = d.checked_pow(n as u32).filter(|&x| x <= 4096).ok_or_else(|| {
            Error::SizeGuard(format!("dense state for d={d}, n={n} exceeds 4096"))
        })?;
        let mut acc = DenseTensor::from_data(&[1, 1], vec![ONE]);
        for t in &self.sites {
            let (p, r) = (t.shape()[1], t.shape()[2]);
            let a = acc.shape()[0];
            acc = contract(&acc, t, &[1], &[0]).reshape(&[a * p, r]);
        }
        Ok(acc.reshape(&[dim]))
    }
}

/// Apply an MPO to an MPS exactly; bonds multiply.
pub fn apply_mpo(op: &Mpo, state: &Mps) -> Mps {
    assert_eq!(op.n_sites(), state.n_sites());
    let d = op.phys_dim();
    let sites = op
        .sites
        .iter()
        .zip(&state.sites)
        .map(|(w, m)| {
            let (wl, wr) = (w.shape()[0], w.shape()[3]);
            let (ml, mr) = (m.shape()[0], m.shape()[2]);
            // (wl, j, i, wr) x (ml, i, mr) over i
            contract(w, m, &[2], &[1])
                .permute(&[0, 3, 1, 2, 4])
                .reshape(&[wl * ml, d, wr * mr])
        })
        .collect();
    Mps { sites }
}
