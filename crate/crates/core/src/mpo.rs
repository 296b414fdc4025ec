//! Matrix product operators and the finite-state rule tables that
//! generate them.
//!
//! A rule table is a weighted automaton: bond labels are automaton states,
//! and each rule `(left, right) -> weight * op` places a local operator in
//! the MPO tensor block addressed by that pair of states. Compiling the
//! table on `n` sites, with the designated start label on the far left and
//! accept label on the far right, yields the MPO for the sum over all
//! accepting label strings.

use std::collections::BTreeMap;

use crate::tensor::{contract, DenseTensor, C64, ONE, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rule {
    pub left: String,
    pub right: String,
    pub weight: C64,
    pub op: DenseTensor,
}

impl Rule {
    pub fn new(left: &str, right: &str, weight: C64, op: DenseTensor) -> Self {
        Rule { left: left.into(), right: right.into(), weight, op }
    }
}

/// Site-local replacement for the global rule set. When the bond alphabets
/// differ from site to site (site-dependent constructions), the override
/// also replaces the alphabets on both sides of the site.
#[derive(Debug, Clone, Default)]
pub struct SiteRules {
    pub left_alphabet: Option<Vec<String>>,
    pub right_alphabet: Option<Vec<String>>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone)]
pub struct RuleTable {
    pub alphabet: Vec<String>,
    pub rules: Vec<Rule>,
    pub left_boundary: String,
    pub right_boundary: String,
    pub overrides: BTreeMap<usize, SiteRules>,
}

impl RuleTable {
    pub fn uniform(
        alphabet: &[&str],
        rules: Vec<Rule>,
        left_boundary: &str,
        right_boundary: &str,
    ) -> Self {
        RuleTable {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            rules,
            left_boundary: left_boundary.into(),
            right_boundary: right_boundary.into(),
            overrides: BTreeMap::new(),
        }
    }

    fn phys_dim(&self) -> Result<usize> {
        let op = self
            .rules
            .first()
            .or_else(|| self.overrides.values().flat_map(|s| s.rules.first()).next())
            .ok_or_else(|| Error::Rules("rule table has no rules".into()))?;
        Ok(op.op.shape()[0])
    }

    fn left_alphabet(&self, site: usize) -> &[String] {
        self.overrides
            .get(&site)
            .and_then(|s| s.left_alphabet.as_deref())
            .unwrap_or(&self.alphabet)
    }

    fn right_alphabet(&self, site: usize) -> &[String] {
        self.overrides
            .get(&site)
            .and_then(|s| s.right_alphabet.as_deref())
            .unwrap_or(&self.alphabet)
    }

    fn site_rules(&self, site: usize) -> &[Rule] {
        self.overrides
            .get(&site)
            .map(|s| s.rules.as_slice())
            .unwrap_or(&self.rules)
    }

    /// Structural checks: op shapes, boundary labels, alphabet consistency
    /// between neighboring sites, no duplicate label pairs at a site, and
    /// the monotone label convention (a rule never moves to an earlier
    /// label in the alphabet ordering).
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if n_sites < 2 {
            return Err(Error::Rules("need at least two sites".into()));
        }
        let d = self.phys_dim()?;
        for site in 0..n_sites {
            let la = self.left_alphabet(site);
            let ra = self.right_alphabet(site);
            if site + 1 < n_sites && ra != self.left_alphabet(site + 1) {
                return Err(Error::Rules(format!(
                    "alphabet mismatch on bond between sites {site} and {}",
                    site + 1
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for r in self.site_rules(site) {
                if r.op.shape() != [d, d] {
                    return Err(Error::Rules(format!(
                        "operator for rule ({}, {}) is not {d}x{d}",
                        r.left, r.right
                    )));
                }
                let li = la.iter().position(|s| *s == r.left);
                let ri = ra.iter().position(|s| *s == r.right);
                let (li, ri) = match (li, ri) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        if self.overrides.contains_key(&site) {
                            return Err(Error::Rules(format!(
                                "rule ({}, {}) at site {site} uses labels outside the site alphabets",
                                r.left, r.right
                            )));
                        }
                        // uniform table at a boundary site: rows/columns
                        // outside the boundary slice simply drop out
                        continue;
                    }
                };
                if li > ri && la == ra {
                    return Err(Error::Rules(format!(
                        "rule ({}, {}) violates the monotone label ordering",
                        r.left, r.right
                    )));
                }
                if !seen.insert((r.left.clone(), r.right.clone())) {
                    return Err(Error::Rules(format!(
                        "duplicate rule ({}, {}) at site {site}",
                        r.left, r.right
                    )));
                }
            }
        }
        if !self.left_alphabet(0).contains(&self.left_boundary) {
            return Err(Error::Rules("left boundary label not in alphabet".into()));
        }
        if !self
            .right_alphabet(n_sites - 1)
            .contains(&self.right_boundary)
        {
            return Err(Error::Rules("right boundary label not in alphabet".into()));
        }
        Ok(())
    }

    /// Compile the table into an MPO on `n_sites` sites. The first site is
    /// restricted to the start label on its left bond and the last site to
    /// the accept label on its right bond.
    pub fn to_mpo(&self, n_sites: usize) -> Result<Mpo> {
        self.validate(n_sites)?;
        let d = self.phys_dim()?;
        let mut sites = Vec::with_capacity(n_sites);
        for site in 0..n_sites {
            let la = self.left_alphabet(site);
            let ra = self.right_alphabet(site);
            let lb: Vec<&String> = if site == 0 {
                vec![&self.left_boundary]
            } else {
                la.iter().collect()
            };
            let rb: Vec<&String> = if site == n_sites - 1 {
                vec![&self.right_boundary]
            } else {
                ra.iter().collect()
            };
            let mut w = DenseTensor::zeros(&[lb.len(), d, d, rb.len()]);
            for r in self.site_rules(site) {
                let li = lb.iter().position(|s| **s == r.left);
                let ri = rb.iter().position(|s| **s == r.right);
                if let (Some(li), Some(ri)) = (li, ri) {
                    for j in 0..d {
                        for i in 0..d {
                            let v = w.at(&[li, j, i, ri]) + r.weight * r.op.at(&[j, i]);
                            w.set(&[li, j, i, ri], v);
                        }
                    }
                }
            }
            sites.push(w);
        }
        Ok(Mpo { sites })
    }
}

/// MPO with site tensors of shape (left bond, row index, column index,
/// right bond); outer bonds have extent 1.
#[derive(Debug, Clone)]
pub struct Mpo {
    pub sites: Vec<DenseTensor>,
}

impl Mpo {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.sites[0].shape()[1]
    }

    /// Internal bond extents (n_sites - 1 values).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1]
            .iter()
            .map(|w| w.shape()[3])
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn identity(n_sites: usize, d: usize) -> Self {
        let site = DenseTensor::eye(d).reshape(&[1, d, d, 1]);
        Mpo { sites: vec![site; n_sites] }
    }

    pub fn scale(&self, a: C64) -> Self {
        let mut out = self.clone();
        out.sites[0] = out.sites[0].scale(a);
        out
    }

    pub fn dagger(&self) -> Self {
        Mpo {
            sites: self
                .sites
                .iter()
                .map(|w| w.permute(&[0, 2, 1, 3]).conj())
                .collect(),
        }
    }

    /// Operator sum via direct sum of the virtual bonds.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_sites(), other.n_sites());
        let n = self.n_sites();
        let d = self.phys_dim();
        let mut sites = Vec::with_capacity(n);
        for k in 0..n {
            let a = &self.sites[k];
            let b = &other.sites[k];
            let (la, ra) = (a.shape()[0], a.shape()[3]);
            let (lb, rb) = (b.shape()[0], b.shape()[3]);
            let (l, r) = if k == 0 {
                (1, ra + rb)
            } else if k == n - 1 {
                (la + lb, 1)
            } else {
                (la + lb, ra + rb)
            };
            let mut w = DenseTensor::zeros(&[l, d, d, r]);
            let (l_off, r_off) = (if k == 0 { 0 } else { la }, if k == n - 1 { 0 } else { ra });
            for li in 0..la {
                for j in 0..d {
                    for i in 0..d {
                        for ri in 0..ra {
                            w.set(&[li, j, i, ri], a.at(&[li, j, i, ri]));
                        }
                    }
                }
            }
            for li in 0..lb {
                for j in 0..d {
                    for i in 0..d {
                        for ri in 0..rb {
                            let v = w.at(&[li + l_off, j, i, ri + r_off])
                                + b.at(&[li, j, i, ri]);
                            w.set(&[li + l_off, j, i, ri + r_off], v);
                        }
                    }
                }
            }
            sites.push(w);
        }
        Mpo { sites }
    }

    /// Operator product `self * other`; bonds multiply.
    pub fn multiply(&self, other: &Self) -> Self {
        assert_eq!(self.n_sites(), other.n_sites());
        let d = self.phys_dim();
        let sites = self
            .sites
            .iter()
            .zip(&other.sites)
            .map(|(a, b)| {
                let (la, ra) = (a.shape()[0], a.shape()[3]);
                let (lb, rb) = (b.shape()[0], b.shape()[3]);
                // (la, j, m, ra) x (lb, m, i, rb) over m
                contract(a, b, &[2], &[1])
                    .permute(&[0, 3, 1, 4, 2, 5])
                    .reshape(&[la * lb, d, d, ra * rb])
            })
            .collect();
        Mpo { sites }
    }

    /// Hilbert-Schmidt inner product tr(self^dagger * other).
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.n_sites(), other.n_sites());
        let mut env = DenseTensor::from_data(&[1, 1], vec![ONE]);
        for (a, b) in self.sites.iter().zip(&other.sites) {
            let tmp = contract(&env, &a.conj(), &[0], &[0]);
            env = contract(&tmp, b, &[0, 1, 2], &[0, 1, 2]);
        }
        env.data()[0]
    }

    /// Hilbert-Schmidt norm sqrt(tr(A^dagger A)).
    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).re.max(0.0).sqrt()
    }

    pub fn trace(&self) -> C64 {
        let mut env = DenseTensor::from_data(&[1], vec![ONE]);
        for w in &self.sites {
            let mut traced = DenseTensor::zeros(&[w.shape()[0], w.shape()[3]]);
            for l in 0..w.shape()[0] {
                for r in 0..w.shape()[3] {
                    let mut acc = ZERO;
                    for p in 0..w.shape()[1] {
                        acc += w.at(&[l, p, p, r]);
                    }
                    traced.set(&[l, r], acc);
                }
            }
            env = contract(&env, &traced, &[0], &[0]);
        }
        env.data()[0]
    }

    /// Dense matrix of the full operator. Guarded against blowing up:
    /// refuses Hilbert space dimensions above 4096. The two chain halves
    /// are contracted separately and joined across the middle bond so the
    /// largest intermediate stays modest.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let n = self.n_sites();
        let d = self.phys_dim();
        let dim = d.checked_pow(n as u32).filter(|&x| x <= 4096).ok_or_else(|| {
            Error::SizeGuard(format!("dense operator for d={d}, n={n} exceeds 4096"))
        })?;
        let half = n / 2;
        let grow = |tensors: &[DenseTensor]| -> DenseTensor {
            // accumulator axes (rows, cols, right bond)
            let mut acc = DenseTensor::from_data(&[1, 1, 1], vec![ONE]);
            for w in tensors {
                let (dj, di, r) = (w.shape()[1], w.shape()[2], w.shape()[3]);
                let (aj, ai) = (acc.shape()[0], acc.shape()[1]);
                acc = contract(&acc, w, &[2], &[0])
                    .permute(&[0, 2, 1, 3, 4])
                    .reshape(&[aj * dj, ai * di, r]);
            }
            acc
        };
        let left = grow(&self.sites[..half]);
        let rev: Vec<DenseTensor> = self.sites[half..]
            .iter()
            .rev()
            .map(|w| w.permute(&[3, 1, 2, 0]))
            .collect();
        // build the right half from the right edge inward, then flip
        let mut right = DenseTensor::from_data(&[1, 1, 1], vec![ONE]);
        for w in &rev {
            let (dj, di, l) = (w.shape()[1], w.shape()[2], w.shape()[3]);
            let (aj, ai) = (right.shape()[0], right.shape()[1]);
            right = contract(&right, w, &[2], &[0])
                .permute(&[2, 0, 3, 1, 4])
                .reshape(&[dj * aj, di * ai, l]);
        }
        let dl = d.pow(half as u32);
        let dr = dim / dl;
        let joined = contract(&left, &right, &[2], &[2]);
        Ok(joined
            .permute(&[0, 2, 1, 3])
            .reshape(&[dl * dr, dl * dr]))
    }

    /// Flatten the two physical legs for treatment as a vectorized chain.
    pub fn to_chain(&self) -> Vec<DenseTensor> {
        self.sites
            .iter()
            .map(|w| {
                let s = w.shape().to_vec();
                w.clone().reshape(&[s[0], s[1] * s[2], s[3]])
            })
            .collect()
    }

    pub fn from_chain(chain: Vec<DenseTensor>, d: usize) -> Self {
        Mpo {
            sites: chain
                .into_iter()
                .map(|t| {
                    let s = t.shape().to_vec();
                    assert_eq!(s[1], d * d);
                    t.reshape(&[s[0], d, d, s[2]])
                })
                .collect(),
        }
    }
}
