//! Two-dimensional tensor networks on a square grid: PEPO/PEPS containers,
//! a rule-table compiler over four virtual inputs, dense oracles for small
//! grids, and approximate boundary-MPS contraction of expectation values.
//!
//! Grid sites are addressed `(row, col)` and numbered in row-major raster
//! order. PEPO site tensors carry axes `(left, right, top, bottom, out, in)`;
//! PEPS site tensors carry `(left, right, top, bottom, phys)`. Border bonds
//! have extent 1.

pub mod builders;

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compress::{apply_compress, CompressOptions};
use crate::error::Error;
use crate::mpo::Mpo;
use crate::mps::Mps;
use crate::tensor::{contract, DenseTensor, C64};
use crate::Result;

const ONE: C64 = C64::new(1.0, 0.0);

/// Largest dense Hilbert-space dimension (d^(rows*cols)) for grid oracles.
pub const DENSE_GRID_LIMIT: usize = 4096;

/// A single 2D automaton rule: four virtual input labels, a local operator
/// and a scalar weight.
#[derive(Debug, Clone)]
pub struct Rule2D {
    pub left: String,
    pub right: String,
    pub top: String,
    pub bottom: String,
    pub weight: C64,
    pub op: DenseTensor,
}

impl Rule2D {
    pub fn new(left: &str, right: &str, top: &str, bottom: &str, weight: C64, op: DenseTensor) -> Self {
        Rule2D {
            left: left.to_string(),
            right: right.to_string(),
            top: top.to_string(),
            bottom: bottom.to_string(),
            weight,
            op,
        }
    }
}

/// Boundary labels, one per border bond position.
#[derive(Debug, Clone)]
pub struct Boundary2D {
    /// Label of the left border bond in each row.
    pub left: Vec<String>,
    pub right: Vec<String>,
    /// Label of the top border bond in each column.
    pub top: Vec<String>,
    pub bottom: Vec<String>,
}

impl Boundary2D {
    /// The same four labels on every border position.
    pub fn uniform(rows: usize, cols: usize, left: &str, right: &str, top: &str, bottom: &str) -> Self {
        Boundary2D {
            left: vec![left.to_string(); rows],
            right: vec![right.to_string(); rows],
            top: vec![top.to_string(); cols],
            bottom: vec![bottom.to_string(); cols],
        }
    }
}

/// A full 2D rule table: declared alphabets (the bond dimension of each
/// direction equals the cardinality of its alphabet), per-site rules and
/// boundary labels.
#[derive(Debug, Clone)]
pub struct RuleTable2D {
    pub rows: usize,
    pub cols: usize,
    pub d: usize,
    /// Horizontal bond alphabet, shared by all interior horizontal bonds.
    pub h_labels: Vec<String>,
    /// Default vertical bond alphabet.
    pub v_labels: Vec<String>,
    /// Per-column overrides of the vertical alphabet.
    pub v_labels_by_col: BTreeMap<usize, Vec<String>>,
    /// Row-major per-site rule lists.
    pub site_rules: Vec<Vec<Rule2D>>,
    pub boundary: Boundary2D,
}

impl RuleTable2D {
    /// A table applying the same rule list at every site.
    pub fn uniform(rules: Vec<Rule2D>, grid_n: usize, d: usize, boundary: Boundary2D) -> Self {
        let mut h_labels: Vec<String> = Vec::new();
        let mut v_labels: Vec<String> = Vec::new();
        for r in &rules {
            for l in [&r.left, &r.right] {
                if !h_labels.contains(l) {
                    h_labels.push(l.clone());
                }
            }
            for l in [&r.top, &r.bottom] {
                if !v_labels.contains(l) {
                    v_labels.push(l.clone());
                }
            }
        }
        h_labels.sort();
        v_labels.sort();
        let site_rules = vec![rules; grid_n * grid_n];
        RuleTable2D {
            rows: grid_n,
            cols: grid_n,
            d,
            h_labels,
            v_labels,
            v_labels_by_col: BTreeMap::new(),
            site_rules,
            boundary,
        }
    }

    fn v_labels_for_col(&self, c: usize) -> &[String] {
        self.v_labels_by_col.get(&c).map(|v| v.as_slice()).unwrap_or(&self.v_labels)
    }
}

/// Projected entangled-pair operator on a rows x cols grid.
#[derive(Debug, Clone)]
pub struct Pepo {
    pub rows: usize,
    pub cols: usize,
    pub d: usize,
    /// Row-major site tensors, axes (left, right, top, bottom, out, in).
    pub sites: Vec<DenseTensor>,
}

impl Pepo {
    pub fn site(&self, r: usize, c: usize) -> &DenseTensor {
        &self.sites[r * self.cols + c]
    }

    /// Identity operator: all bonds extent 1.
    pub fn identity(rows: usize, cols: usize, d: usize) -> Self {
        let eye = DenseTensor::eye(d).reshape(&[1, 1, 1, 1, d, d]);
        Pepo {
            rows,
            cols,
            d,
            sites: vec![eye; rows * cols],
        }
    }

    /// Product of on-site operators (identity elsewhere); all bonds extent 1.
    pub fn product(rows: usize, cols: usize, d: usize, ops: &[(usize, DenseTensor)]) -> Self {
        let mut pepo = Pepo::identity(rows, cols, d);
        for (site, op) in ops {
            let cur = pepo.sites[*site].clone().reshape(&[d, d]);
            let merged = contract(op, &cur, &[1], &[0]);
            pepo.sites[*site] = merged.reshape(&[1, 1, 1, 1, d, d]);
        }
        pepo
    }

    /// Maximum horizontal bond extent.
    pub fn max_horizontal_bond(&self) -> usize {
        self.sites.iter().map(|t| t.shape()[1]).max().unwrap_or(1)
    }

    /// Maximum vertical bond extent over the given column.
    pub fn max_vertical_bond_in_col(&self, c: usize) -> usize {
        (0..self.rows).map(|r| self.site(r, c).shape()[3]).max().unwrap_or(1)
    }

    /// Maximum vertical bond extent.
    pub fn max_vertical_bond(&self) -> usize {
        (0..self.cols).map(|c| self.max_vertical_bond_in_col(c)).max().unwrap_or(1)
    }

    /// Dense matrix of the operator (row-major raster site ordering),
    /// guarded by `DENSE_GRID_LIMIT`.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let n = self.rows * self.cols;
        let dim = self.d.checked_pow(n as u32).filter(|&x| x <= DENSE_GRID_LIMIT).ok_or_else(|| {
            Error::SizeGuard(format!("dense grid operator needs d^{n} <= {DENSE_GRID_LIMIT}"))
        })?;
        let mut out = DenseTensor::zeros(&[dim, dim]);
        let d = self.d;
        // Fix the ket (input) indices site by site and contract the
        // remaining single-layer network column by column.
        for ket in 0..dim {
            // Row-major bits of the ket index.
            let mut bits = vec![0usize; n];
            let mut rem = ket;
            for s in (0..n).rev() {
                bits[s] = rem % d;
                rem /= d;
            }
            let bra = self.apply_to_basis(&bits);
            for (bi, v) in bra.iter().enumerate() {
                if v.norm_sqr() != 0.0 {
                    let cur = out.at(&[bi, ket]);
                    out.set(&[bi, ket], cur + *v);
                }
            }
        }
        Ok(out)
    }

    /// Column of the dense matrix for one ket basis state (row-major bits).
    fn apply_to_basis(&self, bits: &[usize]) -> Vec<C64> {
        let d = self.d;
        // Frontier over (right bonds of the current column) x (bra indices
        // accumulated so far, column-major during the sweep).
        let mut state = DenseTensor::from_data(&[1, 1], vec![ONE]);
        // state axes: (bond group flattened, bra group flattened)
        let mut bond_dims: Vec<usize> = vec![1; self.rows];
        for c in 0..self.cols {
            // Contract this column's sites (ket index fixed) from top to
            // bottom against the frontier.
            // state: [prod(bond_dims), bra_so_far]
            let bra_dim = state.shape()[1];
            // Expand frontier bonds into per-row axes and add a dummy
            // vertical bond for the first row.
            let mut shape: Vec<usize> = bond_dims.clone();
            shape.push(bra_dim);
            shape.push(1);
            // axes during the sweep:
            // [l_{r..rows-1}, bra, (r, out) pairs so far..., vbond]
            let mut cur = state.reshape(&shape);
            for r in 0..self.rows {
                let t = self.site(r, c);
                let sh = t.shape().to_vec(); // [l, rr, vt, vb, o, i]
                let k = bits[r * self.cols + c];
                // Slice the ket index.
                let mut sl = DenseTensor::zeros(&[sh[0], sh[1], sh[2], sh[3], sh[4]]);
                {
                    let src = t.data();
                    let dst = sl.data_mut();
                    let stride = sh[5];
                    for (j, v) in dst.iter_mut().enumerate() {
                        *v = src[j * stride + k];
                    }
                }
                // contract l_r with sl's left, vbond with sl's top.
                let nl = cur.rank();
                cur = contract(&cur, &sl, &[0, nl - 1], &[0, 2]);
                // result: [l_{r+1},..., bra, prev pairs..., rr, vb, out]
                // move vb to the end
                let nr = cur.rank();
                let mut perm: Vec<usize> = (0..nr).collect();
                perm.remove(nr - 2);
                perm.push(nr - 2);
                cur = cur.permute(&perm);
            }
            // cur axes now: [bra, (r_0, out_0), (r_1, out_1), ..., vbond=1]
            // gather: new bonds r_0..r_{rows-1}, new bra = bra * outs
            let nr = cur.rank();
            // order: bra, r0, o0, r1, o1, ..., v
            let mut perm: Vec<usize> = Vec::with_capacity(nr);
            // rights first
            for r in 0..self.rows {
                perm.push(1 + 2 * r);
            }
            // bra, then outs
            perm.push(0);
            for r in 0..self.rows {
                perm.push(2 + 2 * r);
            }
            perm.push(nr - 1);
            cur = cur.permute(&perm);
            let sh = cur.shape().to_vec();
            bond_dims = sh[..self.rows].to_vec();
            let bond_prod: usize = bond_dims.iter().product();
            let bra_new: usize = sh[self.rows..nr - 1].iter().product();
            state = cur.reshape(&[bond_prod, bra_new]);
        }
        // state: [1, bra column-major by (col, row)]; reorder to row-major.
        let data = state.into_data();
        let n = self.rows * self.cols;
        let mut out = vec![C64::new(0.0, 0.0); data.len()];
        for (ci, v) in data.iter().enumerate() {
            // ci digits: ((col, row), out) in sweep order: for c, for r.
            let mut digits = vec![0usize; n];
            let mut rem = ci;
            for idx in (0..n).rev() {
                digits[idx] = rem % d;
                rem /= d;
            }
            // digits[idx] corresponds to column c = idx / rows, row r = idx % rows
            let mut ri = 0usize;
            for r in 0..self.rows {
                for c in 0..self.cols {
                    ri = ri * d + digits[c * self.rows + r];
                }
            }
            out[ri] = *v;
        }
        out
    }
}

/// Projected entangled-pair state on a rows x cols grid.
#[derive(Debug, Clone)]
pub struct Peps {
    pub rows: usize,
    pub cols: usize,
    pub d: usize,
    /// Row-major site tensors, axes (left, right, top, bottom, phys).
    pub sites: Vec<DenseTensor>,
}

impl Peps {
    pub fn site(&self, r: usize, c: usize) -> &DenseTensor {
        &self.sites[r * self.cols + c]
    }

    /// Product state from per-site local vectors (row-major).
    pub fn product(rows: usize, cols: usize, locals: &[Vec<C64>]) -> Self {
        assert_eq!(locals.len(), rows * cols);
        let d = locals[0].len();
        let sites = locals
            .iter()
            .map(|v| DenseTensor::from_data(&[1, 1, 1, 1, d], v.clone()))
            .collect();
        Peps { rows, cols, d, sites }
    }

    /// Random PEPS with all interior bonds of extent `chi`.
    pub fn random(rows: usize, cols: usize, d: usize, chi: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sites = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let l = if c == 0 { 1 } else { chi };
                let rr = if c == cols - 1 { 1 } else { chi };
                let t = if r == 0 { 1 } else { chi };
                let b = if r == rows - 1 { 1 } else { chi };
                let len = l * rr * t * b * d;
                let data: Vec<C64> = (0..len)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                sites.push(DenseTensor::from_data(&[l, rr, t, b, d], data));
            }
        }
        Peps { rows, cols, d, sites }
    }

    /// Dense state vector (row-major raster ordering), guarded.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let n = self.rows * self.cols;
        let dim = self.d.checked_pow(n as u32).filter(|&x| x <= DENSE_GRID_LIMIT).ok_or_else(|| {
            Error::SizeGuard(format!("dense grid state needs d^{n} <= {DENSE_GRID_LIMIT}"))
        })?;
        let d = self.d;
        let mut state = DenseTensor::from_data(&[1, 1], vec![ONE]);
        let mut bond_dims: Vec<usize> = vec![1; self.rows];
        for c in 0..self.cols {
            let phys_dim = state.shape()[1];
            let mut shape: Vec<usize> = bond_dims.clone();
            shape.push(phys_dim);
            shape.push(1);
            let mut cur = state.reshape(&shape);
            for r in 0..self.rows {
                let t = self.site(r, c);
                // axes (l, r, t, b, p); contract l and top-bond.
                let nl = cur.rank();
                cur = contract(&cur, t, &[0, nl - 1], &[0, 2]);
                let nr = cur.rank();
                let mut perm: Vec<usize> = (0..nr).collect();
                perm.remove(nr - 2);
                perm.push(nr - 2);
                cur = cur.permute(&perm);
            }
            let nr = cur.rank();
            let mut perm: Vec<usize> = Vec::with_capacity(nr);
            for r in 0..self.rows {
                perm.push(1 + 2 * r);
            }
            perm.push(0);
            for r in 0..self.rows {
                perm.push(2 + 2 * r);
            }
            perm.push(nr - 1);
            cur = cur.permute(&perm);
            let sh = cur.shape().to_vec();
            bond_dims = sh[..self.rows].to_vec();
            let bond_prod: usize = bond_dims.iter().product();
            let phys_new: usize = sh[self.rows..nr - 1].iter().product();
            state = cur.reshape(&[bond_prod, phys_new]);
        }
        let data = state.into_data();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (ci, v) in data.iter().enumerate() {
            let mut digits = vec![0usize; n];
            let mut rem = ci;
            for idx in (0..n).rev() {
                digits[idx] = rem % d;
                rem /= d;
            }
            let mut ri = 0usize;
            for r in 0..self.rows {
                for c in 0..self.cols {
                    ri = ri * d + digits[c * self.rows + r];
                }
            }
            out[ri] = *v;
        }
        Ok(DenseTensor::from_data(&[dim], out))
    }
}

/// Compile a 2D rule table into a PEPO. Border bonds are sliced to the
/// declared boundary labels; rules whose border-side labels do not match are
/// dropped, exactly as in the 1D compiler.
pub fn pepo_from_rules_2d(table: &RuleTable2D) -> Result<Pepo> {
    let (rows, cols, d) = (table.rows, table.cols, table.d);
    if table.boundary.left.len() != rows
        || table.boundary.right.len() != rows
        || table.boundary.top.len() != cols
        || table.boundary.bottom.len() != cols
    {
        return Err(Error::Rules("boundary label missing: border label vectors must cover every border bond".into()));
    }
    if table.site_rules.len() != rows * cols {
        return Err(Error::Rules(format!("expected {} site rule lists, got {}", rows * cols, table.site_rules.len())));
    }
    let h_index: HashMap<&str, usize> = table.h_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut sites = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v_alpha = table.v_labels_for_col(c);
            let v_index: HashMap<&str, usize> = v_alpha.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
            let dl = if c == 0 { 1 } else { table.h_labels.len() };
            let dr = if c == cols - 1 { 1 } else { table.h_labels.len() };
            let dt = if r == 0 { 1 } else { v_alpha.len() };
            let db = if r == rows - 1 { 1 } else { v_alpha.len() };
            let mut t = DenseTensor::zeros(&[dl, dr, dt, db, d, d]);
            let mut seen: HashMap<(usize, usize, usize, usize), (C64, Vec<C64>)> = HashMap::new();
            for rule in &table.site_rules[r * cols + c] {
                if rule.op.shape() != [d, d] {
                    return Err(Error::Rules(format!("rule operator must be {d}x{d}")));
                }
                // Border slicing.
                let il = if c == 0 {
                    if rule.left != table.boundary.left[r] {
                        continue;
                    }
                    0
                } else {
                    *h_index.get(rule.left.as_str()).ok_or_else(|| {
                        Error::Rules(format!("label '{}' not in horizontal alphabet", rule.left))
                    })?
                };
                let ir = if c == cols - 1 {
                    if rule.right != table.boundary.right[r] {
                        continue;
                    }
                    0
                } else {
                    *h_index.get(rule.right.as_str()).ok_or_else(|| {
                        Error::Rules(format!("label '{}' not in horizontal alphabet", rule.right))
                    })?
                };
                let it = if r == 0 {
                    if rule.top != table.boundary.top[c] {
                        continue;
                    }
                    0
                } else {
                    *v_index.get(rule.top.as_str()).ok_or_else(|| {
                        Error::Rules(format!("label '{}' not in vertical alphabet of column {c}", rule.top))
                    })?
                };
                let ib = if r == rows - 1 {
                    if rule.bottom != table.boundary.bottom[c] {
                        continue;
                    }
                    0
                } else {
                    *v_index.get(rule.bottom.as_str()).ok_or_else(|| {
                        Error::Rules(format!("label '{}' not in vertical alphabet of column {c}", rule.bottom))
                    })?
                };
                if seen.insert((il, ir, it, ib), (rule.weight, rule.op.data().to_vec())).is_some() {
                    return Err(Error::Rules(format!(
                        "duplicate rule at site ({r},{c}) for inputs ({}, {}, {}, {})",
                        rule.left, rule.right, rule.top, rule.bottom
                    )));
                }
                for oi in 0..d {
                    for ii in 0..d {
                        let v = t.at(&[il, ir, it, ib, oi, ii]) + rule.weight * rule.op.at(&[oi, ii]);
                        t.set(&[il, ir, it, ib, oi, ii], v);
                    }
                }
            }
            sites.push(t);
        }
    }
    Ok(Pepo { rows, cols, d, sites })
}

/// Report from a boundary-MPS contraction.
#[derive(Debug, Clone)]
pub struct BoundaryReport {
    pub value: C64,
    /// Relative compression distance per absorbed column.
    pub column_errors: Vec<f64>,
    /// Per-column convergence flags from the variational fits.
    pub column_converged: Vec<bool>,
    /// Number of column MPO-times-MPS applications performed.
    pub columns_applied: usize,
}

/// Sandwich tensor of one site: conj(bra) x operator x ket, with the three
/// layers' virtual axes grouped per direction.
fn sandwich_site(a: &Peps, m: &Pepo, r: usize, c: usize) -> DenseTensor {
    let ket = a.site(r, c); // (l, r, t, b, p)
    let w = m.site(r, c); // (l, r, t, b, o, i)
    let bra = ket.conj();
    // w x ket over (i, p): -> (lw, rw, tw, bw, o, lk, rk, tk, bk)
    let t1 = contract(w, ket, &[5], &[4]);
    // bra x t1 over (p, o): -> (lb, rb, tb, bb, lw, rw, tw, bw, lk, rk, tk, bk)
    let t2 = contract(&bra, &t1, &[4], &[4]);
    // group (lb, lw, lk), (rb, rw, rk), (tb, tw, tk), (bb, bw, bk)
    let t3 = t2.permute(&[0, 4, 8, 1, 5, 9, 2, 6, 10, 3, 7, 11]);
    let sh = t3.shape().to_vec();
    let l = sh[0] * sh[1] * sh[2];
    let rr = sh[3] * sh[4] * sh[5];
    let tt = sh[6] * sh[7] * sh[8];
    let bb = sh[9] * sh[10] * sh[11];
    t3.reshape(&[l, rr, tt, bb])
}

/// Column `c` of the sandwich network as an MPO over the row index:
/// bond axes are the vertical groups, physical out/in are the right/left
/// groups.
fn column_mpo(a: &Peps, m: &Pepo, c: usize) -> Vec<DenseTensor> {
    (0..a.rows)
        .map(|r| {
            let s = sandwich_site(a, m, r, c); // (L, R, T, B)
            s.permute(&[2, 1, 0, 3]) // (T, R, L, B) = (Dl, out, in, Dr)
        })
        .collect()
}

/// Approximate `<psi|M|psi>` by absorbing columns left to right into a
/// boundary MPS truncated to `d_cut`.
pub fn boundary_contract_expectation(psi: &Peps, m: &Pepo, d_cut: usize) -> Result<BoundaryReport> {
    if psi.rows != m.rows || psi.cols != m.cols || psi.d != m.d {
        return Err(Error::Shape("state and operator grids must match".into()));
    }
    let cols = psi.cols;
    // First column as an MPS: physical index = right group.
    let first = column_mpo(psi, m, 0);
    let mut mps_sites: Vec<DenseTensor> = first
        .into_iter()
        .map(|t| {
            let sh = t.shape().to_vec(); // (T, R, L=1, B)
            t.reshape(&[sh[0], sh[1], sh[3]])
        })
        .collect();
    let mut column_errors = Vec::new();
    let mut column_converged = Vec::new();
    let mut applied = 0usize;
    for c in 1..cols.max(1) {
        if c == cols - 1 {
            break;
        }
        let w = column_mpo(psi, m, c);
        let op = Mpo { sites: w };
        let state = Mps { sites: mps_sites };
        let opts = CompressOptions::new(d_cut);
        let (next, rep) = apply_compress(&op, &state, &opts);
        column_errors.push(rep.relative_distance);
        column_converged.push(rep.converged);
        applied += 1;
        mps_sites = next.sites;
    }
    // Close with the last column (physical index = left group).
    let value = if cols == 1 {
        // Single column: the boundary MPS already has phys extent 1.
        let mut acc = DenseTensor::from_data(&[1, 1], vec![ONE]);
        for t in &mps_sites {
            let sh = t.shape().to_vec();
            let v = t.clone().reshape(&[sh[0], sh[2]]);
            acc = contract(&acc, &v, &[1], &[0]);
        }
        acc.at(&[0, 0])
    } else {
        let last = column_mpo(psi, m, cols - 1);
        // Contract row by row: transfer over (mps bond, last-column bond).
        let mut acc = DenseTensor::from_data(&[1, 1], vec![ONE]);
        for (t, w) in mps_sites.iter().zip(&last) {
            // t: (l, p, r); w: (T, R=1, L, B) with L == p
            let sh = w.shape().to_vec();
            let wv = w.clone().reshape(&[sh[0], sh[2], sh[3]]); // (T, L, B)
            // acc: (l_t, T_w). contract acc with t over l, then with wv.
            let a1 = contract(&acc, t, &[0], &[0]); // (T_w, p, r)
            let a2 = contract(&a1, &wv, &[0, 1], &[0, 1]); // (r, B)
            acc = a2;
        }
        acc.at(&[0, 0])
    };
    Ok(BoundaryReport {
        value,
        column_errors,
        column_converged,
        columns_applied: applied,
    })
}

/// One addend of a sum of on-site operator products.
#[derive(Debug, Clone)]
pub struct PepsTerm {
    pub coeff: C64,
    /// (raster site, local operator) pairs.
    pub ops: Vec<(usize, DenseTensor)>,
}

/// Cost counter for the term-wise contraction route.
#[derive(Debug, Clone, Default)]
pub struct TermwiseCost {
    pub terms: usize,
    pub columns_applied: usize,
}

/// `<psi| sum_k coeff_k prod ops_k |psi>` evaluated term by term with a
/// fresh boundary contraction per addend.
pub fn peps_expectation_termwise(psi: &Peps, terms: &[PepsTerm], d_cut: usize) -> Result<(C64, TermwiseCost)> {
    let mut total = C64::new(0.0, 0.0);
    let mut cost = TermwiseCost::default();
    for term in terms {
        let m = Pepo::product(psi.rows, psi.cols, psi.d, &term.ops);
        let rep = boundary_contract_expectation(psi, &m, d_cut)?;
        total += term.coeff * rep.value;
        cost.terms += 1;
        cost.columns_applied += rep.columns_applied;
    }
    Ok((total, cost))
}

#[cfg(test)]
mod tests;
