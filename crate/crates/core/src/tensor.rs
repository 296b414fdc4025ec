//! Dense complex tensors with row-major storage.
//!
//! Contractions are permute-then-GEMM; factorizations (QR, SVD, Hermitian
//! eigendecomposition) go through faer. A seeded Lanczos solver with full
//! reorthogonalization handles large sparse-like eigenproblems where only
//! a matrix-vector product is available.

use faer::complex_native::c64;
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let n: usize = shape.iter().product();
        DenseTensor { shape: shape.to_vec(), data: vec![ZERO; n] }
    }

    pub fn from_data(shape: &[usize], data: Vec<C64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "data length must match shape"
        );
        DenseTensor { shape: shape.to_vec(), data }
    }

    pub fn scalar(v: C64) -> Self {
        DenseTensor { shape: vec![], data: vec![v] }
    }

    /// Identity matrix as a rank-2 tensor.
    pub fn eye(d: usize) -> Self {
        let mut t = Self::zeros(&[d, d]);
        for i in 0..d {
            t.data[i * d + i] = ONE;
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn size(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    fn strides(shape: &[usize]) -> Vec<usize> {
        let mut s = vec![1usize; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * shape[i + 1];
        }
        s
    }

    pub fn at(&self, idx: &[usize]) -> C64 {
        debug_assert_eq!(idx.len(), self.shape.len());
        let strides = Self::strides(&self.shape);
        let off: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[off]
    }

    pub fn set(&mut self, idx: &[usize], v: C64) {
        let strides = Self::strides(&self.shape);
        let off: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[off] = v;
    }

    /// Reinterpret with a new shape of the same total size.
    pub fn reshape(mut self, shape: &[usize]) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            self.data.len(),
            "reshape must preserve size"
        );
        self.shape = shape.to_vec();
        self
    }

    /// Reorder axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.shape.len());
        let rank = perm.len();
        if rank <= 1 || perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let in_strides = Self::strides(&self.shape);
        // stride of output axis k in the input buffer
        let gather: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut out = vec![ZERO; self.data.len()];
        let mut idx = vec![0usize; rank];
        let mut src = 0usize;
        for slot in out.iter_mut() {
            *slot = self.data[src];
            // odometer over the output multi-index
            for ax in (0..rank).rev() {
                idx[ax] += 1;
                src += gather[ax];
                if idx[ax] < out_shape[ax] {
                    break;
                }
                src -= gather[ax] * out_shape[ax];
                idx[ax] = 0;
            }
        }
        DenseTensor { shape: out_shape, data: out }
    }

    pub fn conj(&self) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape, "add requires equal shapes");
        DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugate-transpose of a rank-2 tensor.
    pub fn dagger(&self) -> Self {
        assert_eq!(self.rank(), 2);
        self.permute(&[1, 0]).conj()
    }
}

/// Full inner product sum(conj(a) * b) over all entries.
pub fn inner(a: &DenseTensor, b: &DenseTensor) -> C64 {
    assert_eq!(a.shape, b.shape, "inner requires equal shapes");
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Contract `axes_a` of `a` with `axes_b` of `b` (paired in order).
/// Output axes are the free axes of `a` followed by the free axes of `b`,
/// each in their original order.
pub fn contract(
    a: &DenseTensor,
    b: &DenseTensor,
    axes_a: &[usize],
    axes_b: &[usize],
) -> DenseTensor {
    assert_eq!(axes_a.len(), axes_b.len());
    for (&ia, &ib) in axes_a.iter().zip(axes_b) {
        assert_eq!(
            a.shape[ia], b.shape[ib],
            "contracted axes must have equal extents"
        );
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|i| !axes_a.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|i| !axes_b.contains(i)).collect();

    let mut perm_a = free_a.clone();
    perm_a.extend_from_slice(axes_a);
    let mut perm_b = axes_b.to_vec();
    perm_b.extend_from_slice(&free_b);

    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let k: usize = axes_a.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape[i]).product();

    let pa = a.permute(&perm_a);
    let pb = b.permute(&perm_b);
    let out = matmul_raw(&pa.data, m, k, &pb.data, n);

    let mut out_shape: Vec<usize> = free_a.iter().map(|&i| a.shape[i]).collect();
    out_shape.extend(free_b.iter().map(|&i| b.shape[i]));
    DenseTensor { shape: out_shape, data: out }
}

/// Kronecker product of two matrices.
pub fn kron(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    assert_eq!(a.rank(), 2);
    assert_eq!(b.rank(), 2);
    let (ra, ca) = (a.shape[0], a.shape[1]);
    let (rb, cb) = (b.shape[0], b.shape[1]);
    // outer product then interleave row/column axes
    contract(a, b, &[], &[])
        .permute(&[0, 2, 1, 3])
        .reshape(&[ra * rb, ca * cb])
}

fn to_mat(data: &[C64], rows: usize, cols: usize) -> Mat<c64> {
    // row-major buffer -> column-major faer matrix
    Mat::from_fn(rows, cols, |i, j| {
        let z = data[i * cols + j];
        c64::new(z.re, z.im)
    })
}

fn from_mat(m: MatRef<'_, c64>) -> DenseTensor {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut data = vec![ZERO; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            let z = m.read(i, j);
            data[i * cols + j] = C64::new(z.re, z.im);
        }
    }
    DenseTensor { shape: vec![rows, cols], data }
}

/// Row-major (m x k) * (k x n) -> row-major (m x n).
pub fn matmul_raw(a: &[C64], m: usize, k: usize, b: &[C64], n: usize) -> Vec<C64> {
    if m == 0 || n == 0 {
        return vec![];
    }
    if k == 0 {
        return vec![ZERO; m * n];
    }
    let fa = to_mat(a, m, k);
    let fb = to_mat(b, k, n);
    let fc = &fa * &fb;
    let mut out = vec![ZERO; m * n];
    for j in 0..n {
        for i in 0..m {
            let z = fc.read(i, j);
            out[i * n + j] = C64::new(z.re, z.im);
        }
    }
    out
}

/// Thin QR of a rank-2 tensor with the diagonal of R made real and
/// non-negative, which pins the gauge freedom.
pub fn qr_thin(a: &DenseTensor) -> (DenseTensor, DenseTensor) {
    assert_eq!(a.rank(), 2);
    let (rows, cols) = (a.shape[0], a.shape[1]);
    let k = rows.min(cols);
    let fa = to_mat(&a.data, rows, cols);
    let qr = fa.qr();
    let q = qr.compute_thin_q();
    let r = qr.compute_thin_r();
    let mut q = from_mat(q.as_ref());
    let mut r = from_mat(r.as_ref());
    for i in 0..k {
        let rii = r.at(&[i, i]);
        let abs = rii.norm();
        if abs > 0.0 {
            let phase = rii / abs;
            let ph_c = phase.conj();
            for j in 0..cols {
                let v = r.at(&[i, j]);
                r.set(&[i, j], v * ph_c);
            }
            for j in 0..rows {
                let v = q.at(&[j, i]);
                q.set(&[j, i], v * phase);
            }
        }
    }
    (q, r)
}

/// Thin LQ: `a = L * Q` with orthonormal rows in Q and the diagonal of L
/// real and non-negative.
pub fn lq_thin(a: &DenseTensor) -> (DenseTensor, DenseTensor) {
    let (q, r) = qr_thin(&a.dagger());
    (r.dagger(), q.dagger())
}

/// Thin SVD: returns (u, singular values, v_dagger).
pub fn svd_matrix(a: &DenseTensor) -> (DenseTensor, Vec<f64>, DenseTensor) {
    assert_eq!(a.rank(), 2);
    let (rows, cols) = (a.shape[0], a.shape[1]);
    let fa = to_mat(&a.data, rows, cols);
    let svd = fa.thin_svd();
    let u = from_mat(svd.u().as_ref());
    let v = from_mat(svd.v().as_ref());
    let k = rows.min(cols);
    let mut s = vec![0.0; k];
    for i in 0..k {
        s[i] = svd.s_diagonal().read(i).re;
    }
    (u, s, v.dagger())
}

/// Hermitian eigendecomposition, eigenvalues ascending.
/// Returns (eigenvalues, matrix whose columns are eigenvectors).
pub fn eigh(a: &DenseTensor) -> (Vec<f64>, DenseTensor) {
    assert_eq!(a.rank(), 2);
    let n = a.shape[0];
    assert_eq!(a.shape[1], n);
    let fa = to_mat(&a.data, n, n);
    let evd = fa.selfadjoint_eigendecomposition(faer::Side::Lower);
    let u = from_mat(evd.u().as_ref());
    let mut vals = vec![0.0; n];
    for i in 0..n {
        vals[i] = evd.s().column_vector().read(i).re;
    }
    // faer returns ascending order already; sort defensively
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut vecs = DenseTensor::zeros(&[n, n]);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(&[r, new], u.at(&[r, old]));
        }
    }
    (sorted_vals, vecs)
}

/// General (non-Hermitian) eigenvalues of a square matrix.
pub fn eigenvalues(a: &DenseTensor) -> Vec<C64> {
    assert_eq!(a.rank(), 2);
    let n = a.shape[0];
    assert_eq!(a.shape[1], n);
    let fa = to_mat(&a.data, n, n);
    let ev: Vec<c64> = fa.eigenvalues();
    ev.iter().map(|z| C64::new(z.re, z.im)).collect()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lowest eigenpair of a Hermitian operator given only its action.
///
/// Lanczos with full reorthogonalization and implicit restarts from the
/// current Ritz vector. `v0` seeds the Krylov space; convergence is the
/// Ritz residual estimate dropping below `tol * max(1, |theta|)`.
pub fn lanczos_lowest<F>(
    dim: usize,
    mut apply: F,
    v0: &[C64],
    tol: f64,
    max_restarts: usize,
) -> Result<(f64, Vec<C64>)>
where
    F: FnMut(&[C64]) -> Vec<C64>,
{
    assert_eq!(v0.len(), dim);
    let krylov = 30usize.min(dim);
    let mut start = v0.to_vec();
    let n0 = vec_norm(&start);
    if n0 == 0.0 {
        return Err(Error::Config("lanczos seed vector is zero".into()));
    }
    for s in start.iter_mut() {
        *s /= n0;
    }

    let mut theta = 0.0f64;
    for _restart in 0..max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        for j in 0..krylov {
            let mut w = apply(&basis[j]);
            let alpha = vec_dot(&basis[j], &w).re;
            alphas.push(alpha);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for v in &basis {
                    let c = vec_dot(v, &w);
                    vec_axpy(&mut w, -c, v);
                }
            }
            let beta = vec_norm(&w);
            if beta < 1e-14 || j + 1 == krylov {
                betas.push(beta);
                break;
            }
            betas.push(beta);
            for wi in w.iter_mut() {
                *wi /= beta;
            }
            basis.push(w);
        }

        let m = alphas.len();
        let mut tri = DenseTensor::zeros(&[m, m]);
        for i in 0..m {
            tri.set(&[i, i], C64::new(alphas[i], 0.0));
            if i + 1 < m {
                tri.set(&[i, i + 1], C64::new(betas[i], 0.0));
                tri.set(&[i + 1, i], C64::new(betas[i], 0.0));
            }
        }
        let (vals, vecs) = eigh(&tri);
        theta = vals[0];
        let mut ritz = vec![ZERO; dim];
        for (j, v) in basis.iter().enumerate() {
            vec_axpy(&mut ritz, vecs.at(&[j, 0]), v);
        }
        let nr = vec_norm(&ritz);
        for r in ritz.iter_mut() {
            *r /= nr;
        }
        let resid = betas[m - 1] * vecs.at(&[m - 1, 0]).norm();
        if resid <= tol * theta.abs().max(1.0) {
            return Ok((theta, ritz));
        }
        start = ritz;
    }
    Err(Error::NoConvergence(format!(
        "lanczos did not reach tolerance {tol} after {max_restarts} restarts (theta = {theta})"
    )))
}
