//! Dense matrix helpers on top of nalgebra.

use crate::C64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// A·B skipping zero entries of B; fast when B is sparse.
pub fn mul_sparse(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for k in 0..b.nrows() {
            let x = b[(k, j)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            let src = a.column(k);
            let mut dst = out.column_mut(j);
            dst.axpy(x, &src, C64::new(1.0, 0.0));
        }
    }
    out
}

pub fn kron_all(ms: &[Mat]) -> Mat {
    ms.iter().skip(1).fold(ms[0].clone(), |acc, m| acc.kronecker(m))
}

pub fn basis(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = c(1.0);
    v
}

/// Frobenius inner product ⟨a, b⟩ = Σ conj(a)·b.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn random_matrix(r: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    Mat::from_fn(r, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_vector(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Singular value decomposition m = U·diag(s)·V†, singular values in
/// descending order, s with min(m, n) entries. V is always n×n; U is m×n for
/// tall input and m×m otherwise.
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

/// Computed with faer; nalgebra's complex SVD was seen to return wrong
/// factors on nearly rank-deficient input.
pub fn svd(m: &Mat) -> Svd {
    let (r, cols) = m.shape();
    if r == 0 || cols == 0 {
        return Svd { u: identity(r), s: Vec::new(), v: identity(cols) };
    }
    let fm = faer::Mat::<C64>::from_fn(r, cols, |i, j| m[(i, j)]);
    let dec = if r >= cols { fm.thin_svd() } else { fm.svd() }.expect("svd converges");
    let (fu, fs, fv) = (dec.U(), dec.S(), dec.V());
    let k = r.min(cols);
    let mut s: Vec<f64> = (0..k).map(|i| fs[i].re).collect();
    let mut u = Mat::from_fn(r, fu.ncols(), |i, j| fu[(i, j)]);
    let mut v = Mat::from_fn(cols, cols, |i, j| fv[(i, j)]);
    // Enforce descending order.
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    if idx.iter().enumerate().any(|(p, &q)| p != q) {
        let (u0, v0, s0) = (u.clone(), v.clone(), s.clone());
        for (p, &q) in idx.iter().enumerate() {
            u.set_column(p, &u0.column(q));
            v.set_column(p, &v0.column(q));
            s[p] = s0[q];
        }
    }
    Svd { u, s, v }
}

/// Orthonormal basis (as columns) of the null space of `m`; singular values
/// below `tol·max(σ_max, 1)` count as zero.
pub fn nullspace(m: &Mat, tol: f64) -> Mat {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return identity(cols);
    }
    let dec = svd(m);
    let smax = dec.s.first().copied().unwrap_or(0.0).max(1.0);
    let idx: Vec<usize> = (0..cols).filter(|&k| k >= dec.s.len() || dec.s[k] < tol * smax).collect();
    let mut out = Mat::zeros(cols, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &dec.v.column(k));
    }
    out
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).s
}

pub fn matrix_rank(m: &Mat, tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Moore–Penrose pseudo-inverse with relative cutoff `tol`.
pub fn pinv(m: &Mat, tol: f64) -> Mat {
    let dec = svd(m);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut out = Mat::zeros(m.ncols(), m.nrows());
    for (k, &s) in dec.s.iter().enumerate() {
        if s > tol * smax && s > 0.0 {
            out += dec.v.column(k) * dec.u.column(k).adjoint() * c(1.0 / s);
        }
    }
    out
}

/// Best scalar `s` with `lhs ≈ s·rhs` and the relative residual
/// `|lhs − s·rhs| / |lhs|`.
pub fn fit_scalar(lhs: &[C64], rhs: &[C64]) -> (C64, f64) {
    let rr = inner(rhs, rhs);
    if rr.norm() == 0.0 {
        return (c(0.0), if norm(lhs) == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let s = inner(rhs, lhs) / rr;
    let res: f64 = lhs.iter().zip(rhs).map(|(a, b)| (a - s * b).norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(lhs).max(1e-300);
    (s, res / scale)
}

/// Applies `op` (acting on the listed tensor factors, in that order) to a
/// vector on the full product space with factor dimensions `dims`.
pub fn apply_local(state: &[C64], dims: &[usize], sites: &[usize], op: &Mat) -> Vec<C64> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let local: usize = sites.iter().map(|&s| dims[s]).product();
    debug_assert_eq!(op.nrows(), local);
    // Offsets of every local configuration inside the full index.
    let mut loc_off = vec![0usize; local];
    for (m, off) in loc_off.iter_mut().enumerate() {
        let mut rem = m;
        let mut o = 0;
        for &s in sites.iter().rev() {
            o += (rem % dims[s]) * strides[s];
            rem /= dims[s];
        }
        *off = o;
    }
    let rest: Vec<usize> = (0..n).filter(|k| !sites.contains(k)).collect();
    let rest_count: usize = rest.iter().map(|&s| dims[s]).product();
    let mut out = vec![c(0.0); state.len()];
    let mut buf = vec![c(0.0); local];
    let nz: Vec<Vec<(usize, C64)>> = (0..local)
        .map(|i| (0..local).filter_map(|j| {
            let z = op[(i, j)];
            (z != c(0.0)).then_some((j, z))
        }).collect())
        .collect();
    for r in 0..rest_count {
        let mut rem = r;
        let mut base = 0;
        for &s in rest.iter().rev() {
            base += (rem % dims[s]) * strides[s];
            rem /= dims[s];
        }
        let mut any = false;
        for (m, b) in buf.iter_mut().enumerate() {
            *b = state[base + loc_off[m]];
            any |= *b != c(0.0);
        }
        if !any {
            continue;
        }
        for i in 0..local {
            let mut acc = c(0.0);
            for &(j, z) in &nz[i] {
                acc += z * buf[j];
            }
            out[base + loc_off[i]] = acc;
        }
    }
    out
}

/// Dense matrix of a local operator embedded into the full space.
pub fn embed_local(dims: &[usize], sites: &[usize], op: &Mat) -> Mat {
    let total: usize = dims.iter().product();
    let mut out = Mat::zeros(total, total);
    for j in 0..total {
        let mut e = vec![c(0.0); total];
        e[j] = c(1.0);
        let col = apply_local(&e, dims, sites, op);
        for i in 0..total {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Schmidt rank of `state` across the cut separating the first `left`
/// entries (row-major) from the rest.
pub fn schmidt_rank(state: &[C64], left: usize, tol: f64) -> usize {
    let right = state.len() / left;
    let m = Mat::from_row_slice(left, right, state);
    matrix_rank(&m, tol)
}

/// Permutes the tensor factors of a vector: output factor `k` is input factor
/// `order[k]`.
pub fn permute_factors(state: &[C64], dims: &[usize], order: &[usize]) -> Vec<C64> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut out = Vec::with_capacity(state.len());
    let mut idx = vec![0usize; n];
    for _ in 0..state.len() {
        let src: usize = (0..n).map(|k| idx[k] * strides[order[k]]).sum();
        out.push(state[src]);
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < new_dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}


/// Local operator prepared for repeated application to sparse vectors on a
/// fixed product space.
pub struct SparseLocal {
    strides: Vec<usize>,
    dims: Vec<usize>,
    sites: Vec<usize>,
    loc_off: Vec<usize>,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseLocal {
    pub fn new(dims: &[usize], sites: &[usize], op: &Mat) -> Self {
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let local: usize = sites.iter().map(|&s| dims[s]).product();
        let loc_off = (0..local)
            .map(|m| {
                let mut rem = m;
                let mut o = 0;
                for &s in sites.iter().rev() {
                    o += (rem % dims[s]) * strides[s];
                    rem /= dims[s];
                }
                o
            })
            .collect();
        let cols = (0..local)
            .map(|j| (0..local).filter_map(|i| (op[(i, j)] != c(0.0)).then(|| (i, op[(i, j)]))).collect())
            .collect();
        SparseLocal { strides, dims: dims.to_vec(), sites: sites.to_vec(), loc_off, cols }
    }

    fn split(&self, idx: usize) -> (usize, usize) {
        let mut m = 0;
        let mut local_part = 0;
        for &s in &self.sites {
            let digit = idx / self.strides[s] % self.dims[s];
            m = m * self.dims[s] + digit;
            local_part += digit * self.strides[s];
        }
        (m, idx - local_part)
    }

    /// Applies the operator to a sparse vector given as (index, value) pairs.
    pub fn apply(&self, state: &[(usize, C64)]) -> Vec<(usize, C64)> {
        let mut acc: std::collections::BTreeMap<usize, C64> = std::collections::BTreeMap::new();
        for &(idx, x) in state {
            let (m, base) = self.split(idx);
            for &(i, z) in &self.cols[m] {
                *acc.entry(base + self.loc_off[i]).or_insert(c(0.0)) += z * x;
            }
        }
        acc.into_iter().filter(|(_, z)| *z != c(0.0)).collect()
    }
}

/// ‖a − b‖ for sparse vectors sorted by index.
pub fn sparse_diff_norm(a: &[(usize, C64)], b: &[(usize, C64)]) -> f64 {
    let mut acc = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            acc += a[i].1.norm_sqr();
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            acc += b[j].1.norm_sqr();
            j += 1;
        } else {
            acc += (a[i].1 - b[j].1).norm_sqr();
            i += 1;
            j += 1;
        }
    }
    acc.sqrt()
}
