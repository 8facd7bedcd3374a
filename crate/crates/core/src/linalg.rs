//! Dense real-matrix primitives.
//!
//! [`Matrix`] is a row-major `f64` matrix where a row is a sample and a column
//! is a feature. On top of it this module provides a one-sided Jacobi SVD, the
//! Moore–Penrose pseudo-inverse, Householder QR and Haar-distributed random
//! orthonormal matrices.
//!
//! The arithmetic helpers on [`Matrix`] (`matmul`, `add`, ...) treat shape
//! mismatches as programmer error and panic. Constructors that take external
//! data return [`Result`].

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix of i.i.d. standard normal entries, filled in row-major order.
    pub fn random_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        Self { rows, cols, data }
    }

    /// Wraps raw data without the finiteness check. Callers must guarantee
    /// `data.len() == rows * cols`.
    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = vec![0.0; self.rows * other.cols];
        for (a_row, out_row) in self
            .data
            .chunks_exact(self.cols)
            .zip(out.chunks_exact_mut(other.cols))
        {
            for (&a, b_row) in a_row.iter().zip(other.data.chunks_exact(other.cols)) {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Matrix::from_vec_unchecked(self.rows, other.cols, out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.rows, other.rows,
            "t_matmul {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = vec![0.0; self.cols * other.cols];
        for (a_row, b_row) in self
            .data
            .chunks_exact(self.cols)
            .zip(other.data.chunks_exact(other.cols))
        {
            for (&a, out_row) in a_row.iter().zip(out.chunks_exact_mut(other.cols)) {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Matrix::from_vec_unchecked(self.cols, other.cols, out)
    }

    /// `self · otherᵀ` without materializing the transpose.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.cols,
            "matmul_t {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Vec::with_capacity(self.rows * other.rows);
        for a_row in self.data.chunks_exact(self.cols) {
            for b_row in other.data.chunks_exact(other.cols) {
                out.push(dot(a_row, b_row));
            }
        }
        Matrix::from_vec_unchecked(self.rows, other.rows, out)
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Matrix::from_vec_unchecked(self.rows, self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// New matrix made of the given rows, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_vec_unchecked(indices.len(), self.cols, data)
    }

    /// New matrix made of the first `n` columns.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        assert!(n <= self.cols);
        Matrix::from_fn(self.rows, n, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.iter_rows() {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Product of a chain of matrices; the `n`×`n` identity when the chain is empty.
pub fn chain_product(chain: &[Matrix], n: usize) -> Matrix {
    let mut iter = chain.iter();
    match iter.next() {
        None => Matrix::identity(n),
        Some(first) => iter.fold(first.clone(), |acc, m| acc.matmul(m)),
    }
}

/// Thin singular value decomposition `a = u · diag(s) · vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × r` with orthonormal columns.
    pub u: Matrix,
    /// Singular values, descending, length `r = min(m, n)`.
    pub s: Vec<f64>,
    /// `n × r` with orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul_t(&self.v)
    }
}

const MAX_SWEEPS: usize = 80;

/// Thin SVD by one-sided Jacobi rotations.
///
/// Fails with [`Error::SvdNoConvergence`] if the rotations have not settled
/// after a fixed number of sweeps.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = a.shape();
    // Rows of `work` are the columns of `a`; rows of `vt` the columns of v.
    let mut work = a.transpose();
    let mut vt = Matrix::identity(n);
    let tol = f64::EPSILON * (m as f64).sqrt();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let wp = work.row(p);
                    let wq = work.row(q);
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut work, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, norm(work.row(j)))).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));

    let s: Vec<f64> = order.iter().map(|&(_, sv)| sv).collect();
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &(j, sv)) in order.iter().enumerate() {
        if sv > f64::MIN_POSITIVE * 1e10 {
            u_cols.push(work.row(j).iter().map(|x| x / sv).collect());
        } else {
            u_cols.push(vec![0.0; m]);
            missing.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &missing);

    let u = Matrix::from_fn(m, n, |i, k| u_cols[k][i]);
    let v = Matrix::from_fn(n, n, |i, k| vt[(order[k].0, i)]);
    Ok(Svd { u, s, v })
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (xp, xq) in rp.iter_mut().zip(rq.iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Replaces the vectors at `missing` with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let dim = cols[0].len();
    for &k in missing {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..dim {
            let mut cand = vec![0.0; dim];
            cand[e] = 1.0;
            // Two Gram-Schmidt passes against every filled column.
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == k || (missing.contains(&j) && j > k) {
                        continue;
                    }
                    let proj = dot(&cand, c);
                    for (x, y) in cand.iter_mut().zip(c) {
                        *x -= proj * y;
                    }
                }
            }
            let nrm = norm(&cand);
            if best.as_ref().map_or(true, |(b, _)| nrm > *b) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("dim >= 1");
        cols[k] = cand.into_iter().map(|x| x / nrm).collect();
    }
}

/// Default singular-value cutoff `max(m, n) · ε · s_max`.
pub fn default_pinv_tolerance(shape: (usize, usize), s_max: f64) -> f64 {
    shape.0.max(shape.1) as f64 * f64::EPSILON * s_max
}

/// Moore–Penrose pseudo-inverse. Singular values `<= tol` are treated as
/// zero; `None` selects [`default_pinv_tolerance`].
pub fn pinv(a: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    let dec = svd(a)?;
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or_else(|| default_pinv_tolerance(a.shape(), s_max));
    // a† = v · diag(1/s) · uᵀ
    let mut v_scaled = dec.v.clone();
    for i in 0..v_scaled.rows() {
        for (x, &s) in v_scaled.row_mut(i).iter_mut().zip(&dec.s) {
            *x = if s > tol { *x / s } else { 0.0 };
        }
    }
    Ok(v_scaled.matmul_t(&dec.u))
}

/// Ratio of largest to smallest of the `min(m, n)` singular values.
pub fn condition_number(a: &Matrix) -> Result<f64> {
    let s = svd(a)?.s;
    let max = s[0];
    let min = *s.last().expect("non-empty");
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Thin Householder QR of an `m × n` matrix with `m >= n`: `a = q · r` with
/// `q` of shape `m × n` (orthonormal columns) and `r` upper triangular `n × n`.
pub fn qr_thin(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = a.shape();
    assert!(m >= n, "qr_thin needs rows >= cols, got {m}x{n}");
    let mut r = a.clone();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);

    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm = norm(&v);
        if vnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for j in k..n {
            let proj: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * v[i - k] * proj;
            }
        }
        reflectors.push(Some(v));
    }

    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for (k, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for j in 0..n {
            let proj: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..m {
                q[(i, j)] -= 2.0 * v[i - k] * proj;
            }
        }
    }
    let r = Matrix::from_fn(n, n, |i, j| if j >= i { r[(i, j)] } else { 0.0 });
    (q, r)
}

/// Haar-distributed random matrix with orthonormal columns (`m >= n`) or
/// orthonormal rows (`m < n`).
///
/// Gaussian fill, thin QR, then each column of Q is multiplied by the sign of
/// the matching diagonal entry of R.
pub fn random_orthonormal<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Matrix {
    if m < n {
        return random_orthonormal(n, m, rng).transpose();
    }
    let g = Matrix::random_normal(m, n, rng);
    let (mut q, r) = qr_thin(&g);
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}
