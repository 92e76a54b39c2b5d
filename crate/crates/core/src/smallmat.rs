//! Dense linear algebra at desk scale: symmetric eigen-decomposition by cyclic
//! Jacobi, one-sided Jacobi for rank and null spaces, and unconstrained
//! minimisation of a quadratic.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, ToleranceConfig};

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `x + s·y`
pub fn axpy(x: &[f64], s: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + s * b).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    axpy(x, -1.0, y)
}

/// A real symmetric `n × n` matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix needs n >= 1");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = *v;
        }
        m
    }

    /// Builds `(E + Eᵀ)/2` from an `n × n` row-major array.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("SymMatrix needs n >= 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(Self::from_fn(n, |i, j| entries[i * n + j]))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_row_major(n, &flat)
    }

    /// Symmetrised matrix with entries `(f(i,j) + f(j,i))/2`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = if i == j { f(i, i) } else { 0.5 * (f(i, j) + f(j, i)) };
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data.chunks(self.n).map(|row| dot(row, x)).collect()
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: axpy(&self.data, s, &other.data),
        }
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    /// `Kᵀ M K` for an `n × k` matrix `K`; `None` when `k = 0`.
    pub fn congruence(&self, k: &RectMatrix) -> Option<SymMatrix> {
        assert_eq!(k.rows, self.n);
        if k.cols == 0 {
            return None;
        }
        let cols: Vec<Vec<f64>> = (0..k.cols).map(|j| k.col(j)).collect();
        let mk: Vec<Vec<f64>> = cols.iter().map(|c| self.mul_vec(c)).collect();
        Some(SymMatrix::from_fn(k.cols, |i, j| dot(&cols[i], &mk[j])))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// A real `m × n` matrix stored row-major. `m = 0` is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RectMatrix {
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
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// `rows` gives the row vectors; `cols` is needed when there are none.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given `nrows`-vectors.
    pub fn from_columns(nrows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::zeros(nrows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != nrows {
                return Err(Error::DimensionMismatch {
                    expected: nrows,
                    got: c.len(),
                });
            }
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &RectMatrix) -> RectMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RectMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RectMatrix {
        let mut t = RectMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    pub vectors: RectMatrix,
}

impl EigenDecomp {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.col(i)
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
pub fn eigh(m: &SymMatrix, tol: &ToleranceConfig) -> Result<EigenDecomp> {
    let n = m.n;
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InternalNumerics("non-finite matrix entry".into()));
    }
    let mut a = m.data.clone();
    let mut v = RectMatrix::identity(n);
    let threshold = tol.jacobi_offdiag * m.max_abs();

    let off = |a: &[f64]| {
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                worst = worst.max(a[p * n + q].abs());
            }
        }
        worst
    };

    let mut converged = false;
    for _ in 0..tol.jacobi_max_sweeps {
        let worst = off(&a);
        if worst.is_nan() {
            return Err(Error::InternalNumerics("NaN in Jacobi iteration".into()));
        }
        if worst <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged && off(&a) > threshold {
        return Err(Error::InternalNumerics(format!(
            "Jacobi did not converge in {} sweeps",
            tol.jacobi_max_sweeps
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = RectMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, dst, v.get(k, src));
        }
    }
    Ok(EigenDecomp { values, vectors })
}

/// Thin singular value decomposition `H V = W` with `W` having orthogonal
/// columns whose norms are the singular values.
#[derive(Clone, Debug)]
struct OneSidedSvd {
    /// `H V`, `m × n`.
    w: RectMatrix,
    /// Orthogonal `n × n`.
    v: RectMatrix,
    sigma: Vec<f64>,
}

fn one_sided_jacobi(h: &RectMatrix, tol: &ToleranceConfig) -> Result<OneSidedSvd> {
    let (m, n) = (h.rows, h.cols);
    let mut w = h.clone();
    let mut v = RectMatrix::identity(n);
    if h.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InternalNumerics("non-finite matrix entry".into()));
    }
    let eps = f64::EPSILON;
    let floor = (n.max(m) as f64) * eps * eps * h.data.iter().map(|x| x * x).sum::<f64>();

    let mut converged = false;
    for _ in 0..tol.jacobi_max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (wp, wq) = (w.get(i, p), w.get(i, q));
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= floor || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w.get(i, p), w.get(i, q));
                    w.set(i, p, c * wp - s * wq);
                    w.set(i, q, s * wp + c * wq);
                }
                for i in 0..n {
                    let (vp, vq) = (v.get(i, p), v.get(i, q));
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InternalNumerics(format!(
            "one-sided Jacobi did not converge in {} sweeps",
            tol.jacobi_max_sweeps
        )));
    }
    let sigma = (0..n).map(|j| norm(&w.col(j))).collect();
    Ok(OneSidedSvd { w, v, sigma })
}

impl OneSidedSvd {
    fn cutoff(&self, rank_tol: f64) -> f64 {
        rank_tol * self.sigma.iter().fold(0.0f64, |m, s| m.max(*s))
    }

    fn is_null(&self, j: usize, cutoff: f64) -> bool {
        self.sigma[j] <= cutoff
    }
}

/// Number of singular values above `rank_tol · σ_max`.
pub fn numerical_rank(h: &RectMatrix, rank_tol: f64, tol: &ToleranceConfig) -> Result<usize> {
    let svd = one_sided_jacobi(h, tol)?;
    let cutoff = svd.cutoff(rank_tol);
    Ok((0..h.cols).filter(|&j| !svd.is_null(j, cutoff)).count())
}

/// Orthonormal basis (as columns of an `n × k` matrix) of `{x : Hx = 0}`.
pub fn null_space_basis(h: &RectMatrix, rank_tol: f64, tol: &ToleranceConfig) -> Result<RectMatrix> {
    if rank_tol <= 0.0 {
        return Err(Error::InvalidArgument("rank tolerance must be positive".into()));
    }
    let svd = one_sided_jacobi(h, tol)?;
    let cutoff = svd.cutoff(rank_tol);
    let kernel: Vec<Vec<f64>> = (0..h.cols)
        .filter(|&j| svd.is_null(j, cutoff))
        .map(|j| svd.v.col(j))
        .collect();
    RectMatrix::from_columns(h.cols, &kernel)
}

/// Minimum-norm least-squares solution `H⁺ d`.
pub fn pinv_solve(h: &RectMatrix, d: &[f64], rank_tol: f64, tol: &ToleranceConfig) -> Result<Vec<f64>> {
    if d.len() != h.rows {
        return Err(Error::DimensionMismatch {
            expected: h.rows,
            got: d.len(),
        });
    }
    let svd = one_sided_jacobi(h, tol)?;
    let cutoff = svd.cutoff(rank_tol);
    let mut x = vec![0.0; h.cols];
    for j in 0..h.cols {
        if svd.is_null(j, cutoff) {
            continue;
        }
        let coef = dot(&svd.w.col(j), d) / (svd.sigma[j] * svd.sigma[j]);
        for (xi, vi) in x.iter_mut().zip(svd.v.col(j)) {
            *xi += coef * vi;
        }
    }
    Ok(x)
}

/// Outcome of minimising `xᵀMx + mᵀx + m₀` over all of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub enum MinResult {
    Bounded { value: f64, minimizer: Vec<f64> },
    /// A unit direction along which the quadratic decreases without bound.
    UnboundedBelow { direction: Vec<f64> },
}

impl MinResult {
    /// The infimum, `-∞` when unbounded.
    pub fn value(&self) -> f64 {
        match self {
            MinResult::Bounded { value, .. } => *value,
            MinResult::UnboundedBelow { .. } => f64::NEG_INFINITY,
        }
    }
}

pub fn min_of_quadratic(
    m: &SymMatrix,
    lin: &[f64],
    m0: f64,
    tol: &ToleranceConfig,
) -> Result<MinResult> {
    if lin.len() != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            got: lin.len(),
        });
    }
    let eig = eigh(m, tol)?;
    let zero_band = tol.psd_tol * m.max_abs();
    if eig.values[0] < -zero_band {
        return Ok(MinResult::UnboundedBelow {
            direction: eig.vector(0),
        });
    }

    let mut minimizer = vec![0.0; m.n];
    let mut null_part = vec![0.0; m.n];
    let mut value = m0;
    for (i, &lambda) in eig.values.iter().enumerate() {
        let vi = eig.vector(i);
        let ci = dot(&vi, lin);
        if lambda <= zero_band {
            for (r, v) in null_part.iter_mut().zip(&vi) {
                *r += ci * v;
            }
        } else {
            value -= 0.25 * ci * ci / lambda;
            for (x, v) in minimizer.iter_mut().zip(&vi) {
                *x -= 0.5 * ci / lambda * v;
            }
        }
    }
    let residual = norm(&null_part);
    if residual > tol.range_tol * (1.0 + norm(lin)) {
        return Ok(MinResult::UnboundedBelow {
            direction: null_part.iter().map(|v| -v / residual).collect(),
        });
    }
    Ok(MinResult::Bounded { value, minimizer })
}
