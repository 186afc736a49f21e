//! Dense builders for the Hankel matrix, its anti-circulant companion, the
//! real modal matrix that diagonalizes the latter, and the unit vectors that
//! carry the rank-two correction between them.

use std::f64::consts::PI;

use crate::spectrum::{compute_spectrum, signed_phase, spectral_diagonal, AntiCirculantSpectrum, HankelParams, Parity};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += aik * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() == 0.0
    }

    /// `self - shift·I`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] -= shift;
        }
        m
    }

    /// Dimension of the null space as seen by row-echelon elimination with
    /// partial pivoting: columns whose best available pivot is at most
    /// `threshold` in magnitude are counted as dependent.
    pub fn nullity(&self, threshold: f64) -> usize {
        let n = self.dim;
        let mut m = self.data.clone();
        let mut row = 0;
        for col in 0..n {
            if row == n {
                break;
            }
            let (p, best) =
                (row..n)
                    .map(|i| (i, m[i * n + col].abs()))
                    .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= threshold {
                continue;
            }
            if p != row {
                for j in 0..n {
                    m.swap(p * n + j, row * n + j);
                }
            }
            let pivot = m[row * n + col];
            for i in row + 1..n {
                let factor = m[i * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    m[i * n + j] -= factor * m[row * n + j];
                }
            }
            row += 1;
        }
        n - row
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// LU factorization with partial pivoting. Exactly zero pivots are replaced by
/// a tiny multiple of the matrix norm so near-singular shifts stay solvable.
#[derive(Debug, Clone)]
pub struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(matrix: &DenseMatrix) -> Self {
        let n = matrix.dim();
        let mut lu = matrix.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = f64::EPSILON * matrix.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| lu[x * n + k].abs().total_cmp(&lu[y * n + k].abs())).unwrap_or(k);
            if p != k {
                for j in 0..n {
                    lu.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
            }
            if lu[k * n + k] == 0.0 {
                lu[k * n + k] = floor;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Self { dim: n, lu, perm }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

pub fn build_hankel(params: &HankelParams) -> DenseMatrix {
    let size = params.size();
    DenseMatrix::from_fn(size, |i, j| stripe(params, i + j, size))
}

/// Value of `H` on the anti-diagonal `i + j = s` (0-based indices).
fn stripe(params: &HankelParams, s: usize, size: usize) -> f64 {
    if s + 2 == size {
        params.a()
    } else if s + 1 == size {
        params.c()
    } else if s == size {
        params.b()
    } else {
        0.0
    }
}

/// `H v` using the three-stripe structure directly.
pub fn hankel_apply(params: &HankelParams, v: &[f64]) -> Vec<f64> {
    let size = params.size();
    assert_eq!(v.len(), size);
    (0..size)
        .map(|i| {
            let mut s = params.c() * v[size - 1 - i];
            if i + 2 <= size {
                s += params.a() * v[size - 2 - i];
            }
            if i >= 1 {
                s += params.b() * v[size - i];
            }
            s
        })
        .collect()
}

pub fn build_anticirculant(params: &HankelParams) -> DenseMatrix {
    let size = params.size();
    let mut first_row = vec![0.0; size];
    first_row[0] = params.b();
    first_row[size - 2] += params.a();
    first_row[size - 1] += params.c();
    DenseMatrix::from_fn(size, |i, j| first_row[(i + j) % size])
}

fn phase_angle(p: i64, size: usize) -> f64 {
    2.0 * PI * p as f64 / size as f64
}

/// Entry `(row, col)` (0-based) of the real orthogonal modal matrix of the
/// anti-circulant.
pub(crate) fn modal_entry(params: &HankelParams, spectrum: &AntiCirculantSpectrum, row: usize, col: usize) -> f64 {
    let size = params.size();
    let m = params.half();
    let inv_sqrt = 1.0 / (size as f64).sqrt();
    let amp = (2.0 / size as f64).sqrt();
    if col == 0 {
        return inv_sqrt;
    }
    if col <= m {
        let j = col;
        let half = spectrum.theta[j] / 2.0;
        return amp * (half + phase_angle(signed_phase(row * j, size), size)).cos();
    }
    if params.parity() == Parity::Even && col == m + 1 {
        return if row % 2 == 0 { inv_sqrt } else { -inv_sqrt };
    }
    let j = size - col;
    let half = spectrum.theta[j] / 2.0;
    amp * (half + phase_angle(signed_phase(row * j, size), size)).sin()
}

/// The modal matrix `P` (odd `n`) or `Q` (even `n`); `A = M D Mᵀ` with `D`
/// in [`spectral_diagonal`] order.
pub fn build_modal_matrix(params: &HankelParams, spectrum: &AntiCirculantSpectrum) -> DenseMatrix {
    DenseMatrix::from_fn(params.size(), |i, j| modal_entry(params, spectrum, i, j))
}

/// First (`x`) and last (`y`) rows of the modal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn build_unit_vectors(params: &HankelParams, spectrum: &AntiCirculantSpectrum) -> VectorPair {
    let size = params.size();
    let m = params.half();
    let inv_sqrt = 1.0 / (size as f64).sqrt();
    let amp = (2.0 / size as f64).sqrt();

    let mut x = Vec::with_capacity(size);
    let mut y = Vec::with_capacity(size);
    x.push(inv_sqrt);
    y.push(inv_sqrt);
    for j in 1..=m {
        let half = spectrum.theta[j] / 2.0;
        x.push(amp * half.cos());
        y.push(amp * (half - phase_angle(j as i64, size)).cos());
    }
    if params.parity() == Parity::Even {
        x.push(inv_sqrt);
        y.push(-inv_sqrt);
    }
    for j in (1..=m).rev() {
        let half = spectrum.theta[j] / 2.0;
        x.push(amp * half.sin());
        y.push(amp * (half - phase_angle(j as i64, size)).sin());
    }
    VectorPair { x, y }
}

/// `-b xxᵀ - a yyᵀ`
pub fn build_rank_two_correction(params: &HankelParams, pair: &VectorPair) -> DenseMatrix {
    let (a, b) = (params.a(), params.b());
    DenseMatrix::from_fn(params.size(), |i, j| -b * pair.x[i] * pair.x[j] - a * pair.y[i] * pair.y[j])
}

/// Max-norm residuals of the anti-circulant diagonalization and of the
/// rank-two decomposition of `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    /// `‖A − M D Mᵀ‖_max`
    pub anticirculant: f64,
    /// `‖H − M (D − b xxᵀ − a yyᵀ) Mᵀ‖_max`
    pub hankel: f64,
    /// `‖MᵀM − I‖_max`
    pub orthogonality: f64,
    /// `|xᵀy|`
    pub xy_inner: f64,
    pub x_norm_error: f64,
    pub y_norm_error: f64,
}

impl DecompositionReport {
    pub fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("anticirculant_residual", self.anticirculant),
            ("hankel_residual", self.hankel),
            ("orthogonality_residual", self.orthogonality),
            ("xy_inner", self.xy_inner),
            ("x_norm_error", self.x_norm_error),
            ("y_norm_error", self.y_norm_error),
        ]
    }

    pub fn max(&self) -> f64 {
        self.fields().iter().fold(0.0, |m, f| m.max(f.1))
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn verify_decompositions(params: &HankelParams) -> DecompositionReport {
    let size = params.size();
    let spectrum = compute_spectrum(params);
    let modal = build_modal_matrix(params, &spectrum);
    let modal_t = modal.transpose();
    let diag = spectral_diagonal(params, &spectrum);
    let pair = build_unit_vectors(params, &spectrum);

    let mut d = DenseMatrix::zeros(size);
    for (i, (v, _)) in diag.iter().enumerate() {
        d[(i, i)] = *v;
    }
    let a_rebuilt = modal.matmul(&d).matmul(&modal_t);
    let anticirculant = build_anticirculant(params).sub(&a_rebuilt).max_abs();

    let mut inner = build_rank_two_correction(params, &pair);
    for i in 0..size {
        inner[(i, i)] += d[(i, i)];
    }
    let h_rebuilt = modal.matmul(&inner).matmul(&modal_t);
    let hankel = build_hankel(params).sub(&h_rebuilt).max_abs();

    let orthogonality = modal_t.matmul(&modal).sub(&DenseMatrix::identity(size)).max_abs();

    DecompositionReport {
        anticirculant,
        hankel,
        orthogonality,
        xy_inner: dot(&pair.x, &pair.y).abs(),
        x_norm_error: (dot(&pair.x, &pair.x).sqrt() - 1.0).abs(),
        y_norm_error: (dot(&pair.y, &pair.y).sqrt() - 1.0).abs(),
    }
}
