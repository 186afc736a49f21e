//! Dense symmetric eigensolver used as ground truth.
//!
//! Cyclic-by-rows Jacobi. It shares no code or formulas with the secular
//! path, which is what makes it usable as an oracle.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DenseMatrix,
    pub sweeps: usize,
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

pub fn jacobi_eigen(matrix: &DenseMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let scale = matrix.max_abs();
    let asym = matrix.max_asymmetry();
    if asym > 1e-13 * scale {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    let n = matrix.dim();
    // symmetrize so rounding in the input cannot bias either triangle
    let mut a: Vec<f64> = DenseMatrix::from_fn(n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)])).as_slice().to_vec();
    let mut v = DenseMatrix::identity(n).as_slice().to_vec();
    let target = tol * matrix.frobenius();

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        // early sweeps only rotate the large entries
        let threshold = if sweeps < 4 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if sweeps > 4
                    && (100.0 * apq).abs() + app.abs() == app.abs()
                    && (100.0 * apq).abs() + aqq.abs() == aqq.abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
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
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = DenseMatrix::from_fn(n, |r, c| v[r * n + order[c]]);
    Ok(EigenDecomposition { values, vectors, sweeps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumComparison {
    pub max_abs_diff: f64,
    /// 1-based position of the largest difference.
    pub worst_index: usize,
}

pub fn compare_spectra(lhs: &[f64], rhs: &[f64]) -> Result<SpectrumComparison> {
    if lhs.len() != rhs.len() {
        return Err(Error::LengthMismatch { lhs: lhs.len(), rhs: rhs.len() });
    }
    let mut out = SpectrumComparison { max_abs_diff: 0.0, worst_index: 1 };
    for (i, (x, y)) in lhs.iter().zip(rhs).enumerate() {
        let d = (x - y).abs();
        if d > out.max_abs_diff || d.is_nan() {
            out = SpectrumComparison { max_abs_diff: d, worst_index: i + 1 };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_swap() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let e = jacobi_eigen(&m, 1e-15).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exchange_three() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
        let e = jacobi_eigen(&m, 1e-15).unwrap();
        for (got, want) in e.values.iter().zip([-1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let mut m = DenseMatrix::zeros(8);
            for i in 0..8 {
                for j in i..8 {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let e = jacobi_eigen(&m, 1e-15).unwrap();
            let mut d = DenseMatrix::zeros(8);
            for i in 0..8 {
                d[(i, i)] = e.values[i];
            }
            let rebuilt = e.vectors.matmul(&d).matmul(&e.vectors.transpose());
            assert!(rebuilt.sub(&m).max_abs() <= 1e-11);
            let orth = e.vectors.transpose().matmul(&e.vectors).sub(&DenseMatrix::identity(8)).max_abs();
            assert!(orth <= 1e-12);
            let hv = m.matmul(&e.vectors).sub(&e.vectors.matmul(&d)).max_abs();
            assert!(hv <= 1e-10 * m.max_abs());
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert!(matches!(jacobi_eigen(&m, 1e-12), Err(Error::NotSymmetric { .. })));
        let m = DenseMatrix::identity(2);
        assert!(matches!(jacobi_eigen(&m, 0.0), Err(Error::InvalidTolerance(_))));
        // already diagonal: zero sweeps
        assert_eq!(jacobi_eigen(&m, 1e-12).unwrap().sweeps, 0);
    }

    #[test]
    fn compare_examples() {
        let c = compare_spectra(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.max_abs_diff, 0.0);
        let c = compare_spectra(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.5]).unwrap();
        assert_eq!(c, SpectrumComparison { max_abs_diff: 0.5, worst_index: 3 });
        assert!(matches!(compare_spectra(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }
}
