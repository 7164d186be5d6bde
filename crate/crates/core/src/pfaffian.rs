//! Pfaffians of even-dimensional skew-symmetric matrices.
//!
//! Two methods are exposed: recursive expansion along the first row, which is
//! division-free and therefore works over any commutative ring (used for the
//! exact rational computations in [`crate::forms`]), and skew
//! tridiagonalization with pivoting for larger floating-point matrices.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{One, Zero};
use std::ops::{Add, Mul, Neg};

use crate::error::{QmaError, Result};

/// Scalars a division-free Pfaffian can be computed over.
pub trait PfScalar: Clone + Zero + One + Neg<Output = Self> + Add<Output = Self> + Mul<Output = Self> {}

impl<T> PfScalar for T where T: Clone + Zero + One + Neg<Output = T> + Add<Output = T> + Mul<Output = T> {}

/// Pfaffian by recursive expansion along the first active row.
///
/// `a` is a full m-by-m skew-symmetric matrix in row-major nested vectors;
/// only the upper triangle is read. Cost grows as the double factorial of
/// `m`, so this is restricted to desk-scale matrices.
pub fn pfaffian_expansion<T: PfScalar>(a: &[Vec<T>]) -> Result<T> {
    let m = a.len();
    if m % 2 != 0 {
        return Err(QmaError::OddDimension(m));
    }
    let active: Vec<usize> = (0..m).collect();
    Ok(expand(a, &active))
}

fn expand<T: PfScalar>(a: &[Vec<T>], active: &[usize]) -> T {
    if active.is_empty() {
        return T::one();
    }
    let first = active[0];
    let mut acc = T::zero();
    let mut sign_positive = true;
    for (pos, &j) in active.iter().enumerate().skip(1) {
        let entry = a[first][j].clone();
        if !entry.is_zero() {
            let rest: Vec<usize> = active
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != 0 && p != pos)
                .map(|(_, &idx)| idx)
                .collect();
            let term = entry * expand(a, &rest);
            acc = if sign_positive { acc + term } else { acc + (-term) };
        }
        sign_positive = !sign_positive;
    }
    acc
}

/// Pfaffian via skew tridiagonalization (Parlett-Reid with pivoting).
///
/// Suitable for any even dimension; used for matrices too large for the
/// recursive expansion.
pub fn pfaffian_tridiag(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let m = a.nrows();
    if m % 2 != 0 {
        return Err(QmaError::OddDimension(m));
    }
    if m == 0 {
        return Ok(Complex64::one());
    }
    let mut a = a.clone();
    let mut pf = Complex64::one();
    for k in (0..m - 1).step_by(2) {
        // pivot: largest entry in column k below row k
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for i in k + 2..m {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k + 1, k)];
        if pivot.norm() == 0.0 {
            return Ok(Complex64::zero());
        }
        pf *= a[(k, k + 1)];
        if k + 2 < m {
            // rank-two update eliminating column k below row k+1
            let tau: Vec<Complex64> = (k + 2..m).map(|i| a[(i, k)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..m).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..m).enumerate() {
                for (jj, j) in (k + 2..m).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    a[(i, j)] += upd;
                }
            }
            for i in k + 2..m {
                a[(i, k)] = Complex64::zero();
                a[(k, i)] = Complex64::zero();
            }
        }
    }
    Ok(pf)
}

/// Dimension threshold below which the recursive expansion is used.
pub const EXPANSION_LIMIT: usize = 8;

/// Pfaffian of a complex skew-symmetric matrix, dispatching on dimension.
pub fn pfaffian(a: &DMatrix<Complex64>) -> Result<Complex64> {
    if a.nrows() <= EXPANSION_LIMIT {
        let rows: Vec<Vec<Complex64>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
            .collect();
        pfaffian_expansion(&rows)
    } else {
        pfaffian_tridiag(a)
    }
}

/// Validates skew symmetry of a complex matrix to a relative tolerance.
pub fn check_skew(a: &DMatrix<Complex64>, rel_tol: f64) -> Result<()> {
    let m = a.nrows();
    if m != a.ncols() {
        return Err(QmaError::Invalid(format!("matrix is {}x{}, not square", m, a.ncols())));
    }
    let scale = a.iter().map(|c| c.norm()).fold(0.0_f64, f64::max).max(1.0);
    for i in 0..m {
        for j in i..m {
            let s = a[(i, j)] + a[(j, i)];
            if s.norm() > rel_tol * scale {
                return Err(QmaError::NotSkew(s.norm(), i, j));
            }
        }
    }
    Ok(())
}
