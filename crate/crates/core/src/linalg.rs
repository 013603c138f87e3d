//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)))
}

pub fn real_matrix(rows: usize, cols: usize, row_major: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, row_major.iter().map(|&v| c64(v, 0.0)))
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.norm();
    }
    m.clone().singular_values().max()
}

/// Kronecker product with `a` acting on the high-order index bits, so that
/// `kron(a, b) * (x ⊗ y) = (a x) ⊗ (b y)` with `(x ⊗ y)[i·dim(y) + j] = x[i] y[j]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// `x^{⊗k}`; the empty power is the scalar 1.
pub fn kron_power(x: &CVector, k: usize) -> CVector {
    (0..k).fold(CVector::from_element(1, c64(1.0, 0.0)), |acc, _| kron_vec(&acc, x))
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Number of wires needed for `n` basis states (`ceil(log2 n)`).
pub fn wires_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Solves `a x = b` by LU decomposition.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    a.clone().lu().solve(b).ok_or(Error::Singular)
}

/// Reciprocal condition numbers below this are treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Inverse of a square matrix; fails with [`Error::Singular`] when the ratio
/// of smallest to largest singular value is at most [`SINGULAR_RCOND`].
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let sv = a.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if !(lo > SINGULAR_RCOND * hi) {
        return Err(Error::Singular);
    }
    a.clone().try_inverse().ok_or(Error::Singular)
}

/// Principal square root of a Hermitian positive semidefinite matrix; tiny
/// negative eigenvalues from rounding are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c64(l.max(0.0).sqrt(), 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Completes the unit vector `v` to a unitary whose first column is `v`.
pub fn complete_to_unitary(v: &CVector) -> CMatrix {
    let n = v.len();
    let mut m = CMatrix::identity(n, n);
    // put v first, then the standard basis; Gram-Schmidt keeps the first n
    // linearly independent columns
    let mut cols: Vec<CVector> = vec![v.clone()];
    for j in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = CVector::zeros(n);
        e[j] = c64(1.0, 0.0);
        for _pass in 0..2 {
            for c in &cols {
                let p = c.dotc(&e);
                e -= c * p;
            }
        }
        let norm = e.norm();
        if norm > 1e-8 {
            cols.push(e / c64(norm, 0.0));
        }
    }
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &CVector, b: &CVector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
