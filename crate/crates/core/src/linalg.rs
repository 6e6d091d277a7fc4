//! Dense helpers shared by the regression and synthesis code: determinant and
//! adjugate without division, Lyapunov solves by Kronecker vectorization, and
//! spectra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest size for which the adjugate is built from explicit cofactors.
pub const COFACTOR_MAX: usize = 6;

/// Determinant of the submatrix formed by `rows` and the columns set in `cols`,
/// by Laplace expansion along the first listed row.
fn laplace_det(m: &DMatrix<f64>, rows: &[usize], cols: u32) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => m[(rows[0], cols.trailing_zeros() as usize)],
        2 => {
            let c0 = cols.trailing_zeros() as usize;
            let c1 = (cols & (cols - 1)).trailing_zeros() as usize;
            m[(rows[0], c0)] * m[(rows[1], c1)] - m[(rows[0], c1)] * m[(rows[1], c0)]
        }
        _ => {
            let r = rows[0];
            let mut sign = 1.0;
            let mut acc = 0.0;
            let mut rest = cols;
            while rest != 0 {
                let c = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let a = m[(r, c)];
                if a != 0.0 {
                    acc += sign * a * laplace_det(m, &rows[1..], cols & !(1 << c));
                }
                sign = -sign;
            }
            acc
        }
    }
}

fn full_mask(k: usize) -> u32 {
    if k == 0 {
        0
    } else {
        u32::MAX >> (32 - k)
    }
}

/// Determinant of a square matrix. Cofactor expansion up to [`COFACTOR_MAX`],
/// LU above that.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of non-square matrix");
    let k = m.nrows();
    if k <= COFACTOR_MAX {
        let rows: Vec<usize> = (0..k).collect();
        laplace_det(m, &rows, full_mask(k))
    } else {
        m.clone().lu().determinant()
    }
}

/// Adjugate (transposed cofactor matrix) together with the determinant.
///
/// Never divides by the determinant, so it is well defined for singular input
/// and satisfies `m * adj(m) = det(m) * I` identically.
pub fn adjugate(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    assert!(m.is_square(), "adjugate of non-square matrix");
    let k = m.nrows();
    if k == 0 {
        return (DMatrix::zeros(0, 0), 1.0);
    }
    if k == 1 {
        return (DMatrix::from_element(1, 1, 1.0), m[(0, 0)]);
    }
    if k <= COFACTOR_MAX {
        let all = full_mask(k);
        let mut adj = DMatrix::zeros(k, k);
        let mut rows = Vec::with_capacity(k - 1);
        for i in 0..k {
            rows.clear();
            rows.extend((0..k).filter(|&r| r != i));
            for j in 0..k {
                let minor = laplace_det(m, &rows, all & !(1 << j));
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                adj[(j, i)] = sign * minor;
            }
        }
        // Expansion along the first row reuses the cofactors just computed.
        let det = (0..k).map(|j| m[(0, j)] * adj[(j, 0)]).sum();
        (adj, det)
    } else {
        adjugate_svd(m)
    }
}

/// adj(U S V^T) = det(U) det(V) V adj(S) U^T, with adj(S) the diagonal of
/// leave-one-out singular value products.
fn adjugate_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let k = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let orient = u.clone().lu().determinant().signum() * v_t.clone().lu().determinant().signum();
    let mut adj_s = DVector::zeros(k);
    for i in 0..k {
        adj_s[i] = (0..k).filter(|&j| j != i).map(|j| s[j]).product();
    }
    let adj = v_t.transpose() * DMatrix::from_diagonal(&adj_s) * u.transpose() * orient;
    let det = orient * s.iter().product::<f64>();
    (adj, det)
}

/// Eigenvalues as `(re, im)` pairs.
pub fn spectrum(m: &DMatrix<f64>) -> Vec<(f64, f64)> {
    m.complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

pub fn max_real_part(spec: &[(f64, f64)]) -> f64 {
    spec.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    max_real_part(&spectrum(m)) < 0.0
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol * (1.0 + m.amax())
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    is_symmetric(m, 1e-12) && m.clone().cholesky().is_some()
}

pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().min()
}

pub fn max_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().max()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Solves `M^T X + X M + W = 0` for symmetric `X`.
///
/// Uses the vectorized form `(I ⊗ M^T + M^T ⊗ I) vec(X) = -vec(W)`; dense, so
/// intended for dimensions up to about ten. `M` must be Hurwitz.
pub fn solve_lyapunov(m: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::dim("solve_lyapunov M", "square", format!("{}x{}", n, m.ncols())));
    }
    if w.shape() != (n, n) {
        return Err(Error::dim(
            "solve_lyapunov W",
            format!("{n}x{n}"),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    if !m.iter().all(|v| v.is_finite()) || !w.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularLyapunov);
    }
    if !is_hurwitz(m) {
        return Err(Error::SingularLyapunov);
    }
    let mt = m.transpose();
    let nn = n * n;
    let mut op = DMatrix::zeros(nn, nn);
    // Column-major vec: entry (i, j) of X sits at j * n + i.
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for l in 0..n {
                // (M^T X)_{ij} = sum_l M^T_{il} X_{lj}
                op[(row, j * n + l)] += mt[(i, l)];
                // (X M)_{ij} = sum_l X_{il} M_{lj}
                op[(row, l * n + i)] += m[(l, j)];
            }
        }
    }
    let rhs = DVector::from_iterator(nn, w.iter().map(|v| -v));
    let sol = op.lu().solve(&rhs).ok_or(Error::SingularLyapunov)?;
    let x = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok(symmetrize(&x))
}

/// Frobenius norm of the Lyapunov residual `M^T X + X M + W`.
pub fn lyapunov_residual(m: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    (m.transpose() * x + x * m + w).norm()
}
