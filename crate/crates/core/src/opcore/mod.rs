//! Dense complex linear algebra shared by every other module: Hermitian
//! eigendecomposition, unitary exponentials, LU determinants, singular values
//! and Schatten norms.
//!
//! All operations are pure functions of immutable inputs.

mod matrix;
mod operators;

pub use matrix::{ComplexMatrix, C64, I, ONE, ZERO};
pub use operators::{
    unitarity_defect, HermitianOperator, ProjectionOperator, UnitaryOperator, HERMITIAN_TOL,
    PROJECTION_TOL, UNITARY_TOL,
};

use nalgebra::{SymmetricEigen, SVD};

use crate::error::{Error, Result};

const EIG_MAX_ITERATIONS: usize = 100_000;
const SVD_MAX_ITERATIONS: usize = 100_000;
/// Post-condition gate on eigenvector orthonormality and reconstruction.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with the matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

pub fn hermitian_eig(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let eig = SymmetricEigen::try_new(
        a.matrix().as_dmatrix().clone(),
        f64::EPSILON,
        EIG_MAX_ITERATIONS,
    )
    .ok_or(Error::NonConvergence { routine: "hermitian_eig", iterations: EIG_MAX_ITERATIONS })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());

    let defect = unitarity_defect(&ComplexMatrix::wrap(vectors.clone()));
    if defect > SPECTRAL_TOL {
        return Err(Error::invariant(
            "eigenvector_orthonormality",
            format!("‖V†V − 1‖_max = {defect:e}"),
        ));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: ComplexMatrix::wrap(vectors) })
}

/// `exp(−iAt)` through the spectral decomposition of `A`.
pub fn unitary_exp(a: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    if t == 0.0 {
        return Ok(UnitaryOperator::identity(a.dim()));
    }
    let spec = hermitian_eig(a)?;
    UnitaryOperator::new(spec.apply(|e| C64::from_polar(1.0, -e * t)))
}

/// Determinant by LU factorization with partial pivoting.
///
/// Returns exactly zero as soon as a pivot falls below the smallest normal
/// `f64`; this covers exactly singular input as well.
pub fn determinant(a: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::contract(
            "determinant",
            format!("matrix is {}x{}, not square", a.rows(), a.cols()),
        ));
    }
    Ok(lu_determinant(a.row_major(), a.rows()))
}

/// In-place LU determinant on a row-major buffer of an `n × n` matrix.
pub(crate) fn lu_determinant(mut m: Vec<C64>, n: usize) -> C64 {
    let mut det = ONE;
    for k in 0..n {
        let (mut piv, mut best) = (k, m[k * n + k].norm());
        for r in k + 1..n {
            let v = m[r * n + k].norm();
            if v > best {
                piv = r;
                best = v;
            }
        }
        if !(best >= f64::MIN_POSITIVE) {
            return ZERO;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det *= pivot;
        let inv = ONE / pivot;
        let (upper, lower) = m.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n + k + 1..k * n + n];
        for row in lower.chunks_exact_mut(n) {
            let factor = row[k] * inv;
            if factor == ZERO {
                continue;
            }
            for (x, &p) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= factor * p;
            }
        }
    }
    det
}

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(a.as_dmatrix().clone(), false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::NonConvergence { routine: "singular_values", iterations: SVD_MAX_ITERATIONS })?;
    let mut values: Vec<f64> = svd.singular_values.iter().map(|&s| s.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Full singular value decomposition `A = W Σ V†`, returned as `(W, σ, V†)`.
pub fn svd(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let mut svd = SVD::try_new(a.as_dmatrix().clone(), true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::NonConvergence { routine: "svd", iterations: SVD_MAX_ITERATIONS })?;
    svd.sort_by_singular_values();
    let w = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    Ok((ComplexMatrix::wrap(w), svd.singular_values.iter().copied().collect(), ComplexMatrix::wrap(vt)))
}

/// Schatten `p`-norm `(Σ σᵢ^p)^{1/p}`.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::contract("schatten_norm", format!("p = {p} is below 1")));
    }
    let sv = singular_values(a)?;
    if p == 1.0 {
        return Ok(sv.iter().sum());
    }
    if p == 2.0 {
        return Ok(sv.iter().map(|s| s * s).sum::<f64>().sqrt());
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `U† A U`.
pub fn conjugate_by(u: &UnitaryOperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != u.dim() {
        return Err(Error::contract(
            "conjugate_by",
            format!("unitary of dimension {} against {}x{} operand", u.dim(), a.rows(), a.cols()),
        ));
    }
    let um = u.matrix().as_dmatrix();
    Ok(ComplexMatrix::wrap(um.adjoint() * a.as_dmatrix() * um))
}

/// `U† A U` for a Hermitian `A`, returned as Hermitian.
pub fn conjugate_hermitian(u: &UnitaryOperator, a: &HermitianOperator) -> Result<HermitianOperator> {
    conjugate_by(u, a.matrix()).map(HermitianOperator::symmetrize)
}
