use nalgebra::DMatrix;

use super::matrix::{ComplexMatrix, C64};
use super::{hermitian_eig, SpectralDecomposition};
use crate::error::{Error, Result};

/// Relative Hermiticity gate for [`HermitianOperator`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Gate on `‖U†U − 1‖_max` for [`UnitaryOperator`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Gate on `‖P² − P‖_max` and on the spectrum of [`ProjectionOperator`].
pub const PROJECTION_TOL: f64 = 1e-10;

fn require_square(op: &'static str, m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::contract(op, format!("matrix is {}x{}, not square", m.rows(), m.cols())));
    }
    Ok(())
}

/// Self-adjoint matrix. Stored exactly Hermitian (symmetrized after the gate).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        require_square("HermitianOperator", &matrix)?;
        let defect = matrix.hermiticity_defect();
        let scale = matrix.max_abs();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::invariant(
                "hermiticity",
                format!("‖A − A†‖_max = {defect:e} exceeds {HERMITIAN_TOL:e}·‖A‖_max = {:e}", HERMITIAN_TOL * scale),
            ));
        }
        Ok(Self::symmetrize(matrix))
    }

    pub(crate) fn symmetrize(matrix: ComplexMatrix) -> Self {
        let m = matrix.as_dmatrix();
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        HermitianOperator(ComplexMatrix::wrap(sym))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        HermitianOperator(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator(ComplexMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Real linear combination `self + factor·other`, which stays Hermitian.
    pub fn add_scaled(&self, other: &HermitianOperator, factor: f64) -> HermitianOperator {
        HermitianOperator(self.0.add_scaled(&other.0, C64::new(factor, 0.0)))
    }
}

/// Unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        require_square("UnitaryOperator", &matrix)?;
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(Error::invariant(
                "unitarity",
                format!("‖U†U − 1‖_max = {defect:e} exceeds {UNITARY_TOL:e}"),
            ));
        }
        Ok(UnitaryOperator(matrix))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryOperator(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        UnitaryOperator(self.0.adjoint())
    }

    /// Product `self · other`, re-checked against the unitarity gate.
    pub fn compose(&self, other: &UnitaryOperator) -> Result<UnitaryOperator> {
        if self.dim() != other.dim() {
            return Err(Error::contract(
                "UnitaryOperator::compose",
                format!("dimensions {} and {}", self.dim(), other.dim()),
            ));
        }
        UnitaryOperator::new(&self.0 * &other.0)
    }
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let m = u.as_dmatrix();
    let g = m.adjoint() * m;
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOperator(HermitianOperator);

impl ProjectionOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        let m = h.matrix().as_dmatrix();
        let sq = m * m;
        let defect = (sq - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > PROJECTION_TOL {
            return Err(Error::invariant(
                "idempotence",
                format!("‖P² − P‖_max = {defect:e} exceeds {PROJECTION_TOL:e}"),
            ));
        }
        let spec = hermitian_eig(&h)?;
        if let Some(bad) = spec
            .eigenvalues
            .iter()
            .find(|&&v| v.abs().min((v - 1.0).abs()) > PROJECTION_TOL)
        {
            return Err(Error::invariant(
                "projection_spectrum",
                format!("eigenvalue {bad} is not within {PROJECTION_TOL:e} of 0 or 1"),
            ));
        }
        Ok(ProjectionOperator(h))
    }

    /// Diagonal projection from a 0/1 mask; exact by construction.
    pub fn from_mask(mask: &[bool]) -> Self {
        let diag: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        ProjectionOperator(HermitianOperator::from_real_diagonal(&diag))
    }

    /// Projection onto the span of orthonormal columns.
    pub fn onto_columns(columns: &ComplexMatrix) -> Result<Self> {
        let v = columns.as_dmatrix();
        ProjectionOperator::new(ComplexMatrix::wrap(v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.0
    }

    /// `1 − P`.
    pub fn complement(&self) -> ProjectionOperator {
        let n = self.dim();
        let m = DMatrix::<C64>::identity(n, n) - self.matrix().as_dmatrix();
        ProjectionOperator(HermitianOperator::symmetrize(ComplexMatrix::wrap(m)))
    }

    pub fn rank(&self) -> usize {
        self.matrix().trace().re.round() as usize
    }

    /// `exp(iλP) = 1 + (e^{iλ} − 1)P`.
    pub fn phase_exp(&self, lambda: f64) -> ComplexMatrix {
        let n = self.dim();
        let factor = C64::from_polar(1.0, lambda) - C64::new(1.0, 0.0);
        ComplexMatrix::identity(n).add_scaled(self.matrix(), factor)
    }
}

impl SpectralDecomposition {
    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = self.eigenvectors.as_dmatrix();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fj;
            }
        }
        ComplexMatrix::wrap(scaled * v.adjoint())
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| C64::new(x, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}
