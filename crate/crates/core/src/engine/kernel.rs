use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ChargeProjection, OccupationOperator};
use crate::opcore::{
    conjugate_by, determinant, hermitian_eig, lu_determinant, schatten_norm, ComplexMatrix, HermitianOperator,
    UnitaryOperator, C64, ONE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    Naive,
    Regularized,
    ZeroTemperature,
}

impl KernelVariant {
    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Naive => "naive",
            KernelVariant::Regularized => "regularized",
            KernelVariant::ZeroTemperature => "zero_temperature",
        }
    }
}

/// Occupation `N`, charge projection `Q` and evolution `U` of one transport problem.
#[derive(Clone, Debug)]
pub struct Scenario {
    occupation: OccupationOperator,
    charge: ChargeProjection,
    evolution: UnitaryOperator,
}

impl Scenario {
    pub fn new(occupation: OccupationOperator, charge: ChargeProjection, evolution: UnitaryOperator) -> Result<Self> {
        let n = occupation.dim();
        if charge.dim() != n || evolution.dim() != n {
            return Err(Error::contract(
                "Scenario",
                format!("dimensions disagree: N {n}, Q {}, U {}", charge.dim(), evolution.dim()),
            ));
        }
        occupation.check_commutes(&charge)?;
        Ok(Scenario { occupation, charge, evolution })
    }

    pub fn occupation(&self) -> &OccupationOperator {
        &self.occupation
    }

    pub fn charge(&self) -> &ChargeProjection {
        &self.charge
    }

    pub fn evolution(&self) -> &UnitaryOperator {
        &self.evolution
    }

    pub fn dim(&self) -> usize {
        self.occupation.dim()
    }

    /// The same evolution and charge acting on the hole occupation `N′ = 1 − N`.
    pub fn complement(&self) -> Scenario {
        Scenario {
            occupation: self.occupation.complement(),
            charge: self.charge.clone(),
            evolution: self.evolution.clone(),
        }
    }

    /// `Q_U = U†QU`.
    pub fn charge_evolved(&self) -> ComplexMatrix {
        conjugate_by(&self.evolution, self.charge.matrix()).expect("dimensions checked at construction")
    }

    /// `N_U = U†NU`.
    pub fn occupation_evolved(&self) -> ComplexMatrix {
        conjugate_by(&self.evolution, self.occupation.matrix()).expect("dimensions checked at construction")
    }
}

/// A counting kernel at one counting field, with `‖kernel − 1‖₁`.
#[derive(Clone, Debug)]
pub struct CountingKernel {
    pub lambda: f64,
    pub variant: KernelVariant,
    pub matrix: ComplexMatrix,
    pub trace_norm_defect: f64,
}

impl CountingKernel {
    fn new(lambda: f64, variant: KernelVariant, matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.rows();
        let defect = schatten_norm(&(&matrix - &ComplexMatrix::identity(n)), 1.0)?;
        Ok(CountingKernel { lambda, variant, matrix, trace_norm_defect: defect })
    }

    pub fn determinant(&self) -> C64 {
        determinant(&self.matrix).expect("kernels are square")
    }
}

fn phase(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// `exp(iλA)` for Hermitian `A`.
fn hermitian_phase_exp(a: &ComplexMatrix, lambda: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(&HermitianOperator::symmetrize(a.clone()))?;
    Ok(spec.apply(|x| phase(lambda * x)))
}

/// `D(λ) = N′ + e^{iλQ_U} N e^{−iλQ}`.
pub fn levitov_kernel(scenario: &Scenario, lambda: f64) -> Result<CountingKernel> {
    let n = scenario.occupation.matrix();
    let np = scenario.occupation.complement();
    let q = scenario.charge.projection();
    let qu = scenario.charge_evolved();
    let exp_qu = ComplexMatrix::identity(scenario.dim()).add_scaled(&qu, phase(lambda) - ONE);
    let d = np.matrix() + &(&(&exp_qu * n) * &q.phase_exp(-lambda));
    CountingKernel::new(lambda, KernelVariant::Naive, d)
}

/// `D̃(λ) = e^{−iλN_U Q_U} N′ e^{iλNQ} + e^{iλN′_U Q_U} N e^{−iλN′Q}`.
///
/// `NQ` and `N′Q` are Hermitian because `[N, Q] = 0`; their evolved versions are obtained by
/// conjugating the spectral exponentials, since `N_U Q_U = U†(NQ)U`.
pub fn regularized_kernel(scenario: &Scenario, lambda: f64) -> Result<CountingKernel> {
    let u = &scenario.evolution;
    let n = scenario.occupation.matrix();
    let np = scenario.occupation.complement();
    let q = scenario.charge.matrix();
    let nq = n * q;
    let npq = np.matrix() * q;

    let left_a = conjugate_by(u, &hermitian_phase_exp(&nq, -lambda)?)?;
    let right_a = hermitian_phase_exp(&nq, lambda)?;
    let left_b = conjugate_by(u, &hermitian_phase_exp(&npq, lambda)?)?;
    let right_b = hermitian_phase_exp(&npq, -lambda)?;

    let d = &(&(&left_a * np.matrix()) * &right_a) + &(&(&left_b * n) * &right_b);
    CountingKernel::new(lambda, KernelVariant::Regularized, d)
}

/// `D̃(λ) = 1 + Q_U(N − N_U)((e^{iλ} − 1)N − (e^{−iλ} − 1)N′)`, valid for pure `N`.
pub fn zero_temperature_kernel(scenario: &Scenario, lambda: f64) -> Result<CountingKernel> {
    if !scenario.occupation.is_pure() {
        return Err(Error::contract("zero_temperature_kernel", "the reduced kernel requires a pure occupation (N² = N)"));
    }
    let dim = scenario.dim();
    let n = scenario.occupation.matrix();
    let np = scenario.occupation.complement();
    let x = &scenario.charge_evolved() * &(n - &scenario.occupation_evolved());
    let a = phase(-lambda) - ONE;
    let b = phase(lambda) - ONE;
    let y = n.scale(b).add_scaled(np.matrix(), -a);
    let d = &ComplexMatrix::identity(dim) + &(&x * &y);
    CountingKernel::new(lambda, KernelVariant::ZeroTemperature, d)
}

pub fn counting_kernel(scenario: &Scenario, variant: KernelVariant, lambda: f64) -> Result<CountingKernel> {
    match variant {
        KernelVariant::Naive => levitov_kernel(scenario, lambda),
        KernelVariant::Regularized => regularized_kernel(scenario, lambda),
        KernelVariant::ZeroTemperature => zero_temperature_kernel(scenario, lambda),
    }
}

/// Fast determinant evaluation in the joint eigenbasis of `N` and `Q`.
///
/// With `V` diagonalizing both (`N → ν`, `Q → q`) and `Ũ = V†UV`, every kernel variant reduces to
/// `det(Ũ)⁻¹·det(M(λ))` for an explicitly known `M(λ)`, or, for the reduced form, to
/// `det(1 + X̃·diag(...))` with a λ-independent `X̃`. Setup costs two dense products; each λ costs
/// one `n²` assembly and one LU factorization.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    nu: Vec<f64>,
    q: Vec<f64>,
    u: nalgebra::DMatrix<C64>,
    det_u_conj: C64,
    reduced: Option<nalgebra::DMatrix<C64>>,
}

impl KernelEvaluator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let dim = scenario.dim();
        let mut v = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        let mut nu = vec![0.0; dim];
        let mut q = vec![0.0; dim];
        let mut col = 0;
        for inside in [false, true] {
            let sites = scenario.charge.indices(inside);
            if sites.is_empty() {
                continue;
            }
            let block = scenario.occupation.matrix().select(&sites, &sites);
            let spec = hermitian_eig(&HermitianOperator::symmetrize(block))?;
            for (k, &val) in spec.eigenvalues.iter().enumerate() {
                nu[col] = val;
                q[col] = if inside { 1.0 } else { 0.0 };
                for (a, &site) in sites.iter().enumerate() {
                    v[(site, col)] = spec.eigenvectors.get(a, k);
                }
                col += 1;
            }
        }
        let u = v.adjoint() * scenario.evolution.matrix().as_dmatrix() * &v;
        let det_u = lu_determinant(ComplexMatrix::wrap(u.clone()).row_major(), dim);
        let reduced = if scenario.occupation.is_pure() {
            // X̃ = Ũ†qŨ (ν − Ũ†νŨ)
            let scale_rows = |m: &nalgebra::DMatrix<C64>, w: &[f64]| {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= C64::new(w[i], 0.0);
                }
                out
            };
            let qu = u.adjoint() * scale_rows(&u, &q);
            let mut diff = -(u.adjoint() * scale_rows(&u, &nu));
            for i in 0..dim {
                diff[(i, i)] += C64::new(nu[i], 0.0);
            }
            Some(qu * diff)
        } else {
            None
        };
        Ok(KernelEvaluator { nu, q, u, det_u_conj: det_u.conj(), reduced })
    }

    pub fn dim(&self) -> usize {
        self.nu.len()
    }

    /// `χ(λ)` for the requested kernel variant.
    pub fn chi(&self, variant: KernelVariant, lambda: f64) -> Result<C64> {
        let n = self.dim();
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        match variant {
            KernelVariant::Naive => {
                let e: Vec<C64> = self.q.iter().map(|&q| phase(lambda * q)).collect();
                for i in 0..n {
                    for j in 0..n {
                        let w = C64::new(1.0 - self.nu[j], 0.0) + e[i] * e[j].conj() * self.nu[j];
                        m[i * n + j] = self.u[(i, j)] * w;
                    }
                }
                Ok(self.det_u_conj * lu_determinant(m, n))
            }
            KernelVariant::Regularized => {
                let alpha: Vec<C64> = (0..n).map(|i| phase(-lambda * self.nu[i] * self.q[i])).collect();
                let gamma: Vec<C64> = (0..n).map(|i| phase(lambda * (1.0 - self.nu[i]) * self.q[i])).collect();
                let beta: Vec<C64> = (0..n).map(|j| phase(lambda * self.nu[j] * self.q[j]) * (1.0 - self.nu[j])).collect();
                let delta: Vec<C64> =
                    (0..n).map(|j| phase(-lambda * (1.0 - self.nu[j]) * self.q[j]) * self.nu[j]).collect();
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = self.u[(i, j)] * (alpha[i] * beta[j] + gamma[i] * delta[j]);
                    }
                }
                Ok(self.det_u_conj * lu_determinant(m, n))
            }
            KernelVariant::ZeroTemperature => {
                let x = self.reduced.as_ref().ok_or_else(|| {
                    Error::contract("zero_temperature_kernel", "the reduced kernel requires a pure occupation (N² = N)")
                })?;
                let a = phase(-lambda) - ONE;
                let b = phase(lambda) - ONE;
                let w: Vec<C64> = self.nu.iter().map(|&v| b * v - a * (1.0 - v)).collect();
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] = x[(i, j)] * w[j];
                    }
                    m[i * n + i] += ONE;
                }
                Ok(lu_determinant(m, n))
            }
        }
    }
}
