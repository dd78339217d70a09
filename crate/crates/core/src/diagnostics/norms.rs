use serde::{Deserialize, Serialize};

use crate::engine::{levitov_kernel, regularized_kernel, Scenario};
use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, singular_values, ComplexMatrix, C64};

/// Labels of [`NormReport`] in report order. Suffix `_1` is the trace norm, `_2` Hilbert–Schmidt.
pub const NORM_LABELS: [&str; 10] = [
    "comm_NU_1",
    "comm_NU_2",
    "Q_sqrtNNp_1",
    "dQ_sqrtNNp_1",
    "dQ_N_1",
    "QU_dN_1",
    "sqrtN_shift_1",
    "sqrtNp_shift_1",
    "Dreg_minus_1_1",
    "Dnaive_minus_1_1",
];

/// Schatten norms of the operators whose trace-class membership controls the idealized limit.
///
/// | label | operator |
/// |---|---|
/// | `comm_NU_1`, `comm_NU_2` | `[N, U]` |
/// | `Q_sqrtNNp_1` | `Q√(NN′)` |
/// | `dQ_sqrtNNp_1` | `(Q_U − Q)√(NN′)` |
/// | `dQ_N_1` | `(Q_U − Q)N` |
/// | `QU_dN_1` | `Q_U(N − N_U)` |
/// | `sqrtN_shift_1`, `sqrtNp_shift_1` | `√N − U√N U†`, same for `N′` |
/// | `Dreg_minus_1_1`, `Dnaive_minus_1_1` | `D̃(λ*) − 1`, `D(λ*) − 1` |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub lambda_ref: f64,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl NormReport {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.values[i])
    }
}

fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

pub fn norm_report(scenario: &Scenario, lambda_ref: f64) -> Result<NormReport> {
    let n = scenario.occupation().matrix();
    let u = scenario.evolution().matrix();
    let q = scenario.charge().matrix();
    let qu = scenario.charge_evolved();
    let nu = scenario.occupation_evolved();
    let dq = &qu - q;

    let spec = hermitian_eig(scenario.occupation().as_hermitian())?;
    let sqrt_nnp = spec.apply(|x| C64::new((x * (1.0 - x)).max(0.0).sqrt(), 0.0));
    let sqrt_n = spec.apply(|x| C64::new(x.clamp(0.0, 1.0).sqrt(), 0.0));
    let sqrt_np = spec.apply(|x| C64::new((1.0 - x).clamp(0.0, 1.0).sqrt(), 0.0));
    let shifted = |a: &ComplexMatrix| &(u * a) * &u.adjoint();

    let comm = &(n * u) - &(u * n);
    let comm_sv = singular_values(&comm)?;
    let values = vec![
        comm_sv.iter().sum(),
        comm_sv.iter().map(|s| s * s).sum::<f64>().sqrt(),
        trace_norm(&(q * &sqrt_nnp))?,
        trace_norm(&(&dq * &sqrt_nnp))?,
        trace_norm(&(&dq * n))?,
        trace_norm(&(&qu * &(n - &nu)))?,
        trace_norm(&(&sqrt_n - &shifted(&sqrt_n)))?,
        trace_norm(&(&sqrt_np - &shifted(&sqrt_np)))?,
        regularized_kernel(scenario, lambda_ref)?.trace_norm_defect,
        levitov_kernel(scenario, lambda_ref)?.trace_norm_defect,
    ];
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invariant("norm_report", format!("{} = {}", NORM_LABELS[i], values[i])));
    }
    Ok(NormReport { lambda_ref, labels: NORM_LABELS.iter().map(|s| s.to_string()).collect(), values })
}
