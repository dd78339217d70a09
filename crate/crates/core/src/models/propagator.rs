use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, unitary_exp, ComplexMatrix, HermitianOperator, UnitaryOperator, C64};

use super::drive::Drive;

/// Largest accepted accumulated step-error estimate for driven propagation.
pub const STEP_ACCURACY_TOL: f64 = 1e-6;
/// Unitarity gate on the final propagator.
pub const PROPAGATOR_UNITARITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum PropagationMode {
    Static,
    /// `H(t) = H + V(t)` on `[0, total_time]`, split into `steps` midpoint steps.
    Driven { steps: usize, drive: Drive },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorSpec {
    pub total_time: f64,
    pub mode: PropagationMode,
}

impl PropagatorSpec {
    pub fn fixed(total_time: f64) -> Self {
        PropagatorSpec { total_time, mode: PropagationMode::Static }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.total_time >= 0.0 && self.total_time.is_finite()) {
            return Err(Error::contract("PropagatorSpec", format!("total_time = {} must be ≥ 0", self.total_time)));
        }
        if let PropagationMode::Driven { steps, drive } = &self.mode {
            if *steps == 0 {
                return Err(Error::contract("PropagatorSpec", "driven propagation needs at least one step"));
            }
            if drive.dim() != dim {
                return Err(Error::contract(
                    "PropagatorSpec",
                    format!("drive of dimension {} against Hamiltonian of {dim}", drive.dim()),
                ));
            }
        }
        Ok(())
    }
}

pub fn propagate(spec: &PropagatorSpec, h: &HermitianOperator) -> Result<UnitaryOperator> {
    spec.validate(h.dim())?;
    let u = match &spec.mode {
        PropagationMode::Static => unitary_exp(h, spec.total_time)?,
        PropagationMode::Driven { steps, drive } => {
            let estimate = step_error_estimate(h, drive, spec.total_time, *steps);
            if estimate > STEP_ACCURACY_TOL {
                return Err(Error::Accuracy { steps: *steps, estimate, tolerance: STEP_ACCURACY_TOL });
            }
            midpoint_product(h, drive, spec.total_time, *steps)?
        }
    };
    let defect = crate::opcore::unitarity_defect(u.matrix());
    if defect > PROPAGATOR_UNITARITY_TOL {
        return Err(Error::invariant("propagator_unitarity", format!("‖U†U − 1‖_max = {defect:e}")));
    }
    Ok(u)
}

/// Ordered product `Π_j exp(−i H(t_j) Δt)` over midpoints `t_j = (j + ½)Δt`, later times on the left.
pub fn midpoint_product(h: &HermitianOperator, drive: &Drive, total_time: f64, steps: usize) -> Result<UnitaryOperator> {
    if steps == 0 {
        return Err(Error::contract("midpoint_product", "steps must be at least 1"));
    }
    let dt = total_time / steps as f64;
    let mut u = UnitaryOperator::identity(h.dim());
    if total_time == 0.0 {
        return Ok(u);
    }
    for j in 0..steps {
        let t = (j as f64 + 0.5) * dt;
        let hj = h.add_scaled(&drive.at(t), 1.0);
        let step = unitary_exp(&hj, dt)?;
        u = UnitaryOperator::new(step.matrix() * u.matrix())?;
    }
    Ok(u)
}

/// Leading-order error of the exponential midpoint rule, summed over steps:
/// `Δt³/12 ‖[H(t_j), Ḣ(t_j)]‖_F + Δt³/24 ‖Ḧ(t_j)‖_F`.
pub fn step_error_estimate(h: &HermitianOperator, drive: &Drive, total_time: f64, steps: usize) -> f64 {
    if drive.is_zero() || total_time == 0.0 || steps == 0 {
        return 0.0;
    }
    let dt = total_time / steps as f64;
    let dt3 = dt * dt * dt;
    (0..steps)
        .map(|j| {
            let t = (j as f64 + 0.5) * dt;
            let hj = h.matrix() + &drive.derivative(t, 0);
            let d1 = drive.derivative(t, 1);
            let d2 = drive.derivative(t, 2);
            dt3 / 12.0 * hj.commutator(&d1).frobenius_norm() + dt3 / 24.0 * d2.frobenius_norm()
        })
        .sum()
}

/// First Dyson term `−i ∫_{s1}^{s2} e^{iH₀t} V(t) e^{−iH₀t} dt` by the composite midpoint rule.
///
/// The integrand is evaluated in the eigenbasis of `H₀`, where the conjugation is a phase per entry.
pub fn dyson_first_term(
    h0: &HermitianOperator,
    drive: &Drive,
    s1: f64,
    s2: f64,
    quad_points: usize,
) -> Result<ComplexMatrix> {
    if quad_points < 8 {
        return Err(Error::contract("dyson_first_term", format!("quad_points = {quad_points} is below 8")));
    }
    if !(s1 < s2) || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::contract("dyson_first_term", format!("interval [{s1}, {s2}] is empty")));
    }
    if drive.dim() != h0.dim() {
        return Err(Error::contract("dyson_first_term", "drive and H₀ dimensions differ"));
    }
    let n = h0.dim();
    if drive.is_zero() {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let spec = hermitian_eig(h0)?;
    let w = spec.eigenvectors.as_dmatrix();
    let rotated: Vec<_> = drive
        .terms()
        .iter()
        .map(|(op, env)| (w.adjoint() * op.matrix().as_dmatrix() * w, *env))
        .collect();

    let dt = (s2 - s1) / quad_points as f64;
    let mut acc = nalgebra::DMatrix::<C64>::zeros(n, n);
    for q in 0..quad_points {
        let t = s1 + (q as f64 + 0.5) * dt;
        let phases: Vec<C64> = spec.eigenvalues.iter().map(|&e| C64::from_polar(1.0, e * t)).collect();
        for (vk, env) in &rotated {
            let f = env.value(t);
            if f == 0.0 {
                continue;
            }
            for b in 0..n {
                let right = phases[b].conj() * f;
                for a in 0..n {
                    acc[(a, b)] += phases[a] * vk[(a, b)] * right;
                }
            }
        }
    }
    let scaled = acc * C64::new(0.0, -dt);
    Ok(ComplexMatrix::from_dmatrix(w * scaled * w.adjoint())?)
}
