//! Brute-force second quantization on the full `2^M`-dimensional Fock space.
//!
//! Independent of the determinant engine: everything here is built from explicit
//! many-body matrices, so agreement with the engine is a genuine cross-check.
//! Only small systems are admitted (`M ≤ 14`).

mod fock;
mod state;

pub use fock::{dgamma, gamma, FockBasis, FockOperator, MAX_DENSE_MODES, MAX_MODES};
pub use state::{GibbsState, PARTITION_FLOOR};

use crate::engine::ChargeDistribution;
use crate::error::{Error, Result};
use crate::models::ChargeProjection;
use crate::opcore::{ComplexMatrix, HermitianOperator, UnitaryOperator, C64};

use state::{commutator_defect, one_minus_n_plus};

/// Gate on `‖[generator, Q]‖_max` before counting.
pub const COMMUTATION_TOL: f64 = 1e-10;
/// Mode limit of [`omega_gamma_check`].
pub const OMEGA_GAMMA_MAX_MODES: usize = 10;
/// Eigenvalues of the density operator above this (negative) level are clipped to zero.
pub const DENSITY_CLIP_TOL: f64 = 1e-10;

fn check_dims(op: &'static str, dim: usize, basis: &FockBasis) -> Result<()> {
    if dim != basis.modes() {
        return Err(Error::contract(op, format!("one-particle dimension {dim} on {} modes", basis.modes())));
    }
    Ok(())
}

fn check_hypothesis(state: &GibbsState, charge: &ChargeProjection) -> Result<()> {
    let defect = commutator_defect(state.generator(), charge.matrix());
    if defect > COMMUTATION_TOL {
        return Err(Error::Hypothesis { detail: format!("‖[state, Q]‖_max = {defect:e}") });
    }
    Ok(())
}

/// `χ(λ) = Tr(Γ(U)† e^{iλdΓ(Q)} Γ(U) e^{−iλdΓ(Q)} P)` at each requested λ.
pub fn chi_bruteforce(
    evolution: &UnitaryOperator,
    charge: &ChargeProjection,
    state: &GibbsState,
    basis: &FockBasis,
    lambdas: &[f64],
) -> Result<Vec<C64>> {
    check_dims("chi_bruteforce", evolution.dim(), basis)?;
    check_dims("chi_bruteforce", charge.dim(), basis)?;
    check_hypothesis(state, charge)?;
    let g = gamma(evolution.matrix(), basis)?;
    let g_adj = g.adjoint();
    let count = dgamma(charge.matrix(), basis)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let e_plus = count.exp_i(lambda)?;
            let e_minus = count.exp_i(-lambda)?;
            let left = g_adj.compose(&e_plus).compose(&g).compose(&e_minus);
            Ok(left.trace_product(state.density()))
        })
        .collect()
}

/// `|Tr(e^{iλdΓ(A)} P) − det(1 − N + e^{iλA} N)|` with `N` read off the state.
pub fn trdet_identity_check(a: &HermitianOperator, state: &GibbsState, basis: &FockBasis, lambda: f64) -> Result<f64> {
    check_dims("trdet_identity_check", a.dim(), basis)?;
    let lhs = dgamma(a.matrix(), basis)?.exp_i(lambda)?.trace_product(state.density());
    let n = state.reduced_density(basis);
    let spec = crate::opcore::hermitian_eig(a)?;
    let phase = spec.apply(|x| C64::from_polar(1.0, lambda * x));
    let rhs = one_minus_n_plus(&n, &phase)?;
    Ok((lhs - rhs).norm())
}

/// `|Tr(Γ(U) P) − det(1 − N + U N)|` for any square `U`; only for `M ≤ 10`.
pub fn omega_gamma_check(u: &ComplexMatrix, state: &GibbsState, basis: &FockBasis) -> Result<f64> {
    if basis.modes() > OMEGA_GAMMA_MAX_MODES {
        return Err(Error::SizeGate { modes: basis.modes(), max: OMEGA_GAMMA_MAX_MODES });
    }
    check_dims("omega_gamma_check", u.rows(), basis)?;
    let lhs = gamma(u, basis)?.trace_product(state.density());
    let rhs = one_minus_n_plus(&state.reduced_density(basis), u)?;
    Ok((lhs - rhs).norm())
}

/// Exact distribution of the transferred charge `n = q_β − q_α`:
/// `p_n = Σ ρ_α |⟨β|Γ(U)|α⟩|²` over eigenstates `α` of `P` with definite charge and charge
/// eigenstates `β`. Requires a diagonal charge and a state commuting with it.
pub fn distribution_bruteforce(
    evolution: &UnitaryOperator,
    charge: &ChargeProjection,
    state: &GibbsState,
    basis: &FockBasis,
) -> Result<ChargeDistribution> {
    let m = basis.modes();
    check_dims("distribution_bruteforce", evolution.dim(), basis)?;
    check_dims("distribution_bruteforce", charge.dim(), basis)?;
    check_hypothesis(state, charge)?;
    let mask = charge.site_mask();
    let qmask: u32 = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1u32 << i).sum();
    let g = gamma(evolution.matrix(), basis)?;

    let mut p = vec![0.0; 2 * m + 1];
    for (rho, qa, k, amp) in state.charge_resolved_spectrum(mask, basis)? {
        if rho < -DENSITY_CLIP_TOL {
            return Err(Error::invariant("density_positivity", format!("density eigenvalue {rho:e}")));
        }
        let rho = rho.max(0.0);
        if rho == 0.0 {
            continue;
        }
        let block = g.block(k);
        let amp = nalgebra::DVector::from_vec(amp);
        let image = block * amp;
        for (bi, &b) in basis.sector(k).iter().enumerate() {
            let qb = (b & qmask).count_ones() as i64;
            let n = qb - qa as i64;
            p[(n + m as i64) as usize] += rho * image[bi].norm_sqr();
        }
    }
    Ok(ChargeDistribution::from_probabilities(-(m as i64), p))
}
