//! Counting kernels, sampled generating functions, charge distributions and cumulants.

mod kernel;
mod statistics;

pub use kernel::{
    counting_kernel, levitov_kernel, regularized_kernel, zero_temperature_kernel, CountingKernel, KernelEvaluator,
    KernelVariant, Scenario,
};
pub use statistics::{
    charge_distribution, cumulants, generating_function, mean_from_derivative, mean_transport_direct, naive_mean,
    particle_hole_check, required_grid_size, ChargeDistribution, CumulantVector, GeneratingFunctionSamples,
    CONJUGATE_SYMMETRY_TOL, IMAGINARY_RESIDUE_TOL, INTEGRITY_TOL, MAX_CUMULANT_ORDER, MEAN_REALITY_TOL,
    NEGATIVITY_TOL, NORMALIZATION_TOL, SUM_TOL,
};

#[cfg(test)]
mod tests;
