use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::C64;

use super::kernel::{KernelEvaluator, KernelVariant, Scenario};

/// Gate on `|χ(0) − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Gate on `|χ(2π − λ) − conj χ(λ)|`.
pub const CONJUGATE_SYMMETRY_TOL: f64 = 1e-9;
/// Hard failure threshold for imaginary residues and negative probabilities.
pub const INTEGRITY_TOL: f64 = 1e-7;
/// Contract thresholds a valid distribution must meet.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;
pub const NEGATIVITY_TOL: f64 = 1e-10;
pub const SUM_TOL: f64 = 1e-9;
/// Gate on the imaginary part of the directly computed mean.
pub const MEAN_REALITY_TOL: f64 = 1e-10;
pub const MAX_CUMULANT_ORDER: usize = 6;

/// `χ(λ_k)` on the uniform grid `λ_k = 2πk/K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingFunctionSamples {
    pub grid_size: usize,
    pub variant: KernelVariant,
    pub values: Vec<C64>,
}

impl GeneratingFunctionSamples {
    pub fn lambda(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.grid_size as f64
    }

    /// `max_k |χ(λ_{K−k}) − conj χ(λ_k)|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let k = self.grid_size;
        (0..k).map(|i| (self.values[(k - i) % k] - self.values[i].conj()).norm()).fold(0.0, f64::max)
    }
}

/// Smallest admissible grid: odd and at least `2·dim + 1`.
pub fn required_grid_size(dim: usize) -> usize {
    2 * dim + 1
}

pub fn generating_function(scenario: &Scenario, variant: KernelVariant, grid_size: usize) -> Result<GeneratingFunctionSamples> {
    let required = required_grid_size(scenario.dim());
    if grid_size < required || grid_size % 2 == 0 {
        return Err(Error::Aliasing { grid: grid_size, required });
    }
    let evaluator = KernelEvaluator::new(scenario)?;
    sample(&evaluator, variant, grid_size)
}

/// Samples `χ` with a prepared evaluator; grid checks are the caller's responsibility.
pub(crate) fn sample(evaluator: &KernelEvaluator, variant: KernelVariant, grid_size: usize) -> Result<GeneratingFunctionSamples> {
    let values = (0..grid_size)
        .into_par_iter()
        .map(|k| evaluator.chi(variant, 2.0 * PI * k as f64 / grid_size as f64))
        .collect::<Result<Vec<_>>>()?;
    let samples = GeneratingFunctionSamples { grid_size, variant, values };

    let norm = (samples.values[0] - C64::new(1.0, 0.0)).norm();
    if norm > NORMALIZATION_TOL {
        return Err(Error::invariant("normalization", format!("|χ(0) − 1| = {norm:e}")));
    }
    let sym = samples.conjugate_symmetry_defect();
    if sym > CONJUGATE_SYMMETRY_TOL {
        return Err(Error::invariant("conjugate_symmetry", format!("max |χ(2π − λ) − conj χ(λ)| = {sym:e}")));
    }
    Ok(samples)
}

/// Probabilities of the transferred charge `n = n_min, …, n_min + len − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeDistribution {
    pub n_min: i64,
    /// Raw real parts, not clipped.
    pub probabilities: Vec<f64>,
    /// Largest discarded imaginary part.
    pub imaginary_residue: f64,
}

impl ChargeDistribution {
    pub fn from_probabilities(n_min: i64, probabilities: Vec<f64>) -> Self {
        ChargeDistribution { n_min, probabilities, imaginary_residue: 0.0 }
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.probabilities.len() as i64).map(move |i| self.n_min + i)
    }

    /// `p_n`, zero outside the stored range.
    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.n_min;
        if i < 0 || i >= self.probabilities.len() as i64 {
            0.0
        } else {
            self.probabilities[i as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Reporting view: roundoff negatives within the tolerance become exact zeros.
    pub fn clipped(&self) -> Vec<f64> {
        self.probabilities.iter().map(|&p| if p < 0.0 && p >= -NEGATIVITY_TOL { 0.0 } else { p }).collect()
    }

    /// `Σ p_n e^{iλn}`.
    pub fn characteristic(&self, lambda: f64) -> C64 {
        self.charges().zip(&self.probabilities).map(|(n, &p)| C64::from_polar(p, lambda * n as f64)).sum()
    }

    /// Checks the integer-charge contract: tiny imaginary residues, no negatives beyond roundoff,
    /// unit total.
    pub fn check_contract(&self) -> Result<()> {
        if self.imaginary_residue > IMAGINARY_RESIDUE_TOL {
            return Err(Error::DistributionIntegrity {
                detail: format!("imaginary residue {:e} exceeds {IMAGINARY_RESIDUE_TOL:e}", self.imaginary_residue),
            });
        }
        if let Some((n, p)) = self.charges().zip(&self.probabilities).find(|(_, &p)| p < -NEGATIVITY_TOL) {
            return Err(Error::DistributionIntegrity { detail: format!("p_{n} = {p:e} is negative") });
        }
        let total = self.total();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::DistributionIntegrity { detail: format!("Σ p_n = {total} differs from 1") });
        }
        Ok(())
    }
}

/// Inverse DFT `p_n = (1/K) Σ_k χ(λ_k) e^{−iλ_k n}` for `|n| ≤ (K − 1)/2`.
pub fn charge_distribution(samples: &GeneratingFunctionSamples) -> Result<ChargeDistribution> {
    let k = samples.grid_size;
    if k == 0 || k % 2 == 0 || samples.values.len() != k {
        return Err(Error::contract("charge_distribution", format!("need an odd number of samples, got {k}")));
    }
    let mut buf = samples.values.clone();
    FftPlanner::<f64>::new().plan_fft_forward(k).process(&mut buf);
    let half = (k as i64 - 1) / 2;
    let mut probabilities = Vec::with_capacity(k);
    let mut residue: f64 = 0.0;
    for n in -half..=half {
        let z = buf[n.rem_euclid(k as i64) as usize] / k as f64;
        residue = residue.max(z.im.abs());
        probabilities.push(z.re);
    }
    if residue > INTEGRITY_TOL {
        return Err(Error::DistributionIntegrity { detail: format!("imaginary residue {residue:e} exceeds {INTEGRITY_TOL:e}") });
    }
    if let Some((i, &p)) = probabilities.iter().enumerate().find(|(_, &p)| p < -INTEGRITY_TOL) {
        return Err(Error::DistributionIntegrity { detail: format!("p_{} = {p:e} is negative", i as i64 - half) });
    }
    Ok(ChargeDistribution { n_min: -half, probabilities, imaginary_residue: residue })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    /// `κ₁, …, κ_order`.
    pub kappa: Vec<f64>,
}

impl CumulantVector {
    pub fn order(&self) -> usize {
        self.kappa.len()
    }

    /// `κ_j`, one-based.
    pub fn get(&self, j: usize) -> f64 {
        self.kappa[j - 1]
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cumulants from the exact moments of the distribution via
/// `κ_n = m_n − Σ_{k=1}^{n−1} C(n−1, k−1) κ_k m_{n−k}`.
pub fn cumulants(dist: &ChargeDistribution, order: usize) -> Result<CumulantVector> {
    if order == 0 || order > MAX_CUMULANT_ORDER {
        return Err(Error::contract("cumulants", format!("order {order} outside 1..={MAX_CUMULANT_ORDER}")));
    }
    let moments: Vec<f64> = (0..=order)
        .map(|j| dist.charges().zip(&dist.probabilities).map(|(n, &p)| (n as f64).powi(j as i32) * p).sum())
        .collect();
    let mut kappa: Vec<f64> = Vec::with_capacity(order);
    for n in 1..=order {
        let mut k = moments[n];
        for j in 1..n {
            k -= binomial(n - 1, j - 1) * kappa[j - 1] * moments[n - j];
        }
        kappa.push(k);
    }
    if order >= 2 && kappa[1] < -1e-9 {
        return Err(Error::invariant("variance", format!("κ₂ = {:e} is negative", kappa[1])));
    }
    Ok(CumulantVector { kappa })
}

/// `⟨n⟩ = tr(Q_U(N − N_U))`.
pub fn mean_transport_direct(scenario: &Scenario) -> Result<f64> {
    let diff = scenario.occupation().matrix() - &scenario.occupation_evolved();
    let t = (&scenario.charge_evolved() * &diff).trace();
    if t.im.abs() > MEAN_REALITY_TOL {
        return Err(Error::invariant("mean_reality", format!("imaginary part {:e}", t.im)));
    }
    Ok(t.re)
}

/// `tr((Q_U − Q)N)`, the unregularized mean.
pub fn naive_mean(scenario: &Scenario) -> f64 {
    let d = &scenario.charge_evolved() - scenario.charge().matrix();
    (&d * scenario.occupation().matrix()).trace().re
}

/// `max_k |χ_N(λ_k) − χ_{N′}(−λ_k)|`.
pub fn particle_hole_check(scenario: &Scenario, variant: KernelVariant, grid_size: usize) -> Result<f64> {
    let direct = generating_function(scenario, variant, grid_size)?;
    let holes = generating_function(&scenario.complement(), variant, grid_size)?;
    let k = grid_size;
    Ok((0..k).map(|i| (direct.values[i] - holes.values[(k - i) % k]).norm()).fold(0.0, f64::max))
}

/// `−i d/dλ log χ` at `λ = 0` by a central difference of step `h`.
pub fn mean_from_derivative(scenario: &Scenario, variant: KernelVariant, h: f64) -> Result<f64> {
    let evaluator = KernelEvaluator::new(scenario)?;
    let plus = evaluator.chi(variant, h)?.ln();
    let minus = evaluator.chi(variant, -h)?.ln();
    Ok(((plus - minus) / C64::new(0.0, 2.0 * h)).re)
}
