//! Two chiral channels with a time-of-passage scatterer.
//!
//! The one-particle space is discretized in the energy variable `E` conjugate to the passage
//! time `t`: `G` cell-centred energies `E_k = −Λ + (k + ½)δE` with `δE = 2Λ/G`, so that `E = 0`
//! is never a grid point. Dual to that grid is the time window `[−W/2, W/2)` with `W = 2π/δE`.
//! Multiplication by `U(t)` becomes the Toeplitz matrix of its window Fourier coefficients,
//! restricted to the `G` retained energies and unitarized by its polar factor. The basis index is
//! `channel·G + k`; `Q` selects channel 0 and `N` fills `E < 0` in both channels.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{svd, unitarity_defect, ComplexMatrix, HermitianOperator, UnitaryOperator, C64, ONE, ZERO};

use super::lattice::ChargeProjection;
use super::occupation::{OccupationKind, OccupationOperator};

/// Unitarity gate on the sampled scatterer.
pub const SCATTER_UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScatterProfile {
    Identity,
    /// `diag(e^{iφ b(t)}, 1)` with a unit bump `b` on `[start, end]`.
    PhasePulse { start: f64, end: f64, phase: f64 },
    /// `R(θ(t)) diag(e^{iφ(t)}, 1) R(θ(t))†`: a mixing angle rising over the first two thirds of
    /// the support and a phase over the last two thirds, so the loop in `(θ, φ)` encloses area.
    PumpCycle { start: f64, end: f64, mixing: f64, phase: f64 },
}

fn bump(t: f64, start: f64, end: f64) -> f64 {
    let x = (2.0 * t - start - end) / (end - start);
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

impl ScatterProfile {
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            ScatterProfile::Identity => None,
            ScatterProfile::PhasePulse { start, end, .. } | ScatterProfile::PumpCycle { start, end, .. } => {
                Some((start, end))
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        match *self {
            ScatterProfile::Identity => true,
            ScatterProfile::PhasePulse { phase, .. } => phase == 0.0,
            ScatterProfile::PumpCycle { mixing, phase, .. } => mixing == 0.0 || phase == 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some((start, end)) = self.support() {
            if !(start.is_finite() && end.is_finite() && start < end) {
                return Err(Error::contract("ScatterProfile", format!("support [{start}, {end}] is empty")));
            }
        }
        let finite = match *self {
            ScatterProfile::Identity => true,
            ScatterProfile::PhasePulse { phase, .. } => phase.is_finite(),
            ScatterProfile::PumpCycle { mixing, phase, .. } => mixing.is_finite() && phase.is_finite(),
        };
        if !finite {
            return Err(Error::contract("ScatterProfile", "amplitudes must be finite"));
        }
        Ok(())
    }

    /// The 2×2 scattering matrix at passage time `t`, row-major.
    pub fn at(&self, t: f64) -> [C64; 4] {
        match *self {
            ScatterProfile::Identity => [ONE, ZERO, ZERO, ONE],
            ScatterProfile::PhasePulse { start, end, phase } => {
                [C64::from_polar(1.0, phase * bump(t, start, end)), ZERO, ZERO, ONE]
            }
            ScatterProfile::PumpCycle { start, end, mixing, phase } => {
                let third = (end - start) / 3.0;
                let theta = mixing * bump(t, start, start + 2.0 * third);
                let e = C64::from_polar(1.0, phase * bump(t, start + third, end));
                let (s, c) = theta.sin_cos();
                let off = (e - ONE) * (c * s);
                [e * (c * c) + s * s, off, off, e * (s * s) + c * c]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiralModel {
    /// Energy cutoff `Λ`: the retained band is `(−Λ, Λ)`.
    pub energy_cutoff: f64,
    /// Number of retained energies per channel; must be even.
    pub grid_points: usize,
    pub scatter: ScatterProfile,
}

/// Operators of a built [`ChiralModel`].
#[derive(Clone, Debug)]
pub struct ChiralOperators {
    pub occupation: OccupationOperator,
    pub charge: ChargeProjection,
    pub evolution: UnitaryOperator,
    /// `max |1 − σ|` over the singular values of the Toeplitz compression before unitarization.
    pub compression_defect: f64,
}

impl ChiralModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_cutoff > 0.0 && self.energy_cutoff.is_finite()) {
            return Err(Error::contract("ChiralModel", format!("energy_cutoff = {} must be positive", self.energy_cutoff)));
        }
        if self.grid_points < 2 || self.grid_points % 2 != 0 {
            return Err(Error::contract(
                "ChiralModel",
                format!("grid_points = {} must be even and at least 2", self.grid_points),
            ));
        }
        self.scatter.validate()
    }

    pub fn energy_step(&self) -> f64 {
        2.0 * self.energy_cutoff / self.grid_points as f64
    }

    pub fn energies(&self) -> Vec<f64> {
        let de = self.energy_step();
        (0..self.grid_points).map(|k| -self.energy_cutoff + (k as f64 + 0.5) * de).collect()
    }

    /// Window length `W = 2π/δE`.
    pub fn window_length(&self) -> f64 {
        2.0 * PI / self.energy_step()
    }

    /// `[−W/2, W/2)`.
    pub fn window(&self) -> (f64, f64) {
        let w = self.window_length();
        (-0.5 * w, 0.5 * w)
    }

    /// The `G` passage times `t_j = −W/2 + jW/G` dual to the energy grid.
    pub fn time_nodes(&self) -> Vec<f64> {
        let (t0, _) = self.window();
        let dt = self.window_length() / self.grid_points as f64;
        (0..self.grid_points).map(|j| t0 + j as f64 * dt).collect()
    }

    /// Unitary DFT `F_{kj} = e^{iE_k t_j}/√G` between the time nodes and the energy grid.
    pub fn fourier_matrix(&self) -> ComplexMatrix {
        let g = self.grid_points;
        let e = self.energies();
        let t = self.time_nodes();
        let norm = 1.0 / (g as f64).sqrt();
        ComplexMatrix::from_fn(g, g, |k, j| C64::from_polar(norm, e[k] * t[j]))
    }

    /// Window Fourier coefficients `c_m = (1/W)∫ (U(t) − 1) e^{i2πmt/W} dt`, `|m| < G`, by the
    /// trapezoidal rule on a fine periodic grid. Returned per matrix entry, indexed by `m + G − 1`.
    fn coefficients(&self) -> [Vec<C64>; 4] {
        let g = self.grid_points;
        let samples = (8 * g).max(256).next_power_of_two();
        let (t0, _) = self.window();
        let dt = self.window_length() / samples as f64;
        let fft = FftPlanner::<f64>::new().plan_fft_inverse(samples);

        let mut buffers: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; samples]);
        for j in 0..samples {
            let u = self.scatter.at(t0 + j as f64 * dt);
            for (e, buf) in buffers.iter_mut().enumerate() {
                let diag = if e == 0 || e == 3 { ONE } else { ZERO };
                buf[j] = u[e] - diag;
            }
        }
        buffers.map(|mut buf| {
            fft.process(&mut buf);
            // t0 = −W/2 contributes the phase e^{−iπm} = (−1)^m.
            (-(g as i64 - 1)..g as i64)
                .map(|m| {
                    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    buf[m.rem_euclid(samples as i64) as usize] * (sign / samples as f64)
                })
                .collect()
        })
    }

    /// Toeplitz compression of the multiplication operator `U(t)` onto the retained energies.
    pub fn compressed_scatter(&self) -> ComplexMatrix {
        let g = self.grid_points;
        let coeffs = self.coefficients();
        let mut t = ComplexMatrix::identity(2 * g);
        for a in 0..2 {
            for b in 0..2 {
                let c = &coeffs[2 * a + b];
                for k in 0..g {
                    for kp in 0..g {
                        let v = c[k + g - 1 - kp];
                        let (i, j) = (a * g + k, b * g + kp);
                        t.set(i, j, t.get(i, j) + v);
                    }
                }
            }
        }
        t
    }
}

pub fn build_chiral(model: &ChiralModel) -> Result<ChiralOperators> {
    model.validate()?;
    let g = model.grid_points;
    let (w0, w1) = model.window();
    if let Some((start, end)) = model.scatter.support() {
        if start < w0 || end >= w1 {
            return Err(Error::Truncation { start, end, window_start: w0, window_end: w1 });
        }
    }
    for t in model.time_nodes() {
        let u = model.scatter.at(t);
        let m = ComplexMatrix::from_row_major(2, 2, u.to_vec())?;
        let defect = unitarity_defect(&m);
        if defect > SCATTER_UNITARITY_TOL {
            return Err(Error::invariant("scatter_unitarity", format!("‖U(t)†U(t) − 1‖_max = {defect:e} at t = {t}")));
        }
    }

    let (evolution, compression_defect) = if model.scatter.is_trivial() {
        (UnitaryOperator::identity(2 * g), 0.0)
    } else {
        let (w, sigma, vt) = svd(&model.compressed_scatter())?;
        let defect = sigma.iter().map(|s| (1.0 - s).abs()).fold(0.0, f64::max);
        (UnitaryOperator::new(&w * &vt)?, defect)
    };

    let filled: Vec<f64> = (0..2 * g).map(|i| if i % g < g / 2 { 1.0 } else { 0.0 }).collect();
    let occupation = OccupationOperator::new(HermitianOperator::from_real_diagonal(&filled), OccupationKind::Pure)?;
    let charge = ChargeProjection::from_mask((0..2 * g).map(|i| i < g).collect())?;
    occupation.check_commutes(&charge)?;
    Ok(ChiralOperators { occupation, charge, evolution, compression_defect })
}
