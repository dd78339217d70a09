use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{build_chiral, ChiralModel};
use crate::opcore::{conjugate_by, ComplexMatrix, C64};

/// `‖(Q_U − Q)Nψ_n‖` for a packet pushed `n` grid steps deeper into the sea.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncompactDemo {
    /// `‖(Q_U − Q)ψ‖` of the unshifted packet.
    pub reference: f64,
    /// Entry `n` is the norm for the packet shifted down by `n` steps, `n = 0..=n_max`.
    pub norms: Vec<f64>,
}

/// Shows that `(Q_U − Q)N` is not compact: a packet sliding down the sea converges weakly to
/// zero, yet its image keeps a norm comparable to the unshifted one.
///
/// The packet lives in channel 0, is Gaussian in energy around `E = −Λ/4` with width `G/32` grid
/// steps, and is centred in time where the scatterer mixes the channels most strongly. Shifts up
/// to `G/4` keep it well inside the band.
pub fn noncompact_demo(model: &ChiralModel, n_max: usize) -> Result<NoncompactDemo> {
    model.validate()?;
    if model.scatter.is_trivial() {
        return Err(Error::NotApplicable { detail: "the scatterer is the identity, so Q_U = Q".into() });
    }
    let g = model.grid_points;
    if n_max > g / 4 {
        return Err(Error::contract("noncompact_demo", format!("n_max = {n_max} exceeds G/4 = {}", g / 4)));
    }
    let times = model.time_nodes();
    let (t_c, mixing) = times
        .iter()
        .map(|&t| (t, model.scatter.at(t)[2].norm()))
        .fold((0.0, 0.0), |best, x| if x.1 > best.1 { x } else { best });
    if mixing < 1e-12 {
        return Err(Error::NotApplicable { detail: "the scatterer never mixes the channels, so Q_U = Q".into() });
    }

    let ops = build_chiral(model)?;
    let q = ops.charge.matrix();
    let dq = &conjugate_by(&ops.evolution, q)? - q;
    let n = ops.occupation.matrix();
    let center = (3 * g / 8) as f64;
    let width = (g as f64 / 32.0).max(1.0);

    let packet = |shift: usize| -> ComplexMatrix {
        let mut psi = ComplexMatrix::zeros(2 * g, 1);
        let mut norm = 0.0;
        for k in 0..g {
            let x = (k + shift) as f64 - center;
            let amp = (-0.5 * x * x / (width * width)).exp();
            // Energy of grid index k + shift; the unshifted packet peaks at t_c in time.
            let e = -model.energy_cutoff + ((k + shift) as f64 + 0.5) * model.energy_step();
            psi.set(k, 0, C64::from_polar(amp, e * t_c));
            norm += amp * amp;
        }
        psi.scale(C64::new(1.0 / norm.sqrt(), 0.0))
    };

    let reference = (&dq * &packet(0)).frobenius_norm();
    if reference < 1e-10 {
        return Err(Error::NotApplicable { detail: format!("‖(Q_U − Q)ψ‖ = {reference:e}") });
    }
    let norms = (0..=n_max).map(|s| (&dq * &(n * &packet(s))).frobenius_norm()).collect();
    Ok(NoncompactDemo { reference, norms })
}
