//! Why the chiral model uses a Toeplitz compression instead of a circulant.
//!
//! On a periodic time grid the dual energies form a circle, so the band edge at `±Λ` is a second
//! Fermi point of the opposite chirality. The charge it carries cancels the physical one exactly.

use fcs_core::engine::{
    charge_distribution, cumulants, generating_function, mean_transport_direct, required_grid_size, KernelVariant,
    Scenario,
};
use fcs_core::models::{build_chiral, ChiralModel, ScatterProfile};
use fcs_core::opcore::{ComplexMatrix, UnitaryOperator, ZERO};

fn model() -> ChiralModel {
    ChiralModel {
        energy_cutoff: 16.0,
        grid_points: 64,
        scatter: ScatterProfile::PumpCycle { start: -3.0, end: 3.0, mixing: 0.8, phase: 2.0 },
    }
}

/// `F · diag(U(t_j)) · F†` per channel block: multiplication by `U(t)` on the periodic grid.
fn circulant_scatter(model: &ChiralModel) -> ComplexMatrix {
    let g = model.grid_points;
    let f = model.fourier_matrix();
    let samples: Vec<[_; 4]> = model.time_nodes().iter().map(|&t| model.scatter.at(t)).collect();
    let mut u = ComplexMatrix::zeros(2 * g, 2 * g);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..g {
                for kp in 0..g {
                    let v = (0..g).fold(ZERO, |acc, j| acc + f.get(k, j) * samples[j][2 * a + b] * f.get(kp, j).conj());
                    u.set(a * g + k, b * g + kp, v);
                }
            }
        }
    }
    u
}

fn first_cumulant(scenario: &Scenario) -> f64 {
    let samples =
        generating_function(scenario, KernelVariant::Regularized, required_grid_size(scenario.dim())).unwrap();
    cumulants(&charge_distribution(&samples).unwrap(), 2).unwrap().get(1)
}

#[test]
fn periodic_wrap_kills_first_cumulant() {
    let model = model();
    let ops = build_chiral(&model).unwrap();

    let toeplitz = Scenario::new(ops.occupation.clone(), ops.charge.clone(), ops.evolution.clone()).unwrap();
    let k1 = first_cumulant(&toeplitz);
    assert!((k1 - mean_transport_direct(&toeplitz).unwrap()).abs() < 1e-8);
    assert!(k1.abs() > 0.02, "pumped charge {k1}");

    let periodic = UnitaryOperator::new(circulant_scatter(&model)).unwrap();
    let wrapped = Scenario::new(ops.occupation, ops.charge, periodic).unwrap();
    let k1_wrapped = first_cumulant(&wrapped);
    assert!(k1_wrapped.abs() < 1e-9, "periodic κ₁ = {k1_wrapped:e}");
    assert!(mean_transport_direct(&wrapped).unwrap().abs() < 1e-9);
}
