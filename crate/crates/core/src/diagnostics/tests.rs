use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::engine::{counting_kernel, KernelVariant, Scenario};
use crate::error::Error;
use crate::models::{ChiralModel, Envelope, PropagatorSpec, ScatterProfile, TwoLeadLattice};
use crate::opcore::{hermitian_eig, ComplexMatrix, HermitianOperator, UnitaryOperator};
use crate::testutil::{random_scenario, rng};

fn settings(order: usize) -> AnalysisSettings {
    AnalysisSettings { cumulant_order: order, ..AnalysisSettings::default() }
}

fn biased(lattice: TwoLeadLattice, time: f64) -> LatticeScenario {
    LatticeScenario {
        lattice,
        state: StateSpec::Thermal { beta: 2.0, mu_left: 0.5, mu_right: -0.5 },
        evolution: PropagatorSpec::fixed(time),
    }
}

/// `‖A‖₁` as the sum of the positive eigenvalues of the Hermitian dilation `[[0, A], [A†, 0]]`.
fn trace_norm_by_dilation(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let dilation = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => a.get(i, j - n),
        (false, true) => a.get(j, i - n).conj(),
        _ => crate::opcore::ZERO,
    });
    hermitian_eig(&HermitianOperator::new(dilation).unwrap()).unwrap().eigenvalues.iter().filter(|&&x| x > 0.0).sum()
}

#[test]
fn norm_report_trivial_cases() {
    let mut r = rng(31);
    let pure = random_scenario(&mut r, 3, 4, false);
    let report = norm_report(&pure, 1.0).unwrap();
    assert_eq!(report.labels.len(), NORM_LABELS.len());
    assert!(report.get("Q_sqrtNNp_1").unwrap() < 1e-7);
    assert!(report.get("dQ_sqrtNNp_1").unwrap() < 1e-7);

    let frozen = Scenario::new(pure.occupation().clone(), pure.charge().clone(), UnitaryOperator::identity(7)).unwrap();
    let report = norm_report(&frozen, 1.0).unwrap();
    for label in ["comm_NU_1", "comm_NU_2", "dQ_N_1", "QU_dN_1", "sqrtN_shift_1", "Dreg_minus_1_1", "Dnaive_minus_1_1"] {
        assert!(report.get(label).unwrap() < 1e-12, "{label}");
    }
}

#[test]
fn regularized_defect_matches_dilation_oracle() {
    let scenario = biased(TwoLeadLattice::uniform(20, 20), 4.0).build().unwrap();
    let report = norm_report(&scenario, 1.3).unwrap();
    let kernel = counting_kernel(&scenario, KernelVariant::Regularized, 1.3).unwrap();
    let oracle = trace_norm_by_dilation(&(&kernel.matrix - &ComplexMatrix::identity(40)));
    let value = report.get("Dreg_minus_1_1").unwrap();
    assert!(value.is_finite() && (value - oracle).abs() < 1e-10, "{value} vs {oracle}");
}

#[test]
fn decoupled_leads_transport_nothing() {
    let lattice = TwoLeadLattice { coupling: 0.0, ..TwoLeadLattice::uniform(10, 10) };
    let base = biased(lattice, 3.0);
    let scan = tenet_scan_length(&base, &[10, 20, 40], &settings(2)).unwrap();
    for j in 1..=2 {
        assert!(scan.kappa(j).iter().all(|k| k.abs() < 1e-10), "{:?}", scan.kappa(j));
    }
}

#[test]
fn causal_cone_precondition() {
    let base = biased(TwoLeadLattice::uniform(10, 10), 10.0);
    let err = tenet_scan_length(&base, &[20, 40], &settings(2)).unwrap_err();
    assert!(matches!(err, Error::BoundaryContamination { length: 20, .. }), "{err}");
    assert_eq!(err.name(), "causal_cone");
    assert!(tenet_scan_length(&base, &[40, 20], &settings(2)).is_err());
}

#[test]
fn length_scan_converges_and_is_deterministic() {
    let lattice = TwoLeadLattice { onsite_left: 0.3, ..TwoLeadLattice::uniform(20, 20) };
    let base = biased(lattice, 9.0);
    let scan = tenet_scan_length(&base, &[20, 40, 80], &settings(2)).unwrap();
    assert_eq!(scan.parameters(), vec![20.0, 40.0, 80.0]);
    for j in 1..=2 {
        let changes = ScanResult::relative_changes(&scan.kappa(j));
        assert!(changes[1] < 0.01, "κ{j}: {changes:?}");
    }
    // A real current flows under the bias.
    assert!(scan.kappa(1)[2] > 0.5);
    let again = tenet_scan_length(&base, &[20, 40, 80], &settings(2)).unwrap();
    assert_eq!(scan, again);
}

#[test]
fn depth_scan_trivial_and_gapped_cases() {
    let model = ChiralModel { energy_cutoff: 8.0, grid_points: 16, scatter: ScatterProfile::Identity };
    let scan = tenet_scan_depth(&DepthFamily::Chiral(model.clone()), &[8.0, 16.0], &settings(3)).unwrap();
    assert_eq!(scan.rows[1].grid_size, 2 * 64 + 1);
    // χ ≡ 1; what remains is FFT roundoff weighted by n^j with |n| ≤ 64.
    for j in 1..=3 {
        assert!(scan.kappa(j).iter().all(|&k| k.abs() < 1e-9), "{:?}", scan.kappa(j));
    }
    assert!(tenet_scan_depth(&DepthFamily::Chiral(model), &[8.0, 8.5], &settings(2)).is_err());

    // Levels of a 10-site chain closest to zero sit at ±2cos(5π/11) ≈ ±0.285.
    let base = LatticeScenario {
        lattice: TwoLeadLattice::uniform(10, 10),
        state: StateSpec::Pure { mu: 0.0 },
        evolution: PropagatorSpec::fixed(2.0),
    };
    let scan = tenet_scan_depth(&DepthFamily::Lattice(base.clone()), &[-0.2, -0.1, 0.05, 0.2], &settings(2)).unwrap();
    for j in 1..=2 {
        let k = scan.kappa(j);
        assert!(k.iter().all(|x| (x - k[0]).abs() < 1e-10), "{k:?}");
    }
    let thermal = LatticeScenario { state: StateSpec::Thermal { beta: 1.0, mu_left: 0.0, mu_right: 0.0 }, ..base };
    assert!(tenet_scan_depth(&DepthFamily::Lattice(thermal), &[0.0, 0.1], &settings(2)).is_err());
}

#[test]
fn noncompact_demo_plateau() {
    let trivial = ChiralModel { energy_cutoff: 8.0, grid_points: 32, scatter: ScatterProfile::Identity };
    assert_eq!(noncompact_demo(&trivial, 4).unwrap_err().name(), "not_applicable");
    let diagonal = ChiralModel { scatter: ScatterProfile::PhasePulse { start: -2.0, end: 2.0, phase: 1.0 }, ..trivial };
    assert_eq!(noncompact_demo(&diagonal, 4).unwrap_err().name(), "not_applicable");

    let model = ChiralModel {
        energy_cutoff: 32.0,
        grid_points: 256,
        scatter: ScatterProfile::PumpCycle { start: -3.0, end: 3.0, mixing: 0.8, phase: 2.0 },
    };
    let demo = noncompact_demo(&model, 64).unwrap();
    assert_eq!(demo.norms.len(), 65);
    assert!(demo.reference > 0.1);
    let min = demo.norms.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min >= 0.5 * demo.reference, "{min} vs {}", demo.reference);
    assert!(noncompact_demo(&model, 65).is_err());
}

#[test]
fn variance_law() {
    let flat = LatticeScenario {
        lattice: TwoLeadLattice { hopping: 0.0, ..TwoLeadLattice::uniform(1, 1) },
        state: StateSpec::Thermal { beta: 0.7, mu_left: 0.0, mu_right: 0.0 },
        evolution: PropagatorSpec::fixed(0.0),
    };
    let scan = variance_vs_length(&flat, &[20, 40, 80, 160]).unwrap();
    for (l, v) in scan.lengths.iter().zip(&scan.variances) {
        assert!((v - *l as f64 / 4.0).abs() < 1e-12);
    }

    let chain = LatticeScenario {
        lattice: TwoLeadLattice::uniform(1, 1),
        state: StateSpec::Thermal { beta: 1.0, mu_left: 0.0, mu_right: 0.0 },
        ..flat.clone()
    };
    let scan = variance_vs_length(&chain, &[20, 40, 80, 160]).unwrap();
    assert!(scan.slope > 0.0 && scan.r_squared >= 0.99, "{scan:?}");

    let cold = LatticeScenario { state: StateSpec::Thermal { beta: 2000.0, mu_left: 0.0, mu_right: 0.0 }, ..chain };
    let scan = variance_vs_length(&cold, &[10, 20]).unwrap();
    assert!(scan.variances.iter().all(|v| v.abs() < 1e-12));

    let pure = LatticeScenario { state: StateSpec::Pure { mu: 0.0 }, ..flat };
    assert!(variance_vs_length(&pure, &[10]).is_err());
}

#[test]
fn linear_fit_recovers_a_line() {
    let (b, a, r2) = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]);
    assert!((b - 2.0).abs() < 1e-14 && (a - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
}

/// Squared HS norm of the boundary kernel for a Gaussian profile, integrated directly in
/// `u = p + p′` with the closed-form transform `|V̂(v)|² = A²w²/(2π) e^{−v²w²}` and the inner
/// `v` integral done by Simpson's rule; the `u` tail beyond `U` contributes `2F∞/U` on average.
fn gaussian_boundary_oracle(amplitude: f64, width: f64, s: f64) -> f64 {
    let spectrum = |v: f64| amplitude * amplitude * width * width / (2.0 * PI) * (-(v * width).powi(2)).exp();
    let inner = |a: f64| {
        let m = 200;
        let h = 2.0 * a / m as f64;
        (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                w * spectrum(-a + k as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0
    };
    let big_u = 300.0;
    let du = 0.005;
    let n = (big_u / du) as usize;
    let mut body = 0.0;
    for k in 0..n {
        let u = (k as f64 + 0.5) * du;
        let sinc = (0.5 * u * s).sin() / u;
        body += 4.0 * sinc * sinc * inner(u.min(12.0 / width)) * du;
    }
    let f_inf = amplitude * amplitude * width / (2.0 * PI.sqrt());
    // ½ from dp dp′ = ½ du dv, times two half-lines of u.
    body + 2.0 * f_inf / big_u
}

#[test]
fn dyson_bound_against_direct_quadrature() {
    let (a, w, s) = (0.8, 0.7, 1.5);
    let drive =
        OffDiagonalDrive { amplitude: a, envelope: Envelope::Constant, profile: SpatialProfile::Gaussian { center: 0.3, width: w } };
    let [b1, b2] = dyson_hs_check(&drive, -s, s, 1000).unwrap();
    let oracle = gaussian_boundary_oracle(a, w, s);
    assert!((b2.lhs - oracle).abs() < 1e-3 * oracle, "{} vs {oracle}", b2.lhs);
    assert!((b1.lhs - b2.lhs).abs() < 1e-12 * oracle);
    // ‖V₊₋‖₂² = A² w √π for the Gaussian.
    assert!((b2.rhs - PI * s * a * a * w * PI.sqrt()).abs() < 1e-10);
    assert!(b1.holds() && b2.holds());
}

#[test]
fn dyson_bound_edge_cases() {
    let zero = OffDiagonalDrive {
        amplitude: 0.0,
        envelope: Envelope::Constant,
        profile: SpatialProfile::Bump { center: 0.0, half_width: 1.0 },
    };
    let [b, _] = dyson_hs_check(&zero, 1.0, 2.0, 100).unwrap();
    assert_eq!((b.lhs, b.rhs), (0.0, 0.0));

    let drive = OffDiagonalDrive { amplitude: 1.0, ..zero };
    let lhs = |s: f64| dyson_hs_check(&drive, s, 2.0, 2000).unwrap()[0].lhs;
    // The boundary term vanishes linearly in |s|, like the bound itself.
    let (tiny, small, moderate) = (lhs(1e-4), lhs(1e-3), lhs(0.5));
    assert!(tiny < 0.2 * small && small < 1e-2 * moderate, "{tiny} {small} {moderate}");
    assert_eq!(dyson_hs_check(&drive, 0.0, 1.0, 2000).unwrap_err().name(), "contract");
    // Too coarse a momentum grid for a unit bump fails the doubling check.
    assert_eq!(dyson_hs_check(&drive, 0.5, 2.0, 500).unwrap_err().name(), "step_accuracy");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norm_reports_are_finite_and_nonnegative(seed in 0u64..10_000, thermal in any::<bool>(), lambda in -3.0f64..3.0) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, 3, 3, thermal);
        let report = norm_report(&s, lambda).unwrap();
        prop_assert!(report.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        // Hilbert–Schmidt never exceeds trace norm.
        prop_assert!(report.get("comm_NU_2").unwrap() <= report.get("comm_NU_1").unwrap() + 1e-12);
    }

    #[test]
    fn thermal_variance_grows_with_length(beta in 0.2f64..5.0, hopping in 0.2f64..2.0, mu in -1.0f64..1.0) {
        let base = LatticeScenario {
            lattice: TwoLeadLattice { hopping, ..TwoLeadLattice::uniform(1, 1) },
            state: StateSpec::Thermal { beta, mu_left: mu, mu_right: mu },
            evolution: PropagatorSpec::fixed(0.0),
        };
        let scan = variance_vs_length(&base, &[10, 20, 40]).unwrap();
        prop_assert!(scan.slope > 0.0);
    }

    #[test]
    fn dyson_bound_always_holds(center in -2.0f64..2.0, width in 0.3f64..2.0, s1 in -3.0f64..-0.1, s2 in 0.1f64..3.0) {
        let drive = OffDiagonalDrive {
            amplitude: 1.0,
            envelope: Envelope::Gaussian { center: 0.0, width: 2.0 },
            profile: SpatialProfile::Gaussian { center, width },
        };
        for b in dyson_hs_check(&drive, s1, s2, 800).unwrap() {
            prop_assert!(b.holds(), "{b:?}");
        }
    }
}
