use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::models::{thermal_occupation, ChargeProjection};
use crate::opcore::{ComplexMatrix, HermitianOperator, UnitaryOperator, C64};
use crate::testutil::{random_scenario, rng};

fn with_evolution(s: &Scenario, u: UnitaryOperator) -> Scenario {
    Scenario::new(s.occupation().clone(), s.charge().clone(), u).unwrap()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn kernels_are_identity_at_zero_field() {
    let mut r = rng(21);
    let s = random_scenario(&mut r, 3, 3, false);
    for variant in [KernelVariant::Naive, KernelVariant::Regularized, KernelVariant::ZeroTemperature] {
        let k = counting_kernel(&s, variant, 0.0).unwrap();
        assert!((&k.matrix - &ComplexMatrix::identity(6)).max_abs() < 1e-12, "{variant:?}");
        assert!(k.trace_norm_defect < 1e-11);
    }
}

#[test]
fn identity_evolution_gives_trivial_kernel() {
    let mut r = rng(22);
    for thermal in [false, true] {
        let s = with_evolution(&random_scenario(&mut r, 3, 4, thermal), UnitaryOperator::identity(7));
        let k = levitov_kernel(&s, 1.3).unwrap();
        assert!((&k.matrix - &ComplexMatrix::identity(7)).max_abs() < 1e-12);
        let g = generating_function(&s, KernelVariant::Regularized, 15).unwrap();
        assert!(g.values.iter().all(|&v| close(v, C64::new(1.0, 0.0), 1e-12)));
    }
}

#[test]
fn regularized_equals_naive_determinant() {
    let mut r = rng(23);
    for thermal in [false, true] {
        let s = random_scenario(&mut r, 3, 3, thermal);
        for lambda in [0.4, PI / 3.0, 2.5, 5.9] {
            let d = levitov_kernel(&s, lambda).unwrap().determinant();
            let dt = regularized_kernel(&s, lambda).unwrap().determinant();
            assert!((d - dt).norm() <= 1e-9 * (1.0 + d.norm()), "λ={lambda}: {d} vs {dt}");
        }
    }
}

#[test]
fn reduced_kernel_matches_regularized_matrix() {
    let mut r = rng(24);
    let s = random_scenario(&mut r, 3, 4, false);
    let reg = regularized_kernel(&s, PI).unwrap();
    let red = zero_temperature_kernel(&s, PI).unwrap();
    assert!((&reg.matrix - &red.matrix).max_abs() < 1e-10);
    let reg = regularized_kernel(&s, 1.1).unwrap().determinant();
    let red = zero_temperature_kernel(&s, 1.1).unwrap().determinant();
    assert!(close(reg, red, 1e-10));
}

#[test]
fn reduced_kernel_rejects_thermal_state() {
    let mut r = rng(25);
    let s = random_scenario(&mut r, 2, 2, true);
    assert_eq!(zero_temperature_kernel(&s, 0.3).unwrap_err().name(), "contract");
    let ev = KernelEvaluator::new(&s).unwrap();
    assert!(ev.chi(KernelVariant::ZeroTemperature, 0.3).is_err());
}

#[test]
fn free_evolution_leaves_reduced_kernel_trivial() {
    // U = e^{−iH₀t} commutes with N and Q.
    let mut r = rng(26);
    let s = random_scenario(&mut r, 3, 3, false);
    let h0 = HermitianOperator::new(
        &s.occupation().matrix().scale(C64::new(-1.3, 0.0)) + &s.charge().matrix().scale(C64::new(0.7, 0.0)),
    )
    .unwrap();
    let u = crate::opcore::unitary_exp(&h0, 2.0).unwrap();
    let s = with_evolution(&s, u);
    let k = zero_temperature_kernel(&s, 2.2).unwrap();
    assert!((&k.matrix - &ComplexMatrix::identity(6)).max_abs() < 1e-12);
    assert!(close(k.determinant(), C64::new(1.0, 0.0), 1e-12));
    assert!(mean_transport_direct(&s).unwrap().abs() < 1e-12);
}

#[test]
fn evaluator_matches_dense_kernels() {
    let mut r = rng(27);
    for thermal in [false, true] {
        let s = random_scenario(&mut r, 4, 3, thermal);
        let ev = KernelEvaluator::new(&s).unwrap();
        let variants: &[KernelVariant] = if thermal {
            &[KernelVariant::Naive, KernelVariant::Regularized]
        } else {
            &[KernelVariant::Naive, KernelVariant::Regularized, KernelVariant::ZeroTemperature]
        };
        for &variant in variants {
            for lambda in [0.3, 1.7, 4.4] {
                let dense = counting_kernel(&s, variant, lambda).unwrap().determinant();
                let fast = ev.chi(variant, lambda).unwrap();
                assert!(close(dense, fast, 1e-11), "{variant:?} λ={lambda}: {dense} vs {fast}");
            }
        }
    }
}

#[test]
fn grid_gates() {
    let mut r = rng(28);
    let s = random_scenario(&mut r, 2, 2, false);
    assert_eq!(generating_function(&s, KernelVariant::Naive, 7).unwrap_err().name(), "aliasing");
    assert_eq!(generating_function(&s, KernelVariant::Naive, 10).unwrap_err().name(), "aliasing");
    let g = generating_function(&s, KernelVariant::Naive, 9).unwrap();
    assert!(close(g.values[0], C64::new(1.0, 0.0), 1e-12));
}

#[test]
fn synthetic_distributions() {
    let k = 9;
    let ones = GeneratingFunctionSamples { grid_size: k, variant: KernelVariant::Naive, values: vec![C64::new(1.0, 0.0); k] };
    let d = charge_distribution(&ones).unwrap();
    for n in -4..=4 {
        assert!((d.get(n) - if n == 0 { 1.0 } else { 0.0 }).abs() < 1e-15);
    }
    let shift = GeneratingFunctionSamples {
        grid_size: k,
        variant: KernelVariant::Naive,
        values: (0..k).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64)).collect(),
    };
    let d = charge_distribution(&shift).unwrap();
    assert!((d.get(1) - 1.0).abs() < 1e-15 && d.get(0).abs() < 1e-15);
    d.check_contract().unwrap();

    // Not a characteristic function: p_n would be complex.
    let bad = GeneratingFunctionSamples {
        grid_size: k,
        variant: KernelVariant::Naive,
        values: (0..k).map(|j| C64::new(1.0, if j == 1 { 0.5 } else { 0.0 })).collect(),
    };
    assert_eq!(charge_distribution(&bad).unwrap_err().name(), "distribution_integrity");
}

#[test]
fn cumulant_closed_forms() {
    let delta = ChargeDistribution::from_probabilities(-2, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    assert!(cumulants(&delta, 6).unwrap().kappa.iter().all(|&k| k == 0.0));
    let bernoulli = ChargeDistribution::from_probabilities(0, vec![0.5, 0.5]);
    let c = cumulants(&bernoulli, 4).unwrap();
    assert!((c.get(1) - 0.5).abs() < 1e-15);
    assert!((c.get(2) - 0.25).abs() < 1e-15);
    assert!(c.get(3).abs() < 1e-15);
    assert!((c.get(4) + 0.125).abs() < 1e-15);
    assert_eq!(cumulants(&bernoulli, 7).unwrap_err().name(), "contract");
}

#[test]
fn poisson_cumulants_are_all_equal() {
    // Truncated Poisson(0.7): every cumulant equals the rate up to the truncated tail.
    let rate: f64 = 0.7;
    let mut p = Vec::new();
    let mut term = (-rate).exp();
    for n in 0..40 {
        p.push(term);
        term *= rate / (n + 1) as f64;
    }
    let c = cumulants(&ChargeDistribution::from_probabilities(0, p), 6).unwrap();
    for &k in &c.kappa {
        assert!((k - rate).abs() < 1e-12, "{:?}", c.kappa);
    }
}

#[test]
fn means_agree_and_vanish_for_identity() {
    let mut r = rng(29);
    for thermal in [false, true] {
        let s = random_scenario(&mut r, 3, 4, thermal);
        let direct = mean_transport_direct(&s).unwrap();
        assert!((direct - naive_mean(&s)).abs() < 1e-10);

        let g = generating_function(&s, KernelVariant::Regularized, 15).unwrap();
        let d = charge_distribution(&g).unwrap();
        d.check_contract().unwrap();
        let k1 = cumulants(&d, 2).unwrap().get(1);
        assert!((k1 - direct).abs() < 1e-8);
        let fd = mean_from_derivative(&s, KernelVariant::Regularized, 1e-4).unwrap();
        assert!((fd - k1).abs() < 1e-7, "{fd} vs {k1}");

        let id = with_evolution(&s, UnitaryOperator::identity(7));
        assert_eq!(naive_mean(&id), 0.0);
        assert!(mean_transport_direct(&id).unwrap().abs() < 1e-15);
    }
}

#[test]
fn half_filling_is_self_conjugate() {
    let mut r = rng(30);
    let charge = ChargeProjection::from_mask(vec![false, false, false, true, true, true]).unwrap();
    let half = thermal_occupation(&HermitianOperator::zeros(6), 2.0, 0.0, 0.0, &charge).unwrap();
    let s = Scenario::new(half, charge, crate::testutil::random_unitary(&mut r, 6)).unwrap();
    let g = generating_function(&s, KernelVariant::Regularized, 13).unwrap();
    for k in 0..13 {
        assert!(close(g.values[k], g.values[(13 - k) % 13], 1e-10));
    }
    assert!(particle_hole_check(&s, KernelVariant::Regularized, 13).unwrap() < 1e-10);
    let id = with_evolution(&s, UnitaryOperator::identity(6));
    assert_eq!(particle_hole_check(&id, KernelVariant::Naive, 13).unwrap(), 0.0);
}

#[test]
fn particle_hole_symmetry_for_pure_states() {
    let mut r = rng(31);
    for (l, rr) in [(3, 3), (4, 5), (2, 6)] {
        let s = random_scenario(&mut r, l, rr, false);
        for variant in [KernelVariant::Naive, KernelVariant::Regularized, KernelVariant::ZeroTemperature] {
            let k = 2 * (l + rr) + 1;
            let dev = particle_hole_check(&s, variant, k.max(65)).unwrap();
            assert!(dev <= 1e-9, "{variant:?}: {dev:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn variants_agree_on_the_grid(seed in any::<u64>(), left in 1usize..5, right in 1usize..5, thermal in any::<bool>()) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, left, right, thermal);
        let k = 2 * (left + right) + 1;
        let naive = generating_function(&s, KernelVariant::Naive, k).unwrap();
        let reg = generating_function(&s, KernelVariant::Regularized, k).unwrap();
        for (a, b) in naive.values.iter().zip(&reg.values) {
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn distributions_meet_contract(seed in any::<u64>(), left in 1usize..5, right in 1usize..5, thermal in any::<bool>()) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, left, right, thermal);
        let variant = if thermal { KernelVariant::Regularized } else { KernelVariant::ZeroTemperature };
        let g = generating_function(&s, variant, 2 * (left + right) + 3).unwrap();
        prop_assert!(g.conjugate_symmetry_defect() <= 1e-9);
        let d = charge_distribution(&g).unwrap();
        prop_assert!(d.check_contract().is_ok(), "{:?}", d);
        let c = cumulants(&d, 4).unwrap();
        prop_assert!((c.get(1) - mean_transport_direct(&s).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn pure_particle_hole(seed in any::<u64>(), left in 1usize..4, right in 1usize..4) {
        let mut r = rng(seed);
        let s = random_scenario(&mut r, left, right, false);
        prop_assert!(particle_hole_check(&s, KernelVariant::Regularized, 2 * (left + right) + 1).unwrap() <= 1e-9);
    }
}
