//! Seeded random operators for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::opcore::{
    unitary_exp, ComplexMatrix, HermitianOperator, ProjectionOperator, UnitaryOperator, C64,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianOperator {
    let a = random_matrix(rng, n, n);
    HermitianOperator::new(&a + &a.adjoint()).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> UnitaryOperator {
    let h = random_hermitian(rng, n);
    unitary_exp(&h, 1.3).unwrap()
}

/// Random rank-`rank` projection.
pub fn random_projection(rng: &mut impl Rng, n: usize, rank: usize) -> ProjectionOperator {
    if rank == 0 {
        return ProjectionOperator::from_mask(&vec![false; n]);
    }
    let u = random_unitary(rng, n);
    let cols: Vec<usize> = (0..rank).collect();
    ProjectionOperator::onto_columns(&u.matrix().select(&(0..n).collect::<Vec<_>>(), &cols)).unwrap()
}

/// Random block-diagonal `H₀` on `left + right` sites with a Fermi sea at μ = 0 or a biased
/// thermal state, and a random unitary evolution.
pub fn random_scenario(rng: &mut impl Rng, left: usize, right: usize, thermal: bool) -> crate::engine::Scenario {
    use crate::models::{fermi_occupation_blocks, thermal_occupation, ChargeProjection};
    let n = left + right;
    let mask: Vec<bool> = (0..n).map(|i| i >= left).collect();
    let charge = ChargeProjection::from_mask(mask.clone()).unwrap();
    let mut h0 = random_hermitian(rng, n).into_matrix();
    for i in 0..n {
        for j in 0..n {
            if mask[i] != mask[j] {
                h0.set(i, j, C64::new(0.0, 0.0));
            }
        }
    }
    let h0 = HermitianOperator::new(h0).unwrap();
    let occupation = if thermal {
        let beta = rng.gen_range(0.5..3.0);
        let (ml, mr) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        thermal_occupation(&h0, beta, ml, mr, &charge).unwrap()
    } else {
        fermi_occupation_blocks(&h0, 0.0, &charge).unwrap()
    };
    crate::engine::Scenario::new(occupation, charge, random_unitary(rng, n)).unwrap()
}
