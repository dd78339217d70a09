use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{ComplexMatrix, HermitianOperator, ProjectionOperator, C64};

/// Two tight-binding leads joined by a single bond.
///
/// Sites `0..sites_left` form the left lead, the remaining `sites_right` sites
/// the right lead. The innermost sites `sites_left − 1` and `sites_left` are
/// joined by the `coupling` bond, which is absent from the decoupled
/// Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLeadLattice {
    pub sites_left: usize,
    pub sites_right: usize,
    pub hopping: f64,
    #[serde(default)]
    pub onsite_left: f64,
    #[serde(default)]
    pub onsite_right: f64,
    pub coupling: f64,
    /// Chemical-potential offset `μ_L − μ_R`, used by thermal states only.
    #[serde(default)]
    pub bias: f64,
}

impl TwoLeadLattice {
    /// Uniform chain of `left + right` sites with unit hopping and coupling.
    pub fn uniform(sites_left: usize, sites_right: usize) -> Self {
        TwoLeadLattice {
            sites_left,
            sites_right,
            hopping: 1.0,
            onsite_left: 0.0,
            onsite_right: 0.0,
            coupling: 1.0,
            bias: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites_left == 0 || self.sites_right == 0 {
            return Err(Error::contract(
                "TwoLeadLattice",
                format!("lead sizes {} and {} must both be at least 1", self.sites_left, self.sites_right),
            ));
        }
        for (name, v) in [
            ("hopping", self.hopping),
            ("onsite_left", self.onsite_left),
            ("onsite_right", self.onsite_right),
            ("coupling", self.coupling),
            ("bias", self.bias),
        ] {
            if !v.is_finite() {
                return Err(Error::contract("TwoLeadLattice", format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.sites_left + self.sites_right
    }

    /// Site mask selecting the right lead.
    pub fn right_mask(&self) -> Vec<bool> {
        (0..self.dim()).map(|i| i >= self.sites_left).collect()
    }

    /// `(μ_L, μ_R)` for a common chemical potential split by the bias.
    pub fn lead_potentials(&self, mu: f64) -> (f64, f64) {
        (mu + 0.5 * self.bias, mu - 0.5 * self.bias)
    }
}

/// Projection onto the right lead, kept together with its site mask.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeProjection {
    projection: ProjectionOperator,
    site_mask: Vec<bool>,
}

impl ChargeProjection {
    pub fn from_mask(site_mask: Vec<bool>) -> Result<Self> {
        if site_mask.is_empty() {
            return Err(Error::contract("ChargeProjection", "empty site mask"));
        }
        Ok(ChargeProjection { projection: ProjectionOperator::from_mask(&site_mask), site_mask })
    }

    pub fn projection(&self) -> &ProjectionOperator {
        &self.projection
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.projection.matrix()
    }

    pub fn site_mask(&self) -> &[bool] {
        &self.site_mask
    }

    pub fn dim(&self) -> usize {
        self.site_mask.len()
    }

    pub fn rank(&self) -> usize {
        self.site_mask.iter().filter(|&&b| b).count()
    }

    /// Site indices inside (`true`) or outside (`false`) the projection.
    pub fn indices(&self, inside: bool) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.site_mask[i] == inside).collect()
    }

    /// Largest entry modulus of the blocks of `a` that connect the two sides of the split.
    pub fn off_block_norm(&self, a: &ComplexMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if self.site_mask[i] != self.site_mask[j] {
                    worst = worst.max(a.get(i, j).norm());
                }
            }
        }
        worst
    }
}

/// Decoupled and coupled Hamiltonians of a [`TwoLeadLattice`] with its charge projection.
#[derive(Clone, Debug)]
pub struct TwoLeadOperators {
    pub h0: HermitianOperator,
    pub h: HermitianOperator,
    pub charge: ChargeProjection,
}

pub fn build_two_lead(lattice: &TwoLeadLattice) -> Result<TwoLeadOperators> {
    lattice.validate()?;
    let n = lattice.dim();
    let split = lattice.sites_left;
    let mut h0 = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let onsite = if i < split { lattice.onsite_left } else { lattice.onsite_right };
        h0.set(i, i, C64::new(onsite, 0.0));
        if i + 1 < n && i + 1 != split {
            h0.set(i, i + 1, C64::new(-lattice.hopping, 0.0));
            h0.set(i + 1, i, C64::new(-lattice.hopping, 0.0));
        }
    }
    let mut h = h0.clone();
    h.set(split - 1, split, C64::new(-lattice.coupling, 0.0));
    h.set(split, split - 1, C64::new(-lattice.coupling, 0.0));

    Ok(TwoLeadOperators {
        h0: HermitianOperator::new(h0)?,
        h: HermitianOperator::new(h)?,
        charge: ChargeProjection::from_mask(lattice.right_mask())?,
    })
}
