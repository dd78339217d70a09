use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{ChargeProjection, OccupationOperator};
use crate::opcore::{determinant, hermitian_eig, ComplexMatrix, HermitianOperator, C64, ZERO};

use super::fock::{gamma, hop, FockBasis, FockOperator};

/// Partition functions below this are reported as underflow.
pub const PARTITION_FLOOR: f64 = 1e-300;
/// Eigenvalues of a weight may dip this far below zero from roundoff.
const WEIGHT_NEGATIVITY_TOL: f64 = 1e-12;

/// Quasi-free density operator on the Fock space.
#[derive(Clone, Debug)]
pub struct GibbsState {
    density: FockOperator,
    /// One-particle operator the state is built from: the weight `M` of `Γ(M)/det(1+M)`, or the
    /// projection onto the filled orbitals for a Slater determinant.
    generator: ComplexMatrix,
    pure: bool,
}

/// Eigenvectors of a Hermitian `a`, chosen inside the blocks of a diagonal charge mask when one is given.
fn adapted_eigenbasis(a: &ComplexMatrix, mask: Option<&[bool]>) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.rows();
    let groups: Vec<Vec<usize>> = match mask {
        Some(m) => [false, true]
            .iter()
            .map(|&inside| (0..n).filter(|&i| m[i] == inside).collect::<Vec<_>>())
            .filter(|g| !g.is_empty())
            .collect(),
        None => vec![(0..n).collect()],
    };
    let mut values = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for group in groups {
        let block = a.select(&group, &group);
        let spec = hermitian_eig(&HermitianOperator::new(block)?)?;
        for (k, &v) in spec.eigenvalues.iter().enumerate() {
            let col = values.len();
            for (r, &site) in group.iter().enumerate() {
                vectors.set(site, col, spec.eigenvectors.get(r, k));
            }
            values.push(v);
        }
    }
    Ok((values, vectors))
}

impl GibbsState {
    /// `Γ(M)/det(1 + M)` for a positive semi-definite weight `M`.
    pub fn from_weight(weight: &HermitianOperator, basis: &FockBasis) -> Result<Self> {
        let spec = hermitian_eig(weight)?;
        if let Some(&low) = spec.eigenvalues.first() {
            if low < -WEIGHT_NEGATIVITY_TOL {
                return Err(Error::contract("gibbs_state", format!("weight has eigenvalue {low:e} < 0")));
            }
        }
        let m = weight.matrix();
        let z = determinant(&(&ComplexMatrix::identity(m.rows()) + m))?.re;
        if !(z >= PARTITION_FLOOR) || !z.is_finite() {
            return Err(Error::Underflow { value: z });
        }
        let density = gamma(m, basis)?.scale(C64::new(1.0 / z, 0.0));
        Ok(GibbsState { density, generator: m.clone(), pure: false })
    }

    /// The empty state `|0⟩⟨0|`.
    pub fn vacuum(basis: &FockBasis) -> Self {
        let m = basis.modes();
        let mut density = FockOperator::zeros(basis);
        density.block_mut(0)[(0, 0)] = C64::new(1.0, 0.0);
        GibbsState { density, generator: ComplexMatrix::zeros(m, m), pure: true }
    }

    /// The Slater determinant `a†(φ₁)⋯a†(φ_r)|0⟩` of orthonormal columns `φ`.
    pub fn slater(orbitals: &ComplexMatrix, basis: &FockBasis) -> Result<Self> {
        let m = basis.modes();
        let r = orbitals.cols();
        if orbitals.rows() != m || r > m {
            return Err(Error::contract(
                "slater",
                format!("{}x{} orbitals on {m} modes", orbitals.rows(), orbitals.cols()),
            ));
        }
        let overlap = &orbitals.adjoint() * orbitals;
        let defect = (&overlap - &ComplexMatrix::identity(r)).max_abs();
        if defect > 1e-10 {
            return Err(Error::contract("slater", format!("orbitals are not orthonormal ({defect:e})")));
        }
        let sector = basis.sector(r);
        let psi: Vec<C64> = sector
            .iter()
            .map(|&t| {
                let rows = FockBasis::occupied(t);
                determinant(&orbitals.select(&rows, &(0..r).collect::<Vec<_>>())).expect("square minor")
            })
            .collect();
        let mut density = FockOperator::zeros(basis);
        let v = nalgebra::DVector::from_vec(psi);
        *density.block_mut(r) = &v * v.adjoint();
        let generator = orbitals * &orbitals.adjoint();
        Ok(GibbsState { density, generator, pure: true })
    }

    /// The quasi-free state with reduced density `N`.
    ///
    /// Pure `N` gives the Slater determinant of its range; otherwise the weight is `N(1 − N)⁻¹`.
    /// With a charge, eigenvectors are taken inside the charge blocks so that the state commutes
    /// with the counted charge exactly.
    pub fn from_occupation(
        occupation: &OccupationOperator,
        charge: Option<&ChargeProjection>,
        basis: &FockBasis,
    ) -> Result<Self> {
        let (nu, v) = adapted_eigenbasis(occupation.matrix(), charge.map(|c| c.site_mask()))?;
        if occupation.is_pure() {
            let filled: Vec<usize> = (0..nu.len()).filter(|&i| nu[i] > 0.5).collect();
            if filled.is_empty() {
                return Ok(Self::vacuum(basis));
            }
            let rows: Vec<usize> = (0..nu.len()).collect();
            return Self::slater(&v.select(&rows, &filled), basis);
        }
        if let Some(&top) = nu.iter().max_by(|a, b| a.total_cmp(b)) {
            if top >= 1.0 - 1e-14 {
                return Err(Error::contract(
                    "gibbs_state",
                    format!("mixed occupation has eigenvalue {top}; no finite weight exists"),
                ));
            }
        }
        let w: Vec<C64> = nu.iter().map(|&x| C64::new(x.max(0.0) / (1.0 - x), 0.0)).collect();
        let weight = &(&v * &ComplexMatrix::from_diagonal(&w)) * &v.adjoint();
        Self::from_weight(&HermitianOperator::new(weight)?, basis)
    }

    pub fn density(&self) -> &FockOperator {
        &self.density
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// `N_ji = Tr(a†_i a_j P)`, read off the Fock-space density directly.
    pub fn reduced_density(&self, basis: &FockBasis) -> ComplexMatrix {
        let m = basis.modes();
        let mut n = ComplexMatrix::zeros(m, m);
        for k in 1..=m {
            let p = self.density.block(k);
            for (ti, &t) in basis.sector(k).iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        if let Some((s, sign)) = hop(t, i, j) {
                            let v = n.get(j, i) + p[(ti, basis.position(s))] * sign;
                            n.set(j, i, v);
                        }
                    }
                }
            }
        }
        n
    }

    /// Spectral decomposition of the density inside each (particle number, charge) sector of a
    /// diagonal charge: `(ρ_α, charge, sector k, amplitudes over the sector-k basis)`.
    pub(crate) fn charge_resolved_spectrum(
        &self,
        mask: &[bool],
        basis: &FockBasis,
    ) -> Result<Vec<(f64, usize, usize, Vec<C64>)>> {
        let qmask: u32 = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1u32 << i).sum();
        let mut out = Vec::new();
        for k in 0..=basis.modes() {
            let sector = basis.sector(k);
            let p = self.density.block(k);
            let charge_of: Vec<usize> = sector.iter().map(|&s| (s & qmask).count_ones() as usize).collect();
            for (a, &qa) in charge_of.iter().enumerate() {
                for (b, &qb) in charge_of.iter().enumerate() {
                    if qa != qb && p[(a, b)].norm() > 1e-10 {
                        return Err(Error::Hypothesis {
                            detail: format!("density couples charge sectors {qa} and {qb}: {:e}", p[(a, b)].norm()),
                        });
                    }
                }
            }
            for q in 0..=k {
                let idx: Vec<usize> = (0..sector.len()).filter(|&i| charge_of[i] == q).collect();
                if idx.is_empty() {
                    continue;
                }
                let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| p[(idx[r], idx[c])]);
                // Sub-blocks can be roundoff-sized; Hermiticity is judged against Tr P = 1.
                let block = ComplexMatrix::from_dmatrix(block)?;
                let defect = block.hermiticity_defect();
                if defect > 1e-12 {
                    return Err(Error::invariant("hermiticity", format!("density block defect {defect:e}")));
                }
                let spec = hermitian_eig(&HermitianOperator::symmetrize(block))?;
                for (col, &rho) in spec.eigenvalues.iter().enumerate() {
                    let mut amp = vec![ZERO; sector.len()];
                    for (r, &i) in idx.iter().enumerate() {
                        amp[i] = spec.eigenvectors.get(r, col);
                    }
                    out.push((rho, q, k, amp));
                }
            }
        }
        let total: f64 = out.iter().map(|e| e.0).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invariant("density_trace", format!("Tr P = {total}")));
        }
        Ok(out)
    }
}

pub(crate) fn commutator_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.commutator(b).max_abs()
}

pub(crate) fn one_minus_n_plus(n: &ComplexMatrix, a: &ComplexMatrix) -> Result<C64> {
    let id = ComplexMatrix::identity(n.rows());
    determinant(&(&(&id - n) + &(a * n)))
}
