use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, ComplexMatrix, HermitianOperator, SpectralDecomposition, C64};

use super::lattice::ChargeProjection;

/// Gate on the distance between μ and the nearest level of `H₀`.
pub const DEGENERACY_GATE: f64 = 1e-8;
/// Tolerance on the spectrum, purity and charge commutation of an occupation.
pub const OCCUPATION_TOL: f64 = 1e-10;
/// Largest off-block entry tolerated in a block-diagonal `H₀`.
pub const BLOCK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OccupationKind {
    Pure,
    Thermal { beta: f64, mu_left: f64, mu_right: f64 },
}

/// One-particle density matrix `N`, `0 ≤ N ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationOperator {
    matrix: HermitianOperator,
    kind: OccupationKind,
    /// Distance of the spectrum from {0, 1}; zero for pure states.
    mixing_gap: f64,
}

fn fermi(beta: f64, x: f64) -> f64 {
    let y = beta * x;
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

impl OccupationOperator {
    /// Wraps a matrix after checking the spectrum and, for pure states, idempotence.
    pub fn new(matrix: HermitianOperator, kind: OccupationKind) -> Result<Self> {
        let spec = hermitian_eig(&matrix)?;
        let lo = spec.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if lo < -OCCUPATION_TOL || hi > 1.0 + OCCUPATION_TOL {
            return Err(Error::invariant(
                "occupation_bounds",
                format!("spectrum [{lo}, {hi}] leaves [0, 1]"),
            ));
        }
        let mixing_gap = match kind {
            OccupationKind::Pure => {
                let m = matrix.matrix();
                let defect = (&(m * m) - m).max_abs();
                if defect > OCCUPATION_TOL {
                    return Err(Error::invariant("purity", format!("‖N² − N‖_max = {defect:e}")));
                }
                0.0
            }
            OccupationKind::Thermal { .. } => lo.min(1.0 - hi).max(0.0),
        };
        Ok(OccupationOperator { matrix, kind, mixing_gap })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn kind(&self) -> OccupationKind {
        self.kind
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, OccupationKind::Pure)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn mixing_gap(&self) -> f64 {
        self.mixing_gap
    }

    /// `‖[Q, N]‖_max`.
    pub fn charge_commutator(&self, charge: &ChargeProjection) -> f64 {
        charge.matrix().commutator(self.matrix()).max_abs()
    }

    pub fn check_commutes(&self, charge: &ChargeProjection) -> Result<()> {
        if charge.dim() != self.dim() {
            return Err(Error::contract(
                "OccupationOperator",
                format!("charge projection of dimension {} against occupation of {}", charge.dim(), self.dim()),
            ));
        }
        let c = self.charge_commutator(charge);
        if c > OCCUPATION_TOL {
            return Err(Error::invariant("charge_commutation", format!("‖[Q, N]‖_max = {c:e}")));
        }
        Ok(())
    }

    /// `N′ = 1 − N`, the hole occupation.
    ///
    /// A thermal state of `H₀` at `μ` complements to the thermal state of `−H₀` at `−μ`.
    pub fn complement(&self) -> OccupationOperator {
        let n = self.dim();
        let m = ComplexMatrix::identity(n).add_scaled(self.matrix(), C64::new(-1.0, 0.0));
        let kind = match self.kind {
            OccupationKind::Pure => OccupationKind::Pure,
            OccupationKind::Thermal { beta, mu_left, mu_right } => {
                OccupationKind::Thermal { beta, mu_left: -mu_left, mu_right: -mu_right }
            }
        };
        OccupationOperator { matrix: HermitianOperator::symmetrize(m), kind, mixing_gap: self.mixing_gap }
    }
}

/// Fermi sea of `H₀` below `mu`: the spectral projection onto levels `ε < μ`.
pub fn fermi_occupation(h0: &HermitianOperator, mu: f64) -> Result<OccupationOperator> {
    if !mu.is_finite() {
        return Err(Error::contract("fermi_occupation", "chemical potential is not finite"));
    }
    let spec = hermitian_eig(h0)?;
    if let Some((index, &level)) =
        spec.eigenvalues.iter().enumerate().find(|(_, &e)| (e - mu).abs() < DEGENERACY_GATE)
    {
        return Err(Error::Degeneracy { mu, level, index, gate: DEGENERACY_GATE });
    }
    let n = spec.apply(|e| if e < mu { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    OccupationOperator::new(HermitianOperator::symmetrize(n), OccupationKind::Pure)
}

/// Fermi sea of a block-diagonal `H₀`, assembled block by block so that `[Q, N]` vanishes exactly.
pub fn fermi_occupation_blocks(
    h0: &HermitianOperator,
    mu: f64,
    charge: &ChargeProjection,
) -> Result<OccupationOperator> {
    if !mu.is_finite() {
        return Err(Error::contract("fermi_occupation", "chemical potential is not finite"));
    }
    let blocks = block_spectra("fermi_occupation", h0, charge)?;
    for block in &blocks {
        if let Some((k, &level)) =
            block.spec.eigenvalues.iter().enumerate().find(|(_, &e)| (e - mu).abs() < DEGENERACY_GATE)
        {
            return Err(Error::Degeneracy { mu, level, index: k, gate: DEGENERACY_GATE });
        }
    }
    let n = assemble(h0.dim(), &blocks, |_, e| if e < mu { 1.0 } else { 0.0 });
    OccupationOperator::new(HermitianOperator::symmetrize(n), OccupationKind::Pure)
}

/// Thermal occupation `[1 + e^{β(H₀ − μ)}]⁻¹` built separately on the two blocks of the charge
/// split, with `mu_left` outside and `mu_right` inside the projection.
pub fn thermal_occupation(
    h0: &HermitianOperator,
    beta: f64,
    mu_left: f64,
    mu_right: f64,
    charge: &ChargeProjection,
) -> Result<OccupationOperator> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::contract("thermal_occupation", format!("beta = {beta} must be positive and finite")));
    }
    if !(mu_left.is_finite() && mu_right.is_finite()) {
        return Err(Error::contract("thermal_occupation", "chemical potentials must be finite"));
    }
    let blocks = block_spectra("thermal_occupation", h0, charge)?;
    let n = assemble(h0.dim(), &blocks, |inside, e| fermi(beta, e - if inside { mu_right } else { mu_left }));
    OccupationOperator::new(
        HermitianOperator::symmetrize(n),
        OccupationKind::Thermal { beta, mu_left, mu_right },
    )
}

struct Block {
    inside: bool,
    sites: Vec<usize>,
    spec: SpectralDecomposition,
}

fn block_spectra(op: &'static str, h0: &HermitianOperator, charge: &ChargeProjection) -> Result<Vec<Block>> {
    if charge.dim() != h0.dim() {
        return Err(Error::contract(
            op,
            format!("charge projection of dimension {} against H₀ of {}", charge.dim(), h0.dim()),
        ));
    }
    let off_block = charge.off_block_norm(h0.matrix());
    if off_block > BLOCK_TOL {
        return Err(Error::Structure { off_block });
    }
    let mut out = Vec::with_capacity(2);
    for inside in [false, true] {
        let sites = charge.indices(inside);
        if sites.is_empty() {
            continue;
        }
        let block = HermitianOperator::symmetrize(h0.matrix().select(&sites, &sites));
        out.push(Block { inside, sites, spec: hermitian_eig(&block)? });
    }
    Ok(out)
}

/// `f(inside, H_block)` on every block, scattered back into a full matrix with zero off-blocks.
fn assemble(dim: usize, blocks: &[Block], f: impl Fn(bool, f64) -> f64) -> ComplexMatrix {
    let mut n = ComplexMatrix::zeros(dim, dim);
    for block in blocks {
        let nb = block.spec.apply(|e| C64::new(f(block.inside, e), 0.0));
        for (a, &i) in block.sites.iter().enumerate() {
            for (b, &j) in block.sites.iter().enumerate() {
                n.set(i, j, nb.get(a, b));
            }
        }
    }
    n
}
