use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, lu_determinant, ComplexMatrix, HermitianOperator, C64, ONE, ZERO};

/// Largest number of modes the oracle accepts.
pub const MAX_MODES: usize = 14;
/// Largest number of modes for which a dense `2^M × 2^M` matrix is materialized.
pub const MAX_DENSE_MODES: usize = 10;

/// Occupation-number basis of the Fock space over `M` modes.
///
/// Mode `i` is bit `i`; the state with bitmask `S = {s₁ < … < s_k}` is `a†_{s₁}⋯a†_{s_k}|0⟩`.
/// The global order is the integer order of the bitmasks.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    sectors: Vec<Vec<u32>>,
    position: Vec<usize>,
}

impl FockBasis {
    pub fn new(modes: usize) -> Result<Self> {
        if modes > MAX_MODES {
            return Err(Error::SizeGate { modes, max: MAX_MODES });
        }
        if modes == 0 {
            return Err(Error::contract("FockBasis", "at least one mode is required"));
        }
        let mut sectors = vec![Vec::new(); modes + 1];
        let mut position = vec![0; 1 << modes];
        for s in 0..(1u32 << modes) {
            let k = s.count_ones() as usize;
            position[s as usize] = sectors[k].len();
            sectors[k].push(s);
        }
        Ok(FockBasis { modes, sectors, position })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    /// All bitmasks in basis order.
    pub fn states(&self) -> impl Iterator<Item = u32> {
        0..(1u32 << self.modes)
    }

    /// Bitmasks with exactly `k` particles, ascending.
    pub fn sector(&self, k: usize) -> &[u32] {
        &self.sectors[k]
    }

    pub(crate) fn position(&self, state: u32) -> usize {
        self.position[state as usize]
    }

    pub(crate) fn occupied(state: u32) -> Vec<usize> {
        (0..32).filter(|&i| state & (1 << i) != 0).collect()
    }
}

/// A particle-number-conserving operator on the Fock space, stored as one block per sector.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    modes: usize,
    blocks: Vec<DMatrix<C64>>,
}

impl FockOperator {
    pub fn zeros(basis: &FockBasis) -> Self {
        let blocks = (0..=basis.modes).map(|k| DMatrix::zeros(basis.sector(k).len(), basis.sector(k).len())).collect();
        FockOperator { modes: basis.modes, blocks }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        let blocks =
            (0..=basis.modes).map(|k| DMatrix::identity(basis.sector(k).len(), basis.sector(k).len())).collect();
        FockOperator { modes: basis.modes, blocks }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn block(&self, k: usize) -> &DMatrix<C64> {
        &self.blocks[k]
    }

    pub(crate) fn block_mut(&mut self, k: usize) -> &mut DMatrix<C64> {
        &mut self.blocks[k]
    }

    /// `⟨T|A|S⟩` for bitmasks `T`, `S`.
    pub fn element(&self, basis: &FockBasis, t: u32, s: u32) -> C64 {
        let k = s.count_ones();
        if t.count_ones() != k {
            return ZERO;
        }
        self.blocks[k as usize][(basis.position(t), basis.position(s))]
    }

    /// Dense `2^M × 2^M` matrix in basis order; only for `M ≤ MAX_DENSE_MODES`.
    pub fn to_dense(&self, basis: &FockBasis) -> Result<ComplexMatrix> {
        if self.modes > MAX_DENSE_MODES {
            return Err(Error::SizeGate { modes: self.modes, max: MAX_DENSE_MODES });
        }
        let d = basis.dim();
        Ok(ComplexMatrix::from_fn(d, d, |t, s| self.element(basis, t as u32, s as u32)))
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { modes: self.modes, blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn compose(&self, other: &FockOperator) -> Self {
        FockOperator { modes: self.modes, blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        FockOperator { modes: self.modes, blocks: self.blocks.iter().map(|b| b * c).collect() }
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &FockOperator) -> C64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let mut acc = ZERO;
                for i in 0..a.nrows() {
                    for j in 0..a.ncols() {
                        acc += a[(i, j)] * b[(j, i)];
                    }
                }
                acc
            })
            .sum()
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `exp(iλA)` for Hermitian `A`, by diagonalizing each sector block.
    pub fn exp_i(&self, lambda: f64) -> Result<FockOperator> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let spec = hermitian_eig(&HermitianOperator::new(ComplexMatrix::from_dmatrix(b.clone())?)?)?;
                Ok(spec.apply(|x| C64::from_polar(1.0, lambda * x)).into_dmatrix())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FockOperator { modes: self.modes, blocks })
    }
}

fn check_square(op: &'static str, a: &ComplexMatrix, basis: &FockBasis) -> Result<()> {
    if !a.is_square() || a.rows() != basis.modes {
        return Err(Error::contract(
            op,
            format!("{}x{} one-particle operator on {} modes", a.rows(), a.cols(), basis.modes),
        ));
    }
    Ok(())
}

/// `Γ(A)` with `⟨T|Γ(A)|S⟩ = det A[T, S]`.
pub fn gamma(a: &ComplexMatrix, basis: &FockBasis) -> Result<FockOperator> {
    check_square("gamma", a, basis)?;
    let mut blocks = Vec::with_capacity(basis.modes + 1);
    for k in 0..=basis.modes {
        let sector = basis.sector(k);
        let occ: Vec<Vec<usize>> = sector.iter().map(|&s| FockBasis::occupied(s)).collect();
        let mut block = DMatrix::<C64>::zeros(sector.len(), sector.len());
        if k == 0 {
            block[(0, 0)] = ONE;
        } else {
            let mut minor = vec![ZERO; k * k];
            for (ti, rows) in occ.iter().enumerate() {
                for (si, cols) in occ.iter().enumerate() {
                    for (r, &row) in rows.iter().enumerate() {
                        for (c, &col) in cols.iter().enumerate() {
                            minor[r * k + c] = a.get(row, col);
                        }
                    }
                    block[(ti, si)] = lu_determinant(minor.clone(), k);
                }
            }
        }
        blocks.push(block);
    }
    Ok(FockOperator { modes: basis.modes, blocks })
}

fn parity_below(state: u32, mode: usize) -> f64 {
    if (state & ((1u32 << mode) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a†_i a_j |S⟩ = sign·|T⟩`, or `None` when it vanishes.
pub(crate) fn hop(state: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    if state & (1 << j) == 0 {
        return None;
    }
    let mid = state ^ (1 << j);
    if mid & (1 << i) != 0 {
        return None;
    }
    Some((mid | (1 << i), parity_below(state, j) * parity_below(mid, i)))
}

/// `dΓ(A) = Σ_{ij} A_ij a†_i a_j`.
pub fn dgamma(a: &ComplexMatrix, basis: &FockBasis) -> Result<FockOperator> {
    check_square("dgamma", a, basis)?;
    let m = basis.modes;
    let mut op = FockOperator::zeros(basis);
    for k in 1..=m {
        let block = op.block_mut(k);
        for (si, &s) in basis.sector(k).iter().enumerate() {
            for j in 0..m {
                for i in 0..m {
                    let aij = a.get(i, j);
                    if aij == ZERO {
                        continue;
                    }
                    if let Some((t, sign)) = hop(s, i, j) {
                        block[(basis.position(t), si)] += aij * sign;
                    }
                }
            }
        }
    }
    Ok(op)
}
