use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{ComplexMatrix, HermitianOperator, C64};

/// Scalar time profile of a drive term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope {
    Constant,
    /// Smooth bump `exp(1 − 1/(1 − x²))` on `[start, end]`, peak 1 at the centre, zero outside.
    Bump { start: f64, end: f64 },
    Gaussian { center: f64, width: f64 },
    Sine { frequency: f64, phase: f64 },
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Envelope::Constant => true,
            Envelope::Bump { start, end } => start.is_finite() && end.is_finite() && start < end,
            Envelope::Gaussian { center, width } => center.is_finite() && width.is_finite() && width > 0.0,
            Envelope::Sine { frequency, phase } => frequency.is_finite() && phase.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::contract("Envelope", format!("invalid parameters {self:?}")))
        }
    }

    /// Value and first two time derivatives at `t`.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        match *self {
            Envelope::Constant => [1.0, 0.0, 0.0],
            Envelope::Bump { start, end } => {
                let half = 0.5 * (end - start);
                let x = (t - 0.5 * (start + end)) / half;
                if x.abs() >= 1.0 {
                    return [0.0, 0.0, 0.0];
                }
                let s = 1.0 - x * x;
                let b = (1.0 - 1.0 / s).exp();
                let g1 = -2.0 * x / (s * s);
                let g2 = -2.0 / (s * s) - 8.0 * x * x / (s * s * s);
                let k = 1.0 / half;
                [b, b * g1 * k, b * (g2 + g1 * g1) * k * k]
            }
            Envelope::Gaussian { center, width } => {
                let y = (t - center) / width;
                let g = (-0.5 * y * y).exp();
                [g, -y / width * g, (y * y - 1.0) / (width * width) * g]
            }
            Envelope::Sine { frequency, phase } => {
                let a = frequency * t + phase;
                [a.sin(), frequency * a.cos(), -frequency * frequency * a.sin()]
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }
}

/// `Σ_k f_k(t) V_k`: a sum of fixed Hermitian operators with scalar envelopes.
#[derive(Clone, Debug, PartialEq)]
pub struct Drive {
    dim: usize,
    terms: Vec<(HermitianOperator, Envelope)>,
}

impl Drive {
    pub fn new(dim: usize, terms: Vec<(HermitianOperator, Envelope)>) -> Result<Self> {
        for (op, env) in &terms {
            if op.dim() != dim {
                return Err(Error::contract(
                    "Drive",
                    format!("term of dimension {} in a drive of dimension {dim}", op.dim()),
                ));
            }
            env.validate()?;
        }
        Ok(Drive { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Drive { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(HermitianOperator, Envelope)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `d^order V / dt^order` at `t`, for `order ≤ 2`.
    pub fn derivative(&self, t: f64, order: usize) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for (op, env) in &self.terms {
            let c = env.jet(t)[order];
            if c != 0.0 {
                acc = acc.add_scaled(op.matrix(), C64::new(c, 0.0));
            }
        }
        acc
    }

    pub fn at(&self, t: f64) -> HermitianOperator {
        HermitianOperator::symmetrize(self.derivative(t, 0))
    }
}
