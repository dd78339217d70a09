use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Envelope;
use crate::opcore::C64;

/// Relative change under grid doubling above which the quadrature is rejected.
pub const HS_QUADRATURE_TOL: f64 = 1e-2;

/// Spatial shape `g(x)` of an off-diagonal chiral perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialProfile {
    Gaussian { center: f64, width: f64 },
    /// `exp(1 − 1/(1 − y²))` with `y = (x − center)/half_width`, zero for `|y| ≥ 1`.
    Bump { center: f64, half_width: f64 },
}

impl SpatialProfile {
    pub fn validate(&self) -> Result<()> {
        let (c, w) = match *self {
            SpatialProfile::Gaussian { center, width } => (center, width),
            SpatialProfile::Bump { center, half_width } => (center, half_width),
        };
        if !(c.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(Error::contract("SpatialProfile", format!("center {c}, width {w}")));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            SpatialProfile::Gaussian { center, width } => {
                let y = (x - center) / width;
                (-0.5 * y * y).exp()
            }
            SpatialProfile::Bump { center, half_width } => {
                let y = (x - center) / half_width;
                if y.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - y * y)).exp()
                }
            }
        }
    }

    /// Interval carrying the profile up to negligible tails.
    fn extent(&self) -> (f64, f64) {
        match *self {
            SpatialProfile::Gaussian { center, width } => (center - 12.0 * width, center + 12.0 * width),
            SpatialProfile::Bump { center, half_width } => (center - half_width, center + half_width),
        }
    }

    /// Momentum beyond which `|ĝ|²` is negligible.
    fn momentum_cutoff(&self) -> f64 {
        match *self {
            SpatialProfile::Gaussian { width, .. } => 12.0 / width,
            // The bump transform decays like exp(−√(2|v|a)).
            SpatialProfile::Bump { half_width, .. } => 400.0 / half_width,
        }
    }
}

/// Off-diagonal block `V₊₋(t, x) = amplitude · f(t) · g(x)` of a perturbation of two chiral channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffDiagonalDrive {
    pub amplitude: f64,
    pub envelope: Envelope,
    pub profile: SpatialProfile,
}

/// Hilbert–Schmidt bound for the boundary term of the first Dyson term at time `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsBound {
    pub s: f64,
    /// Squared HS norm of the boundary kernel, on the finer grid.
    pub lhs: f64,
    /// `π|s| ‖V₊₋(s)‖₂²`.
    pub rhs: f64,
    /// `|lhs(2n) − lhs(n)| / lhs(2n)`.
    pub self_convergence: f64,
}

impl HsBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + HS_QUADRATURE_TOL)
    }
}

/// `∫₀^b sin²(us/2)/u² du` at every node of an increasing list, by cumulative Simpson steps.
fn cumulative_sinc(nodes: &[f64], s: f64) -> Vec<f64> {
    let f = |u: f64| {
        if u == 0.0 {
            0.25 * s * s
        } else {
            let h = (0.5 * u * s).sin() / u;
            h * h
        }
    };
    let mut acc = 0.0;
    let mut prev = 0.0;
    nodes
        .iter()
        .map(|&b| {
            let h = b - prev;
            acc += h / 6.0 * (f(prev) + 4.0 * f(prev + 0.5 * h) + f(b));
            prev = b;
            acc
        })
        .collect()
}

/// The squared HS norm and `‖g‖₂²` on an `n`-point momentum grid.
///
/// The boundary kernel is `−(e^{i(p+p′)s} − 1)/(p + p′) · V̂₊₋(s, p − p′)` on the region where
/// `Θ(−p) ≠ Θ(p′)`, i.e. `|p − p′| < |p + p′|`. With `u = p + p′`, `v = p − p′` its squared norm is
/// `∫dv |V̂(v)|² ∫_{|u|>|v|} 4 sin²(us/2)/u² du`, and the inner integral equals
/// `4(π|s|/4 − ∫₀^{|v|} sin²(us/2)/u² du)` over each half-line. The momentum-space kernel of
/// multiplication by `g` is `ĝ(v) = (1/2π)∫ g(x) e^{−ivx} dx`; `g` is real so `|ĝ|²` is even.
fn boundary_norm(profile: &SpatialProfile, s: f64, n: usize) -> (f64, f64) {
    let (x0, x1) = profile.extent();
    let v_max = profile.momentum_cutoff();
    let nx = n.max((v_max * (x1 - x0) / 0.25).ceil() as usize);
    let dx = (x1 - x0) / nx as f64;
    let xs: Vec<f64> = (0..nx).map(|j| x0 + (j as f64 + 0.5) * dx).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| profile.value(x)).collect();
    let g_norm2: f64 = gs.iter().map(|g| g * g).sum::<f64>() * dx;

    let dv = v_max / n as f64;
    let vs: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * dv).collect();
    let h = cumulative_sinc(&vs, s);
    let total = 0.25 * PI * s.abs();
    let mut lhs = 0.0;
    for (j, &v) in vs.iter().enumerate() {
        let g_hat: C64 = xs.iter().zip(&gs).map(|(&x, &g)| C64::from_polar(g, -v * x)).sum::<C64>() * (dx / (2.0 * PI));
        // Both signs of v and both half-lines of u.
        lhs += 2.0 * g_hat.norm_sqr() * 4.0 * (total - h[j]) * dv;
    }
    (lhs, g_norm2)
}

/// Checks `‖boundary kernel at s_i‖₂² ≤ π|s_i| ‖V₊₋(s_i)‖₂²` at both ends of `[s1, s2]`.
///
/// `grid` is the number of momentum nodes; the estimate is repeated on `2·grid` nodes and rejected
/// when the two differ by more than [`HS_QUADRATURE_TOL`].
pub fn dyson_hs_check(drive: &OffDiagonalDrive, s1: f64, s2: f64, grid: usize) -> Result<[HsBound; 2]> {
    drive.envelope.validate()?;
    drive.profile.validate()?;
    if !drive.amplitude.is_finite() {
        return Err(Error::contract("dyson_hs_check", "amplitude is not finite"));
    }
    if !(s1 < s2) || s1 == 0.0 || s2 == 0.0 || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::contract("dyson_hs_check", format!("need nonzero s1 < s2, got [{s1}, {s2}]")));
    }
    if grid < 16 {
        return Err(Error::contract("dyson_hs_check", format!("grid = {grid} is below 16")));
    }
    let bound = |s: f64| -> Result<HsBound> {
        let weight = (drive.amplitude * drive.envelope.value(s)).powi(2);
        if weight == 0.0 {
            return Ok(HsBound { s, lhs: 0.0, rhs: 0.0, self_convergence: 0.0 });
        }
        let (coarse, _) = boundary_norm(&drive.profile, s, grid);
        let (fine, g_norm2) = boundary_norm(&drive.profile, s, 2 * grid);
        let change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
        if change > HS_QUADRATURE_TOL {
            return Err(Error::Accuracy { steps: grid, estimate: change, tolerance: HS_QUADRATURE_TOL });
        }
        Ok(HsBound { s, lhs: weight * fine, rhs: PI * s.abs() * weight * g_norm2, self_convergence: change })
    };
    Ok([bound(s1)?, bound(s2)?])
}
