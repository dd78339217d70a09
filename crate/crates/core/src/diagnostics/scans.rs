use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    charge_distribution, cumulants, generating_function, mean_transport_direct, required_grid_size, CumulantVector,
    KernelVariant, Scenario,
};
use crate::error::{Error, Result};
use crate::models::{
    build_chiral, build_two_lead, fermi_occupation_blocks, propagate, thermal_occupation, ChiralModel,
    PropagationMode, PropagatorSpec, TwoLeadLattice,
};

use super::norms::{norm_report, NormReport};

/// Initial many-body state of a lattice scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Fermi sea of the decoupled leads at `mu`.
    Pure { mu: f64 },
    /// Per-lead Gibbs state of the decoupled leads.
    Thermal { beta: f64, mu_left: f64, mu_right: f64 },
}

/// A two-lead lattice quench: state of the decoupled leads, evolution under the coupled Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeScenario {
    pub lattice: TwoLeadLattice,
    pub state: StateSpec,
    pub evolution: PropagatorSpec,
}

impl LatticeScenario {
    pub fn build(&self) -> Result<Scenario> {
        let ops = build_two_lead(&self.lattice)?;
        let occupation = match self.state {
            StateSpec::Pure { mu } => fermi_occupation_blocks(&ops.h0, mu, &ops.charge)?,
            StateSpec::Thermal { beta, mu_left, mu_right } => {
                thermal_occupation(&ops.h0, beta, mu_left, mu_right, &ops.charge)?
            }
        };
        let evolution = propagate(&self.evolution, &ops.h)?;
        Scenario::new(occupation, ops.charge, evolution)
    }

    /// The same scenario with `length` sites in each lead.
    pub fn with_lead_length(&self, length: usize) -> Result<Self> {
        if !matches!(self.evolution.mode, PropagationMode::Static) {
            return Err(Error::contract("with_lead_length", "a driven evolution is tied to one lattice size"));
        }
        let lattice = TwoLeadLattice { sites_left: length, sites_right: length, ..self.lattice.clone() };
        Ok(LatticeScenario { lattice, ..self.clone() })
    }
}

/// What to compute at each scan point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub variant: KernelVariant,
    pub cumulant_order: usize,
    /// Reference counting field `λ*` of the norm report.
    pub lambda_ref: f64,
    /// λ-grid size; the smallest admissible size when absent.
    pub grid_size: Option<usize>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            variant: KernelVariant::Regularized,
            cumulant_order: 4,
            lambda_ref: std::f64::consts::FRAC_PI_2,
            grid_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub parameter: f64,
    pub grid_size: usize,
    pub cumulants: CumulantVector,
    /// `tr(Q_U(N − N_U))`, for comparison with `κ₁`.
    pub mean_direct: f64,
    pub norms: NormReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub parameter: String,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn parameters(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.parameter).collect()
    }

    /// `κ_j` (one-based) per row.
    pub fn kappa(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.cumulants.get(j)).collect()
    }

    pub fn norm(&self, label: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.norms.get(label).unwrap_or(f64::NAN)).collect()
    }

    /// `|x_{i+1} − x_i| / (|x_i| + 1e−12)` between consecutive rows.
    pub fn relative_changes(series: &[f64]) -> Vec<f64> {
        series.windows(2).map(|w| (w[1] - w[0]).abs() / (w[0].abs() + 1e-12)).collect()
    }
}

fn check_increasing<T: PartialOrd + std::fmt::Debug>(op: &'static str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::contract(op, "no scan values"));
    }
    if let Some(w) = values.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::contract(op, format!("scan values must increase strictly: {:?} then {:?}", w[0], w[1])));
    }
    Ok(())
}

/// Full pipeline at one scan point: distribution, cumulants, norms.
pub fn analyze(scenario: &Scenario, parameter: f64, settings: &AnalysisSettings) -> Result<ScanRow> {
    let grid_size = settings.grid_size.unwrap_or_else(|| required_grid_size(scenario.dim()));
    let samples = generating_function(scenario, settings.variant, grid_size)?;
    let dist = charge_distribution(&samples)?;
    dist.check_contract()?;
    Ok(ScanRow {
        parameter,
        grid_size,
        cumulants: cumulants(&dist, settings.cumulant_order)?,
        mean_direct: mean_transport_direct(scenario)?,
        norms: norm_report(scenario, settings.lambda_ref)?,
    })
}

fn run_points<T: Sync>(
    name: &str,
    points: &[T],
    parameter: impl Fn(&T) -> f64 + Sync,
    build: impl Fn(&T) -> Result<Scenario> + Sync,
    settings: &AnalysisSettings,
) -> Result<ScanResult> {
    let rows = points
        .par_iter()
        .map(|p| analyze(&build(p)?, parameter(p), settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { parameter: name.to_string(), rows })
}

/// Cumulants and norms as both leads grow, at fixed evolution time.
///
/// The time must keep the causal cone inside every lattice: `T·2|hopping| < length`.
pub fn tenet_scan_length(base: &LatticeScenario, lengths: &[usize], settings: &AnalysisSettings) -> Result<ScanResult> {
    check_increasing("tenet_scan_length", lengths)?;
    let reach = base.evolution.total_time * 2.0 * base.lattice.hopping.abs();
    if reach >= lengths[0] as f64 {
        return Err(Error::BoundaryContamination { reach, length: lengths[0] });
    }
    let scenarios = lengths.iter().map(|&l| base.with_lead_length(l)).collect::<Result<Vec<_>>>()?;
    for s in &scenarios {
        s.lattice.validate()?;
    }
    run_points("lead_length", &scenarios, |s| s.lattice.sites_left as f64, LatticeScenario::build, settings)
}

/// A model whose Fermi sea can be deepened.
#[derive(Clone, Debug, PartialEq)]
pub enum DepthFamily {
    /// Depth is the energy cutoff `Λ`; the grid grows with it so the time window stays fixed.
    Chiral(ChiralModel),
    /// Depth is the chemical potential of a pure lattice state.
    Lattice(LatticeScenario),
}

impl DepthFamily {
    fn at_depth(&self, depth: f64) -> Result<Scenario> {
        match self {
            DepthFamily::Chiral(base) => {
                let grid = base.grid_points as f64 * depth / base.energy_cutoff;
                let rounded = grid.round();
                if (grid - rounded).abs() > 1e-9 || rounded < 2.0 || rounded as usize % 2 != 0 {
                    return Err(Error::contract(
                        "tenet_scan_depth",
                        format!("cutoff {depth} gives {grid} grid points; an even integer is required"),
                    ));
                }
                let model = ChiralModel { energy_cutoff: depth, grid_points: rounded as usize, ..base.clone() };
                let ops = build_chiral(&model)?;
                Scenario::new(ops.occupation, ops.charge, ops.evolution)
            }
            DepthFamily::Lattice(base) => {
                if !matches!(base.state, StateSpec::Pure { .. }) {
                    return Err(Error::contract("tenet_scan_depth", "the lattice depth scan sweeps μ of a pure state"));
                }
                LatticeScenario { state: StateSpec::Pure { mu: depth }, ..base.clone() }.build()
            }
        }
    }
}

pub fn tenet_scan_depth(family: &DepthFamily, depths: &[f64], settings: &AnalysisSettings) -> Result<ScanResult> {
    check_increasing("tenet_scan_depth", depths)?;
    let name = match family {
        DepthFamily::Chiral(_) => "energy_cutoff",
        DepthFamily::Lattice(_) => "mu",
    };
    run_points(name, depths, |&d| d, |&d| family.at_depth(d), settings)
}

/// Static charge variance `tr(QNN′)` against lead length, with a least-squares line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub lengths: Vec<usize>,
    pub variances: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares `y ≈ a + b x`; returns `(b, a, R²)`. A perfect fit of constant data has `R² = 1`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    (slope, intercept, r2)
}

pub fn variance_vs_length(base: &LatticeScenario, lengths: &[usize]) -> Result<VarianceScan> {
    check_increasing("variance_vs_length", lengths)?;
    let StateSpec::Thermal { beta, mu_left, mu_right } = base.state else {
        return Err(Error::contract("variance_vs_length", "the variance law concerns thermal states"));
    };
    let variances = lengths
        .par_iter()
        .map(|&l| {
            let lattice = TwoLeadLattice { sites_left: l, sites_right: l, ..base.lattice.clone() };
            let ops = build_two_lead(&lattice)?;
            let n = thermal_occupation(&ops.h0, beta, mu_left, mu_right, &ops.charge)?;
            let nnp = n.matrix() * n.complement().matrix();
            Ok((ops.charge.matrix() * &nnp).trace().re)
        })
        .collect::<Result<Vec<f64>>>()?;
    let x: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &variances);
    Ok(VarianceScan { lengths: lengths.to_vec(), variances, slope, intercept, r_squared })
}
