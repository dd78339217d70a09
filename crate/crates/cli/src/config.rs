//! Scenario configuration: a JSON document with `model`, `state`, `evolution` and `analysis`
//! sections. Parsing and validation report the path of the first offending field.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use fcs_core::diagnostics::{AnalysisSettings, DepthFamily, LatticeScenario, StateSpec};
use fcs_core::engine::{required_grid_size, KernelVariant, MAX_CUMULANT_ORDER};
use fcs_core::models::{
    ChiralModel, Drive, Envelope, PropagationMode, PropagatorSpec, ScatterProfile, TwoLeadLattice,
};
use fcs_core::opcore::{ComplexMatrix, HermitianOperator, ONE};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    /// Required for lattices; the chiral model fixes its own Fermi sea.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    /// Required for lattices; the chiral model is defined by its scatterer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelConfig {
    TwoLead(TwoLeadLattice),
    Chiral(ChiralModel),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub total_time: f64,
    /// Time-dependent perturbation; static evolution when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub steps: usize,
    pub terms: Vec<DriveTermConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveTermConfig {
    pub operator: SiteOperator,
    pub amplitude: f64,
    pub envelope: Envelope,
}

/// One-particle operators a drive term can multiply; sites are numbered left lead first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteOperator {
    /// Potential on one site.
    Site(usize),
    /// Real hopping between two distinct sites.
    Bond(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_variant")]
    pub variant: KernelVariant,
    /// λ-grid size `K`; the smallest admissible one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default = "default_order")]
    pub cumulant_order: usize,
    #[serde(default = "default_lambda_ref")]
    pub lambda_ref: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scans: Vec<ScanConfig>,
}

fn default_variant() -> KernelVariant {
    KernelVariant::Regularized
}

fn default_order() -> usize {
    4
}

fn default_lambda_ref() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            variant: default_variant(),
            grid_size: None,
            cumulant_order: default_order(),
            lambda_ref: default_lambda_ref(),
            scans: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub name: String,
    pub kind: ScanKind,
    /// Lead lengths for `lead_length` and `variance`, depths (`Λ` or `μ`) for `depth`.
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    LeadLength,
    Depth,
    Variance,
}

fn err(path: impl Into<String>, detail: impl Into<String>) -> CliError {
    CliError::Config { path: path.into(), detail: detail.into() }
}

fn finite(path: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(err(path, format!("{x} is not finite")))
    }
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(err(path, format!("{x} must be positive")))
    }
}

fn validate_envelope(path: &str, env: &Envelope) -> Result<(), CliError> {
    env.validate().map_err(|e| err(path, e.to_string()))
}

fn typed<T: serde::de::DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            (p, ".") => p.to_string(),
            ("", i) => i.to_string(),
            (p, i) => format!("{p}.{i}"),
        };
        err(path, e.into_inner().to_string())
    })
}

// Field mirrors of the `StateSpec` variants, for error paths only.
#[derive(Deserialize)]
#[allow(dead_code)]
struct PureFields {
    mu: f64,
}

#[derive(Deserialize)]
#[allow(dead_code)]
struct ThermalFields {
    beta: f64,
    mu_left: f64,
    mu_right: f64,
}

/// Deserializes the variant selected by `tag` so that type errors inside it keep their path;
/// internally tagged enums otherwise report only the section name.
fn check_tagged_section(root: &serde_json::Value, section: &str, tag: &str) -> Result<(), CliError> {
    let Some(serde_json::Value::Object(fields)) = root.get(section) else { return Ok(()) };
    let mut fields = fields.clone();
    let Some(serde_json::Value::String(kind)) = fields.remove(tag) else { return Ok(()) };
    let body = serde_json::Value::Object(fields);
    match (section, kind.as_str()) {
        ("model", "two_lead") => typed::<TwoLeadLattice>(body, section).map(drop),
        ("model", "chiral") => typed::<ChiralModel>(body, section).map(drop),
        ("state", "pure") => typed::<PureFields>(body, section).map(drop),
        ("state", "thermal") => typed::<ThermalFields>(body, section).map(drop),
        _ => Ok(()),
    }
}

/// Parses a configuration; type errors name the field path.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let root: serde_json::Value = serde_json::from_str(text).map_err(|e| err("", e.to_string()))?;
    check_tagged_section(&root, "model", "type")?;
    check_tagged_section(&root, "state", "kind")?;
    typed(root, "")
}

pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), detail: e.to_string() })?;
    let config = parse_config(&text)?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    /// One-particle dimension.
    pub fn dim(&self) -> usize {
        match &self.model {
            ModelConfig::TwoLead(l) => l.sites_left + l.sites_right,
            ModelConfig::Chiral(m) => 2 * m.grid_points,
        }
    }

    pub fn settings(&self) -> AnalysisSettings {
        AnalysisSettings {
            variant: self.analysis.variant,
            cumulant_order: self.analysis.cumulant_order,
            lambda_ref: self.analysis.lambda_ref,
            grid_size: self.analysis.grid_size,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.analysis.grid_size.unwrap_or_else(|| required_grid_size(self.dim()))
    }

    pub fn scan(&self, name: &str) -> Result<&ScanConfig, CliError> {
        self.analysis.scans.iter().find(|s| s.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.analysis.scans.iter().map(|s| s.name.as_str()).collect();
            err("analysis.scans", format!("no scan named `{name}` (available: {known:?})"))
        })
    }

    /// Checks every precondition of the computation that is decidable from the configuration.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.model {
            ModelConfig::TwoLead(lattice) => self.validate_lattice(lattice)?,
            ModelConfig::Chiral(model) => self.validate_chiral(model)?,
        }
        self.validate_analysis()
    }

    fn validate_lattice(&self, l: &TwoLeadLattice) -> Result<(), CliError> {
        if l.sites_left == 0 {
            return Err(err("model.sites_left", "a lead needs at least one site"));
        }
        if l.sites_right == 0 {
            return Err(err("model.sites_right", "a lead needs at least one site"));
        }
        finite("model.hopping", l.hopping)?;
        finite("model.onsite_left", l.onsite_left)?;
        finite("model.onsite_right", l.onsite_right)?;
        finite("model.coupling", l.coupling)?;
        finite("model.bias", l.bias)?;

        match self.state {
            None => return Err(err("state", "a lattice model needs an initial state")),
            Some(StateSpec::Pure { mu }) => {
                finite("state.mu", mu)?;
                if l.bias != 0.0 {
                    return Err(err("model.bias", "a bias needs a thermal state with two chemical potentials"));
                }
            }
            Some(StateSpec::Thermal { beta, mu_left, mu_right }) => {
                positive("state.beta", beta)?;
                finite("state.mu_left", mu_left)?;
                finite("state.mu_right", mu_right)?;
                if l.bias != 0.0 && (l.bias - (mu_left - mu_right)).abs() > 1e-12 {
                    return Err(err(
                        "model.bias",
                        format!("bias {} disagrees with mu_left − mu_right = {}", l.bias, mu_left - mu_right),
                    ));
                }
            }
        }

        let Some(evolution) = &self.evolution else {
            return Err(err("evolution", "a lattice model needs an evolution"));
        };
        let t = evolution.total_time;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(err("evolution.total_time", format!("{t} must be finite and ≥ 0")));
        }
        if let Some(drive) = &evolution.drive {
            if drive.steps == 0 {
                return Err(err("evolution.drive.steps", "at least one step is needed"));
            }
            if drive.terms.is_empty() {
                return Err(err("evolution.drive.terms", "a drive needs at least one term"));
            }
            let dim = self.dim();
            for (i, term) in drive.terms.iter().enumerate() {
                let path = format!("evolution.drive.terms[{i}]");
                let in_range = match term.operator {
                    SiteOperator::Site(s) => s < dim,
                    SiteOperator::Bond(a, b) => a < dim && b < dim && a != b,
                };
                if !in_range {
                    return Err(err(
                        format!("{path}.operator"),
                        format!("{:?} is not an operator on {dim} sites", term.operator),
                    ));
                }
                finite(&format!("{path}.amplitude"), term.amplitude)?;
                validate_envelope(&format!("{path}.envelope"), &term.envelope)?;
            }
        }
        Ok(())
    }

    fn validate_chiral(&self, m: &ChiralModel) -> Result<(), CliError> {
        positive("model.energy_cutoff", m.energy_cutoff)?;
        if m.grid_points < 2 || m.grid_points % 2 != 0 {
            return Err(err("model.grid_points", format!("{} must be even and at least 2", m.grid_points)));
        }
        match m.scatter {
            ScatterProfile::Identity => {}
            ScatterProfile::PhasePulse { start, end, phase } => {
                finite("model.scatter.phase", phase)?;
                validate_support(m, start, end)?;
            }
            ScatterProfile::PumpCycle { start, end, mixing, phase } => {
                finite("model.scatter.mixing", mixing)?;
                finite("model.scatter.phase", phase)?;
                validate_support(m, start, end)?;
            }
        }
        if self.state.is_some() {
            return Err(err("state", "the chiral model fixes its own Fermi sea; remove this section"));
        }
        if self.evolution.is_some() {
            return Err(err("evolution", "the chiral model is evolved by its scatterer; remove this section"));
        }
        Ok(())
    }

    fn validate_analysis(&self) -> Result<(), CliError> {
        let a = &self.analysis;
        if let Some(k) = a.grid_size {
            let required = required_grid_size(self.dim());
            if k < required || k % 2 == 0 {
                return Err(err("analysis.grid_size", format!("{k} must be odd and at least {required}")));
            }
        }
        if !(2..=MAX_CUMULANT_ORDER).contains(&a.cumulant_order) {
            return Err(err("analysis.cumulant_order", format!("{} must lie in 2..={MAX_CUMULANT_ORDER}", a.cumulant_order)));
        }
        finite("analysis.lambda_ref", a.lambda_ref)?;
        if a.variant == KernelVariant::ZeroTemperature && matches!(self.state, Some(StateSpec::Thermal { .. })) {
            return Err(err("analysis.variant", "the zero-temperature kernel needs a pure state"));
        }

        let mut names = BTreeSet::new();
        for (i, scan) in a.scans.iter().enumerate() {
            let path = format!("analysis.scans[{i}]");
            if scan.name.is_empty() || !names.insert(scan.name.as_str()) {
                return Err(err(format!("{path}.name"), format!("`{}` is empty or repeated", scan.name)));
            }
            self.validate_scan(&path, scan)?;
        }
        Ok(())
    }

    fn validate_scan(&self, path: &str, scan: &ScanConfig) -> Result<(), CliError> {
        let values_path = format!("{path}.values");
        if scan.values.is_empty() {
            return Err(err(&values_path, "no scan values"));
        }
        if scan.values.iter().any(|v| !v.is_finite()) || scan.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(err(&values_path, "values must be finite and strictly increasing"));
        }
        let lengths = || -> Result<Vec<usize>, CliError> {
            scan.values
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
                        Ok(v as usize)
                    } else {
                        Err(err(&values_path, format!("lead length {v} is not a positive integer")))
                    }
                })
                .collect()
        };
        match (scan.kind, &self.model) {
            (ScanKind::LeadLength, ModelConfig::TwoLead(l)) => {
                let lengths = lengths()?;
                let evolution = self.evolution.as_ref().expect("validated lattice has an evolution");
                if evolution.drive.is_some() {
                    return Err(err(path, "a driven evolution is tied to one lattice size"));
                }
                let reach = evolution.total_time * 2.0 * l.hopping.abs();
                if reach >= lengths[0] as f64 {
                    return Err(err(
                        &values_path,
                        format!("causal cone {reach} reaches the end of a {}-site lead", lengths[0]),
                    ));
                }
            }
            (ScanKind::Variance, ModelConfig::TwoLead(_)) => {
                lengths()?;
                if !matches!(self.state, Some(StateSpec::Thermal { .. })) {
                    return Err(err(path, "the variance law concerns thermal states"));
                }
            }
            (ScanKind::Depth, ModelConfig::TwoLead(_)) => {
                if !matches!(self.state, Some(StateSpec::Pure { .. })) {
                    return Err(err(path, "a lattice depth scan sweeps μ of a pure state"));
                }
            }
            (ScanKind::Depth, ModelConfig::Chiral(m)) => {
                for &depth in &scan.values {
                    let g = m.grid_points as f64 * depth / m.energy_cutoff;
                    if depth <= 0.0 || (g - g.round()).abs() > 1e-9 || g.round() < 2.0 || g.round() as usize % 2 != 0 {
                        return Err(err(
                            &values_path,
                            format!("cutoff {depth} gives {g} grid points; an even integer is required"),
                        ));
                    }
                }
            }
            (kind, ModelConfig::Chiral(_)) => {
                return Err(err(format!("{path}.kind"), format!("{kind:?} scans need a lattice model")));
            }
        }
        Ok(())
    }

    pub fn lattice_scenario(&self) -> Option<LatticeScenario> {
        let ModelConfig::TwoLead(lattice) = &self.model else { return None };
        let evolution = self.evolution.as_ref()?;
        let mode = match &evolution.drive {
            None => PropagationMode::Static,
            Some(d) => PropagationMode::Driven { steps: d.steps, drive: build_drive(self.dim(), d) },
        };
        Some(LatticeScenario {
            lattice: lattice.clone(),
            state: self.state.clone()?,
            evolution: PropagatorSpec { total_time: evolution.total_time, mode },
        })
    }

    pub fn depth_family(&self) -> DepthFamily {
        match &self.model {
            ModelConfig::Chiral(m) => DepthFamily::Chiral(m.clone()),
            ModelConfig::TwoLead(_) => DepthFamily::Lattice(self.lattice_scenario().expect("validated lattice config")),
        }
    }
}

fn validate_support(m: &ChiralModel, start: f64, end: f64) -> Result<(), CliError> {
    if !(start.is_finite() && end.is_finite() && start < end) {
        return Err(err("model.scatter", format!("support [{start}, {end}] is empty")));
    }
    let (w0, w1) = m.window();
    if start < w0 || end >= w1 {
        return Err(err("model.scatter", format!("support [{start}, {end}] leaves the time window [{w0}, {w1})")));
    }
    Ok(())
}

fn build_drive(dim: usize, config: &DriveConfig) -> Drive {
    let terms = config
        .terms
        .iter()
        .map(|t| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            let a = ONE * t.amplitude;
            match t.operator {
                SiteOperator::Site(s) => m.set(s, s, a),
                SiteOperator::Bond(i, j) => {
                    m.set(i, j, a);
                    m.set(j, i, a);
                }
            }
            (HermitianOperator::new(m).expect("real symmetric"), t.envelope)
        })
        .collect();
    Drive::new(dim, terms).expect("envelopes were validated")
}
