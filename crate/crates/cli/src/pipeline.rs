use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use fcs_core::diagnostics::{norm_report, tenet_scan_depth, tenet_scan_length, variance_vs_length, NormReport, NORM_LABELS};
use fcs_core::engine::{
    charge_distribution, cumulants, generating_function, mean_transport_direct, particle_hole_check,
    ChargeDistribution, KernelVariant, Scenario,
};
use fcs_core::models::build_chiral;
use fcs_core::opcore::{unitary_exp, ComplexMatrix, HermitianOperator, C64};
use fcs_core::oracle::{
    chi_bruteforce, distribution_bruteforce, omega_gamma_check, trdet_identity_check, FockBasis, GibbsState,
};

use crate::config::{ModelConfig, ScanConfig, ScanKind, ScenarioConfig};
use crate::error::CliError;

/// Agreement required of `oracle-check`.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    fn current() -> Self {
        ToolInfo { name: "fcs".into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// The numeric payload of a run; a deterministic function of the configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dimension: usize,
    pub grid_size: usize,
    pub variant: KernelVariant,
    /// `χ(2πk/K)` as `[re, im]`.
    pub chi: Vec<[f64; 2]>,
    pub distribution: ChargeDistribution,
    /// `κ₁, …, κ_order`.
    pub cumulants: Vec<f64>,
    /// `tr(Q_U(N − N_U))`.
    pub mean_direct: f64,
    /// `max_k |χ_N(λ_k) − χ_{1−N}(−λ_k)|`, pure states only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particle_hole_defect: Option<f64>,
    /// Chiral model only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compression_defect: Option<f64>,
    pub norms: NormReport,
    pub scans: Vec<ScanTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tool: ToolInfo,
    pub config: ScenarioConfig,
    pub result: RunResult,
    /// Wall-clock seconds per stage; excluded from the reproducible payload.
    pub timings: Vec<StageTiming>,
}

impl ResultDocument {
    /// The reproducible part of the document, serialized.
    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(&self.result).expect("payload serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// One table per scan: a `parameter` column followed by the named value columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub name: String,
    pub kind: ScanKind,
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LinearFit>,
}

impl ScanTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with a header row; numbers in scientific notation with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:.16e}"))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

struct Stopwatch(Vec<StageTiming>);

impl Stopwatch {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f()?;
        self.0.push(StageTiming { stage: stage.into(), seconds: start.elapsed().as_secs_f64() });
        Ok(out)
    }
}

/// The scenario of a validated configuration, with the chiral compression defect if any.
pub fn build_scenario(config: &ScenarioConfig) -> Result<(Scenario, Option<f64>), CliError> {
    match &config.model {
        ModelConfig::TwoLead(_) => {
            let lattice = config.lattice_scenario().ok_or_else(|| CliError::Config {
                path: "state".into(),
                detail: "a lattice model needs a state and an evolution".into(),
            })?;
            Ok((lattice.build()?, None))
        }
        ModelConfig::Chiral(model) => {
            let ops = build_chiral(model)?;
            Ok((Scenario::new(ops.occupation, ops.charge, ops.evolution)?, Some(ops.compression_defect)))
        }
    }
}

pub fn run(config: &ScenarioConfig) -> Result<ResultDocument, CliError> {
    config.validate()?;
    let mut clock = Stopwatch(Vec::new());
    let (scenario, compression_defect) = clock.time("build", || build_scenario(config))?;
    let grid_size = config.grid_size();
    let variant = config.analysis.variant;

    let samples = clock.time("generating_function", || Ok(generating_function(&scenario, variant, grid_size)?))?;
    let distribution = clock.time("distribution", || {
        let d = charge_distribution(&samples)?;
        d.check_contract()?;
        Ok(d)
    })?;
    let kappa = cumulants(&distribution, config.analysis.cumulant_order)?.kappa;
    let mean_direct = mean_transport_direct(&scenario)?;
    let particle_hole_defect = if scenario.occupation().is_pure() {
        Some(clock.time("particle_hole", || Ok(particle_hole_check(&scenario, variant, grid_size)?))?)
    } else {
        None
    };
    let norms = clock.time("norms", || Ok(norm_report(&scenario, config.analysis.lambda_ref)?))?;
    let scans = config
        .analysis
        .scans
        .iter()
        .map(|s| clock.time(&format!("scan:{}", s.name), || run_scan(config, s)))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ResultDocument {
        tool: ToolInfo::current(),
        config: config.clone(),
        result: RunResult {
            dimension: scenario.dim(),
            grid_size,
            variant,
            chi: samples.values.iter().map(|z| [z.re, z.im]).collect(),
            distribution,
            cumulants: kappa,
            mean_direct,
            particle_hole_defect,
            compression_defect,
            norms,
            scans,
        },
        timings: clock.0,
    })
}

/// Runs the named scan of the configuration.
pub fn scan(config: &ScenarioConfig, name: &str) -> Result<ScanTable, CliError> {
    config.validate()?;
    run_scan(config, config.scan(name)?)
}

fn run_scan(config: &ScenarioConfig, spec: &ScanConfig) -> Result<ScanTable, CliError> {
    let settings = config.settings();
    let lengths = || spec.values.iter().map(|&v| v as usize).collect::<Vec<_>>();
    let result = match spec.kind {
        ScanKind::Variance => {
            let base = config.lattice_scenario().expect("validated lattice config");
            let v = variance_vs_length(&base, &lengths())?;
            return Ok(ScanTable {
                name: spec.name.clone(),
                kind: spec.kind,
                parameter: "lead_length".into(),
                columns: vec!["parameter".into(), "variance".into()],
                rows: v.lengths.iter().zip(&v.variances).map(|(&l, &var)| vec![l as f64, var]).collect(),
                fit: Some(LinearFit { slope: v.slope, intercept: v.intercept, r_squared: v.r_squared }),
            });
        }
        ScanKind::LeadLength => {
            let base = config.lattice_scenario().expect("validated lattice config");
            tenet_scan_length(&base, &lengths(), &settings)?
        }
        ScanKind::Depth => tenet_scan_depth(&config.depth_family(), &spec.values, &settings)?,
    };
    let mut columns: Vec<String> = vec!["parameter".into(), "kappa1".into(), "kappa2".into()];
    columns.extend(NORM_LABELS.iter().map(|l| l.to_string()));
    let rows = result
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.parameter, r.cumulants.get(1), r.cumulants.get(2)];
            row.extend(NORM_LABELS.iter().map(|l| r.norms.get(l).unwrap_or(f64::NAN)));
            row
        })
        .collect();
    Ok(ScanTable { name: spec.name.clone(), kind: spec.kind, parameter: result.parameter, columns, rows, fit: None })
}

/// Randomized checks of the determinant identities behind the engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySelfTest {
    pub seed: u64,
    /// `max |Tr(Γ(U)P) − det(1 − N + UN)|` over 10 random `U` with `rank(U − 1) ≤ 3`, 5 modes.
    pub omega_gamma_max: f64,
    /// `max |Tr(e^{iλdΓ(A)}P) − det(1 − N + e^{iλA}N)|` over random `A` and λ, 4 modes.
    pub trdet_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub modes: usize,
    pub grid_size: usize,
    pub variants: Vec<KernelVariant>,
    pub max_chi_deviation: f64,
    pub max_probability_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_test: Option<IdentitySelfTest>,
    pub tolerance: f64,
    pub passed: bool,
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_c64(rng))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianOperator {
    let a = random_matrix(rng, n, n);
    HermitianOperator::new(&a + &a.adjoint()).expect("A + A† is Hermitian")
}

/// A random Gibbs state: weight `B B† + 0.1`.
fn random_state(rng: &mut ChaCha8Rng, basis: &FockBasis) -> Result<GibbsState, CliError> {
    let n = basis.modes();
    let b = random_matrix(rng, n, n);
    let w = &(&b * &b.adjoint()) + &ComplexMatrix::identity(n).scale(C64::new(0.1, 0.0));
    Ok(GibbsState::from_weight(&HermitianOperator::new(w)?, basis)?)
}

pub fn identity_self_test(seed: u64) -> Result<IdentitySelfTest, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let basis = FockBasis::new(5)?;
    let mut omega_gamma_max = 0.0f64;
    for _ in 0..10 {
        let state = random_state(&mut rng, &basis)?;
        let rank = rng.gen_range(1..=3);
        let v = random_matrix(&mut rng, 5, rank);
        let d: Vec<f64> = (0..rank).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let a = &(&v * &ComplexMatrix::from_real_diagonal(&d)) * &v.adjoint();
        let u = unitary_exp(&HermitianOperator::new(a)?, 1.0)?;
        omega_gamma_max = omega_gamma_max.max(omega_gamma_check(u.matrix(), &state, &basis)?);
    }

    let basis = FockBasis::new(4)?;
    let mut trdet_max = 0.0f64;
    for _ in 0..5 {
        let state = random_state(&mut rng, &basis)?;
        let a = random_hermitian(&mut rng, 4);
        for _ in 0..4 {
            let lambda = rng.gen_range(-PI..PI);
            trdet_max = trdet_max.max(trdet_identity_check(&a, &state, &basis, lambda)?);
        }
    }
    Ok(IdentitySelfTest { seed, omega_gamma_max, trdet_max })
}

fn max_probability_gap(a: &ChargeDistribution, b: &ChargeDistribution) -> f64 {
    let end = |d: &ChargeDistribution| d.n_min + d.probabilities.len() as i64;
    (a.n_min.min(b.n_min)..end(a).max(end(b))).map(|n| (a.get(n) - b.get(n)).abs()).fold(0.0, f64::max)
}

/// Engine against the Fock-space oracle on the configured scenario; optionally also the randomized
/// identity self-test.
pub fn oracle_check(config: &ScenarioConfig, seed: Option<u64>) -> Result<OracleReport, CliError> {
    config.validate()?;
    let basis = FockBasis::new(config.dim())?;
    let (scenario, _) = build_scenario(config)?;
    let grid_size = config.grid_size();
    let state = GibbsState::from_occupation(scenario.occupation(), Some(scenario.charge()), &basis)?;
    let lambdas: Vec<f64> = (0..grid_size).map(|k| 2.0 * PI * k as f64 / grid_size as f64).collect();
    let exact = chi_bruteforce(scenario.evolution(), scenario.charge(), &state, &basis, &lambdas)?;
    let exact_dist = distribution_bruteforce(scenario.evolution(), scenario.charge(), &state, &basis)?;

    let mut variants = vec![KernelVariant::Naive, KernelVariant::Regularized];
    if scenario.occupation().is_pure() {
        variants.push(KernelVariant::ZeroTemperature);
    }
    let (mut chi_dev, mut p_dev) = (0.0f64, 0.0f64);
    for &variant in &variants {
        let samples = generating_function(&scenario, variant, grid_size)?;
        for (a, b) in samples.values.iter().zip(&exact) {
            chi_dev = chi_dev.max((a - b).norm());
        }
        p_dev = p_dev.max(max_probability_gap(&charge_distribution(&samples)?, &exact_dist));
    }
    let self_test = seed.map(identity_self_test).transpose()?;
    let identities = self_test.as_ref().map_or(0.0, |t| t.omega_gamma_max.max(t.trdet_max));
    Ok(OracleReport {
        modes: basis.modes(),
        grid_size,
        variants,
        max_chi_deviation: chi_dev,
        max_probability_deviation: p_dev,
        self_test,
        tolerance: ORACLE_TOL,
        passed: chi_dev <= ORACLE_TOL && p_dev <= ORACLE_TOL && identities <= ORACLE_TOL,
    })
}

impl OracleReport {
    pub fn into_result(self) -> Result<OracleReport, CliError> {
        if self.passed {
            return Ok(self);
        }
        let identities = self.self_test.as_ref().map_or(0.0, |t| t.omega_gamma_max.max(t.trdet_max));
        Err(CliError::OracleMismatch {
            chi: self.max_chi_deviation,
            probability: self.max_probability_deviation,
            identities,
            tolerance: self.tolerance,
        })
    }
}
