//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs every bundled configuration twice through the `fcs` binary (determinism) and reuses those
//! documents for the distribution, particle-hole, first-cumulant and scan criteria; the remaining
//! criteria call the libraries directly.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fcs_cli::{identity_self_test, load_config, oracle_check, ResultDocument};
use fcs_core::diagnostics::{
    dyson_hs_check, variance_vs_length, LatticeScenario, OffDiagonalDrive, SpatialProfile, StateSpec,
};
use fcs_core::engine::{
    charge_distribution, counting_kernel, cumulants, generating_function, mean_transport_direct, particle_hole_check,
    required_grid_size, ChargeDistribution, KernelVariant, Scenario, IMAGINARY_RESIDUE_TOL, NEGATIVITY_TOL, SUM_TOL,
};
use fcs_core::models::{Envelope, PropagatorSpec, TwoLeadLattice};

const BUNDLED: [&str; 5] = ["free_evolution", "two_lead_pure_M8", "driven_pump", "length_scan", "chiral_depth"];

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Raw text of the `result` member: the numeric payload exactly as written.
fn payload_bytes(text: &str) -> &str {
    let start = text.find("\n  \"result\": ").expect("document has a result");
    let end = text.find("\n  \"timings\": ").expect("document has timings");
    &text[start..end]
}

/// Runs the binary on a bundled config and returns the document text.
fn run_binary(name: &str, threads: Option<&str>) -> String {
    let config = configs().join(format!("{name}.json"));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fcs"));
    cmd.args(["run", "--config", &config.display().to_string()]);
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    let out = cmd.output().expect("fcs binary runs");
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 document")
}

fn distribution_contract(d: &ChargeDistribution) -> (f64, f64, f64) {
    let min = d.probabilities.iter().copied().fold(f64::INFINITY, f64::min);
    (d.imaginary_residue, min, (d.total() - 1.0).abs())
}

/// A random two-lead quench with 3–8 sites per lead, pure or thermal.
fn random_scenario(rng: &mut ChaCha8Rng, thermal: bool) -> Scenario {
    loop {
        let lattice = TwoLeadLattice {
            onsite_left: rng.gen_range(-0.5..0.5),
            onsite_right: rng.gen_range(-0.5..0.5),
            coupling: rng.gen_range(0.3..1.2),
            ..TwoLeadLattice::uniform(rng.gen_range(3..=8), rng.gen_range(3..=8))
        };
        let state = if thermal {
            StateSpec::Thermal {
                beta: rng.gen_range(0.5..4.0),
                mu_left: rng.gen_range(-1.0..1.0),
                mu_right: rng.gen_range(-1.0..1.0),
            }
        } else {
            StateSpec::Pure { mu: rng.gen_range(-1.0..1.0) }
        };
        let evolution = PropagatorSpec::fixed(rng.gen_range(0.5..5.0));
        // A Fermi level sitting on a lattice level is rejected; draw again.
        if let Ok(s) = (LatticeScenario { lattice, state, evolution }).build() {
            return s;
        }
    }
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    // Bundled documents, twice each, with different worker counts.
    let mut docs: Vec<(&str, ResultDocument)> = Vec::new();
    let mut identical = Vec::new();
    for name in BUNDLED {
        let first = run_binary(name, Some("1"));
        let second = run_binary(name, None);
        identical.push((name, payload_bytes(&first) == payload_bytes(&second)));
        docs.push((name, serde_json::from_str(&first).expect("document parses")));
    }
    let doc = |name: &str| &docs.iter().find(|(n, _)| *n == name).expect("bundled").1;

    // 1. Engine against the Fock-space oracle.
    {
        let config = load_config(&configs().join("two_lead_pure_M8.json")).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let start = Instant::now();
        let report = pool.install(|| oracle_check(&config, None)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let pass = report.grid_size == 33
            && report.max_chi_deviation <= 1e-10
            && report.max_probability_deviation <= 1e-9
            && secs <= 10.0;
        results.push((
            1,
            "oracle equivalence, 4+4 sites, 33 grid points",
            outcome(
                pass,
                format!(
                    "max|Δχ| = {:.2e} (≤ 1e-10), max|Δp| = {:.2e} (≤ 1e-9), {secs:.2} s single-threaded (≤ 10 s)",
                    report.max_chi_deviation, report.max_probability_deviation
                ),
            ),
        ));
    }

    // 2. det D = det D̃ on the full grid, 5 random scenarios.
    let mut random_scenarios = Vec::new();
    {
        let start = Instant::now();
        let mut worst = 0.0f64;
        for i in 0..5 {
            let s = random_scenario(&mut rng, i % 2 == 1);
            let k = required_grid_size(s.dim());
            for j in 0..k {
                let lambda = 2.0 * PI * j as f64 / k as f64;
                let naive = counting_kernel(&s, KernelVariant::Naive, lambda).unwrap().determinant();
                let reg = counting_kernel(&s, KernelVariant::Regularized, lambda).unwrap().determinant();
                worst = worst.max((naive - reg).norm() / (1.0 + naive.norm()));
            }
            random_scenarios.push(s);
        }
        let secs = start.elapsed().as_secs_f64();
        results.push((
            2,
            "regularization leaves the determinant unchanged",
            outcome(
                worst <= 1e-9 && secs <= 30.0,
                format!("max |det D − det D̃|/(1+|det D|) = {worst:.2e} (≤ 1e-9) over 5 scenarios, {secs:.2} s (≤ 30 s)"),
            ),
        ));
    }

    // Distributions, cumulants and mean transport of every scenario in the suite.
    let mut distributions: Vec<(String, ChargeDistribution, f64, f64)> = Vec::new();
    for (name, d) in &docs {
        distributions.push((name.to_string(), d.result.distribution.clone(), d.result.cumulants[0], d.result.mean_direct));
    }
    for (i, s) in random_scenarios.iter().enumerate() {
        for variant in [KernelVariant::Naive, KernelVariant::Regularized] {
            let samples = generating_function(s, variant, required_grid_size(s.dim())).unwrap();
            let dist = charge_distribution(&samples).unwrap();
            let k1 = cumulants(&dist, 2).unwrap().get(1);
            distributions.push((format!("random {i} {}", variant.name()), dist, k1, mean_transport_direct(s).unwrap()));
        }
    }

    // 3. Distribution contracts.
    {
        let (mut residue, mut negative, mut sum) = (0.0f64, f64::INFINITY, 0.0f64);
        for (_, d, _, _) in &distributions {
            let (r, m, s) = distribution_contract(d);
            residue = residue.max(r);
            negative = negative.min(m);
            sum = sum.max(s);
        }
        results.push((
            3,
            "distribution contracts",
            outcome(
                residue <= IMAGINARY_RESIDUE_TOL && negative >= -NEGATIVITY_TOL && sum <= SUM_TOL,
                format!(
                    "{} distributions: max imaginary residue {residue:.2e}, min p_n {negative:.2e}, max |Σp − 1| {sum:.2e}",
                    distributions.len()
                ),
            ),
        ));
    }

    // 4. Particle-hole symmetry on the pure scenarios.
    {
        let mut worst = 0.0f64;
        let mut count = 0;
        for (_, d) in &docs {
            if let Some(ph) = d.result.particle_hole_defect {
                worst = worst.max(ph);
                count += 1;
            }
        }
        for s in random_scenarios.iter().filter(|s| s.occupation().is_pure()) {
            for variant in [KernelVariant::Naive, KernelVariant::Regularized, KernelVariant::ZeroTemperature] {
                worst = worst.max(particle_hole_check(s, variant, required_grid_size(s.dim())).unwrap());
            }
            count += 1;
        }
        results.push((
            4,
            "particle-hole symmetry",
            outcome(worst <= 1e-9, format!("max |χ_N(λ) − χ_N′(−λ)| = {worst:.2e} (≤ 1e-9) on {count} pure scenarios")),
        ));
    }

    // 5. First cumulant equals tr(Q_U(N − N_U)); zero without evolution.
    {
        let worst = distributions.iter().map(|(_, _, k1, m)| (k1 - m).abs()).fold(0.0, f64::max);
        let free = doc("free_evolution").result.cumulants[0].abs();
        results.push((
            5,
            "first-cumulant identity",
            outcome(
                worst <= 1e-8 && free <= 1e-10,
                format!("max |κ₁ − tr(Q_U(N − N_U))| = {worst:.2e} (≤ 1e-8); free evolution |κ₁| = {free:.2e} (≤ 1e-10)"),
            ),
        ));
    }

    // 6. Determinant identities on Fock space.
    {
        let t = identity_self_test(rng.gen()).unwrap();
        results.push((
            6,
            "second-quantized determinant identities",
            outcome(
                t.omega_gamma_max <= 1e-9 && t.trdet_max <= 1e-9,
                format!(
                    "Tr Γ(U)P vs det(1 − N + UN): {:.2e} over 10 rank ≤ 3 perturbations at 5 modes; \
                     Tr e^{{iλdΓ(A)}}P vs det: {:.2e} at 4 modes (both ≤ 1e-9)",
                    t.omega_gamma_max, t.trdet_max
                ),
            ),
        ));
    }

    // 7. Lead-length independence on the standard scenario.
    {
        let d = doc("length_scan");
        let table = d.result.scans.iter().find(|s| s.name == "length").expect("length scan");
        let lengths = table.column("parameter").unwrap();
        let k1 = table.column("kappa1").unwrap();
        let k2 = table.column("kappa2").unwrap();
        let change = |x: &[f64]| (x[1] - x[0]).abs() / x[0].abs();
        let secs = d.timings.iter().find(|t| t.stage == "scan:length").map_or(f64::NAN, |t| t.seconds);
        results.push((
            7,
            "lead-length independence",
            outcome(
                lengths == [40.0, 80.0] && change(&k1) < 0.01 && change(&k2) < 0.01 && secs <= 120.0,
                format!(
                    "L 40 → 80: κ₁ {:.6} → {:.6} ({:.1e}), κ₂ {:.6} → {:.6} ({:.1e}), both < 1%; {secs:.1} s (≤ 120 s)",
                    k1[0],
                    k1[1],
                    change(&k1),
                    k2[0],
                    k2[1],
                    change(&k2)
                ),
            ),
        ));
    }

    // 8. Doubling the depth of the chiral sea.
    {
        let table = doc("chiral_depth").result.scans.iter().find(|s| s.name == "depth").expect("depth scan").clone();
        let dq = table.column("dQ_N_1").unwrap();
        let k1 = table.column("kappa1").unwrap();
        let dreg = table.column("Dreg_minus_1_1").unwrap();
        let factor = dq[1] / dq[0];
        let change = |x: &[f64]| (x[1].abs() - x[0].abs()).abs() / x[0].abs();
        results.push((
            8,
            "depth doubling: growing ‖(Q_U − Q)N‖₁, stable κ₁ and ‖D̃ − 1‖₁",
            outcome(
                (1.6..=2.4).contains(&factor) && change(&k1) < 0.05 && change(&dreg) < 0.05,
                format!(
                    "Λ {} → {}: ‖(Q_U − Q)N‖₁ ×{factor:.3} (in [1.6, 2.4]); |κ₁| change {:.1e}, ‖D̃(λ*) − 1‖₁ change {:.1e} (< 5%)",
                    table.rows[0][0],
                    table.rows[1][0],
                    change(&k1),
                    change(&dreg)
                ),
            ),
        ));
    }

    // 9. Thermal variance grows linearly with the lead length.
    {
        let table = doc("length_scan").result.scans.iter().find(|s| s.name == "variance").expect("variance scan").clone();
        let fit = table.fit.clone().expect("variance fit");
        let flat = LatticeScenario {
            lattice: TwoLeadLattice { hopping: 0.0, ..TwoLeadLattice::uniform(1, 1) },
            state: StateSpec::Thermal { beta: 1.0, mu_left: 0.0, mu_right: 0.0 },
            evolution: PropagatorSpec::fixed(0.0),
        };
        let lengths = [20, 40, 80, 160];
        let exact = variance_vs_length(&flat, &lengths).unwrap();
        let flat_gap = lengths
            .iter()
            .zip(&exact.variances)
            .map(|(&l, v)| (v - l as f64 / 4.0).abs())
            .fold(0.0, f64::max);
        results.push((
            9,
            "thermal variance law",
            outcome(
                table.column("parameter").unwrap() == [20.0, 40.0, 80.0, 160.0]
                    && fit.r_squared >= 0.99
                    && fit.slope > 0.0
                    && flat_gap <= 1e-12,
                format!(
                    "tr(QNN′) over L = 20…160: slope {:.4}, R² = {:.6} (≥ 0.99); H₀ = 0: max |tr(QNN′) − L/4| = {flat_gap:.1e}",
                    fit.slope, fit.r_squared
                ),
            ),
        ));
    }

    // 10. Hilbert–Schmidt bound on the first Dyson term.
    {
        let cases = [
            (SpatialProfile::Bump { center: 0.0, half_width: 1.0 }, Envelope::Constant, 0.5, 2.0),
            (SpatialProfile::Bump { center: 1.0, half_width: 2.0 }, Envelope::Gaussian { center: 0.0, width: 1.0 }, -1.0, 1.0),
            (SpatialProfile::Bump { center: -0.5, half_width: 0.5 }, Envelope::Bump { start: -3.0, end: 3.0 }, 0.25, 1.5),
        ];
        let mut pass = true;
        let (mut worst_ratio, mut worst_conv) = (0.0f64, 0.0f64);
        for (profile, envelope, s1, s2) in cases {
            let drive = OffDiagonalDrive { amplitude: 0.8, envelope, profile };
            match dyson_hs_check(&drive, s1, s2, 2000) {
                Ok(bounds) => {
                    for b in bounds {
                        pass &= b.lhs <= b.rhs * 1.01 && b.self_convergence < 0.01 && b.rhs > 0.0;
                        worst_ratio = worst_ratio.max(b.lhs / b.rhs);
                        worst_conv = worst_conv.max(b.self_convergence);
                    }
                }
                Err(e) => {
                    pass = false;
                    eprintln!("Dyson case {profile:?}: {e}");
                }
            }
        }
        results.push((
            10,
            "Hilbert–Schmidt bound on the first Dyson term",
            outcome(
                pass,
                format!("3 bump drives: max lhs/rhs = {worst_ratio:.3} (≤ 1.01), max self-convergence {worst_conv:.1e} (< 1%)"),
            ),
        ));
    }

    // 11. Determinism of `run`.
    {
        let differing: Vec<&str> = identical.iter().filter(|(_, same)| !same).map(|(n, _)| *n).collect();
        results.push((
            11,
            "determinism",
            outcome(
                differing.is_empty(),
                if differing.is_empty() {
                    format!("{} bundled configs, two runs each (1 and default threads): payloads byte-identical", BUNDLED.len())
                } else {
                    format!("payloads differ for {differing:?}")
                },
            ),
        ));
    }

    let mut failed = 0;
    for (id, title, o) in &results {
        println!("[{}] {id:>2}. {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
