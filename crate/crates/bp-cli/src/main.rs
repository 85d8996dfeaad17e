//! `bp`: scenario verification front end. Loads `bp/1` JSON scenario files
//! (or built-in examples), runs the verification pipeline, and emits report
//! JSON / margin CSV. Exit codes partition outcomes: 0 verified or vacuous,
//! 1 parse/validation error, 2 positive-definiteness failure or invalid
//! decomposition, 3 hypothesis not satisfied, 4 implication violated.

use bp_core::engine::{self, representative_directions, run_scenario, VerificationReport};
use bp_core::geometry::radial_eval;
use bp_core::oracles;
use bp_core::quadrature::{build_sphere_quadrature, RadialRule};
use bp_core::scenario::{
    self, builtin_scenario, canonical_json, mixed_power_scenario, parse_scenario,
    report_to_value, resolve, BodySpec, ScenarioFile,
};
use bp_core::transforms::{pd_test, PdSettings, PdVerdict};
use bp_core::{Direction, RegionTag, Scenario, Scheme};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bp",
    about = "Numerical verification of section-measure comparison theorems on star bodies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a scenario file and write a report.
    Check(CheckArgs),
    /// Run the positive-definiteness test for a body's radial function.
    PdTest(PdTestArgs),
    /// Emit per-hyperplane hypothesis margins as CSV.
    SectionProfile(SectionProfileArgs),
    /// Run a built-in scenario (example-3.1, example-3.2, example-3.3,
    /// zvavitch-lebesgue; short forms 3.1/3.2/3.3 accepted).
    Example(ExampleArgs),
    /// Brute-force oracles: Monte-Carlo measures and the distributional
    /// Fourier-transform estimate.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct Overrides {
    /// Override the angular quadrature resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override the hyperplane-grid resolution of the hypothesis check.
    #[arg(long)]
    hypothesis_resolution: Option<usize>,
    /// Override the even truncation degree of the harmonic expansion.
    #[arg(long)]
    truncation_degree: Option<usize>,
    /// Override the hypothesis tolerance.
    #[arg(long)]
    tol_hypothesis: Option<f64>,
    /// Override the conclusion tolerance.
    #[arg(long)]
    tol_conclusion: Option<f64>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, file: &mut ScenarioFile) {
        if let Some(r) = self.resolution {
            file.quadrature
                .get_or_insert_with(Default::default)
                .resolution = Some(r);
        }
        if let Some(h) = self.hypothesis_resolution {
            file.hypothesis_resolution = Some(h);
        }
        if let Some(m) = self.truncation_degree {
            file.truncation_degree = Some(m);
        }
        if let Some(t) = self.tol_hypothesis {
            file.tolerances
                .get_or_insert_with(Default::default)
                .hypothesis = Some(t);
        }
        if let Some(t) = self.tol_conclusion {
            file.tolerances
                .get_or_insert_with(Default::default)
                .conclusion = Some(t);
        }
        if let Some(s) = self.seed {
            file.seed = Some(s);
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    /// Scenario JSON file ("schema": "bp/1").
    file: PathBuf,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print per-check detail.
    #[arg(short, long)]
    verbose: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct PdTestArgs {
    /// PD-test spec JSON: {"n": 4, "body": {...}, optional "resolution",
    /// "truncation_degree", "tol", "tail_threshold"}.
    file: PathBuf,
}

#[derive(Args)]
struct SectionProfileArgs {
    /// Scenario JSON file.
    file: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Hyperplane-grid resolution (defaults to the scenario's).
    #[arg(long)]
    xi_resolution: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ExampleArgs {
    /// Builtin id.
    id: String,
    /// Perturbation size for example-3.3.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print per-check detail.
    #[arg(short, long)]
    verbose: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Monte-Carlo measure of one region of K \ L or L \ K.
    Region(OracleRegionArgs),
    /// Monte-Carlo sectional measure in a hyperplane.
    Section(OracleSectionArgs),
    /// Distributional Fourier-transform estimate of a body's radial
    /// function; prints summary statistics of the sampled density.
    Ft(OracleFtArgs),
}

#[derive(Args)]
struct OracleRegionArgs {
    /// Scenario JSON file.
    file: PathBuf,
    /// Region: k-minus-l or l-minus-k.
    #[arg(long, default_value = "k-minus-l")]
    region: String,
    /// Sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleSectionArgs {
    /// Scenario JSON file.
    file: PathBuf,
    /// Hyperplane normal, comma-separated (e.g. 0,0,1).
    #[arg(long)]
    xi: String,
    /// Region: k-minus-l or l-minus-k.
    #[arg(long, default_value = "k-minus-l")]
    region: String,
    /// Sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleFtArgs {
    /// PD-test spec JSON (same format as pd-test).
    file: PathBuf,
    /// Gaussian test-function scale, in [0.1, 10].
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

/// Spec for `pd-test` and `oracle ft`: the tested sphere function is the
/// radial function of `body` in dimension `n`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdTestSpec {
    n: usize,
    body: BodySpec,
    #[serde(default)]
    resolution: Option<usize>,
    #[serde(default)]
    truncation_degree: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    tail_threshold: Option<f64>,
    #[serde(default)]
    tail_margin: Option<f64>,
}

fn init_threads() {
    if let Ok(v) = std::env::var("BP_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::PdTest(args) => cmd_pd_test(&args),
        Command::SectionProfile(args) => cmd_section_profile(&args),
        Command::Example(args) => cmd_example(&args),
        Command::Oracle(cmd) => cmd_oracle(&cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read_scenario(path: &Path) -> anyhow::Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(parse_scenario(&text)?)
}

fn verdict_exit_code(report: &VerificationReport) -> u8 {
    match report.verdict.as_str() {
        "theorem instance verified" | "vacuous" => 0,
        "positive definiteness inconclusive" | "not positive definite"
        | "decomposition invalid" => 2,
        "hypothesis not satisfied" => 3,
        _ => 4,
    }
}

fn run_and_report(
    file: &ScenarioFile,
    out: Option<&Path>,
    verbose: bool,
) -> anyhow::Result<u8> {
    let (scenario, resolved) = resolve(file)?;
    let report = run_scenario(&scenario)?;
    if let Some(path) = out {
        let value = report_to_value(&resolved, &report)?;
        std::fs::write(path, canonical_json(&value))
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    }
    if verbose {
        println!("hypothesis: ok={} min_margin={:.6e}", report.hypothesis_ok, report.min_margin);
        println!(
            "decomposition: ok={} violations={}",
            report.decomposition_ok,
            report.decomposition_violations.len()
        );
        println!("endpoint bound: ok={}", report.endpoint_bound_ok);
        println!(
            "positive definiteness: {} min_value={:.6e} tail_energy={:.3e} tail_margin={:.3e}",
            report.pd_report.verdict.as_str(),
            report.pd_report.min_value,
            report.pd_report.tail_energy,
            report.pd_report.tail_margin
        );
        println!(
            "conclusion: lhs={:.9e} rhs={:.9e} ok={}",
            report.conclusion_lhs, report.conclusion_rhs, report.conclusion_ok
        );
    }
    println!("verdict: {}", report.verdict);
    Ok(verdict_exit_code(&report))
}

fn cmd_check(args: &CheckArgs) -> anyhow::Result<u8> {
    let mut file = read_scenario(&args.file)?;
    args.overrides.apply(&mut file);
    run_and_report(&file, args.out.as_deref(), args.verbose)
}

fn cmd_example(args: &ExampleArgs) -> anyhow::Result<u8> {
    let mut file = match args.epsilon {
        Some(eps) => {
            let canon_is_33 = matches!(args.id.as_str(), "example-3.3" | "3.3");
            if !canon_is_33 {
                anyhow::bail!("--epsilon only applies to example-3.3");
            }
            mixed_power_scenario(eps)?
        }
        None => builtin_scenario(&args.id)?,
    };
    args.overrides.apply(&mut file);
    run_and_report(&file, args.out.as_deref(), args.verbose)
}

fn cmd_pd_test(args: &PdTestArgs) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", args.file.display()))?;
    let spec: PdTestSpec = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("pd-test spec parse failed: {e}"))?;
    let body = scenario::body_from_spec(&spec.body, spec.n, spec.resolution.unwrap_or(16))?;
    let max_degree = spec.truncation_degree.unwrap_or(8);
    let resolution = spec.resolution.unwrap_or(16).max(max_degree + 1);
    let defaults = PdSettings::default();
    let settings = PdSettings {
        tol_pd: spec.tol.unwrap_or(defaults.tol_pd),
        tail_threshold: spec.tail_threshold.unwrap_or(defaults.tail_threshold),
        tail_margin: spec.tail_margin,
    };
    let quad = build_sphere_quadrature(spec.n, resolution, Scheme::ProductGauss)?;
    let report = pd_test(
        |v: &Direction| radial_eval(&body, v).unwrap_or(f64::NAN),
        max_degree,
        &quad,
        &settings,
    )?;
    println!(
        "verdict: {}\nmin_value: {:.9e}\ntail_energy: {:.6e}\nscale: {:.6e}\ntail_margin: {:.6e}",
        report.verdict.as_str(),
        report.min_value,
        report.tail_energy,
        report.scale,
        report.tail_margin
    );
    Ok(match report.verdict {
        PdVerdict::PositiveDefinite => 0,
        _ => 2,
    })
}

fn cmd_section_profile(args: &SectionProfileArgs) -> anyhow::Result<u8> {
    let mut file = read_scenario(&args.file)?;
    args.overrides.apply(&mut file);
    if let Some(r) = args.xi_resolution {
        file.hypothesis_resolution = Some(r);
    }
    let (scenario, _) = resolve(&file)?;
    let grid = build_sphere_quadrature(
        scenario.n,
        scenario.hypothesis_resolution,
        scenario.scheme,
    )?;
    let xis = representative_directions(&grid);
    let rule = RadialRule::new(scenario.radial_order);
    let (margins, _) = engine::verify_hypothesis(&scenario, &xis, &rule)?;
    let mut csv = String::from("index");
    for i in 0..scenario.n {
        csv.push_str(&format!(",xi_{}", i + 1));
    }
    csv.push_str(",margin\n");
    for (i, (xi, margin)) in xis.iter().zip(&margins).enumerate() {
        csv.push_str(&i.to_string());
        for c in xi.coords() {
            csv.push_str(&format!(",{c:.16e}"));
        }
        csv.push_str(&format!(",{margin:.16e}\n"));
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", args.out.display()))?;
    println!("wrote {} margins to {}", margins.len(), args.out.display());
    Ok(0)
}

fn parse_region(s: &str) -> anyhow::Result<RegionTag> {
    match s {
        "k-minus-l" => Ok(RegionTag::KMinusL),
        "l-minus-k" => Ok(RegionTag::LMinusK),
        other => anyhow::bail!("unknown region \"{other}\" (expected k-minus-l or l-minus-k)"),
    }
}

fn cmd_oracle(cmd: &OracleCommand) -> anyhow::Result<u8> {
    match cmd {
        OracleCommand::Region(args) => {
            let file = read_scenario(&args.file)?;
            let (scenario, _) = resolve(&file)?;
            let region = parse_region(&args.region)?;
            let density = oracle_density(&scenario, region);
            let est = oracles::mc_region_measure(
                region,
                density,
                &scenario.k,
                &scenario.l,
                args.samples,
                args.seed.unwrap_or(scenario.seed),
            )?;
            println!(
                "value: {:.9e}\nstd_error: {:.3e}\nsamples: {}\nseed: {}",
                est.value, est.std_error, est.samples, est.seed
            );
            Ok(0)
        }
        OracleCommand::Section(args) => {
            let file = read_scenario(&args.file)?;
            let (scenario, _) = resolve(&file)?;
            let region = parse_region(&args.region)?;
            let coords: Vec<f64> = args
                .xi
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| anyhow::anyhow!("bad --xi: {e}"))?;
            let xi = Direction::new(coords)?;
            let density = match region {
                RegionTag::KMinusL => &scenario.densities.f_nm1,
                RegionTag::LMinusK => &scenario.densities.g_nm1,
            };
            let est = oracles::mc_section_measure(
                region,
                density,
                &xi,
                &scenario.k,
                &scenario.l,
                args.samples,
                args.seed.unwrap_or(scenario.seed),
            )?;
            println!(
                "value: {:.9e}\nstd_error: {:.3e}\nsamples: {}\nseed: {}",
                est.value, est.std_error, est.samples, est.seed
            );
            Ok(0)
        }
        OracleCommand::Ft(args) => {
            let text = std::fs::read_to_string(&args.file)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", args.file.display()))?;
            let spec: PdTestSpec = serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("ft spec parse failed: {e}"))?;
            let body = scenario::body_from_spec(&spec.body, spec.n, spec.resolution.unwrap_or(16))?;
            let max_degree = spec.truncation_degree.unwrap_or(8);
            let resolution = spec.resolution.unwrap_or(16).max(max_degree + 1);
            let quad = build_sphere_quadrature(spec.n, resolution, Scheme::ProductGauss)?;
            let values = oracles::distributional_ft_oracle(
                |v: &Direction| radial_eval(&body, v).unwrap_or(f64::NAN),
                args.sigma,
                &quad,
                max_degree,
            )?;
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            println!(
                "nodes: {}\nmin: {:.9e}\nmax: {:.9e}\nmean: {:.9e}",
                values.len(),
                min,
                max,
                mean
            );
            Ok(0)
        }
    }
}

fn oracle_density(scenario: &Scenario, region: RegionTag) -> &bp_core::Density {
    match region {
        RegionTag::KMinusL => &scenario.densities.f_n,
        RegionTag::LMinusK => &scenario.densities.g_n,
    }
}
