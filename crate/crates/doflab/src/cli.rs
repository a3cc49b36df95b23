//! Command-line front end: experiment configuration, orchestration over
//! quality grids, deterministic seeding and CSV/JSON emission.
//!
//! Subcommands:
//! * `region`: achievable-region polygons for quality pairs.
//! * `simulate`: Monte-Carlo rate tables for schemes over an SNR sweep.
//! * `verify`: simulate, fit prelogs and check them against the analytic
//!   DoF targets; exit code 2 when any check fails.
//! * `sweep`: the default quality grid end to end.
//!
//! Exit codes: 0 success, 1 validation or I/O error, 2 reconciliation
//! failure. `DOFLAB_THREADS` caps the Monte-Carlo worker count.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channel::{CsitQuality, SnrPoint};
use crate::dof::{analytic_scheme_dof, region, reconcile, RegionDocument, Verdict};
use crate::error::{Error, Result};
use crate::rational::{fmt_rat, parse_rat, Rat};
use crate::scheme::{
    build_hybrid_case_i, build_hybrid_case_ii, build_mat_reuse, build_sc_zf, build_zfbf,
    case_ii_block_count, Scheme, SchemePlan, User,
};
use crate::sic::{evaluate_sweep, write_rates_csv, EvalParams, RateReport};

/// Output file format for rate tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A fully resolved experiment description. Round-trips through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub qualities: Vec<CsitQuality>,
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub common_owner: User,
    pub tolerance: f64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::NoTrials);
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "SNR list must be strictly increasing".into(),
            ));
        }
        for db in &self.snr_db {
            SnrPoint::from_db(*db)?;
        }
        Ok(())
    }

    pub fn snr_points(&self) -> Result<Vec<SnrPoint>> {
        self.snr_db.iter().map(|db| SnrPoint::from_db(*db)).collect()
    }

    pub fn eval_params(&self) -> EvalParams {
        EvalParams {
            n_trials: self.n_trials,
            seed: self.master_seed,
            ..EvalParams::default()
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "doflab", version, about = "MISO broadcast channel DoF lab")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write the achievable DoF region polygon for quality pairs.
    Region(RegionArgs),
    /// Monte-Carlo simulate per-symbol rates over an SNR sweep.
    Simulate(SimulateArgs),
    /// Simulate, fit per-user DoF and compare against analytic targets.
    Verify(VerifyArgs),
    /// Run the default quality grid: regions, rates and verdicts.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct QualityArgs {
    /// CSIT quality of the reported subbands, e.g. `1/2` or `0.5`.
    /// Comma-separated lists pair up with `--beta` entry by entry.
    #[arg(long, default_value = "0")]
    alpha: String,
    /// CSIT quality of the predicted subbands; requires `alpha <= beta`.
    #[arg(long, default_value = "1")]
    beta: String,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Directory for emitted files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Rate table format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct SimCommon {
    /// Schemes to run: zfbf, mat-reuse, hybrid-i, hybrid-ii, sc-zf
    /// (comma-separated).
    #[arg(long, default_value = "hybrid-i")]
    scheme: String,
    /// Comma-separated SNR sweep in dB, strictly increasing.
    #[arg(long, default_value = "50,65,80", value_name = "DB,DB,...")]
    snr_db: String,
    /// Monte-Carlo trials per SNR point.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Master seed; trial t uses stream t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receiver credited with common messages.
    #[arg(long, value_parser = parse_owner, default_value = "user1")]
    owner: User,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    quality: QualityArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    quality: QualityArgs,
    #[command(flatten)]
    sim: SimCommon,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    quality: QualityArgs,
    #[command(flatten)]
    sim: SimCommon,
    /// Componentwise DoF tolerance for the pass/fail decision.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Monte-Carlo trials per SNR point.
    #[arg(long, default_value_t = 2_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wider than the `verify` default: per-channel-use DoF of the
    /// power-backed-off schemes converges like P^(-beta), so small-beta
    /// grid points need the extra headroom.
    #[arg(long, default_value = "60,90,120", value_name = "DB,DB,...")]
    snr_db: String,
    #[arg(long, default_value_t = 0.1)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_owner(s: &str) -> std::result::Result<User, String> {
    match s.to_ascii_lowercase().as_str() {
        "user1" | "1" => Ok(User::User1),
        "user2" | "2" => Ok(User::User2),
        other => Err(format!("unknown owner `{other}`, expected user1 or user2")),
    }
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    match s.trim().to_ascii_lowercase().as_str() {
        "zfbf" | "zf" => Ok(Scheme::Zfbf),
        "mat-reuse" | "mat" => Ok(Scheme::MatReuse),
        "hybrid-i" | "hybrid1" | "case-i" => Ok(Scheme::HybridCaseI),
        "hybrid-ii" | "hybrid2" | "case-ii" => Ok(Scheme::HybridCaseII),
        "sc-zf" | "sczf" => Ok(Scheme::ScZf),
        other => Err(Error::Config(format!(
            "unknown scheme `{other}`; expected zfbf, mat-reuse, hybrid-i, hybrid-ii or sc-zf"
        ))),
    }
}

fn parse_rat_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(parse_rat).collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse `{t}` as a number")))
        })
        .collect()
}

/// Zips comma lists of alpha and beta into validated quality pairs;
/// singletons broadcast against the longer list.
fn parse_qualities(args: &QualityArgs) -> Result<Vec<CsitQuality>> {
    let alphas = parse_rat_list(&args.alpha)?;
    let betas = parse_rat_list(&args.beta)?;
    let n = alphas.len().max(betas.len());
    if (alphas.len() != n && alphas.len() != 1) || (betas.len() != n && betas.len() != 1) {
        return Err(Error::Config(
            "alpha and beta lists must have equal length (or be single values)".into(),
        ));
    }
    (0..n)
        .map(|i| {
            let a = alphas[i.min(alphas.len() - 1)].clone();
            let b = betas[i.min(betas.len() - 1)].clone();
            CsitQuality::new(a, b)
        })
        .collect()
}

fn slug(r: &Rat) -> String {
    fmt_rat(r).replace('/', "_")
}

fn build_plan(scheme: Scheme, quality: &CsitQuality, owner: User) -> Result<SchemePlan> {
    match scheme {
        Scheme::Zfbf => Ok(build_zfbf(quality)),
        Scheme::MatReuse => build_mat_reuse(quality),
        Scheme::HybridCaseI => build_hybrid_case_i(quality, owner),
        Scheme::HybridCaseII => build_hybrid_case_ii(quality),
        Scheme::ScZf => Ok(build_sc_zf(quality, owner)),
    }
}

/// Writes region JSON and hull CSV per quality pair.
pub fn cmd_region(config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    for quality in &config.qualities {
        let r = region(quality);
        let doc = RegionDocument::from_region(&r);
        let stem = format!("a{}_b{}", slug(quality.alpha()), slug(quality.beta()));
        let json_path = config.out_dir.join(format!("region_{stem}.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(&doc)?)?;
        let mut w = csv::Writer::from_path(config.out_dir.join(format!("hull_{stem}.csv")))?;
        w.write_record(["alpha", "beta", "vertex", "d1", "d2"])?;
        for (i, p) in r.hull.iter().enumerate() {
            w.write_record([
                doc.alpha.as_str(),
                doc.beta.as_str(),
                &i.to_string(),
                &fmt_rat(&p.d1),
                &fmt_rat(&p.d2),
            ])?;
        }
        w.flush()?;
        println!(
            "region alpha={} beta={}: corners {}",
            doc.alpha,
            doc.beta,
            r.corners
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(())
}

fn simulate_one(
    config: &ExperimentConfig,
    scheme: Scheme,
    quality: &CsitQuality,
) -> Result<RateReport> {
    let plan = build_plan(scheme, quality, config.common_owner)?;
    let snrs = config.snr_points()?;
    evaluate_sweep(&plan, &snrs, &config.eval_params())
}

fn write_report(config: &ExperimentConfig, report: &RateReport) -> Result<PathBuf> {
    let stem = format!(
        "rates_{}_a{}_b{}",
        report.scheme.label(),
        slug(&report.alpha),
        slug(&report.beta)
    );
    let path = match config.format {
        OutputFormat::Csv => {
            let path = config.out_dir.join(format!("{stem}.csv"));
            let file = std::fs::File::create(&path)?;
            write_rates_csv(report, file)?;
            path
        }
        OutputFormat::Json => {
            let path = config.out_dir.join(format!("{stem}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(report)?)?;
            path
        }
    };
    Ok(path)
}

/// Runs the Monte-Carlo sweep for every (scheme, quality) combination and
/// writes one rate table per combination. Deterministic under a fixed seed.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    let mut written = Vec::new();
    for quality in &config.qualities {
        for scheme in &config.schemes {
            // Surface the nearest valid qualities when case II has a
            // fractional block count.
            if *scheme == Scheme::HybridCaseII {
                case_ii_block_count(quality)?;
            }
            let report = simulate_one(config, *scheme, quality)?;
            let path = write_report(config, &report)?;
            println!(
                "simulated {} alpha={} beta={} -> {}",
                scheme.label(),
                fmt_rat(quality.alpha()),
                fmt_rat(quality.beta()),
                path.display()
            );
            written.push(path);
        }
    }
    Ok(written)
}

fn write_verdicts(path: &Path, verdicts: &[Verdict]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "scheme",
        "alpha",
        "beta",
        "fitted_d1",
        "fitted_d2",
        "target_d1",
        "target_d2",
        "residual_d1",
        "residual_d2",
        "tolerance",
        "pass",
    ])?;
    for v in verdicts {
        w.write_record([
            v.scheme.label(),
            &fmt_rat(&v.alpha),
            &fmt_rat(&v.beta),
            &format!("{:.6}", v.fitted[0]),
            &format!("{:.6}", v.fitted[1]),
            &format!("{:.6}", v.target[0]),
            &format!("{:.6}", v.target[1]),
            &format!("{:.6}", v.residual[0]),
            &format!("{:.6}", v.residual[1]),
            &format!("{}", v.tolerance),
            if v.pass { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Simulates, fits per-user DoF and compares with the analytic targets.
/// Returns the verdicts; callers decide the exit code.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<Vec<Verdict>> {
    config.validate()?;
    if config.snr_db.len() < 3 {
        return Err(Error::TooFewSnrPoints(config.snr_db.len()));
    }
    std::fs::create_dir_all(&config.out_dir)?;
    let mut verdicts = Vec::new();
    for quality in &config.qualities {
        for scheme in &config.schemes {
            let analytic = analytic_scheme_dof(*scheme, quality, config.common_owner)?;
            let report = simulate_one(config, *scheme, quality)?;
            write_report(config, &report)?;
            let v = reconcile(&report, &analytic.point, config.tolerance)?;
            println!("{v}");
            verdicts.push(v);
        }
    }
    write_verdicts(&config.out_dir.join("verdicts.csv"), &verdicts)?;
    Ok(verdicts)
}

/// Default quality grid: beta in {1/3, 1/2, 2/3, 1} crossed with
/// alpha in {0, beta/2, beta}, each point run through `region` and
/// `verify` for every scheme that applies there.
pub fn default_grid() -> Vec<CsitQuality> {
    let mut out = Vec::new();
    for bden in [(1i64, 3i64), (1, 2), (2, 3), (1, 1)] {
        let beta = crate::rational::rat(bden.0, bden.1);
        let halves = [
            crate::rational::rint(0),
            &beta / crate::rational::rint(2),
            beta.clone(),
        ];
        for alpha in halves {
            let q = CsitQuality::new(alpha, beta.clone()).expect("grid is valid");
            if !out.contains(&q) {
                out.push(q);
            }
        }
    }
    out
}

fn applicable_schemes(quality: &CsitQuality) -> Vec<Scheme> {
    use num::Zero;
    let mut out = Vec::new();
    if !quality.beta().is_zero() {
        out.push(Scheme::Zfbf);
        out.push(Scheme::MatReuse);
    }
    out.push(Scheme::ScZf);
    let thr = (crate::rational::rint(2) + quality.alpha()) / crate::rational::rint(3);
    if quality.beta() <= &thr {
        out.push(Scheme::HybridCaseI);
    } else if case_ii_block_count(quality).is_ok() {
        out.push(Scheme::HybridCaseII);
    }
    out
}

/// Full default-grid run. Returns all verdicts.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<Vec<Verdict>> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    let mut verdicts = Vec::new();
    for quality in default_grid() {
        let mut point_config = config.clone();
        point_config.qualities = vec![quality.clone()];
        cmd_region(&point_config)?;
        point_config.schemes = applicable_schemes(&quality);
        verdicts.extend(cmd_verify(&point_config)?);
    }
    write_verdicts(&config.out_dir.join("verdicts.csv"), &verdicts)?;
    Ok(verdicts)
}

fn config_from(
    qualities: Vec<CsitQuality>,
    schemes: Vec<Scheme>,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
    owner: User,
    tol: f64,
    output: &OutputArgs,
) -> ExperimentConfig {
    ExperimentConfig {
        schemes,
        qualities,
        snr_db,
        n_trials: trials,
        master_seed: seed,
        common_owner: owner,
        tolerance: tol,
        out_dir: output.out_dir.clone(),
        format: output.format,
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Cmd::Region(args) => {
            let config = config_from(
                parse_qualities(&args.quality)?,
                Vec::new(),
                vec![50.0, 65.0, 80.0],
                1,
                0,
                User::User1,
                0.05,
                &args.output,
            );
            cmd_region(&config)?;
            Ok(true)
        }
        Cmd::Simulate(args) => {
            let schemes = args
                .sim
                .scheme
                .split(',')
                .map(parse_scheme)
                .collect::<Result<_>>()?;
            let config = config_from(
                parse_qualities(&args.quality)?,
                schemes,
                parse_f64_list(&args.sim.snr_db)?,
                args.sim.trials,
                args.sim.seed,
                args.sim.owner,
                0.05,
                &args.output,
            );
            cmd_simulate(&config)?;
            Ok(true)
        }
        Cmd::Verify(args) => {
            let schemes = args
                .sim
                .scheme
                .split(',')
                .map(parse_scheme)
                .collect::<Result<_>>()?;
            let config = config_from(
                parse_qualities(&args.quality)?,
                schemes,
                parse_f64_list(&args.sim.snr_db)?,
                args.sim.trials,
                args.sim.seed,
                args.sim.owner,
                args.tol,
                &args.output,
            );
            let verdicts = cmd_verify(&config)?;
            Ok(verdicts.iter().all(|v| v.pass))
        }
        Cmd::Sweep(args) => {
            let config = config_from(
                default_grid(),
                Vec::new(),
                parse_f64_list(&args.snr_db)?,
                args.trials,
                args.seed,
                User::User1,
                args.tol,
                &args.output,
            );
            let verdicts = cmd_sweep(&config)?;
            Ok(verdicts.iter().all(|v| v.pass))
        }
    }
}

/// CLI entry point. Returns the process exit code.
pub fn run() -> i32 {
    if let Ok(threads) = std::env::var("DOFLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            1
        }
    }
}
