//! Command-line interface: `estimate`, `audit`, `calibrate`, and `gen`.
//!
//! Each command prints a human-readable summary on stdout and can write a
//! full machine-readable report with `--out` (JSON by default, CSV via
//! `--format csv`). Console numbers are rounded to four decimal places;
//! reports carry full precision. Exit codes: 0 success, 1 usage errors,
//! 2 data or file errors, 3 numeric failures.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{run_audit, AuditGrid, AuditOptions};
use crate::data::{
    load_attributes_csv, load_feature_matrix, parse_manifest, standardize_features, AttributeKind,
    AttributeVector, FeatureFormat, FeatureMatrix, Standardized, write_attributes_csv,
};
use crate::error::{Error, Result};
use crate::expressivity::{
    compute_expressivity, compute_expressivity_parallel, format_ranking, rank_attributes,
    ExpressivityResult,
};
use crate::mine::MineConfig;
use crate::oracle::{gen_binary_channel, gen_correlated_gaussian, gen_embedded_signal};
use crate::report::{
    input_digest, to_json_pretty, AuditReport, CalibrationCase, CalibrationReport, EstimateReport,
    GenMeta, TOOL_VERSION,
};

/// Environment variable consulted for a default base seed.
pub const SEED_ENV_VAR: &str = "EXPRESSIVITY_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "expressivity",
    version,
    about = "Quantifies how much information embeddings leak about individual attributes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the expressivity of one feature file for one attribute.
    Estimate(EstimateArgs),
    /// Score a grid of feature files against attributes from a manifest.
    Audit(AuditArgs),
    /// Check the estimator against synthetic cases with known answers.
    Calibrate(CalibrateArgs),
    /// Generate a synthetic dataset with a known ground truth.
    Gen(GenArgs),
}

/// Flags shared by the estimating commands.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Base seed; overrides the EXPRESSIVITY_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    /// Estimator runs averaged per estimate.
    #[arg(long)]
    runs: Option<usize>,
    /// Minibatch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Hard cap on training iterations.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Worker threads for independent runs and cells; training itself is
    /// always single-threaded.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the full report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the --out report.
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Values must be exactly 0 or 1.
    Binary,
    /// Any finite real values.
    Continuous,
}

impl From<KindArg> for AttributeKind {
    fn from(kind: KindArg) -> AttributeKind {
        match kind {
            KindArg::Binary => AttributeKind::Binary,
            KindArg::Continuous => AttributeKind::Continuous,
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Feature file (.fbin or .csv).
    features: PathBuf,
    /// Attribute file: one numeric value per line.
    attributes: PathBuf,
    /// Encoding of the attribute column.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Attribute name for reports; defaults to the attribute file stem.
    #[arg(long)]
    name: Option<String>,
    /// Attribute units, recorded in reports.
    #[arg(long, default_value = "")]
    units: String,
    /// Skip feature standardization.
    #[arg(long)]
    no_standardize: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Audit manifest (TOML).
    manifest: PathBuf,
    /// Record failing cells in the grid instead of aborting on the first.
    #[arg(long)]
    keep_going: bool,
    /// Skip feature standardization even if the manifest enables it.
    #[arg(long)]
    no_standardize: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Smaller datasets and fewer cases; finishes in well under two
    /// minutes.
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    generator: GeneratorArg,
}

#[derive(Debug, Subcommand)]
enum GeneratorArg {
    /// Bivariate Gaussian pair with correlation rho.
    Gaussian {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        out: GenOutArgs,
    },
    /// Gaussian signal embedded in an m-dimensional feature vector.
    Embedded {
        #[arg(long, default_value_t = 5_000)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        out: GenOutArgs,
    },
    /// Binary symmetric channel with flip probability p.
    Channel {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: GenOutArgs,
    },
}

#[derive(Debug, Args)]
struct GenOutArgs {
    /// Output path prefix; writes <prefix>.fbin, <prefix>.attrs.csv, and
    /// <prefix>.meta.json.
    #[arg(long)]
    out_prefix: PathBuf,
    /// Generator seed; overrides the EXPRESSIVITY_SEED environment
    /// variable.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses the process arguments, runs the selected command, and returns
/// the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

/// Seed from the environment variable, if set; a set but malformed value
/// is a usage error rather than being silently ignored.
fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text.trim().parse::<u64>().map(Some).map_err(|_| {
            Error::Usage(format!(
                "{SEED_ENV_VAR} must be a non-negative integer, got {text:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Usage(format!(
            "{SEED_ENV_VAR} is not valid unicode"
        ))),
    }
}

/// Default estimator configuration with the command-line overrides and
/// `seed` applied.
fn build_config(common: &CommonArgs, seed: u64) -> MineConfig {
    let mut cfg = MineConfig { seed, ..MineConfig::default() };
    if let Some(batch) = common.batch_size {
        cfg.batch_size = batch;
    }
    if let Some(lr) = common.lr {
        cfg.learning_rate = lr;
    }
    if let Some(cap) = common.max_iters {
        cfg.max_iterations = cap;
    }
    cfg
}

/// Runs `work` on a dedicated pool of `threads` workers, or inline when a
/// single thread is requested.
fn with_thread_pool<T: Send>(
    threads: usize,
    work: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    if threads == 0 {
        return Err(Error::Usage("--threads must be at least 1".into()));
    }
    if threads == 1 {
        return work();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("could not build a {threads}-thread pool: {e}")))?;
    pool.install(work)
}

/// Writes `report` to `path` in the requested format.
fn write_report<T: serde::Serialize>(
    path: &Path,
    format: ReportFormat,
    report: &T,
    to_csv: impl Fn(&T) -> String,
) -> Result<()> {
    let body = match format {
        ReportFormat::Json => to_json_pretty(report)?,
        ReportFormat::Csv => to_csv(report),
    };
    std::fs::write(path, body).map_err(|e| Error::io(path.display(), e))?;
    Ok(())
}

/// Left-pads or right-pads cells so columns line up; `right_align[i]`
/// selects the padding side of column `i`.
fn render_table(headers: &[&str], rows: &[Vec<String>], right_align: &[bool]) -> String {
    let cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: Vec<&str>| {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let pad = " ".repeat(widths[i].saturating_sub(cell.len()));
            if right_align.get(i).copied().unwrap_or(false) {
                out.push_str(&pad);
                out.push_str(cell);
            } else {
                out.push_str(cell);
                // No trailing spaces after the last column.
                if i + 1 < cols {
                    out.push_str(&pad);
                }
            }
        }
        out.push('\n');
    };
    push_row(headers.to_vec());
    for row in rows {
        push_row(row.iter().map(String::as_str).collect());
    }
    out
}

fn loaded_features(path: &Path) -> Result<FeatureMatrix> {
    load_feature_matrix(path, FeatureFormat::from_path(path))
}

/// Standardizes unless suppressed; returns the features to train on plus
/// the constant columns found (empty when standardization is off).
fn prepare_features(
    f: FeatureMatrix,
    standardize: bool,
) -> Result<(FeatureMatrix, Vec<usize>, bool)> {
    if standardize {
        let Standardized {
            matrix,
            constant_columns,
        } = standardize_features(&f)?;
        Ok((matrix, constant_columns, true))
    } else {
        Ok((f, Vec::new(), false))
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let seed = match args.common.seed {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(0),
    };
    let cfg = build_config(&args.common, seed);
    let runs = args.common.runs.unwrap_or(5);
    let name = match &args.name {
        Some(name) => name.clone(),
        None => args
            .attributes
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "attribute".to_string()),
    };

    let features = loaded_features(&args.features)?;
    let attributes = load_attributes_csv(&args.attributes, &name, args.kind.into(), &args.units)?;
    let (features, constant_columns, standardized) =
        prepare_features(features, !args.no_standardize)?;

    let threads = args.common.threads;
    let result = with_thread_pool(threads, || {
        if threads > 1 {
            compute_expressivity_parallel(&features, &attributes, runs, &cfg)
        } else {
            compute_expressivity(&features, &attributes, runs, &cfg)
        }
    })?;

    print_estimate(&result, &cfg);

    if let Some(out) = &args.common.out {
        let inputs = vec![
            input_digest(&args.features)?,
            input_digest(&args.attributes)?,
        ];
        let report = EstimateReport::new(cfg, standardized, constant_columns, inputs, result);
        write_report(out, args.common.format, &report, EstimateReport::to_csv)?;
        println!("report written to {}", out.display());
    }
    Ok(0)
}

fn print_estimate(result: &ExpressivityResult, cfg: &MineConfig) {
    println!("attribute:     {}", result.attribute_name);
    println!("runs:          {}", result.runs);
    println!("mean:          {:.4} nats", result.mean);
    println!("run std:       {:.4}", result.run_std());
    let values: Vec<String> = result.run_values.iter().map(|v| format!("{v:.4}")).collect();
    println!("run values:    {}", values.join(" "));
    println!("base seed:     {}", cfg.seed);
    println!("config digest: {}", result.config_digest);
}

fn cmd_audit(args: AuditArgs) -> Result<i32> {
    let mut manifest = parse_manifest(&args.manifest)?;
    if args.no_standardize {
        manifest.standardize = false;
    }
    let seed = match args.common.seed {
        Some(seed) => Some(seed),
        None => manifest.base_seed.or(env_seed()?),
    };
    let cfg = build_config(&args.common, seed.unwrap_or(0));
    let runs = args.common.runs.unwrap_or(5);
    let options = AuditOptions {
        keep_going: args.keep_going,
        parallel_cells: args.common.threads > 1,
        seed_override: seed,
    };

    let threads = args.common.threads;
    let grid = with_thread_pool(threads, || run_audit(&manifest, runs, &cfg, &options))?;

    print_audit(&grid);

    if let Some(out) = &args.common.out {
        let mut inputs = vec![input_digest(&args.manifest)?];
        let mut seen: Vec<PathBuf> = Vec::new();
        for cell in &manifest.cells {
            let mut paths: Vec<&PathBuf> = vec![&cell.features];
            paths.extend(cell.attributes.iter().map(|a| &a.path));
            for path in paths {
                if !seen.contains(path) {
                    seen.push(path.clone());
                    match input_digest(path) {
                        Ok(digest) => inputs.push(digest),
                        // An unreadable input under --keep-going is already
                        // recorded as its cell's error; the report must still
                        // be written.
                        Err(_) if args.keep_going => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        let report = AuditReport::from_grid(&grid, cfg, inputs)?;
        write_report(out, args.common.format, &report, AuditReport::to_csv)?;
        println!("report written to {}", out.display());
    }

    // With --keep-going the grid still prints, but recorded failures make
    // the exit code nonzero. Cell errors already name their cell.
    for cell in &grid.cells {
        if let Err(e) = &cell.outcome {
            eprintln!("{e}");
        }
    }
    match grid.first_error() {
        Some(e) => Ok(e.exit_code()),
        None => Ok(0),
    }
}

fn print_audit(grid: &AuditGrid) {
    println!(
        "model: {}  base seed: {}  standardized: {}",
        grid.model_label, grid.base_seed, grid.standardized
    );
    println!();
    let attributes = grid.attributes();
    let mut headers = vec!["tag"];
    headers.extend(attributes.iter().copied());
    let mut rows = Vec::new();
    for tag in grid.tags() {
        let mut row = vec![tag.to_string()];
        for attr in &attributes {
            let cell = grid
                .cells
                .iter()
                .find(|c| c.tag == tag && c.attribute == *attr);
            row.push(match cell {
                Some(cell) => match &cell.outcome {
                    Ok(result) => format!("{:.4}", result.mean),
                    Err(_) => "error".to_string(),
                },
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }
    let mut right = vec![false];
    right.resize(headers.len(), true);
    print!("{}", render_table(&headers, &rows, &right));
    println!();
    for tag in grid.tags() {
        let scores = grid.scores_for_tag(tag);
        if scores.is_empty() {
            continue;
        }
        if let Ok(ranked) = rank_attributes(&scores) {
            println!("ranking {}: {}", tag, format_ranking(&ranked));
        }
    }
}

/// How one calibration case generates its data.
#[derive(Debug, Clone, Copy)]
enum CaseData {
    Gaussian { rho: f64 },
    Embedded { m: usize, rho: f64 },
    Channel { p_flip: f64 },
}

/// One entry of the calibration suite: a generator, an estimator budget,
/// and a pass tolerance.
#[derive(Debug, Clone)]
struct CaseSpec {
    name: String,
    data: CaseData,
    n: usize,
    data_seed: u64,
    runs: usize,
    max_iterations: usize,
    tolerance: f64,
}

impl CaseSpec {
    fn m(&self) -> usize {
        match self.data {
            CaseData::Embedded { m, .. } => m,
            _ => 1,
        }
    }

    fn generate(&self) -> Result<(FeatureMatrix, AttributeVector, f64)> {
        match self.data {
            CaseData::Gaussian { rho } => gen_correlated_gaussian(self.n, rho, self.data_seed),
            CaseData::Embedded { m, rho } => {
                gen_embedded_signal(self.n, m, rho, self.data_seed)
            }
            CaseData::Channel { p_flip } => gen_binary_channel(self.n, p_flip, self.data_seed),
        }
    }
}

/// The default calibration suite. Gaussian and channel cases run with the
/// stock configuration; wide embedded cases carry deliberate iteration
/// budgets because a 512-unit critic trained further starts memorizing
/// n = 5000 samples and overshoots the true value.
fn full_suite() -> Vec<CaseSpec> {
    let gaussian = |rho: f64, data_seed: u64| CaseSpec {
        name: format!("gaussian rho={rho}"),
        data: CaseData::Gaussian { rho },
        n: 10_000,
        data_seed,
        runs: 5,
        max_iterations: 5_000,
        tolerance: 0.05,
    };
    let embedded = |m: usize, cap: usize, data_seed: u64| CaseSpec {
        name: format!("embedded m={m} rho=0.8"),
        data: CaseData::Embedded { m, rho: 0.8 },
        n: 5_000,
        data_seed,
        runs: 3,
        max_iterations: cap,
        tolerance: 0.10,
    };
    let channel = |p_flip: f64, data_seed: u64| CaseSpec {
        name: format!("channel p={p_flip}"),
        data: CaseData::Channel { p_flip },
        n: 10_000,
        data_seed,
        runs: 5,
        max_iterations: 5_000,
        tolerance: 0.05,
    };
    vec![
        gaussian(0.0, 2),
        gaussian(0.3, 3),
        gaussian(0.6, 4),
        gaussian(0.8, 1),
        gaussian(0.9, 5),
        embedded(8, 5_000, 8),
        embedded(128, 500, 7),
        embedded(1536, 600, 6),
        channel(0.5, 16),
        channel(0.25, 14),
        channel(0.1, 9),
        channel(0.0, 13),
    ]
}

/// The `--quick` suite: n = 2000, two runs per case, tight iteration
/// budgets. Finishes in seconds; tolerances are relaxed to 0.10.
fn quick_suite() -> Vec<CaseSpec> {
    vec![
        CaseSpec {
            name: "gaussian rho=0.8".to_string(),
            data: CaseData::Gaussian { rho: 0.8 },
            n: 2_000,
            data_seed: 10,
            runs: 2,
            max_iterations: 400,
            tolerance: 0.10,
        },
        CaseSpec {
            name: "gaussian rho=0.0".to_string(),
            data: CaseData::Gaussian { rho: 0.0 },
            n: 2_000,
            data_seed: 15,
            runs: 2,
            max_iterations: 400,
            tolerance: 0.10,
        },
        CaseSpec {
            name: "embedded m=128 rho=0.8".to_string(),
            data: CaseData::Embedded { m: 128, rho: 0.8 },
            n: 2_000,
            data_seed: 11,
            runs: 2,
            max_iterations: 200,
            tolerance: 0.10,
        },
        CaseSpec {
            name: "channel p=0.1".to_string(),
            data: CaseData::Channel { p_flip: 0.1 },
            n: 2_000,
            data_seed: 12,
            runs: 2,
            max_iterations: 400,
            tolerance: 0.10,
        },
    ]
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<i32> {
    let seed = match args.common.seed {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(0),
    };
    let base_cfg = build_config(&args.common, seed);
    let suite = if args.quick { quick_suite() } else { full_suite() };

    let threads = args.common.threads;
    let mut cases: Vec<CalibrationCase> = Vec::new();
    let mut first_error: Option<Error> = None;
    for spec in &suite {
        let cfg = MineConfig {
            max_iterations: args.common.max_iters.unwrap_or(spec.max_iterations),
            ..base_cfg.clone()
        };
        let runs = args.common.runs.unwrap_or(spec.runs);
        let outcome = calibrate_case(spec, runs, &cfg, threads);
        match outcome {
            Ok(case) => cases.push(case),
            Err(e) => {
                let message = e.to_string();
                if first_error.is_none() {
                    first_error = Some(e);
                }
                cases.push(CalibrationCase {
                    name: spec.name.clone(),
                    n: spec.n,
                    m: spec.m(),
                    runs,
                    max_iterations: cfg.max_iterations,
                    true_mi: f64::NAN,
                    estimate: None,
                    abs_error: None,
                    tolerance: spec.tolerance,
                    passed: false,
                    error: Some(message),
                });
            }
        }
    }

    let report = CalibrationReport::new(args.quick, base_cfg, cases);
    print_calibration(&report);
    if let Some(out) = &args.common.out {
        write_report(out, args.common.format, &report, CalibrationReport::to_csv)?;
        println!("report written to {}", out.display());
    }

    if let Some(e) = first_error {
        eprintln!("{e}");
        return Ok(e.exit_code());
    }
    if report.all_passed {
        Ok(0)
    } else {
        eprintln!("calibration failed: at least one case exceeded its tolerance");
        Ok(3)
    }
}

fn calibrate_case(
    spec: &CaseSpec,
    runs: usize,
    cfg: &MineConfig,
    threads: usize,
) -> Result<CalibrationCase> {
    let (features, attributes, true_mi) = spec.generate()?;
    let (features, _, _) = prepare_features(features, true)?;
    let result = with_thread_pool(threads, || {
        if threads > 1 {
            compute_expressivity_parallel(&features, &attributes, runs, cfg)
        } else {
            compute_expressivity(&features, &attributes, runs, cfg)
        }
    })
    .map_err(|e| e.with_context(format!("case {}", spec.name)))?;
    let abs_error = (result.mean - true_mi).abs();
    Ok(CalibrationCase {
        name: spec.name.clone(),
        n: spec.n,
        m: spec.m(),
        runs,
        max_iterations: cfg.max_iterations,
        true_mi,
        estimate: Some(result.mean),
        abs_error: Some(abs_error),
        tolerance: spec.tolerance,
        passed: abs_error <= spec.tolerance,
    error: None,
    })
}

fn print_calibration(report: &CalibrationReport) {
    let headers = [
        "case",
        "n",
        "m",
        "true_mi",
        "estimate",
        "abs_err",
        "tol",
        "verdict",
    ];
    let rows: Vec<Vec<String>> = report
        .cases
        .iter()
        .map(|case| {
            let verdict = if case.error.is_some() {
                "error"
            } else if case.passed {
                "pass"
            } else {
                "fail"
            };
            vec![
                case.name.clone(),
                case.n.to_string(),
                case.m.to_string(),
                if case.true_mi.is_nan() {
                    "-".to_string()
                } else {
                    format!("{:.4}", case.true_mi)
                },
                case.estimate
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".to_string()),
                case.abs_error
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".to_string()),
                format!("{:.2}", case.tolerance),
                verdict.to_string(),
            ]
        })
        .collect();
    let mut right = vec![false];
    right.resize(headers.len() - 1, true);
    right.push(false);
    print!("{}", render_table(&headers, &rows, &right));
    let passed = report.cases.iter().filter(|c| c.passed).count();
    println!("{passed}/{} cases passed", report.cases.len());
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let (out, seed_flag) = match &args.generator {
        GeneratorArg::Gaussian { out, .. }
        | GeneratorArg::Embedded { out, .. }
        | GeneratorArg::Channel { out, .. } => (out.out_prefix.clone(), out.seed),
    };
    let seed = match seed_flag {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(0),
    };

    let (features, attributes, true_mi, generator, n, m, rho, p_flip) = match args.generator {
        GeneratorArg::Gaussian { n, rho, .. } => {
            let (f, a, mi) = gen_correlated_gaussian(n, rho, seed)?;
            (f, a, mi, "gaussian", n, 1, Some(rho), None)
        }
        GeneratorArg::Embedded { n, m, rho, .. } => {
            let (f, a, mi) = gen_embedded_signal(n, m, rho, seed)?;
            (f, a, mi, "embedded", n, m, Some(rho), None)
        }
        GeneratorArg::Channel { n, p, .. } => {
            let (f, a, mi) = gen_binary_channel(n, p, seed)?;
            (f, a, mi, "channel", n, 1, None, Some(p))
        }
    };

    let features_path = path_with_suffix(&out, ".fbin");
    let attributes_path = path_with_suffix(&out, ".attrs.csv");
    let meta_path = path_with_suffix(&out, ".meta.json");

    crate::data::write_feature_matrix(&features, &features_path)?;
    write_attributes_csv(&attributes, &attributes_path)?;
    let meta = GenMeta {
        tool_version: TOOL_VERSION.to_string(),
        generator: generator.to_string(),
        n,
        m,
        rho,
        p_flip,
        seed,
        true_mi,
        features_path: features_path.display().to_string(),
        attributes_path: attributes_path.display().to_string(),
        attribute_name: attributes.name.clone(),
        attribute_kind: attributes.kind.to_string(),
    };
    std::fs::write(&meta_path, to_json_pretty(&meta)?)
        .map_err(|e| Error::io(meta_path.display(), e))?;

    println!("wrote features:   {} (n={n}, m={m})", features_path.display());
    println!("wrote attributes: {}", attributes_path.display());
    println!("wrote metadata:   {}", meta_path.display());
    println!("true MI: {true_mi:.4} nats");
    Ok(0)
}

/// `prefix` with `suffix` appended to the file name.
fn path_with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    prefix.with_file_name(name)
}
