//! `kieval` command line: `evaluate`, `sweep`, `validate`.
//!
//! Exit codes: 0 success, 1 validation findings, 2 input or usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::evaluate::{evaluate_pairs, match_pairs, EvaluateOptions};
use crate::ingest::{pair_documents, parse_dataset, DatasetFile};
use crate::model::{validate_document, EvalConfig, MissingDocPolicy, Normalization, TauGrid};
use crate::report::{render_csv, render_json, render_table, InputDigest, RunManifest};
use crate::rpa::{knee, sweep, write_curve_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kieval",
    version,
    about = "Group-aware evaluation for key information extraction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Confidence-threshold review sweep; writes a CSV curve.
    Sweep(SweepArgs),
    /// Check a dataset file against the schema and document invariants.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MissingDoc {
    Error,
    Empty,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Ground-truth dataset file.
    #[arg(long)]
    pub gt: PathBuf,
    /// Prediction dataset file.
    #[arg(long)]
    pub pred: PathBuf,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[arg(long, value_enum, default_value = "error")]
    pub missing_doc: MissingDoc,
    /// Leave the timestamp out of the manifest.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Worker threads for per-document evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Value normalization before matching: none, trim, casefold or trim+casefold
    #[arg(long, default_value = "none", value_parser = parse_normalization)]
    pub normalize: Normalization,
    /// Take a missing group_type from the entity-type prefix before the first '.'.
    #[arg(long)]
    pub infer_group_type: bool,
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Include a per-document breakdown.
    #[arg(long)]
    pub per_doc: bool,
    /// Include per-entity-type and per-group-type rows in csv/table output.
    #[arg(long)]
    pub per_type: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.0, conflicts_with = "tau_list")]
    pub tau_min: f64,
    #[arg(long, default_value_t = 1.0, conflicts_with = "tau_list")]
    pub tau_max: f64,
    #[arg(long, default_value_t = 101, conflicts_with = "tau_list")]
    pub tau_steps: usize,
    /// Comma-separated thresholds, e.g. "0,0.5,0.9".
    #[arg(long)]
    pub tau_list: Option<String>,
    /// Report the largest threshold whose automation rate stays at or above this.
    #[arg(long)]
    pub auto_rate_floor: Option<f64>,
    /// Write the JSON summary here; otherwise it goes to stderr.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub parse: ParseArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout, stderr),
        Command::Validate(a) => cmd_validate(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

struct Loaded {
    config: EvalConfig,
    gt: DatasetFile,
    pred: DatasetFile,
    manifest: RunManifest,
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn parse_file(path: &Path, bytes: &[u8], config: &EvalConfig) -> Result<DatasetFile, Failure> {
    let mut file = parse_dataset(bytes, config).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    file.source_path = path.display().to_string();
    Ok(file)
}

fn load(input: &InputArgs) -> Result<Loaded, Failure> {
    let config = EvalConfig {
        normalization: input.parse.normalize,
        missing_doc_policy: match input.missing_doc {
            MissingDoc::Error => MissingDocPolicy::Error,
            MissingDoc::Empty => MissingDocPolicy::TreatAsEmpty,
        },
        infer_group_type: input.parse.infer_group_type,
        tau_grid: None,
    };
    let gt_bytes = read(&input.gt)?;
    let pred_bytes = read(&input.pred)?;
    let gt = parse_file(&input.gt, &gt_bytes, &config)?;
    let pred = parse_file(&input.pred, &pred_bytes, &config)?;

    let violations: Vec<String> = [(&input.gt, &gt), (&input.pred, &pred)]
        .iter()
        .flat_map(|(path, file)| {
            file.documents
                .iter()
                .flat_map(validate_document)
                .map(move |v| format!("{}: {v}", path.display()))
        })
        .collect();
    if !violations.is_empty() {
        return Err(Failure::input(format!("invalid input\n{}", violations.join("\n"))));
    }

    let inputs = vec![
        InputDigest::of("gt", &input.gt.display().to_string(), &gt_bytes),
        InputDigest::of("pred", &input.pred.display().to_string(), &pred_bytes),
    ];
    let unknown = BTreeMap::from([
        ("gt".to_owned(), gt.unknown_fields),
        ("pred".to_owned(), pred.unknown_fields),
    ]);
    let manifest = RunManifest::new(&config, inputs, unknown, !input.no_timestamp);
    Ok(Loaded {
        config,
        gt,
        pred,
        manifest,
    })
}

fn emit(out: Option<&PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
    }
}

fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let loaded = load(&args.input)?;
    let pairs = pair_documents(&loaded.gt, &loaded.pred, &loaded.config).map_err(Failure::input)?;
    let options = EvaluateOptions {
        per_doc: args.per_doc,
        threads: args.input.threads,
    };
    let report = evaluate_pairs(&pairs, &options);
    let text = match args.format {
        Format::Json => render_json(&report, &loaded.manifest),
        Format::Csv => render_csv(&report, args.per_type, args.per_doc),
        Format::Table => render_table(&report, args.per_type, args.per_doc),
    };
    emit(args.input.out.as_ref(), stdout, &text)?;
    Ok(EXIT_OK)
}

fn tau_grid(args: &SweepArgs) -> Result<TauGrid, Failure> {
    let grid = match &args.tau_list {
        Some(list) => {
            let values = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Failure::input(format!("bad threshold '{s}': {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            TauGrid::new(values)
        }
        None => TauGrid::linspace(args.tau_min, args.tau_max, args.tau_steps),
    };
    grid.map_err(|e| Failure::input(format!("invalid threshold grid: {e}")))
}

#[derive(Serialize)]
struct KneeJson {
    tau: f64,
    auto_rate: f64,
    kieval_aligned_tau: f64,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    manifest: &'a RunManifest,
    points: usize,
    auto_rate_floor: Option<f64>,
    knee: Option<KneeJson>,
    kieval_aligned: f64,
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let grid = tau_grid(args)?;
    let loaded = load(&args.input)?;
    let pairs = pair_documents(&loaded.gt, &loaded.pred, &loaded.config).map_err(Failure::input)?;
    let matches = match_pairs(&pairs, args.input.threads);
    let points = sweep(&matches, &grid).map_err(Failure::input)?;

    let mut csv = Vec::new();
    write_curve_csv(&points, &mut csv).map_err(|e| Failure::input(format!("cannot write curve: {e}")))?;
    emit(args.input.out.as_ref(), stdout, &String::from_utf8_lossy(&csv))?;

    let report = evaluate_pairs(
        &pairs,
        &EvaluateOptions {
            per_doc: false,
            threads: args.input.threads,
        },
    );
    let summary = SweepSummary {
        manifest: &loaded.manifest,
        points: points.len(),
        auto_rate_floor: args.auto_rate_floor,
        knee: args
            .auto_rate_floor
            .and_then(|floor| knee(&points, floor))
            .map(|p| KneeJson {
                tau: p.tau,
                auto_rate: p.auto_rate,
                kieval_aligned_tau: p.kieval_aligned_tau,
            }),
        kieval_aligned: report.scores.kieval_aligned,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is always serializable");
    text.push('\n');
    match &args.summary {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?
        }
        None => {
            let _ = stderr.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let config = EvalConfig {
        normalization: args.parse.normalize,
        infer_group_type: args.parse.infer_group_type,
        ..EvalConfig::default()
    };
    let bytes = read(&args.path)?;
    let file = parse_file(&args.path, &bytes, &config)?;
    let violations: Vec<_> = file.documents.iter().flat_map(validate_document).collect();
    for v in &violations {
        let _ = writeln!(stdout, "{v}");
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
}
