//! Command-line front end for the fairness metric suite: evaluate score
//! files, generate synthetic scenarios, and export binned distributions.

mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use equity_metrics::{
    generate_scenario, parse_score_csv, validate_dataset, write_score_csv, Scenario, ScenarioSpec,
    ScoreDataset, DEFAULT_BINS, DEFAULT_EPSILON, DEFAULT_GROUPS, DEFAULT_MIN_PER_CELL,
    DEFAULT_N_SIGMA, DEFAULT_RATE_FLOOR, DEFAULT_SAMPLES_PER_CELL, DEFAULT_SEED,
    DEFAULT_SPLIT_PERCENTILE, DEFAULT_TAIL_WEIGHT, DEFAULT_TARGET_FMR,
};

use report::{
    build_export, build_report, to_json, to_table, ExportOptions, MetricReport, MetricSelection,
    ReportOptions,
};

#[derive(Parser)]
#[command(
    name = "equity-metrics",
    version,
    about = "Demographic fairness metrics for 1:1 verification score sets",
    after_help = "\
Examples:
  equity-metrics evaluate --input scores.csv
  equity-metrics evaluate --input scores.csv --metrics dfi,garbe --format table
  equity-metrics synthetic --scenario BG --seed 42 --out bg.csv
  equity-metrics synthetic --scenario FAIR --report
  equity-metrics export --input scores.csv --bins 100 --out dists.json

Score CSVs have the header `score,label,group`, one row per comparison,
with scores in [0, 1] and labels `genuine` or `impostor`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate fairness metrics over a labelled score CSV
    Evaluate(EvaluateArgs),
    /// Generate a synthetic verification scenario, optionally evaluating it
    Synthetic(SyntheticArgs),
    /// Export binned score distributions as JSON for external plotting
    Export(ExportArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Input score CSV (header: score,label,group)
    #[arg(long)]
    input: PathBuf,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    metrics: MetricFlags,
}

#[derive(Args)]
struct SyntheticArgs {
    /// Scenario code: FAIR, BG, BI, or BC
    #[arg(long, default_value = "FAIR")]
    scenario: String,

    /// Scores drawn per group/kind cell
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_CELL)]
    samples: usize,

    /// Number of demographic groups
    #[arg(long, default_value_t = DEFAULT_GROUPS)]
    groups: usize,

    /// RNG seed (falls back to EQUITY_METRICS_SEED, then 42)
    #[arg(long, env = "EQUITY_METRICS_SEED")]
    seed: Option<u64>,

    /// Write the generated score CSV here (without --report, stdout is the
    /// default destination)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Evaluate the generated scores and print the metric report
    #[arg(long)]
    report: bool,

    /// Report format (with --report)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(flatten)]
    metrics: MetricFlags,
}

#[derive(Args)]
struct ExportArgs {
    /// Input score CSV (header: score,label,group)
    #[arg(long)]
    input: PathBuf,

    /// Write the JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Histogram resolution
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,

    /// Also export manual split thresholds at this percentile
    #[arg(long)]
    percentile: Option<f64>,

    /// Also export automated split thresholds at this sigma multiplier
    #[arg(long)]
    n_sigma: Option<f64>,
}

/// Metric knobs shared by `evaluate` and `synthetic --report`.
#[derive(Args)]
struct MetricFlags {
    /// Histogram resolution for divergence metrics
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,

    /// Additive smoothing mass for divergences
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,

    /// Pooled false-match rate the decision threshold is tuned to
    #[arg(long, default_value_t = DEFAULT_TARGET_FMR)]
    target_fmr: f64,

    /// Floor substituted for zero error rates in ratio metrics
    #[arg(long, default_value_t = DEFAULT_RATE_FLOOR)]
    floor: f64,

    /// Sigma multiplier for the automated tail split
    #[arg(long, default_value_t = DEFAULT_N_SIGMA)]
    n_sigma: f64,

    /// Percentile for the manual tail split
    #[arg(long, default_value_t = DEFAULT_SPLIT_PERCENTILE)]
    percentile: f64,

    /// Manual tail weight in [0, 1] (center weight is its complement)
    #[arg(long, default_value_t = DEFAULT_TAIL_WEIGHT)]
    tail_weight: f64,

    /// Comma-separated metric families to report: inequity, garbe, dfi, cei
    #[arg(long)]
    metrics: Option<String>,

    /// Minimum scores per group/kind cell before evaluation refuses
    #[arg(long, default_value_t = DEFAULT_MIN_PER_CELL)]
    min_per_cell: usize,

    /// Evaluate despite undersized cells (they become warnings; empty cells
    /// still refuse)
    #[arg(long)]
    allow_small_cells: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// CLI failure split by exit code: usage errors (bad flag values, unknown
/// names) exit 2, data and computation failures exit 1.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => msg,
        }
    }
}

impl From<equity_metrics::Error> for CliError {
    fn from(err: equity_metrics::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

fn require(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}

impl MetricFlags {
    /// Validates every knob and assembles [`ReportOptions`] with empty
    /// provenance; callers fill in the input path or generator parameters.
    fn resolve(&self) -> Result<ReportOptions, CliError> {
        require(
            self.bins >= 1,
            format!("--bins must be at least 1, got {}", self.bins),
        )?;
        require(
            self.epsilon.is_finite() && self.epsilon > 0.0,
            format!("--epsilon must be positive, got {}", self.epsilon),
        )?;
        require(
            self.target_fmr.is_finite() && self.target_fmr > 0.0 && self.target_fmr < 1.0,
            format!("--target-fmr must lie in (0, 1), got {}", self.target_fmr),
        )?;
        require(
            self.floor.is_finite() && self.floor > 0.0,
            format!("--floor must be positive, got {}", self.floor),
        )?;
        require(
            self.n_sigma.is_finite() && self.n_sigma > 0.0,
            format!("--n-sigma must be positive, got {}", self.n_sigma),
        )?;
        require(
            self.percentile.is_finite() && self.percentile > 0.0 && self.percentile < 100.0,
            format!(
                "--percentile must lie strictly between 0 and 100, got {}",
                self.percentile
            ),
        )?;
        require(
            self.tail_weight.is_finite() && (0.0..=1.0).contains(&self.tail_weight),
            format!("--tail-weight must lie in [0, 1], got {}", self.tail_weight),
        )?;
        let selection = match &self.metrics {
            Some(list) => MetricSelection::parse(list).map_err(CliError::Usage)?,
            None => MetricSelection::ALL,
        };
        Ok(ReportOptions {
            selection,
            bins: self.bins,
            epsilon: self.epsilon,
            target_fmr: self.target_fmr,
            floor: self.floor,
            n_sigma: self.n_sigma,
            split_percentile: self.percentile,
            tail_weight: self.tail_weight,
            min_per_cell: self.min_per_cell,
            allow_small_cells: self.allow_small_cells,
            input: None,
            scenario: None,
            seed: None,
            groups: None,
            samples_per_cell: None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => run_evaluate(args),
        Command::Synthetic(args) => run_synthetic(args),
        Command::Export(args) => run_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let mut opts = args.metrics.resolve()?;
    opts.input = Some(args.input.display().to_string());
    let ds = read_dataset(&args.input)?;
    let warnings = gate_cells(&ds, &opts)?;
    let report = build_report(&ds, &opts, warnings)?;
    write_output(args.out.as_deref(), &render(&report, args.format))
}

fn run_synthetic(args: SyntheticArgs) -> Result<(), CliError> {
    let scenario =
        Scenario::from_code(&args.scenario).map_err(|err| CliError::Usage(err.to_string()))?;
    require(
        args.groups >= 2,
        format!("--groups must be at least 2, got {}", args.groups),
    )?;
    require(args.samples >= 1, "--samples must be at least 1")?;
    // Resolve metric flags before the (potentially expensive) generation so
    // bad flag values fail fast even with --report.
    let mut opts = args.metrics.resolve()?;

    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let mut spec = ScenarioSpec::new(scenario, seed);
    spec.n_groups = args.groups;
    spec.samples_per_cell = args.samples;
    let ds = generate_scenario(&spec)?;

    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display())))?;
            write_score_csv(&ds, io::BufWriter::new(file))
                .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display())))?;
        }
        None if !args.report => {
            let stdout = io::stdout();
            write_score_csv(&ds, io::BufWriter::new(stdout.lock()))
                .map_err(|err| CliError::Data(format!("cannot write to stdout: {err}")))?;
        }
        None => {}
    }

    if args.report {
        opts.scenario = Some(scenario.code().to_string());
        opts.seed = Some(seed);
        opts.groups = Some(args.groups);
        opts.samples_per_cell = Some(args.samples);
        let warnings = gate_cells(&ds, &opts)?;
        let report = build_report(&ds, &opts, warnings)?;
        write_output(None, &render(&report, args.format))?;
    }
    Ok(())
}

fn run_export(args: ExportArgs) -> Result<(), CliError> {
    require(
        args.bins >= 1,
        format!("--bins must be at least 1, got {}", args.bins),
    )?;
    if let Some(p) = args.percentile {
        require(
            p.is_finite() && p > 0.0 && p < 100.0,
            format!("--percentile must lie strictly between 0 and 100, got {p}"),
        )?;
    }
    if let Some(n) = args.n_sigma {
        require(
            n.is_finite() && n > 0.0,
            format!("--n-sigma must be positive, got {n}"),
        )?;
    }
    let ds = read_dataset(&args.input)?;
    let doc = build_export(
        &ds,
        &ExportOptions {
            bins: args.bins,
            percentile: args.percentile,
            n_sigma: args.n_sigma,
        },
    )?;
    write_output(args.out.as_deref(), &to_json(&doc))
}

fn read_dataset(path: &Path) -> Result<ScoreDataset, CliError> {
    let file = fs::File::open(path)
        .map_err(|err| CliError::Data(format!("cannot open {}: {err}", path.display())))?;
    Ok(parse_score_csv(io::BufReader::new(file))?)
}

/// Applies the per-cell minimum-count gate. Undersized cells refuse the
/// dataset unless `--allow-small-cells`, in which case they come back as
/// report warnings. Cells with no scores at all always refuse: no metric is
/// computable on them.
fn gate_cells(ds: &ScoreDataset, opts: &ReportOptions) -> Result<Vec<String>, CliError> {
    let summary = validate_dataset(ds, opts.min_per_cell.max(1));
    if summary.is_ok() {
        return Ok(Vec::new());
    }
    let mut notes = Vec::new();
    let mut any_empty = false;
    for flag in &summary.flagged {
        if flag.count == 0 {
            any_empty = true;
            notes.push(format!(
                "group {:?} has no {} scores",
                flag.group,
                flag.kind.label()
            ));
        } else {
            notes.push(format!(
                "group {:?} has {} {} scores (minimum {})",
                flag.group,
                flag.count,
                flag.kind.label(),
                opts.min_per_cell
            ));
        }
    }
    if opts.allow_small_cells && !any_empty {
        return Ok(notes);
    }
    let hint = if any_empty {
        ""
    } else {
        " (use --allow-small-cells to evaluate anyway)"
    };
    Err(CliError::Data(format!(
        "dataset failed validation: {}{hint}",
        notes.join("; ")
    )))
}

fn render(report: &MetricReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Table => to_table(report),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|err| CliError::Data(format!("cannot write {}: {err}", p.display()))),
        None => {
            print!("{text}");
            io::stdout()
                .flush()
                .map_err(|err| CliError::Data(format!("cannot write to stdout: {err}")))
        }
    }
}
