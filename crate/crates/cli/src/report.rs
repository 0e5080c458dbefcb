//! Report assembly and rendering.
//!
//! JSON is the canonical output format: field order is fixed by struct
//! declaration order, per-group maps are sorted, and every float is rounded
//! to 10 significant digits before printing, so identical inputs and flags
//! produce byte-identical reports that diff-based regression checks can
//! compare directly. The aligned text table is a human-readable view of the
//! same numbers.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use equity_metrics::{
    auto_parameters, build_histogram, cei, dfi, mean_distribution, outcome_suite, percentile_score,
    summary_stats, CeiConfig, CeiMode, Error, Kind, ScoreDataset, TailWeighting, Variant,
};

/// Rounds to 10 significant digits. Rounding happens at the output boundary,
/// not in the metric pipeline, so in-memory values keep full precision.
fn round_sig(value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        // Normalizes -0.0 to 0.0 so the sign of a zero never leaks into
        // the report bytes.
        return if value == 0.0 { 0.0 } else { value };
    }
    format!("{value:.9e}")
        .parse()
        .expect("a formatted float always reparses")
}

/// The canonical decimal form of a report number: 10 significant digits,
/// then the shortest string that round-trips to the rounded value.
pub fn format_sig(value: f64) -> String {
    round_sig(value).to_string()
}

/// Pretty-printing JSON formatter that routes every float through
/// [`round_sig`]. All structural output is delegated to the stock
/// pretty-printer; only number formatting differs.
struct SigFigFormatter<'a> {
    pretty: PrettyFormatter<'a>,
}

impl Default for SigFigFormatter<'_> {
    fn default() -> Self {
        SigFigFormatter {
            pretty: PrettyFormatter::new(),
        }
    }
}

impl Formatter for SigFigFormatter<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{}", round_sig(value))
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.pretty.end_object_value(writer)
    }
}

/// Serializes a report value in the canonical JSON form, with a trailing
/// newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SigFigFormatter::default());
    value
        .serialize(&mut ser)
        .expect("report types contain no unserializable values");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Which metric families a report includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSelection {
    pub inequity: bool,
    pub garbe: bool,
    pub dfi: bool,
    pub cei: bool,
}

impl MetricSelection {
    pub const ALL: MetricSelection = MetricSelection {
        inequity: true,
        garbe: true,
        dfi: true,
        cei: true,
    };

    /// Parses a comma-separated family list, e.g. `dfi,garbe`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut selection = MetricSelection {
            inequity: false,
            garbe: false,
            dfi: false,
            cei: false,
        };
        for token in list.split(',') {
            match token.trim().to_ascii_lowercase().as_str() {
                "inequity" => selection.inequity = true,
                "garbe" => selection.garbe = true,
                "dfi" => selection.dfi = true,
                "cei" => selection.cei = true,
                other => {
                    return Err(format!(
                        "unknown metric {other:?} (expected inequity, garbe, dfi, cei)"
                    ))
                }
            }
        }
        if selection
            == (MetricSelection {
                inequity: false,
                garbe: false,
                dfi: false,
                cei: false,
            })
        {
            return Err("--metrics selected nothing".to_string());
        }
        Ok(selection)
    }

    /// True when the operating-point section is needed at all.
    fn outcome(self) -> bool {
        self.inequity || self.garbe
    }

    /// Enabled family names in report order, for the config echo.
    fn names(self) -> Vec<String> {
        let mut names = Vec::new();
        for (on, name) in [
            (self.inequity, "inequity"),
            (self.garbe, "garbe"),
            (self.dfi, "dfi"),
            (self.cei, "cei"),
        ] {
            if on {
                names.push(name.to_string());
            }
        }
        names
    }
}

/// Everything that influences a report's numbers, plus the provenance of
/// the scores (input path or generator parameters) for the config echo.
#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub selection: MetricSelection,
    pub bins: usize,
    pub epsilon: f64,
    pub target_fmr: f64,
    pub floor: f64,
    pub n_sigma: f64,
    pub split_percentile: f64,
    pub tail_weight: f64,
    pub min_per_cell: usize,
    pub allow_small_cells: bool,
    pub input: Option<String>,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub groups: Option<usize>,
    pub samples_per_cell: Option<usize>,
}

/// The machine-readable evaluation report. Struct field order is the JSON
/// field order; the `config` block echoes every knob that influences a
/// number, so replaying it reproduces the report bit-for-bit.
#[derive(Debug, Serialize)]
pub struct MetricReport {
    pub dataset: DatasetSummary,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dfi: Option<DfiSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cei: Option<Vec<CeiEntry>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub genuine: CellSummary,
    pub impostor: CellSummary,
}

#[derive(Debug, Serialize)]
pub struct CellSummary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_cell: Option<usize>,
    pub bins: usize,
    pub epsilon: f64,
    pub target_fmr: f64,
    pub floor: f64,
    pub n_sigma: f64,
    pub split_percentile: f64,
    pub tail_weight: f64,
    pub min_per_cell: usize,
    pub allow_small_cells: bool,
    pub metrics: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct OutcomeSection {
    pub operating_point: OperatingPointSummary,
    pub rates: Vec<GroupRatesSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fmr_inequity: Option<InequitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fnmr_inequity: Option<InequitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fmr_garbe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fnmr_garbe: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OperatingPointSummary {
    pub threshold: f64,
    pub achieved_fmr: f64,
    pub target_fmr: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Serialize)]
pub struct GroupRatesSummary {
    pub group: String,
    pub fmr: f64,
    pub fnmr: f64,
}

#[derive(Debug, Serialize)]
pub struct InequitySummary {
    pub value: f64,
    pub max_rate: f64,
    pub geometric_mean: f64,
    pub floor_applied: bool,
}

#[derive(Debug, Serialize)]
pub struct DfiSection {
    pub normal: f64,
    pub extreme: f64,
}

/// One CEI evaluation, tagged with how it was configured.
#[derive(Debug, Serialize)]
pub struct CeiEntry {
    pub mode: &'static str,
    pub kind: &'static str,
    pub variant: &'static str,
    pub value: f64,
    pub split_percentile: f64,
    pub split_score: f64,
    pub tail_weight: f64,
    pub center_weight: f64,
    pub per_group_divergence: BTreeMap<String, f64>,
    pub clamp_flags: Vec<String>,
}

/// Computes the full report for a dataset. `warnings` carries any notes the
/// caller already produced (e.g. undersized cells that were waved through);
/// computation warnings are appended to it in a fixed order.
pub fn build_report(
    ds: &ScoreDataset,
    opts: &ReportOptions,
    mut warnings: Vec<String>,
) -> equity_metrics::Result<MetricReport> {
    let dataset = summarize_dataset(ds)?;

    let outcome_full = if opts.selection.outcome() {
        Some(outcome_suite(ds, opts.target_fmr, opts.floor)?)
    } else {
        None
    };
    if let Some(oc) = &outcome_full {
        if oc.operating_point.under_resolved {
            warnings.push(format!(
                "operating point under-resolved: {} pooled impostor scores cannot resolve target FMR {}",
                ds.pooled(Kind::Impostor).len(),
                format_sig(opts.target_fmr),
            ));
        }
        if opts.selection.inequity {
            for (name, ineq) in [("fmr", &oc.fmr_inequity), ("fnmr", &oc.fnmr_inequity)] {
                if ineq.floor_applied {
                    warnings.push(format!(
                        "{name} inequity: rates below {} lifted to the floor",
                        format_sig(opts.floor)
                    ));
                }
            }
        }
    }
    let outcome = outcome_full.as_ref().map(|oc| OutcomeSection {
        operating_point: OperatingPointSummary {
            threshold: oc.operating_point.threshold,
            achieved_fmr: oc.operating_point.achieved_fmr,
            target_fmr: oc.operating_point.target_fmr,
            under_resolved: oc.operating_point.under_resolved,
        },
        rates: oc
            .rates
            .iter()
            .map(|r| GroupRatesSummary {
                group: r.group.clone(),
                fmr: r.fmr,
                fnmr: r.fnmr,
            })
            .collect(),
        fmr_inequity: inequity_summary(opts, &oc.fmr_inequity),
        fnmr_inequity: inequity_summary(opts, &oc.fnmr_inequity),
        fmr_garbe: opts.selection.garbe.then_some(oc.fmr_garbe),
        fnmr_garbe: opts.selection.garbe.then_some(oc.fnmr_garbe),
    });

    let dfi_section = if opts.selection.dfi {
        Some(DfiSection {
            normal: dfi(ds, Variant::Normal, opts.bins, opts.epsilon)?,
            extreme: dfi(ds, Variant::Extreme, opts.bins, opts.epsilon)?,
        })
    } else {
        None
    };

    let cei_section = if opts.selection.cei {
        Some(cei_entries(ds, opts, &mut warnings)?)
    } else {
        None
    };

    Ok(MetricReport {
        dataset,
        config: ConfigEcho {
            input: opts.input.clone(),
            scenario: opts.scenario.clone(),
            seed: opts.seed,
            groups: opts.groups,
            samples_per_cell: opts.samples_per_cell,
            bins: opts.bins,
            epsilon: opts.epsilon,
            target_fmr: opts.target_fmr,
            floor: opts.floor,
            n_sigma: opts.n_sigma,
            split_percentile: opts.split_percentile,
            tail_weight: opts.tail_weight,
            min_per_cell: opts.min_per_cell,
            allow_small_cells: opts.allow_small_cells,
            metrics: opts.selection.names(),
        },
        outcome,
        dfi: dfi_section,
        cei: cei_section,
        warnings,
    })
}

fn inequity_summary(
    opts: &ReportOptions,
    ineq: &equity_metrics::Inequity,
) -> Option<InequitySummary> {
    opts.selection.inequity.then_some(InequitySummary {
        value: ineq.value,
        max_rate: ineq.max_rate,
        geometric_mean: ineq.geometric_mean,
        floor_applied: ineq.floor_applied,
    })
}

/// All eight CEI evaluations in fixed report order: manual before automated,
/// genuine before impostor, normal before extreme.
fn cei_entries(
    ds: &ScoreDataset,
    opts: &ReportOptions,
    warnings: &mut Vec<String>,
) -> equity_metrics::Result<Vec<CeiEntry>> {
    let weighting = TailWeighting::manual(opts.tail_weight)?;
    let modes = [
        (
            "manual",
            CeiMode::Manual {
                split_percentile: opts.split_percentile,
                weighting,
            },
        ),
        (
            "automated",
            CeiMode::Automated {
                n_sigma: opts.n_sigma,
            },
        ),
    ];
    let mut entries = Vec::with_capacity(8);
    for (mode_label, mode) in modes {
        for kind in [Kind::Genuine, Kind::Impostor] {
            for variant in [Variant::Normal, Variant::Extreme] {
                let config = CeiConfig {
                    mode: mode.clone(),
                    kind,
                    variant,
                    bins: opts.bins,
                    epsilon: opts.epsilon,
                };
                let result = cei(ds, &config)?;
                for flag in &result.clamp_flags {
                    warnings.push(format!(
                        "cei {mode_label}/{}/{}: {flag}",
                        kind.label(),
                        variant.label()
                    ));
                }
                entries.push(CeiEntry {
                    mode: mode_label,
                    kind: kind.label(),
                    variant: variant.label(),
                    value: result.value,
                    split_percentile: result.split_percentile_used,
                    split_score: result.split_score_used,
                    tail_weight: result.weighting_used.tail(),
                    center_weight: result.weighting_used.center(),
                    per_group_divergence: result.per_group_divergence,
                    clamp_flags: result.clamp_flags,
                });
            }
        }
    }
    Ok(entries)
}

fn summarize_dataset(ds: &ScoreDataset) -> equity_metrics::Result<DatasetSummary> {
    let mut groups = Vec::new();
    for g in ds.groups() {
        let cell = |kind: Kind| -> equity_metrics::Result<CellSummary> {
            let stats = summary_stats(g.of_kind(kind)).map_err(|_| {
                Error::Validation(format!(
                    "group {:?} has no {} scores",
                    g.group,
                    kind.label()
                ))
            })?;
            Ok(CellSummary {
                count: stats.count,
                mean: stats.mean,
                std_dev: stats.std_dev,
                min: stats.min,
                max: stats.max,
            })
        };
        groups.push(GroupSummary {
            group: g.group.clone(),
            genuine: cell(Kind::Genuine)?,
            impostor: cell(Kind::Impostor)?,
        });
    }
    Ok(DatasetSummary { groups })
}

/// Renders the report as an aligned, human-readable text table.
pub fn to_table(report: &MetricReport) -> String {
    let mut out = String::new();

    out.push_str("Dataset\n");
    let mut rows = Vec::new();
    for g in &report.dataset.groups {
        for (kind, cell) in [("genuine", &g.genuine), ("impostor", &g.impostor)] {
            rows.push(vec![
                g.group.clone(),
                kind.to_string(),
                cell.count.to_string(),
                format_sig(cell.mean),
                format_sig(cell.std_dev),
                format_sig(cell.min),
                format_sig(cell.max),
            ]);
        }
    }
    push_table(
        &mut out,
        &["group", "kind", "count", "mean", "std dev", "min", "max"],
        &rows,
    );

    out.push_str("\nConfig\n");
    let cfg = &report.config;
    let mut lines: Vec<(&str, String)> = Vec::new();
    if let Some(input) = &cfg.input {
        lines.push(("input", input.clone()));
    }
    if let Some(scenario) = &cfg.scenario {
        lines.push(("scenario", scenario.clone()));
    }
    if let Some(seed) = cfg.seed {
        lines.push(("seed", seed.to_string()));
    }
    if let Some(groups) = cfg.groups {
        lines.push(("groups", groups.to_string()));
    }
    if let Some(samples) = cfg.samples_per_cell {
        lines.push(("samples per cell", samples.to_string()));
    }
    lines.push(("bins", cfg.bins.to_string()));
    lines.push(("epsilon", format_sig(cfg.epsilon)));
    lines.push(("target FMR", format_sig(cfg.target_fmr)));
    lines.push(("floor", format_sig(cfg.floor)));
    lines.push(("n-sigma", format_sig(cfg.n_sigma)));
    lines.push(("split percentile", format_sig(cfg.split_percentile)));
    lines.push(("tail weight", format_sig(cfg.tail_weight)));
    lines.push(("min per cell", cfg.min_per_cell.to_string()));
    lines.push(("allow small cells", cfg.allow_small_cells.to_string()));
    lines.push(("metrics", cfg.metrics.join(", ")));
    let key_width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in lines {
        out.push_str(&format!("  {key:<key_width$}  {value}\n"));
    }

    if let Some(oc) = &report.outcome {
        out.push_str("\nOperating point\n");
        let op = &oc.operating_point;
        for (key, value) in [
            ("threshold", format_sig(op.threshold)),
            ("achieved FMR", format_sig(op.achieved_fmr)),
            ("target FMR", format_sig(op.target_fmr)),
            ("under-resolved", op.under_resolved.to_string()),
        ] {
            out.push_str(&format!("  {key:<14}  {value}\n"));
        }

        out.push_str("\nPer-group rates\n");
        let rows: Vec<Vec<String>> = oc
            .rates
            .iter()
            .map(|r| vec![r.group.clone(), format_sig(r.fmr), format_sig(r.fnmr)])
            .collect();
        push_table(&mut out, &["group", "FMR", "FNMR"], &rows);

        let mut rows = Vec::new();
        if let (Some(fmr), Some(fnmr)) = (&oc.fmr_inequity, &oc.fnmr_inequity) {
            rows.push(vec![
                "inequity".to_string(),
                format_sig(fmr.value),
                format_sig(fnmr.value),
            ]);
        }
        if let (Some(fmr), Some(fnmr)) = (oc.fmr_garbe, oc.fnmr_garbe) {
            rows.push(vec!["GARBE".to_string(), format_sig(fmr), format_sig(fnmr)]);
        }
        if !rows.is_empty() {
            out.push_str("\nDispersion\n");
            push_table(&mut out, &["metric", "FMR", "FNMR"], &rows);
        }
    }

    if let Some(dfi) = &report.dfi {
        out.push_str("\nDFI\n");
        out.push_str(&format!("  normal   {}\n", format_sig(dfi.normal)));
        out.push_str(&format!("  extreme  {}\n", format_sig(dfi.extreme)));
    }

    if let Some(entries) = &report.cei {
        out.push_str("\nCEI\n");
        let rows: Vec<Vec<String>> = entries
            .iter()
            .map(|e| {
                vec![
                    e.mode.to_string(),
                    e.kind.to_string(),
                    e.variant.to_string(),
                    format_sig(e.value),
                    format_sig(e.split_percentile),
                    format_sig(e.split_score),
                    format_sig(e.tail_weight),
                ]
            })
            .collect();
        push_table(
            &mut out,
            &[
                "mode",
                "kind",
                "variant",
                "value",
                "split pct",
                "split score",
                "tail weight",
            ],
            &rows,
        );
    }

    out.push_str("\nWarnings\n");
    if report.warnings.is_empty() {
        out.push_str("  (none)\n");
    } else {
        for w in &report.warnings {
            out.push_str(&format!("  - {w}\n"));
        }
    }

    out
}

/// Appends a two-space-indented table: first column left-aligned, the rest
/// right-aligned, trailing whitespace trimmed.
fn push_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut push_row = |cells: Vec<String>| {
        let mut line = String::from("  ");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                line.push_str(&format!("{cell:>width$}", width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    push_row(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        push_row(row.clone());
    }
}

/// Options for the distribution export.
#[derive(Debug, Clone)]
pub struct ExportOptions {
    pub bins: usize,
    /// When given, include manual split thresholds at this percentile.
    pub percentile: Option<f64>,
    /// When given, include automated split thresholds at this sigma
    /// multiplier.
    pub n_sigma: Option<f64>,
}

/// Binned distributions for external plotting: shared bin edges, per-group
/// masses for both kinds, the binwise mean distribution per kind, and
/// (optionally) the split thresholds a CEI run would use.
#[derive(Debug, Serialize)]
pub struct DistributionExport {
    pub bins: usize,
    pub bin_edges: Vec<f64>,
    pub genuine: KindDistributions,
    pub impostor: KindDistributions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_thresholds: Option<SplitThresholds>,
}

#[derive(Debug, Serialize)]
pub struct KindDistributions {
    pub groups: BTreeMap<String, Vec<f64>>,
    pub mean: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SplitThresholds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manual: Option<ManualSplitEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub automated: Option<AutomatedSplitEcho>,
}

#[derive(Debug, Serialize)]
pub struct ManualSplitEcho {
    pub split_percentile: f64,
    pub genuine_split_score: f64,
    pub impostor_split_score: f64,
}

#[derive(Debug, Serialize)]
pub struct AutomatedSplitEcho {
    pub n_sigma: f64,
    pub genuine: AutoKindEcho,
    pub impostor: AutoKindEcho,
}

#[derive(Debug, Serialize)]
pub struct AutoKindEcho {
    pub split_score: f64,
    pub split_percentile: f64,
    pub tail_weight: f64,
}

/// Builds the distribution export document.
pub fn build_export(
    ds: &ScoreDataset,
    opts: &ExportOptions,
) -> equity_metrics::Result<DistributionExport> {
    let genuine = kind_distributions(ds, Kind::Genuine, opts.bins)?;
    let impostor = kind_distributions(ds, Kind::Impostor, opts.bins)?;

    let manual = match opts.percentile {
        Some(p) => Some(ManualSplitEcho {
            split_percentile: p,
            genuine_split_score: percentile_score(
                &ds.pooled(Kind::Genuine),
                p,
                Kind::Genuine.tail_direction(),
            )?,
            impostor_split_score: percentile_score(
                &ds.pooled(Kind::Impostor),
                p,
                Kind::Impostor.tail_direction(),
            )?,
        }),
        None => None,
    };
    let automated = match opts.n_sigma {
        Some(n) => {
            let echo = |kind: Kind| -> equity_metrics::Result<AutoKindEcho> {
                let params = auto_parameters(ds, kind, n)?;
                Ok(AutoKindEcho {
                    split_score: params.split_score,
                    split_percentile: params.split_percentile,
                    tail_weight: params.weighting.tail(),
                })
            };
            Some(AutomatedSplitEcho {
                n_sigma: n,
                genuine: echo(Kind::Genuine)?,
                impostor: echo(Kind::Impostor)?,
            })
        }
        None => None,
    };
    let split_thresholds = if manual.is_some() || automated.is_some() {
        Some(SplitThresholds { manual, automated })
    } else {
        None
    };

    let (edges, genuine) = genuine;
    let (_, impostor) = impostor;
    Ok(DistributionExport {
        bins: opts.bins,
        bin_edges: edges,
        genuine,
        impostor,
        split_thresholds,
    })
}

fn kind_distributions(
    ds: &ScoreDataset,
    kind: Kind,
    bins: usize,
) -> equity_metrics::Result<(Vec<f64>, KindDistributions)> {
    let mut hists = Vec::new();
    let mut groups = BTreeMap::new();
    for g in ds.groups() {
        let hist = build_histogram(g.of_kind(kind), bins).map_err(|err| match err {
            Error::EmptyScores => Error::Validation(format!(
                "group {:?} has no {} scores",
                g.group,
                kind.label()
            )),
            other => other,
        })?;
        groups.insert(g.group.clone(), hist.masses().to_vec());
        hists.push(hist);
    }
    let mean = mean_distribution(&hists)?;
    Ok((
        mean.bin_edges().to_vec(),
        KindDistributions {
            groups,
            mean: mean.masses().to_vec(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use equity_metrics::ScoreRecord;

    fn toy_dataset() -> ScoreDataset {
        // Scores are spread widely enough that every group keeps mass on
        // both sides of the manual median split and the 1-sigma automated
        // split used in `toy_options`.
        let mut records = Vec::new();
        for (group, genuine, impostor) in [
            (
                "a",
                [0.32, 0.55, 0.68, 0.80, 0.88, 0.93, 0.96, 0.99],
                [0.02, 0.06, 0.11, 0.18, 0.26, 0.35, 0.48, 0.72],
            ),
            (
                "b",
                [0.28, 0.52, 0.66, 0.78, 0.86, 0.92, 0.95, 0.98],
                [0.03, 0.07, 0.13, 0.20, 0.28, 0.38, 0.50, 0.75],
            ),
        ] {
            for s in genuine {
                records.push(ScoreRecord {
                    group: group.to_string(),
                    kind: Kind::Genuine,
                    score: s,
                });
            }
            for s in impostor {
                records.push(ScoreRecord {
                    group: group.to_string(),
                    kind: Kind::Impostor,
                    score: s,
                });
            }
        }
        ScoreDataset::from_records(records).unwrap()
    }

    fn toy_options() -> ReportOptions {
        ReportOptions {
            selection: MetricSelection::ALL,
            bins: 10,
            epsilon: 1e-10,
            target_fmr: 0.3,
            floor: 1e-6,
            n_sigma: 1.0,
            split_percentile: 50.0,
            tail_weight: 0.8,
            min_per_cell: 1,
            allow_small_cells: false,
            input: Some("toy.csv".to_string()),
            scenario: None,
            seed: None,
            groups: None,
            samples_per_cell: None,
        }
    }

    #[test]
    fn round_sig_truncates_to_ten_digits() {
        assert_eq!(format_sig(0.12345678944444), "0.1234567894");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.0003), "0.0003");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(2.0 / 3.0), "0.6666666667");
    }

    #[test]
    fn selection_parses_token_lists() {
        let s = MetricSelection::parse("dfi,garbe").unwrap();
        assert!(s.dfi && s.garbe && !s.cei && !s.inequity);
        let s = MetricSelection::parse(" CEI , inequity ").unwrap();
        assert!(s.cei && s.inequity && !s.dfi && !s.garbe);
        assert!(MetricSelection::parse("dfi,bogus").is_err());
        assert!(MetricSelection::parse("").is_err());
    }

    #[test]
    fn json_rendering_is_deterministic() {
        let ds = toy_dataset();
        let opts = toy_options();
        let a = to_json(&build_report(&ds, &opts, Vec::new()).unwrap());
        let b = to_json(&build_report(&ds, &opts, Vec::new()).unwrap());
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn report_has_eight_cei_entries_in_fixed_order() {
        let ds = toy_dataset();
        let report = build_report(&ds, &toy_options(), Vec::new()).unwrap();
        let entries = report.cei.as_ref().unwrap();
        let tags: Vec<(&str, &str, &str)> = entries
            .iter()
            .map(|e| (e.mode, e.kind, e.variant))
            .collect();
        assert_eq!(
            tags,
            vec![
                ("manual", "genuine", "normal"),
                ("manual", "genuine", "extreme"),
                ("manual", "impostor", "normal"),
                ("manual", "impostor", "extreme"),
                ("automated", "genuine", "normal"),
                ("automated", "genuine", "extreme"),
                ("automated", "impostor", "normal"),
                ("automated", "impostor", "extreme"),
            ]
        );
    }

    #[test]
    fn metric_selection_prunes_sections() {
        let ds = toy_dataset();
        let mut opts = toy_options();
        opts.selection = MetricSelection::parse("dfi,garbe").unwrap();
        let report = build_report(&ds, &opts, Vec::new()).unwrap();
        assert!(report.dfi.is_some());
        assert!(report.cei.is_none());
        let outcome = report.outcome.as_ref().unwrap();
        assert!(outcome.fmr_garbe.is_some());
        assert!(outcome.fmr_inequity.is_none());

        opts.selection = MetricSelection::parse("dfi").unwrap();
        let report = build_report(&ds, &opts, Vec::new()).unwrap();
        assert!(report.outcome.is_none());
        assert!(report.dfi.is_some());
    }

    #[test]
    fn table_rendering_covers_all_sections() {
        let ds = toy_dataset();
        let report = build_report(&ds, &toy_options(), Vec::new()).unwrap();
        let table = to_table(&report);
        for heading in [
            "Dataset",
            "Config",
            "Operating point",
            "Per-group rates",
            "Dispersion",
            "DFI",
            "CEI",
            "Warnings",
        ] {
            assert!(table.contains(heading), "missing section {heading:?}");
        }
        assert!(!table.lines().any(|l| l.ends_with(' ')));
    }

    #[test]
    fn export_means_are_binwise_means() {
        let ds = toy_dataset();
        let doc = build_export(
            &ds,
            &ExportOptions {
                bins: 4,
                percentile: Some(50.0),
                n_sigma: Some(1.0),
            },
        )
        .unwrap();
        assert_eq!(doc.bin_edges.len(), 5);
        for section in [&doc.genuine, &doc.impostor] {
            for masses in section.groups.values() {
                let total: f64 = masses.iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
            for (i, mean) in section.mean.iter().enumerate() {
                let avg: f64 = section.groups.values().map(|m| m[i]).sum::<f64>()
                    / section.groups.len() as f64;
                assert!((mean - avg).abs() < 1e-12);
            }
        }
        let splits = doc.split_thresholds.as_ref().unwrap();
        assert!(splits.manual.is_some());
        assert!(splits.automated.is_some());
    }
}
