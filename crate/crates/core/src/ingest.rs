//! Parsing, validation, and partitioning of raw score records into
//! per-group genuine/impostor score sets.
//!
//! The on-disk format is a three-column CSV with the exact header
//! `score,label,group`: `score` is a decimal in [0, 1], `label` is
//! `genuine` or `impostor` (case-insensitive on input, lowercase on output),
//! and `group` is a non-empty demographic group identifier.

use std::collections::HashMap;
use std::io;

use crate::distributions::TailDirection;
use crate::error::{Error, Result};

/// Which comparison produced a score: a same-identity pair (`Genuine`) or a
/// different-identity pair (`Impostor`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Genuine,
    Impostor,
}

impl Kind {
    /// The tail where this kind's verification errors live: genuine
    /// comparisons fail low (left tail, false non-matches), impostor
    /// comparisons fail high (right tail, false matches).
    pub fn tail_direction(self) -> TailDirection {
        match self {
            Kind::Genuine => TailDirection::Left,
            Kind::Impostor => TailDirection::Right,
        }
    }

    /// Canonical lowercase label used in the CSV format.
    pub fn label(self) -> &'static str {
        match self {
            Kind::Genuine => "genuine",
            Kind::Impostor => "impostor",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One parsed row: a similarity score with its comparison kind and group.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub score: f64,
    pub kind: Kind,
    pub group: String,
}

/// All scores observed for one demographic group, separated by kind.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupScores {
    pub group: String,
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

impl GroupScores {
    /// The scores of one kind.
    pub fn of_kind(&self, kind: Kind) -> &[f64] {
        match kind {
            Kind::Genuine => &self.genuine,
            Kind::Impostor => &self.impostor,
        }
    }

    /// Genuine and impostor scores pooled into one sequence (genuine first).
    pub fn combined(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.genuine.len() + self.impostor.len());
        all.extend_from_slice(&self.genuine);
        all.extend_from_slice(&self.impostor);
        all
    }
}

/// A full dataset: at least two disjoint groups, each with genuine and
/// impostor score sequences. Group order is the order of first appearance
/// in the input; every metric in this crate is invariant under it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDataset {
    groups: Vec<GroupScores>,
}

impl ScoreDataset {
    /// Aggregates records into per-group score sets. Groups appear in order
    /// of first occurrence. Fails unless at least two groups are present
    /// (single-group data admits no between-group comparison).
    pub fn from_records<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = ScoreRecord>,
    {
        let mut groups: Vec<GroupScores> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for rec in records {
            let i = *index.entry(rec.group.clone()).or_insert_with(|| {
                groups.push(GroupScores {
                    group: rec.group.clone(),
                    genuine: Vec::new(),
                    impostor: Vec::new(),
                });
                groups.len() - 1
            });
            match rec.kind {
                Kind::Genuine => groups[i].genuine.push(rec.score),
                Kind::Impostor => groups[i].impostor.push(rec.score),
            }
        }
        if groups.len() < 2 {
            return Err(Error::TooFewGroups {
                found: groups.len(),
            });
        }
        Ok(ScoreDataset { groups })
    }

    /// Assembles a dataset from pre-grouped scores, enforcing the same
    /// at-least-two-groups invariant as [`ScoreDataset::from_records`].
    pub(crate) fn from_groups(groups: Vec<GroupScores>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::TooFewGroups {
                found: groups.len(),
            });
        }
        Ok(ScoreDataset { groups })
    }

    pub fn groups(&self) -> &[GroupScores] {
        &self.groups
    }

    /// Number of groups, the K in every log2(K) normalizer.
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    /// All scores of one kind across groups, concatenated in group order.
    pub fn pooled(&self, kind: Kind) -> Vec<f64> {
        let mut pooled = Vec::new();
        for g in &self.groups {
            pooled.extend_from_slice(g.of_kind(kind));
        }
        pooled
    }
}

/// Mean, population standard deviation, and extrema of a score sequence.
///
/// The standard deviation divides by n (population convention), not n-1:
/// score sets are treated as complete empirical populations, and the
/// convention must be fixed for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

/// Computes [`SummaryStats`] for a non-empty score sequence.
pub fn summary_stats(scores: &[f64]) -> Result<SummaryStats> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let (mut min, mut max) = (scores[0], scores[0]);
    for &s in scores {
        if s < min {
            min = s;
        }
        if s > max {
            max = s;
        }
    }
    Ok(SummaryStats {
        mean,
        std_dev: var.sqrt(),
        count: scores.len(),
        min,
        max,
    })
}

const HEADER: [&str; 3] = ["score", "label", "group"];

/// Parses the standard score CSV from any reader.
///
/// Errors carry 1-based line numbers (the header is line 1). A score outside
/// [0, 1] is a hard error — silently clamping would distort exactly the tail
/// masses the metrics measure.
pub fn parse_score_csv<R: io::Read>(reader: R) -> Result<ScoreDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    {
        let headers = rdr.headers().map_err(csv_error)?;
        let fields: Vec<&str> = headers.iter().collect();
        // Tolerate a UTF-8 byte-order mark in front of the first column name.
        let first = fields.first().map(|f| f.trim_start_matches('\u{feff}'));
        if fields.len() != 3
            || first != Some(HEADER[0])
            || fields[1] != HEADER[1]
            || fields[2] != HEADER[2]
        {
            return Err(Error::BadHeader {
                found: fields.join(","),
            });
        }
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let raw_score = row.get(0).unwrap_or("");
        let score: f64 = raw_score.trim().parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("unparseable score {raw_score:?}"),
        })?;
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(Error::ScoreOutOfRange { line, value: score });
        }
        let raw_label = row.get(1).unwrap_or("").trim();
        let kind = if raw_label.eq_ignore_ascii_case("genuine") {
            Kind::Genuine
        } else if raw_label.eq_ignore_ascii_case("impostor") {
            Kind::Impostor
        } else {
            return Err(Error::UnknownLabel {
                line,
                label: raw_label.to_string(),
            });
        };
        let group = row.get(2).unwrap_or("");
        if group.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty group identifier".to_string(),
            });
        }
        records.push(ScoreRecord {
            score,
            kind,
            group: group.to_string(),
        });
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    ScoreDataset::from_records(records)
}

fn csv_error(err: csv::Error) -> Error {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::MalformedRow {
        line,
        message: err.to_string(),
    }
}

/// Writes a dataset in the standard score CSV format with lowercase labels.
/// Scores are printed in shortest round-trip form, so parsing the output
/// reproduces the exact same dataset.
pub fn write_score_csv<W: io::Write>(ds: &ScoreDataset, mut w: W) -> io::Result<()> {
    writeln!(w, "score,label,group")?;
    for g in ds.groups() {
        for &s in &g.genuine {
            writeln!(w, "{s},genuine,{}", g.group)?;
        }
        for &s in &g.impostor {
            writeln!(w, "{s},impostor,{}", g.group)?;
        }
    }
    Ok(())
}

/// Score counts for one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    pub group: String,
    pub genuine: usize,
    pub impostor: usize,
}

/// A (group, kind) cell that fell below the required minimum count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFlag {
    pub group: String,
    pub kind: Kind,
    pub count: usize,
}

/// Per-group counts plus any cells that fail the minimum-count requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSummary {
    pub counts: Vec<CellCounts>,
    pub flagged: Vec<CellFlag>,
    pub min_per_cell: usize,
}

impl ValidationSummary {
    /// True when no cell is below the minimum.
    pub fn is_ok(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Default per-cell sample floor for [`validate_dataset`].
pub const DEFAULT_MIN_PER_CELL: usize = 50;

/// Reports per-cell counts and flags every (group, kind) cell with fewer
/// than `min_per_cell` scores. Tail percentiles are meaningless on a handful
/// of scores, so metric runners refuse flagged datasets unless overridden;
/// `min_per_cell = 0` never flags.
pub fn validate_dataset(ds: &ScoreDataset, min_per_cell: usize) -> ValidationSummary {
    let mut counts = Vec::new();
    let mut flagged = Vec::new();
    for g in ds.groups() {
        counts.push(CellCounts {
            group: g.group.clone(),
            genuine: g.genuine.len(),
            impostor: g.impostor.len(),
        });
        for kind in [Kind::Genuine, Kind::Impostor] {
            let count = g.of_kind(kind).len();
            if count < min_per_cell {
                flagged.push(CellFlag {
                    group: g.group.clone(),
                    kind,
                    count,
                });
            }
        }
    }
    ValidationSummary {
        counts,
        flagged,
        min_per_cell,
    }
}
