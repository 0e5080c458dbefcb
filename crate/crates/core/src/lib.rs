//! Demographic fairness metrics for 1:1 verification systems, computed
//! purely from similarity scores.
//!
//! A verification system emits a similarity score per comparison; genuine
//! comparisons (same identity) should score high and impostor comparisons
//! low. Given per-comparison scores labeled with a demographic group, this
//! crate measures how evenly the system behaves across groups, at two
//! levels:
//!
//! * **Outcome metrics** ([`outcome`]): pick one operating threshold from
//!   the pooled impostor scores, then compare per-group false match / false
//!   non-match rates via the Inequity ratio and GARBE (a Gini-style rate
//!   dispersion).
//! * **Distribution metrics** ([`cei`]): compare per-group score
//!   distributions directly. DFI compares whole combined distributions; the
//!   Comprehensive Equity Index (CEI) splits each distribution into tail and
//!   center at a common threshold and weights tail divergence separately,
//!   which is what makes it sensitive to the tail-localized differences
//!   that drive recognition errors. CEI's automated mode derives the split
//!   and weighting from the data.
//!
//! [`ingest`] parses and validates the `score,label,group` CSV format,
//! [`distributions`] provides the histogram/KL machinery, and [`synthetic`]
//! generates Beta-mixture scenario datasets (FAIR/BG/BI/BC) with known bias
//! structure for validating the metrics end to end.
//!
//! ```
//! use equity_metrics::{
//!     cei, dfi, outcome_suite, parse_score_csv, CeiConfig, CeiMode, Kind,
//!     TailWeighting, Variant, DEFAULT_BINS, DEFAULT_EPSILON,
//!     DEFAULT_RATE_FLOOR, DEFAULT_TARGET_FMR,
//! };
//!
//! let csv = "score,label,group\n\
//!            0.91,genuine,east\n0.05,impostor,east\n\
//!            0.12,impostor,east\n0.31,impostor,east\n\
//!            0.88,genuine,west\n0.07,impostor,west\n\
//!            0.22,impostor,west\n0.40,impostor,west\n";
//! let ds = parse_score_csv(csv.as_bytes()).unwrap();
//!
//! let outcome = outcome_suite(&ds, DEFAULT_TARGET_FMR, DEFAULT_RATE_FLOOR).unwrap();
//! assert!(outcome.fmr_inequity.value >= 1.0);
//!
//! let dfi_n = dfi(&ds, Variant::Normal, DEFAULT_BINS, DEFAULT_EPSILON).unwrap();
//! assert!((0.0..=1.0).contains(&dfi_n));
//!
//! // On a dataset this small, the default 95th-percentile split would be
//! // degenerate; split at the pooled median instead.
//! let mut config = CeiConfig::manual(Kind::Impostor, Variant::Extreme);
//! config.mode = CeiMode::Manual {
//!     split_percentile: 50.0,
//!     weighting: TailWeighting::manual(0.8).unwrap(),
//! };
//! let r = cei(&ds, &config).unwrap();
//! assert!((0.0..=1.0).contains(&r.value));
//! ```

pub mod cei;
pub mod distributions;
pub mod error;
pub mod ingest;
pub mod outcome;
pub mod synthetic;

pub use cei::{
    auto_parameters, cei, cei_auto, dfi, sigmoid, split_divergence, tail_deviation, AutoParameters,
    CeiConfig, CeiMode, CeiResult, TailDeviation, TailWeighting, Variant, WeightSource,
    DEFAULT_N_SIGMA, DEFAULT_SPLIT_PERCENTILE, DEFAULT_TAIL_WEIGHT,
};
pub use distributions::{
    build_histogram, empirical_percentile, kl_divergence, mean_distribution, percentile_score,
    sigma_threshold, split_distribution, EmpiricalDistribution, SigmaThreshold, SplitDistribution,
    TailDirection, DEFAULT_BINS, DEFAULT_EPSILON,
};
pub use error::{Error, Result};
pub use ingest::{
    parse_score_csv, summary_stats, validate_dataset, write_score_csv, CellCounts, CellFlag,
    GroupScores, Kind, ScoreDataset, ScoreRecord, SummaryStats, ValidationSummary,
    DEFAULT_MIN_PER_CELL,
};
pub use outcome::{
    fmr, fnmr, garbe, inequity, outcome_suite, threshold_at_fmr, GroupRates, Inequity,
    OperatingPoint, OutcomeReport, DEFAULT_RATE_FLOOR, DEFAULT_TARGET_FMR,
};
pub use synthetic::{
    beta_sample, generate_scenario, BetaMixture, BetaParams, Scenario, ScenarioSpec,
    DEFAULT_GROUPS, DEFAULT_SAMPLES_PER_CELL, DEFAULT_SEED,
};
