//! Distribution-level equity indices.
//!
//! Two families, sharing one 1 − normalized-KL shape:
//!
//! * DFI compares each group's combined (genuine + impostor) score
//!   distribution against the binwise mean distribution.
//! * CEI first splits each kind-specific distribution at a common score
//!   threshold into tail and center parts, renormalizes the parts, and
//!   compares part against mean part with a tail/center weighting. This is
//!   what makes it sensitive to tail-localized bias that whole-distribution
//!   comparison averages away.
//!
//! Both families come in a Normal variant (average divergence across groups)
//! and an Extreme variant (worst single group). The automated CEI mode
//! derives the split and the weighting from the data itself instead of
//! taking them as configuration.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::distributions::{
    build_histogram, empirical_percentile, kl_divergence, mean_distribution, sigma_threshold,
    split_distribution, EmpiricalDistribution, SplitDistribution, TailDirection, DEFAULT_EPSILON,
};
use crate::error::{Error, Result};
use crate::ingest::{summary_stats, Kind, ScoreDataset, SummaryStats};

/// Default split percentile for manual CEI.
pub const DEFAULT_SPLIT_PERCENTILE: f64 = 95.0;

/// Default tail weight for manual CEI.
pub const DEFAULT_TAIL_WEIGHT: f64 = 0.8;

/// Default sigma multiplier for the automated split threshold.
pub const DEFAULT_N_SIGMA: f64 = 3.0;

/// Aggregation variant shared by DFI and CEI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// 1 − (1/(K·log2 K)) · Σ per-group divergence: every group contributes.
    Normal,
    /// 1 − (1/log2 K) · max per-group divergence: only the worst group
    /// counts, so a single disadvantaged group cannot be averaged away.
    Extreme,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Normal => "normal",
            Variant::Extreme => "extreme",
        }
    }
}

/// Where a tail/center weighting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightSource {
    Manual,
    Automated,
}

/// Relative importance of tail vs center divergence. The center weight is
/// always derived as 1 − w_tail, so the pair cannot drift out of sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailWeighting {
    w_tail: f64,
    source: WeightSource,
}

impl TailWeighting {
    /// A caller-chosen tail weight in [0, 1].
    pub fn manual(w_tail: f64) -> Result<Self> {
        if !w_tail.is_finite() || !(0.0..=1.0).contains(&w_tail) {
            return Err(Error::BadTailWeight { value: w_tail });
        }
        Ok(TailWeighting {
            w_tail,
            source: WeightSource::Manual,
        })
    }

    fn automated(w_tail: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&w_tail));
        TailWeighting {
            w_tail,
            source: WeightSource::Automated,
        }
    }

    pub fn tail(&self) -> f64 {
        self.w_tail
    }

    pub fn center(&self) -> f64 {
        1.0 - self.w_tail
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }
}

/// How the CEI split and weighting are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum CeiMode {
    /// Fixed split percentile and fixed weighting.
    Manual {
        split_percentile: f64,
        weighting: TailWeighting,
    },
    /// Split at mean ± n_sigma·sigma of the pooled scores; weighting derived
    /// from per-group tail deviations.
    Automated { n_sigma: f64 },
}

/// Full configuration of one CEI computation.
#[derive(Debug, Clone, PartialEq)]
pub struct CeiConfig {
    pub mode: CeiMode,
    /// Which score kind is analyzed. Also fixes the tail direction: low
    /// genuine scores cause false non-matches, high impostor scores cause
    /// false matches, so genuine analyses look left and impostor analyses
    /// look right.
    pub kind: Kind,
    pub variant: Variant,
    pub bins: usize,
    /// KL smoothing constant.
    pub epsilon: f64,
}

impl CeiConfig {
    /// Manual mode at the default 95th percentile with 0.8/0.2 weighting.
    pub fn manual(kind: Kind, variant: Variant) -> Self {
        CeiConfig {
            mode: CeiMode::Manual {
                split_percentile: DEFAULT_SPLIT_PERCENTILE,
                weighting: TailWeighting::manual(DEFAULT_TAIL_WEIGHT)
                    .expect("default tail weight is valid"),
            },
            kind,
            variant,
            bins: crate::distributions::DEFAULT_BINS,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// Automated mode at the given sigma multiplier.
    pub fn automated(kind: Kind, variant: Variant, n_sigma: f64) -> Self {
        CeiConfig {
            mode: CeiMode::Automated { n_sigma },
            kind,
            variant,
            bins: crate::distributions::DEFAULT_BINS,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// One CEI evaluation, carrying everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct CeiResult {
    /// The index value in [0, 1]; 1 means all groups' split distributions
    /// coincide.
    pub value: f64,
    /// Weighted split divergence S'_i per group.
    pub per_group_divergence: BTreeMap<String, f64>,
    pub split_percentile_used: f64,
    pub split_score_used: f64,
    pub weighting_used: TailWeighting,
    /// Numerical adjustments that fired: e.g. a negative raw value clamped
    /// to 0, or an automated sigma threshold clamped into [0, 1].
    pub clamp_flags: Vec<String>,
}

/// How much heavier one group's empirical tail is than the tail of a normal
/// distribution fitted to that group.
#[derive(Debug, Clone, PartialEq)]
pub struct TailDeviation {
    pub group: String,
    /// Relative excess tail mass, (m_emp − m_gauss)/m_gauss: 0 for an
    /// exactly Gaussian tail, 1 when the empirical tail holds twice the
    /// Gaussian mass, −1 when it is empty.
    pub delta: f64,
    pub empirical_tail_mass: f64,
    pub gaussian_tail_mass: f64,
}

/// Data-derived CEI parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoParameters {
    /// Common split threshold: pooled mean ± n_sigma·sigma, clamped to [0, 1].
    pub split_score: f64,
    /// Percentile of the pooled scores realized by `split_score`.
    pub split_percentile: f64,
    pub weighting: TailWeighting,
    /// Per-group tail deviations behind the weighting, in dataset order.
    pub deviations: Vec<TailDeviation>,
    /// True when the raw sigma threshold fell outside [0, 1].
    pub threshold_clamped: bool,
}

/// Logistic function, mapping a tail deviation onto (0, 1) with
/// sigmoid(0) = 0.5 at the Gaussian-tail reference point.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Upper-tail mass of the standard normal beyond `n` (one-sided).
fn normal_tail_mass(n: f64) -> f64 {
    0.5 * libm::erfc(n / SQRT_2)
}

fn require_cell(ds: &ScoreDataset, kind: Kind) -> Result<()> {
    for g in ds.groups() {
        if g.of_kind(kind).is_empty() {
            return Err(Error::Validation(format!(
                "group {:?} has no {} scores",
                g.group,
                kind.label()
            )));
        }
    }
    Ok(())
}

fn aggregate(divergences: impl Iterator<Item = f64>, k: usize, variant: Variant) -> f64 {
    let log2k = (k as f64).log2();
    match variant {
        Variant::Normal => 1.0 - divergences.sum::<f64>() / (k as f64 * log2k),
        Variant::Extreme => 1.0 - divergences.fold(0.0, f64::max) / log2k,
    }
}

/// Demographic Fairness Index over combined (genuine + impostor) per-group
/// distributions: per-group KL against the binwise mean distribution,
/// aggregated per `variant`. 1 means groups are indistinguishable at whole-
/// distribution resolution; tail-localized differences barely move it.
pub fn dfi(ds: &ScoreDataset, variant: Variant, bins: usize, epsilon: f64) -> Result<f64> {
    let hists = ds
        .groups()
        .iter()
        .map(|g| build_histogram(&g.combined(), bins))
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_distribution(&hists)?;
    let divs = hists
        .iter()
        .map(|h| kl_divergence(h, &mean, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(divs.into_iter(), ds.k(), variant).max(0.0))
}

/// Weighted divergence of one group's split distribution from the mean
/// parts: w_tail·KL(tail‖mean tail) + w_center·KL(center‖mean center).
pub fn split_divergence(
    group: &SplitDistribution,
    mean_center: &EmpiricalDistribution,
    mean_tail: &EmpiricalDistribution,
    w: &TailWeighting,
    epsilon: f64,
) -> Result<f64> {
    let tail = kl_divergence(&group.tail, mean_tail, epsilon)?;
    let center = kl_divergence(&group.center, mean_center, epsilon)?;
    Ok(w.tail() * tail + w.center() * center)
}

/// Measures a group's excess tail mass beyond threshold `t`, relative to a
/// normal distribution fitted to the group's own mean and sigma. The strict
/// inequality makes "beyond t" the complement of the center-side percentile
/// conventions used elsewhere.
pub fn tail_deviation(
    group: &str,
    scores: &[f64],
    t: f64,
    stats: &SummaryStats,
    direction: TailDirection,
) -> Result<TailDeviation> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if stats.std_dev == 0.0 {
        return Err(Error::ZeroSigma);
    }
    let beyond = match direction {
        TailDirection::Right => scores.iter().filter(|&&s| s > t).count(),
        TailDirection::Left => scores.iter().filter(|&&s| s < t).count(),
    };
    let empirical_tail_mass = beyond as f64 / scores.len() as f64;
    let gaussian_tail_mass = normal_tail_mass((t - stats.mean).abs() / stats.std_dev);
    if gaussian_tail_mass < 1e-300 {
        return Err(Error::TailUnderflow);
    }
    Ok(TailDeviation {
        group: group.to_string(),
        delta: (empirical_tail_mass - gaussian_tail_mass) / gaussian_tail_mass,
        empirical_tail_mass,
        gaussian_tail_mass,
    })
}

/// Derives the automated CEI parameters for one score kind:
///
/// 1. threshold t = pooled mean ± n_sigma·pooled sigma (direction by kind);
/// 2. split percentile = pooled percentile realized at t;
/// 3. per group, the tail deviation Δ_i at the common t against the group's
///    own fitted normal;
/// 4. s_i = sigmoid(Δ_i)·P/100, and w_tail = mean of the s_i.
///
/// Groups with tails heavier than their own Gaussian fit push the tail
/// weight up; exactly-Gaussian tails land it near P/200.
pub fn auto_parameters(ds: &ScoreDataset, kind: Kind, n_sigma: f64) -> Result<AutoParameters> {
    require_cell(ds, kind)?;
    let direction = kind.tail_direction();
    let pooled = ds.pooled(kind);
    let pooled_stats = summary_stats(&pooled)?;
    let threshold = sigma_threshold(&pooled_stats, n_sigma, direction)?;
    let t = threshold.value;
    let split_percentile = empirical_percentile(&pooled, t, direction)?;
    if split_percentile == 100.0 {
        return Err(Error::NoTailMass { n_sigma });
    }
    let mut deviations = Vec::with_capacity(ds.k());
    for g in ds.groups() {
        let scores = g.of_kind(kind);
        let stats = summary_stats(scores)?;
        deviations.push(tail_deviation(&g.group, scores, t, &stats, direction)?);
    }
    let w_tail = deviations
        .iter()
        .map(|d| sigmoid(d.delta) * split_percentile / 100.0)
        .sum::<f64>()
        / deviations.len() as f64;
    Ok(AutoParameters {
        split_score: t,
        split_percentile,
        weighting: TailWeighting::automated(w_tail),
        deviations,
        threshold_clamped: threshold.clamped,
    })
}

/// Comprehensive Equity Index.
///
/// A single split threshold is derived from the pooled scores of
/// `config.kind` (so every group's tail covers the same score range), each
/// group's histogram is split and its parts renormalized, mean parts are the
/// binwise means of the groups' renormalized parts, and per-group weighted
/// split divergences are aggregated per `config.variant`.
pub fn cei(ds: &ScoreDataset, config: &CeiConfig) -> Result<CeiResult> {
    let kind = config.kind;
    require_cell(ds, kind)?;
    let direction = kind.tail_direction();
    let mut clamp_flags = Vec::new();
    let (split_score, split_percentile, weighting) = match &config.mode {
        CeiMode::Manual {
            split_percentile,
            weighting,
        } => {
            let pooled = ds.pooled(kind);
            let split =
                crate::distributions::percentile_score(&pooled, *split_percentile, direction)?;
            (split, *split_percentile, *weighting)
        }
        CeiMode::Automated { n_sigma } => {
            let auto = auto_parameters(ds, kind, *n_sigma)?;
            if auto.threshold_clamped {
                clamp_flags.push("sigma_threshold_clamped".to_string());
            }
            (auto.split_score, auto.split_percentile, auto.weighting)
        }
    };
    let mut splits = Vec::with_capacity(ds.k());
    for g in ds.groups() {
        let hist = build_histogram(g.of_kind(kind), config.bins)?;
        let split = split_distribution(&hist, split_score, direction, split_percentile).map_err(
            |e| match e {
                Error::DegenerateSplit { detail } => Error::DegenerateSplit {
                    detail: format!("group {:?}, {} scores: {detail}", g.group, kind.label()),
                },
                other => other,
            },
        )?;
        splits.push(split);
    }
    let tails: Vec<_> = splits.iter().map(|s| s.tail.clone()).collect();
    let centers: Vec<_> = splits.iter().map(|s| s.center.clone()).collect();
    let mean_tail = mean_distribution(&tails)?;
    let mean_center = mean_distribution(&centers)?;
    let mut per_group_divergence = BTreeMap::new();
    for (g, s) in ds.groups().iter().zip(&splits) {
        let d = split_divergence(s, &mean_center, &mean_tail, &weighting, config.epsilon)?;
        per_group_divergence.insert(g.group.clone(), d);
    }
    let raw = aggregate(
        per_group_divergence.values().copied(),
        ds.k(),
        config.variant,
    );
    let value = if raw < 0.0 {
        clamp_flags.push("value_clamped_to_zero".to_string());
        0.0
    } else {
        raw
    };
    Ok(CeiResult {
        value,
        per_group_divergence,
        split_percentile_used: split_percentile,
        split_score_used: split_score,
        weighting_used: weighting,
        clamp_flags,
    })
}

/// Automated CEI: [`auto_parameters`] followed by [`cei`] with the derived
/// split and weighting.
pub fn cei_auto(
    ds: &ScoreDataset,
    kind: Kind,
    variant: Variant,
    n_sigma: f64,
    bins: usize,
) -> Result<CeiResult> {
    let config = CeiConfig {
        mode: CeiMode::Automated { n_sigma },
        kind,
        variant,
        bins,
        epsilon: DEFAULT_EPSILON,
    };
    cei(ds, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DEFAULT_BINS;
    use crate::ingest::{parse_score_csv, ScoreDataset};

    /// Builds a two-group dataset from explicit per-cell score lists.
    fn dataset(cells: &[(&str, &[f64], &[f64])]) -> ScoreDataset {
        let mut csv = String::from("score,label,group\n");
        for (group, genuine, impostor) in cells {
            for s in *genuine {
                csv.push_str(&format!("{s},genuine,{group}\n"));
            }
            for s in *impostor {
                csv.push_str(&format!("{s},impostor,{group}\n"));
            }
        }
        parse_score_csv(csv.as_bytes()).unwrap()
    }

    fn repeat(value: f64, n: usize) -> Vec<f64> {
        vec![value; n]
    }

    #[test]
    fn sigmoid_hand_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(1.0) - 0.7310585786300049).abs() < 1e-15);
        assert!((sigmoid(-1.0) - 0.2689414213699951).abs() < 1e-15);
    }

    #[test]
    fn dfi_two_bin_hand_example() {
        // Combined histograms over 2 bins: [0.5, 0.5] vs [1, 0].
        let ds = dataset(&[("g1", &[0.75], &[0.25]), ("g2", &[0.3], &[0.1])]);
        let n = dfi(&ds, Variant::Normal, 2, DEFAULT_EPSILON).unwrap();
        let e = dfi(&ds, Variant::Extreme, 2, DEFAULT_EPSILON).unwrap();
        assert!((n - 0.6887218755408671).abs() < 1e-7, "normal {n}");
        assert!((e - 0.5849625007211562).abs() < 1e-7, "extreme {e}");
        assert!(e <= n);
    }

    #[test]
    fn dfi_identical_groups_is_one() {
        let ds = dataset(&[
            ("a", &[0.8, 0.9], &[0.1, 0.2]),
            ("b", &[0.8, 0.9], &[0.1, 0.2]),
        ]);
        assert_eq!(
            dfi(&ds, Variant::Normal, DEFAULT_BINS, DEFAULT_EPSILON).unwrap(),
            1.0
        );
        assert_eq!(
            dfi(&ds, Variant::Extreme, DEFAULT_BINS, DEFAULT_EPSILON).unwrap(),
            1.0
        );
    }

    #[test]
    fn split_divergence_hand_values() {
        let mk = |masses: &[f64]| EmpiricalDistribution::from_masses(masses.to_vec()).unwrap();
        let mean_tail = mk(&[0.7, 0.3]);
        let mean_center = mk(&[0.5, 0.5]);
        let w = TailWeighting::manual(0.8).unwrap();

        let group = SplitDistribution {
            center: mk(&[0.5, 0.5]),
            tail: mk(&[0.5, 0.5]),
            split_score: 0.5,
            split_percentile: 50.0,
            tail_direction: TailDirection::Right,
            tail_mass_raw: 0.5,
        };
        let s = split_divergence(&group, &mean_center, &mean_tail, &w, DEFAULT_EPSILON).unwrap();
        assert!((s - 0.10061550679838576).abs() < 1e-7, "got {s}");

        let group = SplitDistribution {
            tail: mk(&[0.9, 0.1]),
            ..group
        };
        let s = split_divergence(&group, &mean_center, &mean_tail, &w, DEFAULT_EPSILON).unwrap();
        assert!((s - 0.13425345709929745).abs() < 1e-7, "got {s}");
    }

    /// Two groups of 100 impostor scores whose 4-bin histograms split at the
    /// pooled median into equal centers and tails [0.5,0.5] vs [0.9,0.1].
    fn worked_cei_dataset() -> ScoreDataset {
        let mut i1 = Vec::new();
        i1.extend(repeat(0.1, 20));
        i1.extend(repeat(0.3, 20));
        i1.extend(repeat(0.5, 30));
        i1.extend(repeat(0.85, 30));
        let mut i2 = Vec::new();
        i2.extend(repeat(0.1, 5));
        i2.extend(repeat(0.3, 5));
        i2.extend(repeat(0.5, 81));
        i2.extend(repeat(0.85, 9));
        dataset(&[("g1", &[0.9], &i1), ("g2", &[0.9], &i2)])
    }

    fn worked_config(variant: Variant) -> CeiConfig {
        CeiConfig {
            mode: CeiMode::Manual {
                split_percentile: 50.0,
                weighting: TailWeighting::manual(0.8).unwrap(),
            },
            kind: Kind::Impostor,
            variant,
            bins: 4,
            epsilon: DEFAULT_EPSILON,
        }
    }

    #[test]
    fn cei_four_bin_hand_example() {
        let ds = worked_cei_dataset();
        let normal = cei(&ds, &worked_config(Variant::Normal)).unwrap();
        assert_eq!(normal.split_score_used, 0.5);
        assert!(
            (normal.value - 0.8825655180511584).abs() < 1e-7,
            "N {}",
            normal.value
        );
        assert!((normal.per_group_divergence["g1"] - 0.10061550679838576).abs() < 1e-7);
        assert!((normal.per_group_divergence["g2"] - 0.13425345709929745).abs() < 1e-7);

        let extreme = cei(&ds, &worked_config(Variant::Extreme)).unwrap();
        assert!(
            (extreme.value - 0.8657465429007026).abs() < 1e-7,
            "E {}",
            extreme.value
        );
        assert!(extreme.value <= normal.value);
    }

    #[test]
    fn cei_identical_groups_is_exactly_one() {
        let scores: Vec<f64> = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8];
        let ds = dataset(&[("a", &[0.9], &scores), ("b", &[0.9], &scores)]);
        for variant in [Variant::Normal, Variant::Extreme] {
            let mut config = worked_config(variant);
            config.bins = 10;
            let r = cei(&ds, &config).unwrap();
            assert_eq!(r.value, 1.0);
            assert!(r.clamp_flags.is_empty());
        }
    }

    #[test]
    fn cei_is_order_invariant() {
        let ds = worked_cei_dataset();
        let mut reversed_csv = String::from("score,label,group\n");
        let mut lines = Vec::new();
        for g in ds.groups() {
            for s in &g.genuine {
                lines.push(format!("{s},genuine,{}", g.group));
            }
            for s in &g.impostor {
                lines.push(format!("{s},impostor,{}", g.group));
            }
        }
        lines.reverse();
        reversed_csv.push_str(&lines.join("\n"));
        let ds_rev = parse_score_csv(reversed_csv.as_bytes()).unwrap();
        // Group discovery order differs; the metric must not.
        let a = cei(&ds, &worked_config(Variant::Normal)).unwrap();
        let b = cei(&ds_rev, &worked_config(Variant::Normal)).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.per_group_divergence, b.per_group_divergence);
    }

    #[test]
    fn cei_weight_extremes_ignore_the_other_part() {
        // With w_tail = 1, reshuffling center-only mass must not move the
        // value; with w_tail = 0, reshuffling tail-only mass must not.
        let base = worked_cei_dataset();
        let mut i2_center_shifted = Vec::new();
        i2_center_shifted.extend(repeat(0.1, 2));
        i2_center_shifted.extend(repeat(0.3, 8));
        i2_center_shifted.extend(repeat(0.5, 81));
        i2_center_shifted.extend(repeat(0.85, 9));
        let center_shifted = dataset(&[
            ("g1", &[0.9], &base.groups()[0].impostor),
            ("g2", &[0.9], &i2_center_shifted),
        ]);
        let mut config = worked_config(Variant::Normal);
        config.mode = CeiMode::Manual {
            split_percentile: 50.0,
            weighting: TailWeighting::manual(1.0).unwrap(),
        };
        let a = cei(&base, &config).unwrap();
        let b = cei(&center_shifted, &config).unwrap();
        assert_eq!(a.value, b.value);

        let mut i2_tail_shifted = Vec::new();
        i2_tail_shifted.extend(repeat(0.1, 5));
        i2_tail_shifted.extend(repeat(0.3, 5));
        i2_tail_shifted.extend(repeat(0.5, 81));
        i2_tail_shifted.extend(repeat(0.6, 4));
        i2_tail_shifted.extend(repeat(0.85, 5));
        let tail_shifted = dataset(&[
            ("g1", &[0.9], &base.groups()[0].impostor),
            ("g2", &[0.9], &i2_tail_shifted),
        ]);
        config.mode = CeiMode::Manual {
            split_percentile: 50.0,
            weighting: TailWeighting::manual(0.0).unwrap(),
        };
        let a = cei(&base, &config).unwrap();
        let b = cei(&tail_shifted, &config).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn cei_degenerate_split_names_group_and_kind() {
        let ds = dataset(&[
            ("alpha", &[0.9], &repeat(0.1, 10)),
            ("beta", &[0.9], &repeat(0.9, 10)),
        ]);
        let err = cei(&ds, &worked_config(Variant::Normal)).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("alpha") && msg.contains("impostor"),
            "got: {msg}"
        );
    }

    #[test]
    fn tail_deviation_matches_normal_reference() {
        // 27 of 10000 scores beyond mean + 3 sigma, twice the Gaussian mass.
        let mut scores = repeat(0.5, 9973);
        scores.extend(repeat(0.9, 27));
        let stats = SummaryStats {
            mean: 0.5,
            std_dev: 0.1,
            count: 10000,
            min: 0.5,
            max: 0.9,
        };
        let d = tail_deviation("g", &scores, 0.8, &stats, TailDirection::Right).unwrap();
        assert!((d.gaussian_tail_mass - 0.0013498980316300933).abs() < 1e-15);
        assert_eq!(d.empirical_tail_mass, 0.0027);
        assert!((d.delta - 1.0).abs() < 1e-3, "delta {}", d.delta);
        assert!((sigmoid(d.delta) - 0.7311).abs() < 1e-3);
    }

    #[test]
    fn tail_deviation_empty_tail_gives_minus_one() {
        let scores = repeat(0.5, 100);
        let stats = SummaryStats {
            mean: 0.5,
            std_dev: 0.1,
            count: 100,
            min: 0.5,
            max: 0.5,
        };
        let d = tail_deviation("g", &scores, 0.8, &stats, TailDirection::Right).unwrap();
        assert_eq!(d.delta, -1.0);
        assert!((sigmoid(d.delta) - 0.2689414213699951).abs() < 1e-12);
    }

    #[test]
    fn tail_deviation_rejects_unrepresentable_tail() {
        let scores = repeat(0.5, 10);
        let stats = SummaryStats {
            mean: 0.5,
            std_dev: 1e-5,
            count: 10,
            min: 0.5,
            max: 0.5,
        };
        assert!(matches!(
            tail_deviation("g", &scores, 1.0, &stats, TailDirection::Right),
            Err(Error::TailUnderflow)
        ));
    }

    #[test]
    fn auto_parameters_errors_when_tail_is_empty() {
        let cell: Vec<f64> = [0.4, 0.6].iter().cycle().take(50).copied().collect();
        let ds = dataset(&[("a", &[0.9], &cell), ("b", &[0.9], &cell)]);
        // Pooled impostors have mean 0.5, sigma 0.1; nothing lies beyond 0.8.
        let err = auto_parameters(&ds, Kind::Impostor, 3.0).unwrap_err();
        assert!(matches!(err, Error::NoTailMass { .. }));
    }

    #[test]
    fn auto_percentile_is_monotone_in_n_sigma() {
        let imp: Vec<f64> = (0..200).map(|i| 0.3 + 0.4 * (i as f64) / 199.0).collect();
        let ds = dataset(&[("a", &[0.9], &imp), ("b", &[0.9], &imp)]);
        let mut last = 0.0;
        for n_sigma in [0.25, 0.5, 0.75, 1.0] {
            let auto = auto_parameters(&ds, Kind::Impostor, n_sigma).unwrap();
            assert!(
                auto.split_percentile >= last,
                "percentile dropped at N={n_sigma}"
            );
            assert!(auto.weighting.tail() > 0.0);
            assert!(auto.weighting.tail() < auto.split_percentile / 100.0);
            last = auto.split_percentile;
        }
    }

    #[test]
    fn weighting_rejects_out_of_range() {
        assert!(TailWeighting::manual(1.2).is_err());
        assert!(TailWeighting::manual(-0.1).is_err());
        let w = TailWeighting::manual(0.8).unwrap();
        assert_eq!(w.center(), 1.0 - w.tail());
    }
}
