//! The shared numerical core: fixed-grid empirical distributions, mean
//! distributions, KL divergence, percentile/threshold machinery, and
//! tail/center splitting.
//!
//! Everything operates on histograms over a uniform grid on [0, 1]. A shared
//! fixed grid is what makes binwise mean distributions and part-vs-part KL
//! divergences well-defined.

use crate::error::{Error, Result};
use crate::ingest::SummaryStats;

/// Default number of histogram bins on [0, 1].
pub const DEFAULT_BINS: usize = 100;

/// Default additive smoothing applied to both operands of a KL divergence.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Which side of a distribution is treated as the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailDirection {
    Left,
    Right,
}

impl TailDirection {
    pub fn label(self) -> &'static str {
        match self {
            TailDirection::Left => "left",
            TailDirection::Right => "right",
        }
    }
}

/// A normalized histogram: `bin_edges` has one more entry than `masses`,
/// masses are non-negative and sum to one.
///
/// Freshly built histograms span [0, 1]; the parts produced by
/// [`split_distribution`] span a sub-range but keep the same uniform bin
/// width, so parts from different groups remain binwise comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    bin_edges: Vec<f64>,
    masses: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds a distribution over uniform bins on [0, 1] from explicit bin
    /// masses, which must be non-negative and sum to 1 within 1e-12.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::BadBinCount { bins: masses.len() });
        }
        if masses.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::BadMixture {
                detail: "histogram masses must be finite and non-negative".to_string(),
            });
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadMixture {
                detail: format!("histogram masses sum to {total}, expected 1"),
            });
        }
        let bins = masses.len();
        let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        Ok(EmpiricalDistribution { bin_edges, masses })
    }

    pub(crate) fn from_parts(bin_edges: Vec<f64>, masses: Vec<f64>) -> Self {
        debug_assert_eq!(bin_edges.len(), masses.len() + 1);
        EmpiricalDistribution { bin_edges, masses }
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of bins.
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.bin_edges == other.bin_edges
    }
}

/// Builds the empirical distribution of `scores` over `bins` uniform bins on
/// [0, 1]. Bin membership is `floor(score * bins)` with a score of exactly
/// 1.0 assigned to the last bin; masses are counts divided by n.
pub fn build_histogram(scores: &[f64], bins: usize) -> Result<EmpiricalDistribution> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if bins < 2 {
        return Err(Error::BadBinCount { bins });
    }
    let mut counts = vec![0u64; bins];
    for &s in scores {
        if !s.is_finite() || !(0.0..=1.0).contains(&s) {
            return Err(Error::ScoreOutOfDomain { value: s });
        }
        let idx = ((s * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = scores.len() as f64;
    let masses = counts.iter().map(|&c| c as f64 / n).collect();
    let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    Ok(EmpiricalDistribution::from_parts(bin_edges, masses))
}

/// Binwise arithmetic mean of distributions sharing one bin grid.
pub fn mean_distribution(dists: &[EmpiricalDistribution]) -> Result<EmpiricalDistribution> {
    let first = dists.first().ok_or(Error::EmptyScores)?;
    for d in &dists[1..] {
        if !d.same_grid(first) {
            return Err(Error::GridMismatch);
        }
    }
    let k = dists.len() as f64;
    let masses = (0..first.bins())
        .map(|b| dists.iter().map(|d| d.masses[b]).sum::<f64>() / k)
        .collect();
    Ok(EmpiricalDistribution::from_parts(
        first.bin_edges.clone(),
        masses,
    ))
}

/// Kullback-Leibler divergence D(p || q) in bits.
///
/// Both inputs are smoothed by adding `epsilon` to every bin and
/// renormalizing, which keeps the divergence finite when q has empty bins.
/// Base-2 logarithms are required for the log2(K)-normalized indices built
/// on top of this, which is what keeps them inside [0, 1].
pub fn kl_divergence(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    epsilon: f64,
) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::GridMismatch);
    }
    debug_assert!(epsilon > 0.0, "KL smoothing epsilon must be positive");
    let nb = p.bins() as f64;
    let norm = 1.0 + nb * epsilon;
    let mut sum = 0.0;
    for (pm, qm) in p.masses.iter().zip(&q.masses) {
        let pp = (pm + epsilon) / norm;
        let qq = (qm + epsilon) / norm;
        sum += pp * (pp / qq).log2();
    }
    // The true divergence is non-negative; only floating-point dust from the
    // summation can push it below zero.
    Ok(sum.max(0.0))
}

/// A mean-plus-N-sigma score threshold, clamped into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaThreshold {
    /// The usable threshold, inside [0, 1].
    pub value: f64,
    /// The unclamped mean ± N·sigma value.
    pub raw: f64,
    /// True when `raw` fell outside [0, 1]. Surfaced rather than silently
    /// absorbed so a saturated operating point is visible in reports.
    pub clamped: bool,
}

/// Threshold at N standard deviations from the mean, toward the tail:
/// mean + N·sigma for right tails, mean − N·sigma for left tails.
pub fn sigma_threshold(
    stats: &SummaryStats,
    n_sigma: f64,
    direction: TailDirection,
) -> Result<SigmaThreshold> {
    if !n_sigma.is_finite() || n_sigma <= 0.0 {
        return Err(Error::BadNSigma { value: n_sigma });
    }
    if stats.std_dev == 0.0 {
        return Err(Error::ZeroSigma);
    }
    let raw = match direction {
        TailDirection::Right => stats.mean + n_sigma * stats.std_dev,
        TailDirection::Left => stats.mean - n_sigma * stats.std_dev,
    };
    let value = raw.clamp(0.0, 1.0);
    Ok(SigmaThreshold {
        value,
        raw,
        clamped: value != raw,
    })
}

/// Percentage of scores on the center side of threshold `t`: scores ≤ t for
/// a right tail, scores ≥ t for a left tail. Under both conventions the tail
/// mass fraction is `1 − P(t)/100`, so "the 95th percentile" reads the same
/// for left-tail and right-tail analyses.
pub fn empirical_percentile(scores: &[f64], t: f64, direction: TailDirection) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let count = match direction {
        TailDirection::Right => scores.iter().filter(|&&s| s <= t).count(),
        TailDirection::Left => scores.iter().filter(|&&s| s >= t).count(),
    };
    Ok(100.0 * count as f64 / scores.len() as f64)
}

/// The score threshold realizing percentile `p` under the same center-side
/// convention as [`empirical_percentile`]: the smallest observed score whose
/// from-the-bottom count reaches n·p/100 for right tails, and the largest
/// observed score whose from-the-top count reaches it for left tails.
///
/// The count comparison carries a 1e-9 slack so that exactly-representable
/// percentiles (e.g. p = 95 on n = 100) are not pushed to the next order
/// statistic by floating-point rounding of n·p/100.
pub fn percentile_score(scores: &[f64], p: f64, direction: TailDirection) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !p.is_finite() || p <= 0.0 || p > 100.0 {
        return Err(Error::BadPercentile { value: p });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let need = (n as f64) * p / 100.0 - 1e-9;
    let k = (need.ceil().max(1.0) as usize).min(n);
    Ok(match direction {
        TailDirection::Right => sorted[k - 1],
        TailDirection::Left => sorted[n - k],
    })
}

/// A distribution partitioned at a score threshold into renormalized tail
/// and center parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDistribution {
    /// The center bins, renormalized to unit mass.
    pub center: EmpiricalDistribution,
    /// The tail bins, renormalized to unit mass.
    pub tail: EmpiricalDistribution,
    /// The score threshold the split was made at.
    pub split_score: f64,
    /// The percentile this threshold corresponds to.
    pub split_percentile: f64,
    pub tail_direction: TailDirection,
    /// Tail mass before renormalization; together with the parts this
    /// reconstructs the original distribution exactly.
    pub tail_mass_raw: f64,
}

/// Splits a distribution at `split_score`. Bin membership is decided by bin
/// edges: a bin belongs to a right tail when its lower edge is ≥ the split
/// score, and to a left tail when its upper edge is ≤ the split score. Both
/// parts are renormalized to unit mass.
pub fn split_distribution(
    dist: &EmpiricalDistribution,
    split_score: f64,
    direction: TailDirection,
    split_percentile: f64,
) -> Result<SplitDistribution> {
    let bins = dist.bins();
    let edges = &dist.bin_edges;
    // Number of bins in the part that starts at index 0.
    let (tail_bins, center_bins) = match direction {
        TailDirection::Right => {
            let tail_start = (0..bins).find(|&i| edges[i] >= split_score).unwrap_or(bins);
            (tail_start..bins, 0..tail_start)
        }
        TailDirection::Left => {
            let tail_len = (0..bins)
                .take_while(|&i| edges[i + 1] <= split_score)
                .count();
            (0..tail_len, tail_len..bins)
        }
    };
    let part =
        |range: std::ops::Range<usize>, name: &str| -> Result<(EmpiricalDistribution, f64)> {
            if range.is_empty() {
                return Err(Error::DegenerateSplit {
                    detail: format!("{name} side has no bins at split score {split_score}"),
                });
            }
            let masses = &dist.masses[range.clone()];
            let raw: f64 = masses.iter().sum();
            if raw <= 0.0 {
                return Err(Error::DegenerateSplit {
                    detail: format!("{name} side has zero mass at split score {split_score}"),
                });
            }
            let normalized = masses.iter().map(|&m| m / raw).collect();
            let part_edges = edges[range.start..=range.end].to_vec();
            Ok((
                EmpiricalDistribution::from_parts(part_edges, normalized),
                raw,
            ))
        };
    let (tail, tail_mass_raw) = part(tail_bins, "tail")?;
    let (center, _) = part(center_bins, "center")?;
    Ok(SplitDistribution {
        center,
        tail,
        split_score,
        split_percentile,
        tail_direction: direction,
        tail_mass_raw,
    })
}
