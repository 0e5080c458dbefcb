//! Decision-level error rates and their dispersion across groups: FMR/FNMR
//! at a threshold, threshold selection for a target FMR, and the Inequity
//! and GARBE summary statistics.

use crate::error::{Error, Result};
use crate::ingest::{Kind, ScoreDataset};

/// Default pooled false-match-rate target used to pick the operating
/// threshold.
pub const DEFAULT_TARGET_FMR: f64 = 3e-4;

/// Default floor applied to per-group rates before ratio statistics, so a
/// group with zero observed errors cannot zero out a geometric mean.
pub const DEFAULT_RATE_FLOOR: f64 = 1e-6;

/// False match rate: the fraction of impostor scores at or above the
/// threshold (an impostor scoring exactly at threshold is accepted).
pub fn fmr(impostor_scores: &[f64], threshold: f64) -> Result<f64> {
    if impostor_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let hits = impostor_scores.iter().filter(|&&s| s >= threshold).count();
    Ok(hits as f64 / impostor_scores.len() as f64)
}

/// False non-match rate: the fraction of genuine scores strictly below the
/// threshold. Complementary to [`fmr`] on the same scores, so the two rates
/// always sum to one when evaluated on a single score set.
pub fn fnmr(genuine_scores: &[f64], threshold: f64) -> Result<f64> {
    if genuine_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let misses = genuine_scores.iter().filter(|&&s| s < threshold).count();
    Ok(misses as f64 / genuine_scores.len() as f64)
}

/// A threshold chosen to meet a target false match rate, together with what
/// that threshold actually achieves on the calibration scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// The selected decision threshold.
    pub threshold: f64,
    /// FMR realized at `threshold` on the calibration scores. At most
    /// `target_fmr`, and usually below it on discrete data.
    pub achieved_fmr: f64,
    /// The requested rate.
    pub target_fmr: f64,
    /// True when there are fewer than `1 / target_fmr` impostor scores, so
    /// the empirical rate cannot resolve the target. The threshold is still
    /// produced; callers decide whether to trust it.
    pub under_resolved: bool,
}

/// Picks the smallest observed impostor score whose FMR is at or below
/// `target_fmr`. If even the largest score exceeds the target (a mass of
/// ties at the maximum), the threshold is placed just above the maximum,
/// where the FMR is zero.
pub fn threshold_at_fmr(impostor_scores: &[f64], target_fmr: f64) -> Result<OperatingPoint> {
    if impostor_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !target_fmr.is_finite() || target_fmr <= 0.0 || target_fmr >= 1.0 {
        return Err(Error::BadTargetFmr { value: target_fmr });
    }
    let mut sorted = impostor_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Slack keeps exactly representable targets (e.g. 0.1 on n = 1000) from
    // being rejected by rounding in n * target.
    let allowed = target_fmr * n as f64 + 1e-9;
    let mut threshold = None;
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        if (n - i) as f64 <= allowed {
            threshold = Some(v);
            break;
        }
        while i < n && sorted[i] == v {
            i += 1;
        }
    }
    let threshold = threshold.unwrap_or_else(|| next_above(sorted[n - 1]));
    let achieved_fmr = fmr(impostor_scores, threshold)?;
    Ok(OperatingPoint {
        threshold,
        achieved_fmr,
        target_fmr,
        under_resolved: (n as f64) < 1.0 / target_fmr,
    })
}

/// Smallest f64 strictly above a non-negative finite value.
fn next_above(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    f64::from_bits(x.to_bits() + 1)
}

/// Max-over-geometric-mean dispersion of per-group rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequity {
    /// max(rates) / geometric_mean(rates), after flooring. 1.0 means the
    /// groups are indistinguishable; it grows without bound as one group
    /// pulls away.
    pub value: f64,
    pub max_rate: f64,
    pub geometric_mean: f64,
    /// True when at least one rate was lifted to the floor. A flagged value
    /// is dominated by the floor choice, not by the data.
    pub floor_applied: bool,
}

/// Computes [`Inequity`] over per-group rates, lifting every rate to at
/// least `floor` (which must be positive) first.
pub fn inequity(rates: &[f64], floor: f64) -> Inequity {
    assert!(!rates.is_empty(), "inequity needs at least one rate");
    debug_assert!(floor > 0.0, "rate floor must be positive");
    let mut floor_applied = false;
    let floored: Vec<f64> = rates
        .iter()
        .map(|&r| {
            if r < floor {
                floor_applied = true;
                floor
            } else {
                r
            }
        })
        .collect();
    let max_rate = floored.iter().cloned().fold(f64::MIN, f64::max);
    let log_mean = floored.iter().map(|r| r.ln()).sum::<f64>() / floored.len() as f64;
    let geometric_mean = log_mean.exp();
    // The max is never below the geometric mean; only round-tripping the
    // mean through exp(ln) can push the ratio a hair under 1.
    Inequity {
        value: (max_rate / geometric_mean).max(1.0),
        max_rate,
        geometric_mean,
        floor_applied,
    }
}

/// Mean absolute pairwise gap between per-group rates, normalized by twice
/// the mean rate (the Gini mean difference of the rates). 0 when all groups
/// share one rate; defined as 0 when every rate is zero. Invariant under
/// scaling all rates by a common factor.
pub fn garbe(rates: &[f64]) -> f64 {
    assert!(!rates.is_empty(), "garbe needs at least one rate");
    let k = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / k;
    if mean == 0.0 {
        return 0.0;
    }
    let gap_sum: f64 = rates
        .iter()
        .flat_map(|&a| rates.iter().map(move |&b| (a - b).abs()))
        .sum();
    gap_sum / (2.0 * k * k * mean)
}

/// Error rates for one group at the common operating threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRates {
    pub group: String,
    pub fmr: f64,
    pub fnmr: f64,
}

/// The decision-level fairness summary at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReport {
    pub operating_point: OperatingPoint,
    /// Per-group rates, in dataset group order.
    pub rates: Vec<GroupRates>,
    pub fmr_inequity: Inequity,
    pub fnmr_inequity: Inequity,
    pub fmr_garbe: f64,
    pub fnmr_garbe: f64,
}

/// Calibrates a threshold on the pooled impostor scores, then evaluates
/// per-group FMR/FNMR and their dispersion statistics at that one shared
/// threshold. Sharing the threshold is the point: the dispersion measures
/// how differently a single deployed operating point treats each group.
pub fn outcome_suite(ds: &ScoreDataset, target_fmr: f64, floor: f64) -> Result<OutcomeReport> {
    let pooled_impostors = ds.pooled(Kind::Impostor);
    let operating_point = threshold_at_fmr(&pooled_impostors, target_fmr)?;
    let tau = operating_point.threshold;
    let mut rates = Vec::with_capacity(ds.k());
    for g in ds.groups() {
        let cell = |scores: &[f64], kind: Kind| {
            if scores.is_empty() {
                Err(Error::Validation(format!(
                    "group {} has no {} scores",
                    g.group,
                    kind.label()
                )))
            } else {
                Ok(())
            }
        };
        cell(&g.impostor, Kind::Impostor)?;
        cell(&g.genuine, Kind::Genuine)?;
        rates.push(GroupRates {
            group: g.group.clone(),
            fmr: fmr(&g.impostor, tau)?,
            fnmr: fnmr(&g.genuine, tau)?,
        });
    }
    let fmrs: Vec<f64> = rates.iter().map(|r| r.fmr).collect();
    let fnmrs: Vec<f64> = rates.iter().map(|r| r.fnmr).collect();
    Ok(OutcomeReport {
        operating_point,
        fmr_inequity: inequity(&fmrs, floor),
        fnmr_inequity: inequity(&fnmrs, floor),
        fmr_garbe: garbe(&fmrs),
        fnmr_garbe: garbe(&fnmrs),
        rates,
    })
}
