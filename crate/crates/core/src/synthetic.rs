//! Synthetic Beta-distributed score scenarios for validating metric
//! sensitivity.
//!
//! Each scenario generates K groups of genuine/impostor scores. All but one
//! group share baseline distributions; the remaining group deviates in a
//! controlled, localized way:
//!
//! * `BG` adds mass to the lower tail of the biased group's genuine scores
//!   (extra false non-matches) while moving its mean very little.
//! * `BI` adds mass to the upper tail of the biased group's impostor scores
//!   (extra false matches), again nearly mean-preserving.
//! * `BC` shifts the centers of both of the biased group's distributions
//!   toward each other while keeping tail decay comparable.
//! * `FAIR` draws every group from the baselines — the control case where
//!   every metric should report equity up to sampling noise.
//!
//! Tail-localized manipulations (BG/BI) are what outcome-rate and split-
//! distribution metrics should catch while whole-distribution comparisons
//! stay near their fair values; BC inverts that pattern.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::ingest::{GroupScores, Kind, ScoreDataset};

/// Default group count.
pub const DEFAULT_GROUPS: usize = 4;

/// Default sample count per (group, kind) cell.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 100_000;

/// Default generator seed.
pub const DEFAULT_SEED: u64 = 42;

/// The four generating scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fair,
    BiasedGenuine,
    BiasedImpostor,
    BiasedCenter,
}

impl Scenario {
    /// Short scenario code as used on the command line.
    pub fn code(self) -> &'static str {
        match self {
            Scenario::Fair => "FAIR",
            Scenario::BiasedGenuine => "BG",
            Scenario::BiasedImpostor => "BI",
            Scenario::BiasedCenter => "BC",
        }
    }

    pub fn from_code(code: &str) -> Result<Self> {
        match code.to_ascii_uppercase().as_str() {
            "FAIR" => Ok(Scenario::Fair),
            "BG" => Ok(Scenario::BiasedGenuine),
            "BI" => Ok(Scenario::BiasedImpostor),
            "BC" => Ok(Scenario::BiasedCenter),
            other => Err(Error::BadScenario {
                detail: format!("unknown scenario {other:?} (expected FAIR, BG, BI, or BC)"),
            }),
        }
    }
}

/// Shape parameters of one Beta component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::BadBetaShape { alpha, beta });
        }
        Ok(BetaParams { alpha, beta })
    }

    /// Distribution mean α/(α+β).
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// A finite mixture of Beta components. A single Beta is the one-component
/// case; mixtures are what let a scenario add tail mass without moving the
/// center, which no single Beta can do.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMixture {
    /// (weight, params) pairs; weights are positive and sum to 1.
    components: Vec<(f64, BetaParams)>,
}

impl BetaMixture {
    /// Builds a mixture from (weight, alpha, beta) triples.
    pub fn new(components: &[(f64, f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::BadMixture {
                detail: "mixture needs at least one component".to_string(),
            });
        }
        let mut built = Vec::with_capacity(components.len());
        let mut total = 0.0;
        for &(w, alpha, beta) in components {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::BadMixture {
                    detail: format!("component weight {w} must be positive"),
                });
            }
            total += w;
            built.push((w, BetaParams::new(alpha, beta)?));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadMixture {
                detail: format!("component weights sum to {total}, expected 1"),
            });
        }
        Ok(BetaMixture { components: built })
    }

    /// A single-component mixture.
    pub fn single(alpha: f64, beta: f64) -> Result<Self> {
        Ok(BetaMixture {
            components: vec![(1.0, BetaParams::new(alpha, beta)?)],
        })
    }

    pub fn components(&self) -> &[(f64, BetaParams)] {
        &self.components
    }

    /// Mixture mean: weight-averaged component means.
    pub fn mean(&self) -> f64 {
        self.components.iter().map(|(w, p)| w * p.mean()).sum()
    }

    fn sample(&self, n: usize, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
        let samplers = self
            .components
            .iter()
            .map(|&(w, p)| {
                Beta::new(p.alpha, p.beta)
                    .map(|b| (w, b))
                    .map_err(|_| Error::BadBetaShape {
                        alpha: p.alpha,
                        beta: p.beta,
                    })
            })
            .collect::<Result<Vec<(f64, Beta<f64>)>>>()?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = &samplers[samplers.len() - 1].1;
            for (w, b) in &samplers {
                acc += w;
                if u < acc {
                    chosen = b;
                    break;
                }
            }
            out.push(chosen.sample(rng));
        }
        Ok(out)
    }
}

/// Complete description of one synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n_groups: usize,
    /// Which group deviates (ignored for FAIR).
    pub biased_group_index: usize,
    pub samples_per_cell: usize,
    pub seed: u64,
    pub baseline_genuine: BetaMixture,
    pub baseline_impostor: BetaMixture,
    pub biased_genuine: BetaMixture,
    pub biased_impostor: BetaMixture,
}

impl ScenarioSpec {
    /// A spec with the built-in distribution parameters for `scenario`.
    ///
    /// The baselines model a high-performing verification system: genuine
    /// scores concentrated near 0.8–0.9, impostor scores mirrored near
    /// 0.1–0.2, each with a small secondary bump that gives the far tail
    /// enough structure for split-distribution analysis to resolve. BG/BI
    /// reallocate 8% of the biased group's mass into the error-side tail
    /// (mean shift under 0.06); BC shifts both of the biased group's
    /// centers by roughly 0.15 while leaving the far tails thin.
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        let baseline_genuine = BetaMixture::new(&[(0.98, 12.0, 2.0), (0.02, 123.0, 150.0)])
            .expect("baseline genuine parameters are valid");
        let baseline_impostor = BetaMixture::new(&[(0.98, 2.0, 12.0), (0.02, 150.0, 123.0)])
            .expect("baseline impostor parameters are valid");
        let biased_genuine = match scenario {
            Scenario::BiasedGenuine => BetaMixture::new(&[
                (0.9016, 12.0, 2.0),
                (0.0184, 123.0, 150.0),
                (0.08, 1.0, 8.0),
            ])
            .expect("BG genuine parameters are valid"),
            Scenario::BiasedCenter => BetaMixture::new(&[(0.98, 35.5, 14.5), (0.02, 123.0, 150.0)])
                .expect("BC genuine parameters are valid"),
            _ => baseline_genuine.clone(),
        };
        let biased_impostor = match scenario {
            Scenario::BiasedImpostor => BetaMixture::new(&[
                (0.9016, 2.0, 12.0),
                (0.0184, 150.0, 123.0),
                (0.08, 20.0, 4.0),
            ])
            .expect("BI impostor parameters are valid"),
            Scenario::BiasedCenter => BetaMixture::new(&[(0.98, 14.5, 35.5), (0.02, 150.0, 123.0)])
                .expect("BC impostor parameters are valid"),
            _ => baseline_impostor.clone(),
        };
        ScenarioSpec {
            scenario,
            n_groups: DEFAULT_GROUPS,
            biased_group_index: 0,
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
            seed,
            baseline_genuine,
            baseline_impostor,
            biased_genuine,
            biased_impostor,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_groups < 2 {
            return Err(Error::BadScenario {
                detail: format!("n_groups must be at least 2 (got {})", self.n_groups),
            });
        }
        if self.biased_group_index >= self.n_groups {
            return Err(Error::BadScenario {
                detail: format!(
                    "biased_group_index {} out of range for {} groups",
                    self.biased_group_index, self.n_groups
                ),
            });
        }
        if self.samples_per_cell == 0 {
            return Err(Error::BadScenario {
                detail: "samples_per_cell must be at least 1".to_string(),
            });
        }
        Ok(())
    }

    /// The mixture generating one (group, kind) cell.
    fn mixture_for(&self, group_index: usize, kind: Kind) -> &BetaMixture {
        let biased = group_index == self.biased_group_index;
        match (kind, self.scenario) {
            (Kind::Genuine, Scenario::BiasedGenuine | Scenario::BiasedCenter) if biased => {
                &self.biased_genuine
            }
            (Kind::Impostor, Scenario::BiasedImpostor | Scenario::BiasedCenter) if biased => {
                &self.biased_impostor
            }
            (Kind::Genuine, _) => &self.baseline_genuine,
            (Kind::Impostor, _) => &self.baseline_impostor,
        }
    }
}

/// SplitMix64 finalizer: a bijective avalanche mix.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-cell seed derived from (seed, group, kind) only — independent of the
/// group count and of generation order, so cell (g, kind) reproduces
/// identically whether K is 2 or 20.
fn cell_seed(seed: u64, group_index: usize, kind: Kind) -> u64 {
    let kind_tag: u64 = match kind {
        Kind::Genuine => 1,
        Kind::Impostor => 2,
    };
    mix64(seed ^ mix64(((group_index as u64) << 2) | kind_tag))
}

/// Draws `n` scores from Beta(alpha, beta), deterministically for a fixed
/// seed.
pub fn beta_sample(alpha: f64, beta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::BadScenario {
            detail: "sample count must be at least 1".to_string(),
        });
    }
    let mixture = BetaMixture::single(alpha, beta)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    mixture.sample(n, &mut rng)
}

/// Generates the full K-group dataset described by `spec`. Groups are named
/// `G0`, `G1`, … in index order.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<ScoreDataset> {
    spec.validate()?;
    let mut groups = Vec::with_capacity(spec.n_groups);
    for g in 0..spec.n_groups {
        let cell = |kind: Kind| -> Result<Vec<f64>> {
            let mut rng = ChaCha12Rng::seed_from_u64(cell_seed(spec.seed, g, kind));
            spec.mixture_for(g, kind)
                .sample(spec.samples_per_cell, &mut rng)
        };
        groups.push(GroupScores {
            group: format!("G{g}"),
            genuine: cell(Kind::Genuine)?,
            impostor: cell(Kind::Impostor)?,
        });
    }
    ScoreDataset::from_groups(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_sample_is_deterministic_per_seed() {
        let a = beta_sample(8.0, 2.0, 100, 7).unwrap();
        let b = beta_sample(8.0, 2.0, 100, 7).unwrap();
        assert_eq!(a, b);
        let c = beta_sample(8.0, 2.0, 100, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn beta_sample_matches_analytic_means() {
        let uniform = beta_sample(1.0, 1.0, 20_000, 3).unwrap();
        let mean = uniform.iter().sum::<f64>() / uniform.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "Beta(1,1) mean {mean}");

        let skewed = beta_sample(8.0, 2.0, 20_000, 3).unwrap();
        let mean = skewed.iter().sum::<f64>() / skewed.len() as f64;
        assert!((mean - 0.8).abs() < 0.005, "Beta(8,2) mean {mean}");
    }

    #[test]
    fn beta_sample_stays_in_unit_interval() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 8.0), (12.0, 2.0)] {
            let scores = beta_sample(a, b, 5_000, 11).unwrap();
            assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
        }
    }

    #[test]
    fn beta_sample_rejects_bad_shapes() {
        assert!(matches!(
            beta_sample(0.0, 2.0, 10, 1),
            Err(Error::BadBetaShape { .. })
        ));
        assert!(matches!(
            beta_sample(2.0, -1.0, 10, 1),
            Err(Error::BadBetaShape { .. })
        ));
        assert!(beta_sample(2.0, 2.0, 0, 1).is_err());
    }

    fn small_spec(scenario: Scenario) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(scenario, 5);
        spec.samples_per_cell = 20_000;
        spec
    }

    #[test]
    fn generation_is_deterministic() {
        let ds1 = generate_scenario(&small_spec(Scenario::BiasedGenuine)).unwrap();
        let ds2 = generate_scenario(&small_spec(Scenario::BiasedGenuine)).unwrap();
        for (a, b) in ds1.groups().iter().zip(ds2.groups()) {
            assert_eq!(a.group, b.group);
            assert_eq!(a.genuine, b.genuine);
            assert_eq!(a.impostor, b.impostor);
        }
    }

    #[test]
    fn cells_do_not_depend_on_group_count() {
        let mut two = small_spec(Scenario::Fair);
        two.n_groups = 2;
        let mut four = small_spec(Scenario::Fair);
        four.n_groups = 4;
        let ds2 = generate_scenario(&two).unwrap();
        let ds4 = generate_scenario(&four).unwrap();
        for g in 0..2 {
            assert_eq!(ds2.groups()[g].genuine, ds4.groups()[g].genuine);
            assert_eq!(ds2.groups()[g].impostor, ds4.groups()[g].impostor);
        }
    }

    fn cell_mean(scores: &[f64]) -> f64 {
        scores.iter().sum::<f64>() / scores.len() as f64
    }

    #[test]
    fn fair_scenario_groups_are_exchangeable() {
        let ds = generate_scenario(&small_spec(Scenario::Fair)).unwrap();
        assert_eq!(ds.k(), DEFAULT_GROUPS);
        let means: Vec<f64> = ds.groups().iter().map(|g| cell_mean(&g.genuine)).collect();
        for m in &means {
            assert!((m - means[0]).abs() < 0.01, "FAIR genuine means {means:?}");
        }
        // Different cells still hold different draws.
        assert_ne!(ds.groups()[0].genuine, ds.groups()[1].genuine);
    }

    #[test]
    fn bg_shifts_only_the_biased_genuine_cell() {
        let ds = generate_scenario(&small_spec(Scenario::BiasedGenuine)).unwrap();
        let biased = &ds.groups()[0];
        let reference = &ds.groups()[1];
        // The biased genuine mean drops, but only a little: the deviation
        // lives in the lower tail.
        let shift = cell_mean(&reference.genuine) - cell_mean(&biased.genuine);
        assert!(
            shift > 0.03 && shift < 0.09,
            "BG genuine mean shift {shift}"
        );
        // Lower-tail mass is where the manipulation concentrates.
        let tail_frac = |scores: &[f64]| {
            scores.iter().filter(|&&s| s < 0.5).count() as f64 / scores.len() as f64
        };
        assert!(tail_frac(&biased.genuine) > 4.0 * tail_frac(&reference.genuine));
        // The impostor side is untouched.
        let imp_shift = (cell_mean(&biased.impostor) - cell_mean(&reference.impostor)).abs();
        assert!(imp_shift < 0.01, "BG impostor mean shift {imp_shift}");
    }

    #[test]
    fn bi_shifts_only_the_biased_impostor_cell() {
        let ds = generate_scenario(&small_spec(Scenario::BiasedImpostor)).unwrap();
        let biased = &ds.groups()[0];
        let reference = &ds.groups()[1];
        let shift = cell_mean(&biased.impostor) - cell_mean(&reference.impostor);
        assert!(
            shift > 0.03 && shift < 0.09,
            "BI impostor mean shift {shift}"
        );
        let gen_shift = (cell_mean(&biased.genuine) - cell_mean(&reference.genuine)).abs();
        assert!(gen_shift < 0.01, "BI genuine mean shift {gen_shift}");
    }

    #[test]
    fn bc_shifts_both_centers_of_the_biased_group() {
        let ds = generate_scenario(&small_spec(Scenario::BiasedCenter)).unwrap();
        let biased = &ds.groups()[0];
        let reference = &ds.groups()[1];
        let gen_shift = cell_mean(&reference.genuine) - cell_mean(&biased.genuine);
        let imp_shift = cell_mean(&biased.impostor) - cell_mean(&reference.impostor);
        assert!(gen_shift > 0.1, "BC genuine center shift {gen_shift}");
        assert!(imp_shift > 0.1, "BC impostor center shift {imp_shift}");
    }

    #[test]
    fn spec_validation_rejects_bad_indices() {
        let mut spec = small_spec(Scenario::Fair);
        spec.biased_group_index = 4;
        assert!(matches!(
            generate_scenario(&spec),
            Err(Error::BadScenario { .. })
        ));
        let mut spec = small_spec(Scenario::Fair);
        spec.n_groups = 1;
        assert!(generate_scenario(&spec).is_err());
        let mut spec = small_spec(Scenario::Fair);
        spec.samples_per_cell = 0;
        assert!(generate_scenario(&spec).is_err());
    }

    #[test]
    fn mixture_validation() {
        assert!(BetaMixture::new(&[]).is_err());
        assert!(BetaMixture::new(&[(0.5, 2.0, 2.0)]).is_err()); // weights sum to 0.5
        assert!(BetaMixture::new(&[(1.0, -2.0, 2.0)]).is_err());
        let mix = BetaMixture::new(&[(0.5, 8.0, 2.0), (0.5, 2.0, 8.0)]).unwrap();
        assert!((mix.mean() - 0.5).abs() < 1e-12);
    }
}
