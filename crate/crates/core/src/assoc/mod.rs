//! Association statistic, effect size and permutation p-values.
//!
//! For targets `X`, `Y` and attributes `A`, `B`:
//!
//! ```text
//! s(w, A, B)    = mean_a cos(w, a) - mean_b cos(w, b)
//! s(X, Y, A, B) = sum_x s(x, A, B) - sum_y s(y, A, B)
//! p             = Pr[s(X_i, Y_i, A, B) > s(X, Y, A, B)]   over equal-size partitions of X ∪ Y
//! d             = (mean_x s(x, A, B) - mean_y s(y, A, B)) / std_w s(w, A, B)
//! ```
//!
//! The exact p-value enumerates every partition, including the observed
//! one, and counts strict exceedances. The sampled p-value draws
//! partitions with replacement and reports `(1 + hits) / (samples + 1)`.

mod permutation;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use self::permutation::{binomial, sample_partition, Parallelism, PooledScores, Serial};
use crate::{
    cosine, is_significant, AssociationResult, Error, Method, Result, TestSpecification,
    TextItem, Vector,
};

/// Denominator convention for the effect-size standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdMode {
    /// Divide by `N`.
    #[default]
    Population,
    /// Divide by `N - 1`.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    /// Largest pooled target count `2n` that is enumerated exactly.
    pub exact_limit: usize,
    pub n_samples: u64,
    pub seed: u64,
    pub alpha: f64,
    pub std_mode: StdMode,
}

impl PermutationConfig {
    pub const DEFAULT_EXACT_LIMIT: usize = 24;
    pub const DEFAULT_SAMPLES: u64 = 100_000;
    pub const DEFAULT_ALPHA: f64 = 0.01;
    pub const DEFAULT_SEED: u64 = 0x5eed_b1a5;

    pub fn validate(&self) -> Result<()> {
        if self.exact_limit < 2 || !self.exact_limit.is_multiple_of(2) {
            return Err(Error::InvalidConfig("exact_limit must be even and at least 2"));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            exact_limit: Self::DEFAULT_EXACT_LIMIT,
            n_samples: Self::DEFAULT_SAMPLES,
            seed: Self::DEFAULT_SEED,
            alpha: Self::DEFAULT_ALPHA,
            std_mode: StdMode::Population,
        }
    }
}

/// Exact permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactPValue {
    pub exceeding: u64,
    pub partitions: u64,
}

impl ExactPValue {
    pub fn p(&self) -> f64 {
        self.exceeding as f64 / self.partitions as f64
    }
}

/// Monte Carlo permutation p-value with add-one smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledPValue {
    pub exceeding: u64,
    pub n_samples: u64,
}

impl SampledPValue {
    pub fn p(&self) -> f64 {
        (1 + self.exceeding) as f64 / (self.n_samples + 1) as f64
    }
}

/// `mean_a cos(w, a) - mean_b cos(w, b)`.
pub fn association_diff(w: &Vector, a: &[Vector], b: &[Vector]) -> Result<f64> {
    Ok(mean_cosine(w, a)? - mean_cosine(w, b)?)
}

fn mean_cosine(w: &Vector, set: &[Vector]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for v in set {
        sum += cosine(w, v)?;
    }
    Ok(sum / set.len() as f64)
}

/// Per-target association scores for `X` and `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScores {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TargetScores {
    pub fn compute(x: &[Vector], y: &[Vector], a: &[Vector], b: &[Vector]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::UnequalTargetSizes {
                targ1: x.len(),
                targ2: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        let score = |w: &Vector| association_diff(w, a, b);
        Ok(TargetScores {
            x: x.iter().map(score).collect::<Result<_>>()?,
            y: y.iter().map(score).collect::<Result<_>>()?,
        })
    }

    pub fn pooled(&self) -> Result<PooledScores> {
        PooledScores::new(&self.x, &self.y)
    }

    pub fn effect_size(&self, mode: StdMode) -> Result<f64> {
        let n = self.x.len() as f64;
        let mean_x = self.x.iter().sum::<f64>() / n;
        let mean_y = self.y.iter().sum::<f64>() / n;
        let all = || self.x.iter().chain(&self.y);
        let total = 2.0 * n;
        let mean = all().sum::<f64>() / total;
        let ss: f64 = all().map(|s| (s - mean) * (s - mean)).sum();
        let denom = match mode {
            StdMode::Population => total,
            StdMode::Sample => total - 1.0,
        };
        let std = libm::sqrt(ss / denom);
        let scale = all().fold(0.0_f64, |m, s| m.max(s.abs()));
        if std == 0.0 || std <= 64.0 * f64::EPSILON * scale {
            return Err(Error::DegenerateDistribution);
        }
        Ok((mean_x - mean_y) / std)
    }
}

/// `sum_x s(x, A, B) - sum_y s(y, A, B)`.
pub fn test_statistic(x: &[Vector], y: &[Vector], a: &[Vector], b: &[Vector]) -> Result<f64> {
    Ok(TargetScores::compute(x, y, a, b)?.pooled()?.statistic())
}

pub fn effect_size(
    x: &[Vector],
    y: &[Vector],
    a: &[Vector],
    b: &[Vector],
    mode: StdMode,
) -> Result<f64> {
    TargetScores::compute(x, y, a, b)?.effect_size(mode)
}

pub fn p_value_exact(
    x: &[Vector],
    y: &[Vector],
    a: &[Vector],
    b: &[Vector],
    exact_limit: usize,
) -> Result<ExactPValue> {
    let pooled = TargetScores::compute(x, y, a, b)?.pooled()?;
    exact_with(&pooled, exact_limit, &Serial)
}

pub fn p_value_sampled(
    x: &[Vector],
    y: &[Vector],
    a: &[Vector],
    b: &[Vector],
    n_samples: u64,
    seed: u64,
) -> Result<SampledPValue> {
    let pooled = TargetScores::compute(x, y, a, b)?.pooled()?;
    sampled_with(&pooled, n_samples, seed, &Serial)
}

/// Exact enumeration, with the counting split by `par`.
pub fn exact_with(
    pooled: &PooledScores,
    exact_limit: usize,
    par: &dyn Parallelism,
) -> Result<ExactPValue> {
    let too_large = Error::TooLargeForExact {
        pooled: pooled.pooled(),
        limit: exact_limit,
    };
    if pooled.pooled() > exact_limit {
        return Err(too_large);
    }
    let partitions = pooled.partition_count().ok_or(too_large)?;
    let exceeding = par.sum_counts(partitions, &|r| pooled.count_exact_range(r));
    Ok(ExactPValue {
        exceeding,
        partitions,
    })
}

/// Monte Carlo estimate, with the sampling split by `par`.
pub fn sampled_with(
    pooled: &PooledScores,
    n_samples: u64,
    seed: u64,
    par: &dyn Parallelism,
) -> Result<SampledPValue> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be at least 1"));
    }
    let exceeding = par.sum_counts(n_samples, &|r| pooled.count_sampled_range(seed, r));
    Ok(SampledPValue {
        exceeding,
        n_samples,
    })
}

/// Resolves every item of `spec` and runs the full test serially.
pub fn run_test(
    spec: &TestSpecification,
    resolve: impl FnMut(&TextItem) -> Option<Vector>,
    config: &PermutationConfig,
    model_id: &str,
) -> Result<AssociationResult> {
    run_test_with(spec, resolve, config, model_id, &Serial)
}

pub fn run_test_with(
    spec: &TestSpecification,
    mut resolve: impl FnMut(&TextItem) -> Option<Vector>,
    config: &PermutationConfig,
    model_id: &str,
    par: &dyn Parallelism,
) -> Result<AssociationResult> {
    if spec.targ1.len() != spec.targ2.len() {
        return Err(Error::UnequalTargetSizes {
            targ1: spec.targ1.len(),
            targ2: spec.targ2.len(),
        });
    }
    config.validate()?;

    let mut missing: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut lookup = |items: &[TextItem]| -> Vec<Vector> {
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match resolve(item) {
                Some(v) => out.push(v),
                None => {
                    if seen.insert(String::from(item.text())) {
                        missing.push(String::from(item.text()));
                    }
                }
            }
        }
        out
    };
    let x = lookup(&spec.targ1.items);
    let y = lookup(&spec.targ2.items);
    let a = lookup(&spec.attr1.items);
    let b = lookup(&spec.attr2.items);
    if !missing.is_empty() {
        return Err(Error::MissingEmbedding(missing));
    }

    let scores = TargetScores::compute(&x, &y, &a, &b)?;
    let effect_size = scores.effect_size(config.std_mode)?;
    let pooled = scores.pooled()?;
    let (p_value, method, n_samples, seed) = if pooled.pooled() <= config.exact_limit {
        let exact = exact_with(&pooled, config.exact_limit, par)?;
        (exact.p(), Method::Exact, 0, None)
    } else {
        let sampled = sampled_with(&pooled, config.n_samples, config.seed, par)?;
        (sampled.p(), Method::Sampled, config.n_samples, Some(config.seed))
    };
    Ok(AssociationResult {
        test_id: spec.id.clone(),
        model_id: String::from(model_id),
        level: spec.level,
        category: spec.category,
        statistic: pooled.statistic(),
        effect_size,
        p_value,
        method,
        n_samples,
        seed,
        significant: is_significant(p_value, effect_size, config.alpha),
    })
}
