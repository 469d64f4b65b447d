//! Permutation machinery over pooled per-target association scores.
//!
//! Every partition statistic is computed from the pooled scores sorted by
//! value, summing each half in ascending order. The value of a partition
//! therefore depends only on the multiset of scores on each side, which
//! makes complementary partitions exact negations of one another and keeps
//! ties between equal-valued partitions exact.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Splits a counting job over `0..total` into pieces and adds the counts.
///
/// Implementations may run pieces concurrently. Counts are integers, so
/// any split gives the same total.
pub trait Parallelism {
    fn sum_counts(&self, total: u64, count: &(dyn Fn(Range<u64>) -> u64 + Sync)) -> u64;
}

/// Runs the whole range on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Parallelism for Serial {
    fn sum_counts(&self, total: u64, count: &(dyn Fn(Range<u64>) -> u64 + Sync)) -> u64 {
        count(0..total)
    }
}

/// Number of `k`-subsets of an `m`-set, if it fits in a `u64`.
pub fn binomial(m: u64, k: u64) -> Option<u64> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(m - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Per-target association scores `s(w, A, B)` for the pooled set `X ∪ Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledScores {
    /// Scores in ascending order.
    sorted: Vec<f64>,
    /// `observed[i]` is true when `sorted[i]` came from `X`.
    observed: Vec<bool>,
    half: usize,
    statistic: f64,
}

impl PooledScores {
    /// `x_scores` and `y_scores` must have equal, non-zero length.
    pub fn new(x_scores: &[f64], y_scores: &[f64]) -> Result<Self> {
        if x_scores.len() != y_scores.len() {
            return Err(Error::UnequalTargetSizes {
                targ1: x_scores.len(),
                targ2: y_scores.len(),
            });
        }
        if x_scores.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut tagged: Vec<(f64, bool)> = x_scores
            .iter()
            .map(|&s| (s, true))
            .chain(y_scores.iter().map(|&s| (s, false)))
            .collect();
        // Stable, so equal scores keep X before Y; irrelevant for the sums.
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sorted: Vec<f64> = tagged.iter().map(|t| t.0).collect();
        let observed: Vec<bool> = tagged.iter().map(|t| t.1).collect();
        let statistic = split_sum(&sorted, |i| observed[i]);
        Ok(PooledScores {
            sorted,
            observed,
            half: x_scores.len(),
            statistic,
        })
    }

    /// Size of each target set.
    pub fn half(&self) -> usize {
        self.half
    }

    pub fn pooled(&self) -> usize {
        self.sorted.len()
    }

    /// The observed test statistic.
    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    /// Statistic of the partition whose first half is `members`, given as
    /// positions into the sorted scores.
    pub fn partition_statistic(&self, in_first: &[bool]) -> f64 {
        split_sum(&self.sorted, |i| in_first[i])
    }

    /// Number of equal-size partitions.
    pub fn partition_count(&self) -> Option<u64> {
        binomial(self.pooled() as u64, self.half as u64)
    }

    /// Counts partitions with lexicographic rank in `ranks` whose statistic
    /// strictly exceeds the observed one.
    pub fn count_exact_range(&self, ranks: Range<u64>) -> u64 {
        if ranks.is_empty() {
            return 0;
        }
        let m = self.pooled();
        let k = self.half;
        let mut comb = unrank_combination(m, k, ranks.start);
        let mut mask = vec![false; m];
        for &c in &comb {
            mask[c] = true;
        }
        let mut hits = 0;
        let mut remaining = ranks.end - ranks.start;
        loop {
            if split_sum(&self.sorted, |i| mask[i]) > self.statistic {
                hits += 1;
            }
            remaining -= 1;
            if remaining == 0 || !next_combination(&mut comb, m, &mut mask) {
                break;
            }
        }
        hits
    }

    /// Counts sampled partitions in `samples` exceeding the observed
    /// statistic. Sample `i` depends only on `(seed, i)`.
    pub fn count_sampled_range(&self, seed: u64, samples: Range<u64>) -> u64 {
        let mut scratch = SampleScratch::new(self.pooled());
        samples
            .filter(|&i| {
                scratch.draw(seed, i, self.half);
                self.partition_statistic(&scratch.mask) > self.statistic
            })
            .count() as u64
    }

    /// `true` where position `i` of the sorted scores is in the first half of
    /// the observed partition.
    pub fn observed_mask(&self) -> &[bool] {
        &self.observed
    }
}

fn split_sum(sorted: &[f64], in_first: impl Fn(usize) -> bool) -> f64 {
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        if in_first(i) {
            first += s;
        } else {
            second += s;
        }
    }
    first - second
}

/// Draws the first-half membership mask for sample `index` under `seed`.
///
/// The stream for each sample is a ChaCha8 generator keyed by `seed` and
/// positioned on stream `index`, so samples can be computed in any order.
pub fn sample_partition(seed: u64, index: u64, pooled: usize, half: usize) -> Vec<bool> {
    let mut scratch = SampleScratch::new(pooled);
    scratch.draw(seed, index, half);
    scratch.mask
}

struct SampleScratch {
    perm: Vec<usize>,
    mask: Vec<bool>,
}

impl SampleScratch {
    fn new(pooled: usize) -> Self {
        SampleScratch {
            perm: (0..pooled).collect(),
            mask: vec![false; pooled],
        }
    }

    fn draw(&mut self, seed: u64, index: u64, half: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let m = self.perm.len();
        for (i, p) in self.perm.iter_mut().enumerate() {
            *p = i;
        }
        self.mask.fill(false);
        // Partial Fisher-Yates: the first `half` slots are a uniform subset.
        for i in 0..half {
            let j = rng.random_range(i..m);
            self.perm.swap(i, j);
            self.mask[self.perm[i]] = true;
        }
    }
}

/// The `rank`-th `k`-subset of `0..m` in lexicographic order.
fn unrank_combination(m: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut comb = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        loop {
            // Subsets that put `next` in this slot.
            let with = binomial((m - next - 1) as u64, (k - slot - 1) as u64).unwrap_or(u64::MAX);
            if rank < with {
                break;
            }
            rank -= with;
            next += 1;
        }
        comb.push(next);
        next += 1;
    }
    comb
}

/// Advances `comb` to its lexicographic successor, keeping `mask` in sync.
fn next_combination(comb: &mut [usize], m: usize, mask: &mut [bool]) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < m - k + i {
            for &c in &comb[i..] {
                mask[c] = false;
            }
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            for &c in &comb[i..] {
                mask[c] = true;
            }
            return true;
        }
    }
    false
}
