//! Suite-level summaries: encoding overlap marks and significance
//! proportions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::testspec::family_stem;
use crate::{AssociationResult, Category, EncodingLevel, Error, Result};

/// Which encodings of one (test, model) pair reached significance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMark {
    CwordOnly,
    SentOnly,
    Both,
    Neither,
}

impl OverlapMark {
    pub fn tag(self) -> &'static str {
        match self {
            Self::CwordOnly => "cword-only",
            Self::SentOnly => "sent-only",
            Self::Both => "both",
            Self::Neither => "neither",
        }
    }
}

pub fn classify_overlap(cword: &AssociationResult, sent: &AssociationResult) -> Result<OverlapMark> {
    if cword.level != EncodingLevel::Cword || sent.level != EncodingLevel::Sentence {
        return Err(Error::MismatchedPair(format!(
            "expected cword and sentence levels, got {} and {}",
            cword.level, sent.level
        )));
    }
    if cword.model_id != sent.model_id {
        return Err(Error::MismatchedPair(format!(
            "models differ: {} vs {}",
            cword.model_id, sent.model_id
        )));
    }
    if family_stem(&cword.test_id) != family_stem(&sent.test_id) {
        return Err(Error::MismatchedPair(format!(
            "tests differ: {} vs {}",
            cword.test_id, sent.test_id
        )));
    }
    Ok(match (cword.significant, sent.significant) {
        (true, true) => OverlapMark::Both,
        (true, false) => OverlapMark::CwordOnly,
        (false, true) => OverlapMark::SentOnly,
        (false, false) => OverlapMark::Neither,
    })
}

/// A set of results sharing one significance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub alpha: f64,
    pub results: Vec<AssociationResult>,
}

impl SuiteResult {
    /// Rejects a second result for the same (test, model, level).
    pub fn new(alpha: f64, results: Vec<AssociationResult>) -> Result<Self> {
        let suite = SuiteResult { alpha, results };
        suite.validate()?;
        Ok(suite)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.results {
            if !seen.insert((r.test_id.as_str(), r.model_id.as_str(), r.level)) {
                return Err(Error::Schema(format!(
                    "duplicate result for ({}, {}, {})",
                    r.test_id, r.model_id, r.level
                )));
            }
        }
        Ok(())
    }

    /// Results in the stable report order: category, test, model, level.
    pub fn sorted(&self) -> Vec<&AssociationResult> {
        let mut rows: Vec<&AssociationResult> = self.results.iter().collect();
        rows.sort_by(|a, b| {
            (a.category, &a.test_id, &a.model_id, a.level)
                .cmp(&(b.category, &b.test_id, &b.model_id, b.level))
        });
        rows
    }

    /// Overlap marks for every (test family, model) with both a cword and
    /// a sentence result.
    pub fn overlaps(&self) -> Vec<OverlapEntry> {
        let mut pairs: BTreeMap<(String, String), [Option<&AssociationResult>; 2]> = BTreeMap::new();
        for r in &self.results {
            let slot = match r.level {
                EncodingLevel::Cword => 0,
                EncodingLevel::Sentence => 1,
                EncodingLevel::Word => continue,
            };
            let key = (family_stem(&r.test_id).to_string(), r.model_id.clone());
            pairs.entry(key).or_default()[slot] = Some(r);
        }
        pairs
            .into_iter()
            .filter_map(|((test, model_id), pair)| match pair {
                [Some(c), Some(s)] => classify_overlap(c, s).ok().map(|mark| OverlapEntry {
                    test,
                    model_id,
                    mark,
                }),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapEntry {
    pub test: String,
    pub model_id: String,
    pub mark: OverlapMark,
}

/// Significant-positive counts per (model, category).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetaTable {
    pub models: BTreeSet<String>,
    pub categories: BTreeSet<Category>,
    cells: BTreeMap<(String, Category), (u64, u64)>,
}

impl MetaTable {
    /// `(significant and positive, total)` for a cell.
    pub fn counts(&self, model_id: &str, category: Category) -> (u64, u64) {
        self.cells
            .get(&(model_id.to_string(), category))
            .copied()
            .unwrap_or((0, 0))
    }

    pub fn proportion(&self, model_id: &str, category: Category) -> Option<f64> {
        match self.counts(model_id, category) {
            (_, 0) => None,
            (hits, total) => Some(hits as f64 / total as f64),
        }
    }

    /// Two decimals, or an em dash for an empty group.
    pub fn cell_text(&self, model_id: &str, category: Category) -> String {
        match self.proportion(model_id, category) {
            Some(p) => format_proportion(p),
            None => "—".to_string(),
        }
    }
}

pub fn format_proportion(p: f64) -> String {
    format!("{p:.2}")
}

pub fn aggregate_meta(suite: &SuiteResult) -> MetaTable {
    let mut table = MetaTable::default();
    for r in &suite.results {
        table.models.insert(r.model_id.clone());
        table.categories.insert(r.category);
        let cell = table.cells.entry((r.model_id.clone(), r.category)).or_default();
        cell.1 += 1;
        if r.significant && r.effect_size > 0.0 {
            cell.0 += 1;
        }
    }
    table
}
