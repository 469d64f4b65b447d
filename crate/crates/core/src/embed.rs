//! In-memory embedding stores and item resolution.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::{mean_vector, nfc, EncodingLevel, Error, Result, TestSpecification, TextItem, Vector};

/// Model id under which word-vector files and their averaged sentence
/// encodings are exposed.
pub const CBOW_MODEL: &str = "cbow";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CasePolicy {
    Exact,
    /// Exact hit first, then the lowercased token.
    #[default]
    LowercaseFallback,
}

/// Context-free token vectors, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct WordStore {
    vectors: HashMap<String, Vector>,
    dim: Option<usize>,
    pub case_policy: CasePolicy,
}

impl WordStore {
    pub fn new(case_policy: CasePolicy) -> Self {
        WordStore {
            case_policy,
            ..Default::default()
        }
    }

    /// The first insert fixes the dimension.
    pub fn insert(&mut self, token: &str, vector: Vector) -> Result<()> {
        match self.dim {
            Some(d) if d != vector.dim() => {
                return Err(Error::DimDrift {
                    expected: d,
                    found: vector.dim(),
                })
            }
            None => self.dim = Some(vector.dim()),
            _ => {}
        }
        let token = nfc(token);
        if self.vectors.contains_key(&token) {
            return Err(Error::DuplicateToken(token));
        }
        self.vectors.insert(token, vector);
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&Vector> {
        if let Some(v) = self.vectors.get(token) {
            return Some(v);
        }
        match self.case_policy {
            CasePolicy::Exact => None,
            CasePolicy::LowercaseFallback => self.vectors.get(&token.to_lowercase()),
        }
    }
}

const CBOW_STRIP: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\''];

/// Lowercase, split on whitespace, strip `.,!?;:"'` from token edges.
pub fn cbow_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|t| t.trim_matches(CBOW_STRIP).to_lowercase())
        .filter(|t| !t.is_empty())
}

/// Mean of the in-vocabulary token vectors of `text`.
pub fn cbow_encode(text: &str, store: &WordStore) -> Result<Vector> {
    let vectors: Vec<Vector> = cbow_tokens(text)
        .filter_map(|t| store.get(&t).cloned())
        .collect();
    if vectors.is_empty() {
        return Err(Error::AllTokensOov(text.to_string()));
    }
    mean_vector(&vectors)
}

/// One line of the contextual interchange file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub model_id: String,
    pub level: EncodingLevel,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_span: Option<[usize; 2]>,
    pub vector: Vector,
}

impl EmbeddingRecord {
    pub fn validate(&self) -> Result<()> {
        if self.level == EncodingLevel::Cword && self.focus_span.is_none() {
            return Err(Error::Schema(alloc::format!(
                "cword record for {:?} has no focus_span",
                self.text
            )));
        }
        if let Some([start, end]) = self.focus_span {
            if start >= end || end > self.text.chars().count() {
                return Err(Error::InvalidFocusSpan {
                    item: self.text.clone(),
                    start,
                    end,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    text: String,
    level: EncodingLevel,
    model_id: String,
}

/// Encodings keyed by `(text, level, model_id)`, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct ContextualStore {
    records: Vec<EmbeddingRecord>,
    index: HashMap<Key, usize>,
    dims: BTreeMap<(String, EncodingLevel), usize>,
}

/// What happened to an inserted record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inserted {
    New,
    Deduplicated,
}

impl ContextualStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mut record: EmbeddingRecord) -> Result<Inserted> {
        record.validate()?;
        record.text = nfc(&record.text);
        let dim_key = (record.model_id.clone(), record.level);
        if let Some(&d) = self.dims.get(&dim_key) {
            if d != record.vector.dim() {
                return Err(Error::DimDrift {
                    expected: d,
                    found: record.vector.dim(),
                });
            }
        }
        let key = Key {
            text: record.text.clone(),
            level: record.level,
            model_id: record.model_id.clone(),
        };
        if let Some(&i) = self.index.get(&key) {
            if self.records[i].vector == record.vector {
                return Ok(Inserted::Deduplicated);
            }
            return Err(Error::ConflictingDuplicate {
                model_id: key.model_id,
                level: key.level,
                text: key.text,
            });
        }
        self.dims.insert(dim_key, record.vector.dim());
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(Inserted::New)
    }

    pub fn get(&self, text: &str, level: EncodingLevel, model_id: &str) -> Option<&Vector> {
        let key = Key {
            text: text.to_string(),
            level,
            model_id: model_id.to_string(),
        };
        self.index.get(&key).map(|&i| &self.records[i].vector)
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Dimension of every `(model_id, level)` present.
    pub fn dims(&self) -> &BTreeMap<(String, EncodingLevel), usize> {
        &self.dims
    }

    pub fn models(&self) -> BTreeSet<&str> {
        self.dims.keys().map(|(m, _)| m.as_str()).collect()
    }

    pub fn has_level(&self, model_id: &str, level: EncodingLevel) -> bool {
        self.dims.contains_key(&(model_id.to_string(), level))
    }
}

impl PartialEq for ContextualStore {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

/// The stores available for resolution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stores<'a> {
    pub word: Option<&'a WordStore>,
    pub contextual: Option<&'a ContextualStore>,
}

impl Stores<'_> {
    /// Looks up one item at `level` for `model_id`.
    ///
    /// Word level uses the word store for the `cbow` model; sentence level
    /// for `cbow` averages word vectors; everything else goes through the
    /// contextual store.
    pub fn lookup(&self, item: &TextItem, level: EncodingLevel, model_id: &str) -> Option<Vector> {
        let from_contextual = || {
            self.contextual
                .and_then(|c| c.get(item.text(), level, model_id))
                .cloned()
        };
        match (level, model_id == CBOW_MODEL) {
            (EncodingLevel::Word, true) => self.word.and_then(|w| w.get(item.text())).cloned(),
            (EncodingLevel::Sentence, true) => self
                .word
                .and_then(|w| cbow_encode(item.text(), w).ok())
                .or_else(from_contextual),
            _ => from_contextual(),
        }
    }

    /// Whether `model_id` can produce encodings at `level` at all.
    pub fn supports(&self, model_id: &str, level: EncodingLevel) -> bool {
        let contextual = self.contextual.is_some_and(|c| c.has_level(model_id, level));
        let word = model_id == CBOW_MODEL
            && self.word.is_some()
            && matches!(level, EncodingLevel::Word | EncodingLevel::Sentence);
        contextual || word
    }
}

/// Vectors for every item of `spec`, keyed by item text, or the full list
/// of items that could not be resolved.
pub fn resolve(
    spec: &TestSpecification,
    stores: &Stores<'_>,
    model_id: &str,
) -> Result<BTreeMap<String, Vector>> {
    let mut found = BTreeMap::new();
    let mut missing = Vec::new();
    for (_, set) in spec.sets() {
        for item in &set.items {
            if found.contains_key(item.text()) || missing.iter().any(|m| m == item.text()) {
                continue;
            }
            match stores.lookup(item, spec.level, model_id) {
                Some(v) => {
                    found.insert(item.text().to_string(), v);
                }
                None => missing.push(item.text().to_string()),
            }
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(Error::MissingEmbedding(missing))
    }
}
