use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

/// How a text item is turned into a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingLevel {
    /// Context-free lookup of a word.
    Word,
    /// Encoding of the whole sequence.
    Sentence,
    /// Representation of one designated token inside a sentence.
    Cword,
}

impl EncodingLevel {
    pub const ALL: [EncodingLevel; 3] = [Self::Word, Self::Sentence, Self::Cword];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Word => "word",
            Self::Sentence => "sentence",
            Self::Cword => "cword",
        }
    }
}

impl fmt::Display for EncodingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncodingLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Self::Word),
            "sentence" => Ok(Self::Sentence),
            "cword" => Ok(Self::Cword),
            other => Err(Error::Schema(alloc::format!("unknown level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Gender,
    Race,
    Intersectional,
    Neutral,
    #[default]
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gender => "gender",
            Self::Race => "race",
            Self::Intersectional => "intersectional",
            Self::Neutral => "neutral",
            Self::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// NFC-normalised copy of `s`. All item keys go through this.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// A word or sentence, with an optional token of interest.
///
/// `focus_span` is a half-open range of Unicode scalar offsets into the
/// (normalised) text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TextItem {
    text: String,
    focus_span: Option<(usize, usize)>,
}

impl TextItem {
    pub fn new(text: &str) -> Self {
        TextItem {
            text: nfc(text),
            focus_span: None,
        }
    }

    pub fn with_focus(text: &str, start: usize, end: usize) -> Result<Self> {
        let item = TextItem {
            text: nfc(text),
            focus_span: Some((start, end)),
        };
        item.check_focus()?;
        Ok(item)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn focus_span(&self) -> Option<(usize, usize)> {
        self.focus_span
    }

    /// The characters covered by the focus span.
    pub fn focus_text(&self) -> Option<&str> {
        let (start, end) = self.focus_span?;
        let mut offsets = self.text.char_indices().map(|(i, _)| i).chain([self.text.len()]);
        let from = offsets.nth(start)?;
        let to = if end == start {
            from
        } else {
            offsets.nth(end - start - 1)?
        };
        Some(&self.text[from..to])
    }

    fn check_focus(&self) -> Result<()> {
        if let Some((start, end)) = self.focus_span {
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

#[derive(Debug, Clone, PartialEq)]
pub struct ItemSet {
    pub category_label: String,
    pub items: Vec<TextItem>,
}

impl ItemSet {
    pub fn new(category_label: &str, items: Vec<TextItem>) -> Self {
        ItemSet {
            category_label: String::from(category_label),
            items,
        }
    }

    pub fn from_words<S: AsRef<str>>(category_label: &str, words: &[S]) -> Self {
        Self::new(
            category_label,
            words.iter().map(|w| TextItem::new(w.as_ref())).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalancePolicy {
    #[default]
    Error,
    /// Drop tail items from the longer target list.
    Truncate,
}

/// Two target sets and two attribute sets, plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSpecification {
    pub id: String,
    pub level: EncodingLevel,
    pub category: Category,
    pub targ1: ItemSet,
    pub targ2: ItemSet,
    pub attr1: ItemSet,
    pub attr2: ItemSet,
}

impl TestSpecification {
    pub fn sets(&self) -> [(&'static str, &ItemSet); 4] {
        [
            ("targ1", &self.targ1),
            ("targ2", &self.targ2),
            ("attr1", &self.attr1),
            ("attr2", &self.attr2),
        ]
    }

    /// Applies the balance policy to unequal target lists.
    pub fn balance(&mut self, policy: BalancePolicy) -> Result<()> {
        let (n1, n2) = (self.targ1.len(), self.targ2.len());
        if n1 == n2 {
            return Ok(());
        }
        match policy {
            BalancePolicy::Error => Err(Error::UnbalancedTargets { targ1: n1, targ2: n2 }),
            BalancePolicy::Truncate => {
                let n = n1.min(n2);
                self.targ1.items.truncate(n);
                self.targ2.items.truncate(n);
                Ok(())
            }
        }
    }

    /// Checks every structural invariant a runnable test must satisfy.
    pub fn validate(&self) -> Result<()> {
        for (name, set) in self.sets() {
            if set.is_empty() {
                return Err(Error::Schema(alloc::format!("{name} has no examples")));
            }
            let mut seen = BTreeSet::new();
            for item in &set.items {
                if !seen.insert(item.text()) {
                    return Err(Error::DuplicateItem {
                        set: name,
                        item: item.text.clone(),
                    });
                }
                item.check_focus()?;
            }
        }
        if self.targ1.len() != self.targ2.len() {
            return Err(Error::UnbalancedTargets {
                targ1: self.targ1.len(),
                targ2: self.targ2.len(),
            });
        }
        if self.level == EncodingLevel::Cword {
            for item in self.targ1.items.iter().chain(&self.targ2.items) {
                if item.focus_span.is_none() {
                    return Err(Error::Schema(alloc::format!(
                        "cword-level target {:?} has no focus span",
                        item.text
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Sampled => "sampled",
        }
    }
}

/// Outcome of one association test for one model at one encoding level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationResult {
    pub test_id: String,
    pub model_id: String,
    pub level: EncodingLevel,
    pub category: Category,
    pub statistic: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub method: Method,
    pub n_samples: u64,
    pub seed: Option<u64>,
    pub significant: bool,
}

/// One-sided significance: small p and a positive effect.
pub fn is_significant(p_value: f64, effect_size: f64, alpha: f64) -> bool {
    p_value < alpha && effect_size > 0.0
}
