use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{nfc, Error, Result, TextItem};

pub const SLOT: &str = "[X]";
const ARTICLE_SLOT: &str = "a/an [X]";

/// Bleached carrier sentences for name targets.
pub const BLEACHED_NAME_TEMPLATES: [&str; 8] = [
    "This is [X].",
    "That is [X].",
    "There is [X].",
    "Here is [X].",
    "[X] is here.",
    "[X] is there.",
    "[X] is a person.",
    "The person's name is [X].",
];

/// Bleached carrier sentences for attribute words.
pub const BLEACHED_ATTRIBUTE_TEMPLATES: [&str; 3] = ["This is [X].", "That is [X].", "They are [X]."];

/// Unbleached double-bind targets, competence framing.
pub const UNBLEACHED_COMPETENT_TARGET: &str = "[X] is an engineer.";
/// Unbleached double-bind targets, likability framing.
pub const UNBLEACHED_LIKABLE_TARGET: &str = "[X] is an engineer with superior technical skills.";
/// Unbleached double-bind attributes (both framings).
pub const UNBLEACHED_ATTRIBUTE: &str = "The engineer is [X].";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Name,
    Attribute,
    GroupTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub slot_kind: SlotKind,
    pub templates: Vec<String>,
}

impl TemplateSet {
    pub fn new<S: AsRef<str>>(slot_kind: SlotKind, templates: &[S]) -> Result<Self> {
        let set = TemplateSet {
            slot_kind,
            templates: templates.iter().map(|t| nfc(t.as_ref())).collect(),
        };
        set.validate()?;
        Ok(set)
    }

    pub fn bleached_names() -> Self {
        Self::new(SlotKind::Name, &BLEACHED_NAME_TEMPLATES).expect("valid built-in templates")
    }

    pub fn bleached_attributes() -> Self {
        Self::new(SlotKind::Attribute, &BLEACHED_ATTRIBUTE_TEMPLATES)
            .expect("valid built-in templates")
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::EmptyInput);
        }
        for t in &self.templates {
            let slots = t.matches(SLOT).count();
            let punctuated = t.trim_end().ends_with(['.', '!', '?']);
            if slots != 1 || !punctuated {
                return Err(Error::BadTemplate {
                    template: t.clone(),
                    slots,
                });
            }
        }
        Ok(())
    }
}

/// Chooses between "a" and "an" for an `a/an [X]` slot.
///
/// The vowel rule applies unless the filler's first word starts with one
/// of the exceptions (compared case-insensitively).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRule {
    /// Consonant-initial words that take "an".
    pub force_an: Vec<String>,
    /// Vowel-initial words that take "a".
    pub force_a: Vec<String>,
}

impl Default for ArticleRule {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        ArticleRule {
            force_an: owned(&["honest", "hour", "heir"]),
            force_a: owned(&["unicorn", "user", "european"]),
        }
    }
}

impl ArticleRule {
    pub fn article_for(&self, filler: &str) -> &'static str {
        let word = filler.split_whitespace().next().unwrap_or("").to_lowercase();
        let starts = |list: &[String]| list.iter().any(|e| word.starts_with(&e.to_lowercase()));
        if starts(&self.force_an) {
            "an"
        } else if starts(&self.force_a) {
            "a"
        } else if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
            "an"
        } else {
            "a"
        }
    }
}

/// Fills every template with every filler, filler-major.
///
/// Each item's focus span covers exactly the inserted filler.
pub fn expand_templates<S: AsRef<str>>(
    ts: &TemplateSet,
    fillers: &[S],
    articles: &ArticleRule,
) -> Result<Vec<TextItem>> {
    ts.validate()?;
    if fillers.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = Vec::with_capacity(ts.templates.len() * fillers.len());
    for filler in fillers {
        let filler = nfc(filler.as_ref());
        for template in &ts.templates {
            out.push(fill(template, &filler, articles)?);
        }
    }
    Ok(out)
}

fn fill(template: &str, filler: &str, articles: &ArticleRule) -> Result<TextItem> {
    let (before, after) = if let Some(pos) = template.find(ARTICLE_SLOT) {
        let mut before = String::from(&template[..pos]);
        before.push_str(articles.article_for(filler));
        before.push(' ');
        (before, &template[pos + ARTICLE_SLOT.len()..])
    } else {
        let pos = template.find(SLOT).ok_or_else(|| Error::BadTemplate {
            template: template.to_string(),
            slots: 0,
        })?;
        (String::from(&template[..pos]), &template[pos + SLOT.len()..])
    };
    let start = before.chars().count();
    let end = start + filler.chars().count();
    let mut text = before;
    text.push_str(filler);
    text.push_str(after);
    TextItem::with_focus(&text, start, end)
}
