//! Template and filler files for `expand`.
//!
//! A template file is `{"slot_kind": "name", "templates": ["This is [X]."]}`.
//! A filler file is either a bare JSON array of strings or a set object
//! `{"category": "...", "examples": [...]}`.

use assocbias_core::testspec::{expand_templates, ArticleRule, TemplateSet};
use serde::Deserialize;

use crate::specfile::SetFile;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
enum FillerFile {
    List(Vec<String>),
    Set { category: String, examples: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fillers {
    pub category: Option<String>,
    pub words: Vec<String>,
}

pub fn parse_templates(bytes: &[u8]) -> Result<TemplateSet> {
    let ts: TemplateSet = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    Ok(TemplateSet::new(ts.slot_kind, &ts.templates)?)
}

pub fn parse_fillers(bytes: &[u8]) -> Result<Fillers> {
    let file: FillerFile = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    Ok(match file {
        FillerFile::List(words) => Fillers { category: None, words },
        FillerFile::Set { category, examples } => Fillers {
            category: Some(category),
            words: examples,
        },
    })
}

/// Expands into a set fragment whose `focus` marks each filler.
pub fn expand_set(templates: &TemplateSet, fillers: &Fillers, category: &str) -> Result<SetFile> {
    let items = expand_templates(templates, &fillers.words, &ArticleRule::default())?;
    Ok(SetFile {
        category: category.to_string(),
        focus: Some(
            items
                .iter()
                .map(|i| {
                    let (s, e) = i.focus_span().expect("expanded items carry a focus span");
                    [s, e]
                })
                .collect(),
        ),
        examples: items.into_iter().map(|i| i.text().to_string()).collect(),
    })
}
