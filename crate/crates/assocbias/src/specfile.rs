//! JSON test specification files.
//!
//! ```json
//! {
//!   "targ1": {"category": "MaleNames", "examples": ["John", "Paul"]},
//!   "targ2": {"category": "FemaleNames", "examples": ["Amy", "Joan"]},
//!   "attr1": {"category": "Pleasant", "examples": ["joy"]},
//!   "attr2": {"category": "Unpleasant", "examples": ["agony"]},
//!   "level": "word"
//! }
//! ```
//!
//! Optional top-level keys: `id`, `level`, `category`, `balance`
//! (`"error"` or `"truncate"`) and `focus`, an object mapping set names to
//! one `[start, end]` character span per example. A set may also carry
//! its own `focus` list, which is the shape `expand` writes.

use std::collections::BTreeMap;

use assocbias_core::testspec::parse_test_name;
use assocbias_core::{
    BalancePolicy, Category, EncodingLevel, Error as CoreError, ItemSet, TestSpecification,
    TextItem,
};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SET_KEYS: [&str; 4] = ["targ1", "targ2", "attr1", "attr2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub category: String,
    pub examples: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<EncodingLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalancePolicy>,
    pub targ1: SetFile,
    pub targ2: SetFile,
    pub attr1: SetFile,
    pub attr2: SetFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus: Option<BTreeMap<String, Vec<[usize; 2]>>>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Used when the file has no `id`.
    pub id: Option<String>,
    /// Overrides the file's `balance` key.
    pub balance: Option<BalancePolicy>,
}

fn schema(msg: String) -> Error {
    Error::Core(CoreError::Schema(msg))
}

/// Parses, normalises and validates one specification.
pub fn load_spec(bytes: &[u8], options: &LoadOptions) -> Result<TestSpecification> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("top level must be a JSON object".into()))?;
    for key in SET_KEYS {
        match obj.get(key) {
            None => return Err(schema(format!("missing key {key:?}"))),
            Some(set) if set.get("examples").is_none() => {
                return Err(schema(format!("{key:?} has no \"examples\" list")))
            }
            _ => {}
        }
    }
    let file: SpecFile = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
    spec_from_file(file, options)
}

pub fn spec_from_file(file: SpecFile, options: &LoadOptions) -> Result<TestSpecification> {
    let id = file
        .id
        .clone()
        .or_else(|| options.id.clone())
        .unwrap_or_else(|| "unnamed".to_string());
    let level = file
        .level
        .or_else(|| parse_test_name(&id).ok().map(|info| info.level))
        .unwrap_or(EncodingLevel::Word);
    let mut top_focus = file.focus.clone().unwrap_or_default();
    if let Some(unknown) = top_focus.keys().find(|k| !SET_KEYS.contains(&k.as_str())) {
        return Err(schema(format!("focus names unknown set {unknown:?}")));
    }
    let mut build = |name: &str, set: &SetFile| -> Result<ItemSet> {
        if set.examples.is_empty() {
            return Err(schema(format!("{name:?} has an empty examples list")));
        }
        let focus = match (top_focus.remove(name), &set.focus) {
            (Some(_), Some(_)) => {
                return Err(schema(format!("focus for {name:?} given twice")));
            }
            (Some(f), None) => Some(f),
            (None, f) => f.clone(),
        };
        let items = match focus {
            None => set.examples.iter().map(|e| TextItem::new(e)).collect(),
            Some(spans) => {
                if spans.len() != set.examples.len() {
                    return Err(schema(format!(
                        "{name:?} has {} examples but {} focus spans",
                        set.examples.len(),
                        spans.len()
                    )));
                }
                set.examples
                    .iter()
                    .zip(spans)
                    .map(|(e, [s, t])| TextItem::with_focus(e, s, t))
                    .collect::<Result<_, _>>()?
            }
        };
        Ok(ItemSet::new(&set.category, items))
    };
    let mut spec = TestSpecification {
        id,
        level,
        category: file.category.unwrap_or_default(),
        targ1: build("targ1", &file.targ1)?,
        targ2: build("targ2", &file.targ2)?,
        attr1: build("attr1", &file.attr1)?,
        attr2: build("attr2", &file.attr2)?,
    };
    spec.balance(options.balance.or(file.balance).unwrap_or_default())?;
    spec.validate()?;
    Ok(spec)
}

fn set_file(set: &ItemSet) -> SetFile {
    let spans: Vec<Option<(usize, usize)>> = set.items.iter().map(|i| i.focus_span()).collect();
    let focus = spans
        .iter()
        .all(Option::is_some)
        .then(|| spans.iter().flatten().map(|&(s, e)| [s, e]).collect());
    SetFile {
        category: set.category_label.clone(),
        examples: set.items.iter().map(|i| i.text().to_string()).collect(),
        focus,
    }
}

pub fn to_spec_file(spec: &TestSpecification) -> SpecFile {
    SpecFile {
        id: Some(spec.id.clone()),
        level: Some(spec.level),
        category: Some(spec.category),
        balance: None,
        targ1: set_file(&spec.targ1),
        targ2: set_file(&spec.targ2),
        attr1: set_file(&spec.attr1),
        attr2: set_file(&spec.attr2),
        focus: None,
    }
}

pub fn serialize_spec(spec: &TestSpecification) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&to_spec_file(spec)).expect("spec files serialize");
    out.push(b'\n');
    out
}
