//! Output formats for suite results.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use assocbias_core::report::{aggregate_meta, SuiteResult};
use assocbias_core::{AssociationResult, Category, EncodingLevel};

use crate::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "category",
    "test_id",
    "model_id",
    "level",
    "statistic",
    "effect_size",
    "p_value",
    "method",
    "n_samples",
    "significant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Markdown,
    Json,
}

pub fn render(suite: &SuiteResult, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => render_csv(suite),
        Format::Markdown => render_markdown(suite).into_bytes(),
        Format::Json => render_json(suite),
    }
}

/// One row per result in report order. Floats use the shortest text that
/// reads back to the same value.
pub fn render_csv(suite: &SuiteResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in suite.sorted() {
        w.write_record([
            r.category.as_str().to_string(),
            r.test_id.clone(),
            r.model_id.clone(),
            r.level.as_str().to_string(),
            r.statistic.to_string(),
            r.effect_size.to_string(),
            r.p_value.to_string(),
            r.method.as_str().to_string(),
            r.n_samples.to_string(),
            r.significant.to_string(),
        ])
        .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn render_json(suite: &SuiteResult) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(suite).expect("results serialize");
    out.push(b'\n');
    out
}

pub fn parse_suite_json(bytes: &[u8]) -> Result<SuiteResult> {
    let suite: SuiteResult = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    suite.validate()?;
    Ok(suite)
}

/// Effect size to two places, starred when significant.
pub fn effect_cell(r: &AssociationResult) -> String {
    format!("{:+.2}{}", r.effect_size, if r.significant { "*" } else { "" })
}

/// Per-category effect-size tables, encoding overlap marks and the share
/// of significant positive results per model and category.
pub fn render_markdown(suite: &SuiteResult) -> String {
    let rows = suite.sorted();
    let mut out = String::new();
    let _ = writeln!(out, "# Association tests\n");
    let _ = writeln!(out, "Effect sizes; `*` marks p < {} with a positive effect.\n", suite.alpha);

    let categories: BTreeSet<Category> = rows.iter().map(|r| r.category).collect();
    for category in categories {
        let in_cat: Vec<&AssociationResult> = rows.iter().copied().filter(|r| r.category == category).collect();
        let columns: BTreeSet<(&str, EncodingLevel)> =
            in_cat.iter().map(|r| (r.model_id.as_str(), r.level)).collect();
        let tests: Vec<&str> = {
            let mut seen = BTreeSet::new();
            in_cat.iter().map(|r| r.test_id.as_str()).filter(|t| seen.insert(*t)).collect()
        };
        let _ = writeln!(out, "## {category}\n");
        let mut header = String::from("| test |");
        let mut rule = String::from("|---|");
        for (model, level) in &columns {
            let _ = write!(header, " {model} ({level}) |");
            rule.push_str("---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for test in tests {
            let mut line = format!("| {test} |");
            for (model, level) in &columns {
                let cell = in_cat
                    .iter()
                    .find(|r| r.test_id == test && r.model_id == *model && r.level == *level)
                    .map_or_else(String::new, |r| effect_cell(r));
                let _ = write!(line, " {cell} |");
            }
            let _ = writeln!(out, "{line}");
        }
        out.push('\n');
    }

    let overlaps = suite.overlaps();
    if !overlaps.is_empty() {
        let _ = writeln!(out, "## Encoding overlap\n\n| test | model | significant in |\n|---|---|---|");
        for o in overlaps {
            let _ = writeln!(out, "| {} | {} | {} |", o.test, o.model_id, o.mark.tag());
        }
        out.push('\n');
    }

    let meta = aggregate_meta(suite);
    if !meta.models.is_empty() {
        let _ = writeln!(out, "## Share significant and positive\n");
        let mut header = String::from("| model |");
        let mut rule = String::from("|---|");
        for c in &meta.categories {
            let _ = write!(header, " {c} |");
            rule.push_str("---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for model in &meta.models {
            let mut line = format!("| {model} |");
            for c in &meta.categories {
                let _ = write!(line, " {} |", meta.cell_text(model, *c));
            }
            let _ = writeln!(out, "{line}");
        }
    }
    out
}
