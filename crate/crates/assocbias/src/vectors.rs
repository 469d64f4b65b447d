//! Word-vector text files and the contextual JSONL interchange.

use std::io::{BufRead, Write};

use assocbias_core::embed::{CasePolicy, ContextualStore, EmbeddingRecord, WordStore};
use assocbias_core::Vector;

use crate::{Error, Result};

/// Reads `token f1 f2 ... fd` lines in one pass. Blank lines are skipped.
pub fn load_word_vectors<R: BufRead>(reader: R, case_policy: CasePolicy) -> Result<WordStore> {
    let mut store = WordStore::new(case_policy);
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Utf8 { line: lineno },
            _ => Error::Io(e),
        })?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        values.clear();
        for f in fields {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                column: None,
                message: format!("{f:?} is not a number"),
            })?;
            values.push(v);
        }
        let vector = Vector::new(values.clone()).map_err(|source| Error::AtLine { line: lineno, source })?;
        store
            .insert(token, vector)
            .map_err(|source| Error::AtLine { line: lineno, source })?;
    }
    Ok(store)
}

/// Reads newline-delimited [`EmbeddingRecord`]s. Blank lines are skipped.
pub fn load_contextual<R: BufRead>(reader: R) -> Result<ContextualStore> {
    let mut store = ContextualStore::new();
    load_contextual_into(reader, &mut store)?;
    Ok(store)
}

/// Adds records to an existing store, e.g. when several exports are used
/// together.
pub fn load_contextual_into<R: BufRead>(reader: R, store: &mut ContextualStore) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EmbeddingRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            column: Some(e.column()),
            message: e.to_string(),
        })?;
        store
            .insert(record)
            .map_err(|source| Error::AtLine { line: lineno, source })?;
    }
    Ok(())
}

/// Writes every record, one JSON object per line, in insertion order.
pub fn write_contextual<W: Write>(store: &ContextualStore, mut out: W) -> Result<()> {
    for record in store.records() {
        serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
