//! Corpus input, lexicon files, chunked parallel scanning and the
//! occurrence table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use assocbias_core::corpus::{
    ClassPolicy, CooccurrenceReport, Counter, OccupationLexicon, PronounClass, PronounLexicon,
};
use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::parallel::Workers;
use crate::{Error, Result};

/// Bytes read per block; each block is cut at a newline.
const BLOCK: usize = 16 << 20;
/// Target size of the pieces a block is split into for the workers.
const PIECE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronounFile {
    pub male: Vec<String>,
    pub female: Vec<String>,
    pub collective: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationFile {
    pub male_stereotyped: Vec<String>,
    pub female_stereotyped: Vec<String>,
}

pub fn parse_pronouns(bytes: &[u8]) -> Result<PronounLexicon> {
    let f: PronounFile = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    Ok(PronounLexicon::new(&f.male, &f.female, &f.collective)?)
}

pub fn parse_occupations(bytes: &[u8]) -> Result<OccupationLexicon> {
    let f: OccupationFile = serde_json::from_slice(bytes).map_err(|e| Error::json(&e))?;
    Ok(OccupationLexicon::new(&f.male_stereotyped, &f.female_stereotyped)?)
}

/// Opens a corpus file, transparently decompressing gzip input.
pub fn open_corpus(path: &Path) -> Result<Box<dyn Read + Send>> {
    let mut reader = BufReader::new(File::open(path)?);
    let gz = reader.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    Ok(if gz {
        Box::new(MultiGzDecoder::new(reader))
    } else {
        Box::new(reader)
    })
}

/// Scans one sentence per line. Pieces of the input are counted on the
/// workers and merged in input order.
pub fn scan_reader<R: Read>(mut reader: R, counter: &Counter, workers: &Workers) -> Result<CooccurrenceReport> {
    let mut report = counter.empty_report();
    let mut carry: Vec<u8> = Vec::new();
    let mut next_line = 1usize;
    let mut buf = vec![0u8; BLOCK];
    loop {
        let n = read_full(&mut reader, &mut buf)?;
        let eof = n == 0;
        carry.extend_from_slice(&buf[..n]);
        let cut = if eof {
            carry.len()
        } else {
            match carry.iter().rposition(|&b| b == b'\n') {
                Some(p) => p + 1,
                None => continue,
            }
        };
        let block: Vec<u8> = carry.drain(..cut).collect();
        let pieces = split_pieces(&block, next_line);
        next_line += count_lines(&block);
        let partials: Vec<Result<CooccurrenceReport>> = workers.install(|| {
            pieces
                .par_iter()
                .map(|&(range_start, range_end, first_line)| {
                    scan_piece(&block[range_start..range_end], first_line, counter)
                })
                .collect()
        });
        for partial in partials {
            report = report.merge(&partial?)?;
        }
        if eof {
            return Ok(report);
        }
    }
}

fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

/// Lines in `bytes`, counting a final unterminated line.
fn count_lines(bytes: &[u8]) -> usize {
    let newlines = bytes.iter().filter(|&&b| b == b'\n').count();
    newlines + usize::from(bytes.last().is_some_and(|&b| b != b'\n'))
}

/// `(start, end, first line number)` of newline-aligned pieces.
fn split_pieces(block: &[u8], mut line: usize) -> Vec<(usize, usize, usize)> {
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < block.len() {
        let mut end = (start + PIECE).min(block.len());
        if end < block.len() {
            end = match block[end..].iter().position(|&b| b == b'\n') {
                Some(p) => end + p + 1,
                None => block.len(),
            };
        }
        pieces.push((start, end, line));
        line += count_lines(&block[start..end]);
        start = end;
    }
    pieces
}

fn scan_piece(piece: &[u8], first_line: usize, counter: &Counter) -> Result<CooccurrenceReport> {
    let mut report = counter.empty_report();
    let body = piece.strip_suffix(b"\n").unwrap_or(piece);
    if piece.is_empty() {
        return Ok(report);
    }
    for (i, raw) in body.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| Error::Utf8 { line: first_line + i })?;
        counter.count_line(line, &mut report);
    }
    Ok(report)
}

pub fn scan_path(path: &Path, counter: &Counter, workers: &Workers) -> Result<CooccurrenceReport> {
    let reader = open_corpus(path).map_err(|e| e.in_file(path))?;
    scan_reader(reader, counter, workers).map_err(|e| e.in_file(path))
}

/// Occurrence counts, pro/anti-stereotypical associations and their
/// share of the class's pronoun-bearing sentences.
pub fn render_table(report: &CooccurrenceReport) -> String {
    let pct = |n: u64, d: u64| {
        if d == 0 {
            "-".to_string()
        } else {
            format!("{:.2}%", 100.0 * n as f64 / d as f64)
        }
    };
    let mut out = String::new();
    let header = [
        "pronoun", "sentences", "pro", "pro %", "anti", "anti %", "m-occ", "m-occ %", "f-occ", "f-occ %",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for class in PronounClass::ALL {
        let c = report.class(class);
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |n| n.to_string());
        let opt_pct = |v: Option<u64>| v.map_or("-".to_string(), |n| pct(n, c.sentences));
        rows.push(vec![
            class.as_str().to_string(),
            c.sentences.to_string(),
            opt(report.pro(class)),
            opt_pct(report.pro(class)),
            opt(report.anti(class)),
            opt_pct(report.anti(class)),
            c.male_occ.to_string(),
            pct(c.male_occ, c.sentences),
            c.female_occ.to_string(),
            pct(c.female_occ, c.sentences),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[i]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[i]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let _ = writeln!(out, "total sentences: {}", report.total_sentences);
    out
}

pub fn report_json(report: &CooccurrenceReport) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("reports serialize");
    out.push(b'\n');
    out
}

pub fn parse_report(bytes: &[u8]) -> Result<CooccurrenceReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::json(&e))
}

/// Naive sentence splitter: breaks after `.`, `?` or `!` followed by
/// whitespace. Abbreviations and quotes are not handled.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(if c == '\n' || c == '\r' { ' ' } else { c });
        let at_break = matches!(c, '.' | '?' | '!') && chars.peek().is_none_or(|n| n.is_whitespace());
        if at_break {
            let s = current.split_whitespace().collect::<Vec<_>>().join(" ");
            if !s.is_empty() {
                out.push(s);
            }
            current.clear();
        }
    }
    let s = current.split_whitespace().collect::<Vec<_>>().join(" ");
    if !s.is_empty() {
        out.push(s);
    }
    out
}

pub fn counter_from_files(
    pronouns: Option<&Path>,
    occupations: &Path,
    policy: ClassPolicy,
) -> Result<Counter> {
    let pron = match pronouns {
        Some(p) => parse_pronouns(&std::fs::read(p)?).map_err(|e| e.in_file(p))?,
        None => PronounLexicon::default(),
    };
    let occ = parse_occupations(&std::fs::read(occupations)?).map_err(|e| e.in_file(occupations))?;
    Ok(Counter::new(pron, occ, policy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter() -> Counter {
        let occ = parse_occupations(br#"{"male_stereotyped": ["doctor"], "female_stereotyped": ["nurse"]}"#).unwrap();
        Counter::new(PronounLexicon::default(), occ, ClassPolicy::Independent)
    }

    #[test]
    fn fixture_report_and_table() {
        let text = "she is a nurse .\nhe is a nurse .\nthey saw the doctor and the nurse .\n";
        let c = counter();
        let r = scan_reader(text.as_bytes(), &c, &Workers::new(2)).unwrap();
        assert_eq!(r, c.scan(text.lines()));
        assert_eq!(r.total_sentences, 3);
        let table = render_table(&r);
        assert!(table.lines().nth(1).unwrap().starts_with("male"));
        assert!(table.contains("100.00%"));
        assert!(table.ends_with("total sentences: 3\n"));
        assert_eq!(parse_report(&report_json(&r)).unwrap(), r);
    }

    #[test]
    fn line_accounting() {
        let c = counter();
        let w = Workers::new(1);
        assert_eq!(scan_reader(&b""[..], &c, &w).unwrap().total_sentences, 0);
        assert_eq!(scan_reader(&b"she\n"[..], &c, &w).unwrap().total_sentences, 1);
        assert_eq!(scan_reader(&b"she\nhe"[..], &c, &w).unwrap().total_sentences, 2);
        assert_eq!(scan_reader(&b"\n\n"[..], &c, &w).unwrap().total_sentences, 2);
        assert_eq!(scan_reader(&b"she\r\nhe\r\n"[..], &c, &w).unwrap().female.sentences, 1);
    }

    #[test]
    fn utf8_errors_name_the_line() {
        let c = counter();
        let err = scan_reader(&b"ok\nfine\n\xff\xfe bad\n"[..], &c, &Workers::new(2)).unwrap_err();
        assert!(matches!(err, Error::Utf8 { line: 3 }), "{err}");
    }

    #[test]
    fn pieces_cover_block() {
        let block: Vec<u8> = (0..300_000).flat_map(|i| format!("line {i}\n").into_bytes()).collect();
        let pieces = split_pieces(&block, 1);
        assert!(pieces.len() > 1);
        assert_eq!(pieces[0].0, 0);
        assert_eq!(pieces.last().unwrap().1, block.len());
        for w in pieces.windows(2) {
            assert_eq!(w[0].1, w[1].0);
            assert_eq!(block[w[0].1 - 1], b'\n');
            assert_eq!(w[1].2, w[0].2 + count_lines(&block[w[0].0..w[0].1]));
        }
    }

    #[test]
    fn splitter() {
        assert_eq!(
            split_sentences("He left. She stayed!\nWhy? 3.5 is fine"),
            vec!["He left.", "She stayed!", "Why?", "3.5 is fine"]
        );
    }
}
