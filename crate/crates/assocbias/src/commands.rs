//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use assocbias_core::assoc::{run_test_with, PermutationConfig, StdMode};
use assocbias_core::corpus::ClassPolicy;
use assocbias_core::embed::{resolve, CasePolicy, ContextualStore, Stores, WordStore, CBOW_MODEL};
use assocbias_core::report::SuiteResult;
use assocbias_core::testspec::TemplateSet;
use assocbias_core::{AssociationResult, BalancePolicy, EncodingLevel, Error as CoreError, TestSpecification};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::corpus::{counter_from_files, render_table, report_json, scan_path, split_sentences};
use crate::parallel::Workers;
use crate::render::{parse_suite_json, render, Format};
use crate::specfile::{load_spec, LoadOptions};
use crate::templatefile::{expand_set, parse_fillers, parse_templates};
use crate::vectors::{load_contextual_into, load_word_vectors};
use crate::{Error, Result};

/// Set in CI; makes `--seed` mandatory so sampled p-values are reproducible.
pub const CI_ENV: &str = "CI";

#[derive(Debug, Parser)]
#[command(name = "assoc-bias", version, about = "Embedding association tests and corpus co-occurrence counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run association tests over every applicable (test, model, level).
    Run(RunArgs),
    /// Count pronoun and occupation co-occurrence in a corpus.
    Count(CountArgs),
    /// Fill sentence templates with words.
    Expand(ExpandArgs),
    /// Check test specification files.
    Validate(ValidateArgs),
    /// Re-render saved JSON results.
    Report(ReportArgs),
    /// Split running text into one sentence per line.
    Split(SplitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StdArg {
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BalanceArg {
    Error,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Word,
    Sentence,
    Cword,
}

impl From<LevelArg> for EncodingLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Word => EncodingLevel::Word,
            LevelArg::Sentence => EncodingLevel::Sentence,
            LevelArg::Cword => EncodingLevel::Cword,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Specification files, or directories of `*.json` files.
    #[arg(long = "spec", required = true, num_args = 1..)]
    pub specs: Vec<PathBuf>,
    /// Whitespace-separated word vectors, served as model `cbow`.
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    /// Contextual embedding exports (JSONL).
    #[arg(long = "contextual", num_args = 1..)]
    pub contextual: Vec<PathBuf>,
    /// Run each test at these levels instead of its own.
    #[arg(long = "level", value_enum, num_args = 1..)]
    pub levels: Vec<LevelArg>,
    /// Restrict to these models.
    #[arg(long = "model", num_args = 1..)]
    pub models: Vec<String>,
    #[arg(long, default_value_t = PermutationConfig::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Seed for sampled p-values. Required when `CI` is set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = PermutationConfig::DEFAULT_SAMPLES)]
    pub samples: u64,
    /// Largest pooled target count enumerated exactly.
    #[arg(long, default_value_t = PermutationConfig::DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
    #[arg(long = "std", value_enum, default_value = "population")]
    pub std_mode: StdArg,
    #[arg(long, value_enum)]
    pub balance: Option<BalanceArg>,
    /// Match words exactly instead of falling back to lowercase.
    #[arg(long)]
    pub case_sensitive: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Corpus files, one sentence per line, optionally gzipped.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub occupations: PathBuf,
    /// Pronoun lexicon; the built-in he/she/they sets by default.
    #[arg(long)]
    pub pronouns: Option<PathBuf>,
    /// Skip sentences with pronouns of more than one class.
    #[arg(long)]
    pub exclusive: bool,
    /// Also write the counts as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinTemplates {
    BleachedNames,
    BleachedAttributes,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    pub templates: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinTemplates>,
    #[arg(long)]
    pub fillers: PathBuf,
    /// Category label; defaults to the filler file's own, then its file name.
    #[arg(long)]
    pub category: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub specs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub balance: Option<BalanceArg>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results written by `run --format json`.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and maps the outcome to an exit
/// code: 0 on success, 1 on error, 2 when `run` had to skip combinations.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Count(a) => cmd_count(a).map(|()| ExitCode::SUCCESS),
        Command::Expand(a) => cmd_expand(a).map(|()| ExitCode::SUCCESS),
        Command::Validate(a) => Ok(cmd_validate(a)),
        Command::Report(a) => cmd_report(a).map(|()| ExitCode::SUCCESS),
        Command::Split(a) => cmd_split(a).map(|()| ExitCode::SUCCESS),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::from(e).in_file(path))
}

fn balance(arg: Option<BalanceArg>) -> Option<BalancePolicy> {
    arg.map(|b| match b {
        BalanceArg::Error => BalancePolicy::Error,
        BalanceArg::Truncate => BalancePolicy::Truncate,
    })
}

/// Expands directories to their `*.json` files, sorted by name.
pub fn collect_spec_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| Error::from(e).in_file(input))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

/// Loads a spec file, naming it after the file when it has no `id`.
pub fn load_spec_path(path: &Path, balance: Option<BalancePolicy>) -> Result<TestSpecification> {
    let options = LoadOptions {
        id: path.file_stem().map(|s| s.to_string_lossy().into_owned()),
        balance,
    };
    load_spec(&read(path)?, &options).map_err(|e| e.in_file(path))
}

/// A (test, model, level) combination that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub test_id: String,
    pub model_id: Option<String>,
    pub level: EncodingLevel,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub suite: SuiteResult,
    pub skipped: Vec<Skipped>,
}

/// Runs every spec at each requested level against each model that can
/// encode it. Results do not depend on the number of workers.
pub fn run_suite(
    specs: &[TestSpecification],
    levels: &[EncodingLevel],
    models: &[String],
    stores: &Stores<'_>,
    config: &PermutationConfig,
    workers: &Workers,
) -> Result<RunOutcome> {
    config.validate()?;
    let mut available: Vec<String> = Vec::new();
    if stores.word.is_some() {
        available.push(CBOW_MODEL.to_string());
    }
    if let Some(c) = stores.contextual {
        available.extend(c.models().into_iter().filter(|m| *m != CBOW_MODEL).map(str::to_string));
    }
    if !models.is_empty() {
        available.retain(|m| models.contains(m));
    }

    let mut jobs: Vec<(TestSpecification, String)> = Vec::new();
    let mut skipped = Vec::new();
    for spec in specs {
        let spec_levels = if levels.is_empty() { vec![spec.level] } else { levels.to_vec() };
        for level in spec_levels {
            let mut spec = spec.clone();
            spec.level = level;
            if let Err(e) = spec.validate() {
                skipped.push(Skipped {
                    test_id: spec.id.clone(),
                    model_id: None,
                    level,
                    reason: e.to_string(),
                });
                continue;
            }
            let usable: Vec<&String> = available.iter().filter(|m| stores.supports(m, level)).collect();
            if usable.is_empty() {
                skipped.push(Skipped {
                    test_id: spec.id.clone(),
                    model_id: None,
                    level,
                    reason: format!("no model provides {level} embeddings"),
                });
                continue;
            }
            for model in usable {
                jobs.push((spec.clone(), model.clone()));
            }
        }
    }

    let outcomes: Vec<std::result::Result<AssociationResult, Skipped>> = workers.install(|| {
        jobs.par_iter()
            .map(|(spec, model)| {
                let vectors = resolve(spec, stores, model);
                let run = vectors.and_then(|found| {
                    run_test_with(spec, |item| found.get(item.text()).cloned(), config, model, workers)
                });
                run.map_err(|e| Skipped {
                    test_id: spec.id.clone(),
                    model_id: Some(model.clone()),
                    level: spec.level,
                    reason: match e {
                        CoreError::MissingEmbedding(items) => format!("missing embeddings: {}", items.join(", ")),
                        other => other.to_string(),
                    },
                })
            })
            .collect()
    });
    let mut results = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(s) => skipped.push(s),
        }
    }
    Ok(RunOutcome {
        suite: SuiteResult::new(config.alpha, results)?,
        skipped,
    })
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    if std::env::var_os(CI_ENV).is_some() && a.seed.is_none() {
        return Err(Error::Usage(format!("--seed is required when {CI_ENV} is set")));
    }
    if a.word_vectors.is_none() && a.contextual.is_empty() {
        return Err(Error::Usage("give --word-vectors and/or --contextual".into()));
    }
    let config = PermutationConfig {
        exact_limit: a.exact_limit,
        n_samples: a.samples,
        seed: a.seed.unwrap_or(PermutationConfig::DEFAULT_SEED),
        alpha: a.alpha,
        std_mode: match a.std_mode {
            StdArg::Population => StdMode::Population,
            StdArg::Sample => StdMode::Sample,
        },
    };
    config.validate()?;

    let specs = collect_spec_paths(&a.specs)?
        .iter()
        .map(|p| load_spec_path(p, balance(a.balance)))
        .collect::<Result<Vec<_>>>()?;
    let case = if a.case_sensitive { CasePolicy::Exact } else { CasePolicy::LowercaseFallback };
    let word: Option<WordStore> = match &a.word_vectors {
        Some(p) => Some(
            load_word_vectors(std::io::BufReader::new(fs::File::open(p).map_err(|e| Error::from(e).in_file(p))?), case)
                .map_err(|e| e.in_file(p))?,
        ),
        None => None,
    };
    let contextual: Option<ContextualStore> = if a.contextual.is_empty() {
        None
    } else {
        let mut store = ContextualStore::new();
        for p in &a.contextual {
            let file = fs::File::open(p).map_err(|e| Error::from(e).in_file(p))?;
            load_contextual_into(std::io::BufReader::new(file), &mut store).map_err(|e| e.in_file(p))?;
        }
        Some(store)
    };
    let stores = Stores {
        word: word.as_ref(),
        contextual: contextual.as_ref(),
    };
    let levels: Vec<EncodingLevel> = a.levels.iter().map(|&l| l.into()).collect();
    let outcome = run_suite(&specs, &levels, &a.models, &stores, &config, &Workers::from_env())?;
    emit(a.out.as_deref(), &render(&outcome.suite, a.format))?;
    for s in &outcome.skipped {
        eprintln!(
            "skipped {} [{}] {}: {}",
            s.test_id,
            s.model_id.as_deref().unwrap_or("-"),
            s.level,
            s.reason
        );
    }
    Ok(if outcome.skipped.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_count(a: CountArgs) -> Result<()> {
    let policy = if a.exclusive { ClassPolicy::Exclusive } else { ClassPolicy::Independent };
    let counter = counter_from_files(a.pronouns.as_deref(), &a.occupations, policy)?;
    let workers = Workers::from_env();
    let mut report = counter.empty_report();
    for path in &a.corpus {
        report = report.merge(&scan_path(path, &counter, &workers)?)?;
    }
    if let Some(out) = &a.out {
        fs::write(out, report_json(&report)).map_err(|e| Error::from(e).in_file(out))?;
    }
    emit(None, render_table(&report).as_bytes())
}

fn cmd_expand(a: ExpandArgs) -> Result<()> {
    let templates = match (&a.templates, a.builtin) {
        (Some(p), _) => parse_templates(&read(p)?).map_err(|e| e.in_file(p))?,
        (None, Some(BuiltinTemplates::BleachedNames)) => TemplateSet::bleached_names(),
        (None, Some(BuiltinTemplates::BleachedAttributes)) => TemplateSet::bleached_attributes(),
        (None, None) => return Err(Error::Usage("give --templates or --builtin".into())),
    };
    let fillers = parse_fillers(&read(&a.fillers)?).map_err(|e| e.in_file(&a.fillers))?;
    let category = a
        .category
        .clone()
        .or_else(|| fillers.category.clone())
        .or_else(|| a.fillers.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_default();
    let set = expand_set(&templates, &fillers, &category)?;
    let mut bytes = serde_json::to_vec_pretty(&set).expect("sets serialize");
    bytes.push(b'\n');
    emit(a.out.as_deref(), &bytes)
}

fn cmd_validate(a: ValidateArgs) -> ExitCode {
    let paths = match collect_spec_paths(&a.specs) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut ok = true;
    for path in paths {
        match load_spec_path(&path, balance(a.balance)) {
            Ok(spec) => println!(
                "OK {} ({}, {}, {} targets per group)",
                path.display(),
                spec.id,
                spec.level,
                spec.targ1.len()
            ),
            Err(e) => {
                ok = false;
                println!("ERROR {e}");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut merged: Option<SuiteResult> = None;
    for path in &a.results {
        let suite = parse_suite_json(&read(path)?).map_err(|e| e.in_file(path))?;
        merged = Some(match merged {
            None => suite,
            Some(mut m) => {
                if m.alpha != suite.alpha {
                    return Err(Error::Usage(format!(
                        "{} uses alpha {} but earlier results use {}",
                        path.display(),
                        suite.alpha,
                        m.alpha
                    )));
                }
                m.results.extend(suite.results);
                m.validate()?;
                m
            }
        });
    }
    let suite = merged.expect("at least one results file");
    emit(a.out.as_deref(), &render(&suite, a.format))
}

fn cmd_split(a: SplitArgs) -> Result<()> {
    let text = String::from_utf8(read(&a.input)?)
        .map_err(|_| Error::Usage(format!("{} is not valid UTF-8", a.input.display())))?;
    let mut out = String::new();
    for s in split_sentences(&text) {
        out.push_str(&s);
        out.push('\n');
    }
    emit(a.out.as_deref(), out.as_bytes())
}
