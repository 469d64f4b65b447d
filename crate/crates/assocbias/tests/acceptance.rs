//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use assocbias::commands::{load_spec_path, run_suite};
use assocbias::corpus::scan_reader;
use assocbias::parallel::Workers;
use assocbias::render::render_csv;
use assocbias::vectors::load_word_vectors;
use assocbias_core::assoc::{
    effect_size, exact_with, p_value_exact, run_test, sampled_with, test_statistic, PermutationConfig,
    Serial, StdMode, TargetScores,
};
use assocbias_core::corpus::{ClassPolicy, Counter, OccupationLexicon, PronounLexicon};
use assocbias_core::embed::{CasePolicy, Stores};
use assocbias_core::testspec::{
    compose_intersectional, expand_templates, ArticleRule, IntersectionalGroups, TemplateSet,
};
use assocbias_core::{Category, EncodingLevel, ItemSet, Method, TestSpecification, Vector};
use ortho::random_orthogonal;
use oracle::{instances, Instance, Vecs};

/// Seed for the random instances.
const INSTANCE_SEED: u64 = 2020;
const INSTANCES: usize = 200;
/// Seed for Monte Carlo p-values.
const MC_SEED: u64 = 42;
const MC_SAMPLES: u64 = 100_000;
const MC_TOLERANCE: f64 = 0.01;
const EXACT_BUDGET: Duration = Duration::from_secs(10);
const FIXTURE_TOLERANCE: f64 = 1e-12;
const ROTATION_TOLERANCE: f64 = 1e-9;
const SCALING_TOLERANCE: f64 = 1e-12;
/// Window within which the brute-force oracle treats a split as tied.
const TIE_WINDOW: f64 = 1e-9;
const CORPUS_BYTES: usize = 100 << 20;
const CORPUS_BUDGET: Duration = Duration::from_secs(60);
const ALPHA: f64 = 0.01;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn vs(xs: &Vecs) -> Vec<Vector> {
    xs.iter().map(|v| Vector::new(v.clone()).unwrap()).collect()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn exact_oracle(insts: &[Instance]) -> Outcome {
    let start = Instant::now();
    for (i, inst) in insts.iter().enumerate() {
        let got = p_value_exact(&vs(&inst.x), &vs(&inst.y), &vs(&inst.a), &vs(&inst.b), 24)
            .map_err(|e| format!("instance {i}: {e}"))?;
        let (hi, lo, total) = oracle::exact_counts(&inst.x, &inst.y, &inst.a, &inst.b, TIE_WINDOW);
        check(hi == lo, format!("instance {i}: oracle tie window ambiguous"))?;
        check(
            got.exceeding == hi && got.partitions == total,
            format!("instance {i}: {}/{} vs oracle {hi}/{total}", got.exceeding, got.partitions),
        )?;
    }
    let took = start.elapsed();
    check(took < EXACT_BUDGET, format!("took {took:?}"))?;
    Ok(format!("{} instances, integer counts equal, {took:.2?}", insts.len()))
}

fn monte_carlo(insts: &[Instance]) -> Outcome {
    let pools: Vec<Workers> = [1, 2, 8].into_iter().map(Workers::new).collect();
    let mut worst: f64 = 0.0;
    for (i, inst) in insts.iter().enumerate() {
        let pooled = TargetScores::compute(&vs(&inst.x), &vs(&inst.y), &vs(&inst.a), &vs(&inst.b))
            .and_then(|s| s.pooled())
            .map_err(|e| e.to_string())?;
        let exact = exact_with(&pooled, 24, &Serial).unwrap().p();
        let serial = sampled_with(&pooled, MC_SAMPLES, MC_SEED, &Serial).unwrap();
        for w in &pools {
            let p = sampled_with(&pooled, MC_SAMPLES, MC_SEED, w).unwrap();
            check(p == serial, format!("instance {i}: {} workers differ", w.threads()))?;
        }
        let diff = (serial.p() - exact).abs();
        worst = worst.max(diff);
        check(diff < MC_TOLERANCE, format!("instance {i}: |{} - {exact}| = {diff}", serial.p()))?;
    }
    Ok(format!("max |sampled - exact| = {worst:.5}; identical across 1/2/8 workers"))
}

mod ortho {
    use rand::rngs::StdRng;
    use rand::Rng;

    /// Random orthogonal matrix by Gram-Schmidt on a random square matrix.
    pub fn random_orthogonal(rng: &mut StdRng, dim: usize) -> Vec<Vec<f64>> {
        let mut q: Vec<Vec<f64>> = Vec::new();
        while q.len() < dim {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for u in &q {
                    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
                }
            }
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-6 {
                q.push(v.into_iter().map(|a| a / n).collect());
            }
        }
        q
    }
}

fn summary(x: &Vecs, y: &Vecs, a: &Vecs, b: &Vecs) -> (f64, f64, f64) {
    let (x, y, a, b) = (vs(x), vs(y), vs(a), vs(b));
    (
        test_statistic(&x, &y, &a, &b).unwrap(),
        effect_size(&x, &y, &a, &b, StdMode::Population).unwrap(),
        p_value_exact(&x, &y, &a, &b, 24).unwrap().p(),
    )
}

fn effect_fixtures(insts: &[Instance]) -> Outcome {
    use rand::{Rng, SeedableRng};
    let v = |xs: &[[f64; 2]]| xs.iter().map(|p| Vector::new(p.to_vec()).unwrap()).collect::<Vec<_>>();
    let (x, y, a, b) = (v(&[[1.0, 0.0]]), v(&[[0.0, 1.0]]), v(&[[1.0, 0.0]]), v(&[[0.0, 1.0]]));
    let pop = effect_size(&x, &y, &a, &b, StdMode::Population).unwrap();
    let sample = effect_size(&x, &y, &a, &b, StdMode::Sample).unwrap();
    check((pop - 2.0).abs() < FIXTURE_TOLERANCE, format!("population d = {pop}"))?;
    check((sample - 2f64.sqrt()).abs() < FIXTURE_TOLERANCE, format!("sample d = {sample}"))?;

    let mut rng = rand::rngs::StdRng::seed_from_u64(INSTANCE_SEED + 1);
    let (mut rot, mut scale) = (0.0f64, 0.0f64);
    for (i, inst) in insts.iter().enumerate() {
        let (s, d, p) = summary(&inst.x, &inst.y, &inst.a, &inst.b);
        let (s1, d1, _) = summary(&inst.y, &inst.x, &inst.a, &inst.b);
        let (s2, d2, _) = summary(&inst.x, &inst.y, &inst.b, &inst.a);
        check(
            (s + s1).abs() < FIXTURE_TOLERANCE
                && (d + d1).abs() < FIXTURE_TOLERANCE
                && (s + s2).abs() < FIXTURE_TOLERANCE
                && (d + d2).abs() < FIXTURE_TOLERANCE,
            format!("instance {i}: swaps do not negate"),
        )?;

        let q = random_orthogonal(&mut rng, inst.x[0].len());
        let r = |xs: &Vecs| -> Vecs {
            xs.iter()
                .map(|v| q.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
                .collect()
        };
        let (sr, dr, pr) = summary(&r(&inst.x), &r(&inst.y), &r(&inst.a), &r(&inst.b));
        let dev = (s - sr).abs().max((d - dr).abs()).max((p - pr).abs());
        rot = rot.max(dev);
        check(dev < ROTATION_TOLERANCE, format!("instance {i}: rotation moved results by {dev:e}"))?;

        let mut k = |xs: &Vecs| -> Vecs {
            xs.iter()
                .map(|v| {
                    let c: f64 = rng.random_range(0.01..100.0);
                    v.iter().map(|e| e * c).collect()
                })
                .collect()
        };
        let (sk, dk, pk) = summary(&k(&inst.x), &k(&inst.y), &k(&inst.a), &k(&inst.b));
        let dev = (s - sk).abs().max((d - dk).abs()).max((p - pk).abs());
        scale = scale.max(dev);
        check(dev < SCALING_TOLERANCE, format!("instance {i}: scaling moved results by {dev:e}"))?;
    }
    Ok(format!(
        "d = {pop} / {sample:.15}; swaps negate; rotation dev {rot:.1e}, scaling dev {scale:.1e}"
    ))
}

fn end_to_end_cbow() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let vec_path = dir.path().join("vectors.txt");
    let spec_path = dir.path().join("weat6.json");
    fs::write(&vec_path, "john 0.9 0.2 0.1\namy 0.1 0.8 0.3\ncareer 1.0 0.1 0.0\nfamily 0.0 1.0 0.2\nthe 0.3 0.3 0.3\n")
        .unwrap();
    fs::write(
        &spec_path,
        r#"{"category": "gender",
            "targ1": {"category": "Male", "examples": ["John"]},
            "targ2": {"category": "Female", "examples": ["Amy"]},
            "attr1": {"category": "Career", "examples": ["career"]},
            "attr2": {"category": "Family", "examples": ["family"]}}"#,
    )
    .unwrap();

    let store = load_word_vectors(
        std::io::BufReader::new(fs::File::open(&vec_path).unwrap()),
        CasePolicy::LowercaseFallback,
    )
    .map_err(|e| e.to_string())?;
    let spec = load_spec_path(&spec_path, None).map_err(|e| e.to_string())?;
    let config = PermutationConfig {
        seed: MC_SEED,
        ..PermutationConfig::default()
    };
    let stores = Stores {
        word: Some(&store),
        contextual: None,
    };
    let outcome = run_suite(&[spec], &[], &[], &stores, &config, &Workers::new(1)).map_err(|e| e.to_string())?;
    check(outcome.skipped.is_empty(), "combination skipped")?;
    let r = &outcome.suite.results[0];

    let (x, y) = (vec![vec![0.9, 0.2, 0.1]], vec![vec![0.1, 0.8, 0.3]]);
    let (a, b) = (vec![vec![1.0, 0.1, 0.0]], vec![vec![0.0, 1.0, 0.2]]);
    let (hi, _, total) = oracle::exact_counts(&x, &y, &a, &b, TIE_WINDOW);
    let want_s = oracle::statistic(&x, &y, &a, &b);
    let want_d = oracle::effect(&x, &y, &a, &b, false);
    let want_p = hi as f64 / total as f64;
    check(
        r.test_id == "weat6"
            && r.model_id == "cbow"
            && r.level == EncodingLevel::Word
            && r.method == Method::Exact
            && (r.statistic - want_s).abs() < FIXTURE_TOLERANCE
            && (r.effect_size - want_d).abs() < FIXTURE_TOLERANCE
            && r.p_value == want_p
            && r.significant == (want_p < ALPHA && want_d > 0.0),
        format!("{r:?} vs oracle s={want_s} d={want_d} p={want_p}"),
    )?;

    let library = render_csv(&outcome.suite);
    let cli = Command::new(env!("CARGO_BIN_EXE_assoc-bias"))
        .env_remove("CI")
        .args(["run", "--format", "csv", "--seed", &MC_SEED.to_string(), "--word-vectors"])
        .arg(&vec_path)
        .arg("--spec")
        .arg(&spec_path)
        .output()
        .map_err(|e| e.to_string())?;
    check(cli.status.success(), format!("cli exited {:?}", cli.status.code()))?;
    check(cli.stdout == library, "cli output differs from library render")?;
    Ok(format!("s={:.6} d={} p={} matches oracle; CLI bytes identical", r.statistic, r.effect_size, r.p_value))
}

fn corpus_counter() -> Outcome {
    let occ = OccupationLexicon::new(&["doctor", "engineer", "police officer"], &["nurse", "secretary"]).unwrap();
    let counter = Counter::new(PronounLexicon::default(), occ, ClassPolicy::Independent);
    let fixture = "she is a nurse .\nhe is a nurse .\nthey saw the doctor and the nurse .\n";
    let r = scan_reader(fixture.as_bytes(), &counter, &Workers::new(2)).map_err(|e| e.to_string())?;
    check(
        r.total_sentences == 3
            && (r.female.sentences, r.female.female_occ, r.female.male_occ) == (1, 1, 0)
            && (r.male.sentences, r.male.female_occ, r.male.male_occ) == (1, 1, 0)
            && (r.collective.sentences, r.collective.male_occ, r.collective.female_occ) == (1, 1, 1),
        format!("fixture report {r:?}"),
    )?;

    let corpus = synthetic_corpus(CORPUS_BYTES);
    let serial = counter.scan(std::str::from_utf8(&corpus).unwrap().lines());
    let start = Instant::now();
    let single = scan_reader(corpus.as_slice(), &counter, &Workers::new(1)).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let parallel = scan_reader(corpus.as_slice(), &counter, &Workers::new(8)).map_err(|e| e.to_string())?;
    check(single == serial && parallel == serial, "chunked scan differs from serial scan")?;
    check(took < CORPUS_BUDGET, format!("single-threaded chunked scan took {took:?}"))?;
    Ok(format!(
        "fixture exact; {} MB, {} lines, chunked == serial, single-threaded {took:.2?}",
        corpus.len() >> 20,
        serial.total_sentences
    ))
}

fn synthetic_corpus(bytes: usize) -> Vec<u8> {
    use rand::{Rng, SeedableRng};
    const WORDS: [&str; 24] = [
        "he", "she", "they", "his", "her", "them", "the", "a", "doctor", "nurse", "police", "officer",
        "engineer", "secretary", "saw", "is", "was", "and", "with", "café", "today", ",", ".", "Her",
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(INSTANCE_SEED);
    let mut out = Vec::with_capacity(bytes + 256);
    while out.len() < bytes {
        for i in 0..rng.random_range(3..20) {
            if i > 0 {
                out.push(b' ');
            }
            out.extend_from_slice(WORDS[rng.random_range(0..WORDS.len())].as_bytes());
        }
        out.push(b'\n');
    }
    out
}

fn templates_and_pairing() -> Outcome {
    let names = ["Shanice", "Ebony", "Jamal", "Emily", "Greg"];
    for n in 1..=names.len() {
        let items = expand_templates(&TemplateSet::bleached_names(), &names[..n], &ArticleRule::default())
            .map_err(|e| e.to_string())?;
        check(items.len() == 8 * n, format!("{} items for {n} fillers", items.len()))?;
        for (i, item) in items.iter().enumerate() {
            check(item.focus_text() == Some(names[i / 8]), format!("item {i} focus {:?}", item.focus_span()))?;
        }
    }
    let first = &expand_templates(&TemplateSet::bleached_names(), &["Shanice"], &ArticleRule::default()).unwrap()[0];
    check(first.text() == "This is Shanice." && first.focus_span() == Some((8, 15)), "first bleached item")?;

    let set = |label: &str| ItemSet::from_words(label, &[format!("{label}1"), format!("{label}2")]);
    let groups = IntersectionalGroups {
        ea_male: set("eam"),
        ea_female: set("eaf"),
        aa_male: set("aam"),
        aa_female: set("aaf"),
    };
    let table = [(1, "eaf", "aaf"), (2, "aam", "aaf"), (3, "eam", "aam"), (4, "eam", "eaf"), (5, "eam", "aaf")];
    for (variant, x, y) in table {
        let spec = compose_intersectional(variant, &groups, (set("p"), set("u")), EncodingLevel::Word)
            .map_err(|e| e.to_string())?;
        check(
            spec.id == format!("weat+i{variant}")
                && spec.category == Category::Intersectional
                && spec.targ1.category_label == x
                && spec.targ2.category_label == y
                && spec.attr1.category_label == "p",
            format!("+I{variant} composed as {} vs {}", spec.targ1.category_label, spec.targ2.category_label),
        )?;
    }
    check(compose_intersectional(6, &groups, (set("p"), set("u")), EncodingLevel::Word).is_err(), "variant 6")?;
    Ok("8n items with filler spans for n = 1..5; +I1..+I5 pairings exact".into())
}

fn spec_for(inst: &Instance, id: &str) -> (TestSpecification, BTreeMap<String, Vector>) {
    let mut table = BTreeMap::new();
    let mut set = |tag: &str, xs: &Vecs| {
        let words: Vec<String> = (0..xs.len()).map(|i| format!("{tag}{i}")).collect();
        for (w, v) in words.iter().zip(xs) {
            table.insert(w.clone(), Vector::new(v.clone()).unwrap());
        }
        ItemSet::from_words(tag, &words)
    };
    let spec = TestSpecification {
        id: id.into(),
        level: EncodingLevel::Word,
        category: Category::Other,
        targ1: set("x", &inst.x),
        targ2: set("y", &inst.y),
        attr1: set("a", &inst.a),
        attr2: set("b", &inst.b),
    };
    (spec, table)
}

fn significance(insts: &[Instance]) -> Outcome {
    let config = PermutationConfig {
        alpha: ALPHA,
        seed: MC_SEED,
        ..PermutationConfig::default()
    };
    // Strongly separated instances so that some results reach significance.
    let separated: Vec<Instance> = (0..20)
        .map(|k| {
            let jitter = |i: usize, base: [f64; 2]| vec![base[0] + 0.01 * ((i + k) % 7) as f64, base[1] + 0.013 * i as f64];
            Instance {
                x: (0..6).map(|i| jitter(i, [1.0, 0.05])).collect(),
                y: (0..6).map(|i| jitter(i, [0.05, 1.0])).collect(),
                a: vec![vec![1.0, 0.0]],
                b: vec![vec![0.0, 1.0]],
            }
        })
        .collect();
    let (mut total, mut significant, mut negative) = (0, 0, 0);
    for (i, inst) in insts.iter().chain(&separated).enumerate() {
        for swapped in [false, true] {
            let inst = if swapped {
                Instance { x: inst.y.clone(), y: inst.x.clone(), a: inst.a.clone(), b: inst.b.clone() }
            } else {
                Instance { x: inst.x.clone(), y: inst.y.clone(), a: inst.a.clone(), b: inst.b.clone() }
            };
            let (spec, table) = spec_for(&inst, &format!("case{i}"));
            let r = run_test(&spec, |item| table.get(item.text()).cloned(), &config, "oracle")
                .map_err(|e| e.to_string())?;
            total += 1;
            significant += usize::from(r.significant);
            negative += usize::from(r.effect_size < 0.0);
            check(!(r.significant && r.effect_size < 0.0), format!("case {i}: negative effect marked significant"))?;
        }
    }
    check(significant > 0 && negative > 0, "suite exercised neither case")?;
    Ok(format!("{total} results, {significant} significant, {negative} negative, none both"))
}

fn main() {
    let insts = instances(INSTANCE_SEED, INSTANCES);
    let criteria: [Criterion; 7] = [
        ("exact permutation oracle", Box::new(|| exact_oracle(&insts))),
        ("Monte Carlo consistency", Box::new(|| monte_carlo(&insts))),
        ("effect-size fixtures", Box::new(|| effect_fixtures(&insts))),
        ("end-to-end CBoW run", Box::new(end_to_end_cbow)),
        ("corpus counter", Box::new(corpus_counter)),
        ("template expansion", Box::new(templates_and_pairing)),
        ("significance convention", Box::new(|| significance(&insts))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
