//! Pronoun and occupation co-occurrence counting over sentences.
//!
//! For every sentence, each pronoun class with at least one member token
//! present gets one occurrence, and every occupation phrase match in that
//! sentence is counted against that class, split by the occupation's
//! stereotyped gender. Reports are plain counters and merge by addition,
//! so any chunking of the input gives the same totals.

use alloc::borrow::Cow;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PronounClass {
    Male,
    Female,
    Collective,
}

impl PronounClass {
    pub const ALL: [PronounClass; 3] = [Self::Male, Self::Female, Self::Collective];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Male => "male",
            Self::Female => "female",
            Self::Collective => "collective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stereotype {
    MaleOcc,
    FemaleOcc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PronounLexicon {
    sets: [BTreeSet<String>; 3],
    lookup: HashMap<String, PronounClass>,
}

fn lower_set<S: AsRef<str>>(tokens: &[S]) -> BTreeSet<String> {
    tokens.iter().map(|t| t.as_ref().trim().to_lowercase()).collect()
}

impl PronounLexicon {
    pub fn new<S: AsRef<str>>(male: &[S], female: &[S], collective: &[S]) -> Result<Self> {
        let sets = [lower_set(male), lower_set(female), lower_set(collective)];
        let mut lookup = HashMap::new();
        for (class, set) in PronounClass::ALL.into_iter().zip(&sets) {
            for token in set {
                if token.is_empty() || token.contains(char::is_whitespace) {
                    return Err(Error::Schema(alloc::format!("bad pronoun {token:?}")));
                }
                if lookup.insert(token.clone(), class).is_some() {
                    return Err(Error::Schema(alloc::format!(
                        "pronoun {token:?} belongs to more than one class"
                    )));
                }
            }
        }
        Ok(PronounLexicon { sets, lookup })
    }

    pub fn tokens(&self, class: PronounClass) -> &BTreeSet<String> {
        &self.sets[class.index()]
    }

    pub fn class_of(&self, token: &str) -> Option<PronounClass> {
        self.lookup.get(token).copied()
    }
}

impl Default for PronounLexicon {
    /// Nominative, accusative and both possessive forms; reflexives are
    /// not included.
    fn default() -> Self {
        PronounLexicon::new(
            &["he", "him", "his"],
            &["she", "her", "hers"],
            &["they", "them", "their", "theirs"],
        )
        .expect("default lexicon is disjoint")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationLexicon {
    male_stereotyped: Vec<String>,
    female_stereotyped: Vec<String>,
    /// First token -> candidate phrases, longest first.
    by_head: HashMap<String, Vec<(Vec<String>, Stereotype)>>,
}

impl OccupationLexicon {
    /// Phrases are lowercased and whitespace-normalised.
    pub fn new<S: AsRef<str>>(male_stereotyped: &[S], female_stereotyped: &[S]) -> Result<Self> {
        let norm = |xs: &[S]| -> Result<Vec<String>> {
            xs.iter()
                .map(|p| {
                    let words: Vec<String> =
                        p.as_ref().split_whitespace().map(str::to_lowercase).collect();
                    if words.is_empty() {
                        return Err(Error::Schema("empty occupation phrase".to_string()));
                    }
                    Ok(words.join(" "))
                })
                .collect()
        };
        let male = norm(male_stereotyped)?;
        let female = norm(female_stereotyped)?;
        let male_set: BTreeSet<&String> = male.iter().collect();
        if let Some(p) = female.iter().find(|p| male_set.contains(p)) {
            return Err(Error::Schema(alloc::format!(
                "occupation {p:?} is listed under both genders"
            )));
        }
        let mut by_head: HashMap<String, Vec<(Vec<String>, Stereotype)>> = HashMap::new();
        let tagged = male
            .iter()
            .map(|p| (p, Stereotype::MaleOcc))
            .chain(female.iter().map(|p| (p, Stereotype::FemaleOcc)));
        for (phrase, st) in tagged {
            let words: Vec<String> = phrase.split(' ').map(String::from).collect();
            let entry = by_head.entry(words[0].clone()).or_default();
            if !entry.iter().any(|(w, _)| *w == words) {
                entry.push((words, st));
            }
        }
        for candidates in by_head.values_mut() {
            candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        Ok(OccupationLexicon {
            male_stereotyped: male,
            female_stereotyped: female,
            by_head,
        })
    }

    pub fn male_stereotyped(&self) -> &[String] {
        &self.male_stereotyped
    }

    pub fn female_stereotyped(&self) -> &[String] {
        &self.female_stereotyped
    }

    /// Longest phrase starting at `tokens[0]`, as (length, stereotype).
    fn longest_match<T: AsRef<str>>(&self, tokens: &[T]) -> Option<(usize, Stereotype)> {
        let candidates = self.by_head.get(tokens.first()?.as_ref())?;
        candidates.iter().find_map(|(words, st)| {
            let hit = words.len() <= tokens.len()
                && words.iter().zip(tokens).all(|(w, t)| w == t.as_ref());
            hit.then_some((words.len(), *st))
        })
    }
}

/// What one sentence contributes before the class policy is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SentenceTally {
    pub present: [bool; 3],
    pub male_occ: u64,
    pub female_occ: u64,
}

impl SentenceTally {
    pub fn has(&self, class: PronounClass) -> bool {
        self.present[class.index()]
    }
}

/// Scans already-lowercased tokens. Occupation phrases are matched
/// greedily, longest first, without overlap.
pub fn classify_sentence<T: AsRef<str>>(
    tokens: &[T],
    pron: &PronounLexicon,
    occ: &OccupationLexicon,
) -> SentenceTally {
    let mut tally = SentenceTally::default();
    for t in tokens {
        if let Some(class) = pron.class_of(t.as_ref()) {
            tally.present[class.index()] = true;
        }
    }
    let mut i = 0;
    while i < tokens.len() {
        match occ.longest_match(&tokens[i..]) {
            Some((len, st)) => {
                match st {
                    Stereotype::MaleOcc => tally.male_occ += 1,
                    Stereotype::FemaleOcc => tally.female_occ += 1,
                }
                i += len;
            }
            None => i += 1,
        }
    }
    tally
}

/// Lowercase, split on whitespace, strip non-alphanumeric characters
/// from each token's ends, drop tokens left empty.
pub fn tokenize(line: &str) -> impl Iterator<Item = Cow<'_, str>> {
    line.split_whitespace().filter_map(|raw| {
        let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
        if t.is_empty() {
            None
        } else if t.bytes().any(|b| b.is_ascii_uppercase() || b >= 0x80) {
            Some(Cow::Owned(t.to_lowercase()))
        } else {
            Some(Cow::Borrowed(t))
        }
    })
}

/// Treatment of sentences with pronouns from several classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassPolicy {
    /// Each class present is counted independently.
    #[default]
    Independent,
    /// Only sentences with exactly one class present are counted.
    Exclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    /// Sentences containing at least one pronoun of the class.
    pub sentences: u64,
    /// Male-stereotyped occupation matches in those sentences.
    pub male_occ: u64,
    /// Female-stereotyped occupation matches in those sentences.
    pub female_occ: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceReport {
    pub total_sentences: u64,
    pub male: ClassCounts,
    pub female: ClassCounts,
    pub collective: ClassCounts,
    /// Identifies the lexicons and policy the counts were made with.
    pub lexicon_fingerprint: u64,
}

impl CooccurrenceReport {
    pub fn zero(lexicon_fingerprint: u64) -> Self {
        CooccurrenceReport {
            total_sentences: 0,
            male: ClassCounts::default(),
            female: ClassCounts::default(),
            collective: ClassCounts::default(),
            lexicon_fingerprint,
        }
    }

    pub fn class(&self, class: PronounClass) -> &ClassCounts {
        match class {
            PronounClass::Male => &self.male,
            PronounClass::Female => &self.female,
            PronounClass::Collective => &self.collective,
        }
    }

    fn class_mut(&mut self, class: PronounClass) -> &mut ClassCounts {
        match class {
            PronounClass::Male => &mut self.male,
            PronounClass::Female => &mut self.female,
            PronounClass::Collective => &mut self.collective,
        }
    }

    /// Same-gender occupation matches; `None` for the collective class.
    pub fn pro(&self, class: PronounClass) -> Option<u64> {
        match class {
            PronounClass::Male => Some(self.male.male_occ),
            PronounClass::Female => Some(self.female.female_occ),
            PronounClass::Collective => None,
        }
    }

    /// Opposite-gender occupation matches; `None` for the collective class.
    pub fn anti(&self, class: PronounClass) -> Option<u64> {
        match class {
            PronounClass::Male => Some(self.male.female_occ),
            PronounClass::Female => Some(self.female.male_occ),
            PronounClass::Collective => None,
        }
    }

    pub fn add(&mut self, tally: &SentenceTally, policy: ClassPolicy) {
        self.total_sentences += 1;
        let present = tally.present.iter().filter(|&&p| p).count();
        if policy == ClassPolicy::Exclusive && present > 1 {
            return;
        }
        for class in PronounClass::ALL {
            if tally.has(class) {
                let c = self.class_mut(class);
                c.sentences += 1;
                c.male_occ += tally.male_occ;
                c.female_occ += tally.female_occ;
            }
        }
    }

    /// Componentwise sum of two reports made with the same lexicons.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.lexicon_fingerprint != other.lexicon_fingerprint {
            return Err(Error::LexiconMismatch);
        }
        let sum = |a: &ClassCounts, b: &ClassCounts| ClassCounts {
            sentences: a.sentences + b.sentences,
            male_occ: a.male_occ + b.male_occ,
            female_occ: a.female_occ + b.female_occ,
        };
        Ok(CooccurrenceReport {
            total_sentences: self.total_sentences + other.total_sentences,
            male: sum(&self.male, &other.male),
            female: sum(&self.female, &other.female),
            collective: sum(&self.collective, &other.collective),
            lexicon_fingerprint: self.lexicon_fingerprint,
        })
    }
}

/// Lexicons plus policy; turns lines into reports.
#[derive(Debug, Clone)]
pub struct Counter {
    pub pronouns: PronounLexicon,
    pub occupations: OccupationLexicon,
    pub policy: ClassPolicy,
    fingerprint: u64,
}

impl Counter {
    pub fn new(pronouns: PronounLexicon, occupations: OccupationLexicon, policy: ClassPolicy) -> Self {
        let mut h = Fnv::new();
        for class in PronounClass::ALL {
            for t in pronouns.tokens(class) {
                h.write(t.as_bytes());
                h.write(&[0]);
            }
            h.write(&[1]);
        }
        for list in [occupations.male_stereotyped(), occupations.female_stereotyped()] {
            let sorted: BTreeSet<&String> = list.iter().collect();
            for p in sorted {
                h.write(p.as_bytes());
                h.write(&[0]);
            }
            h.write(&[2]);
        }
        h.write(&[policy as u8]);
        Counter {
            pronouns,
            occupations,
            policy,
            fingerprint: h.finish(),
        }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn empty_report(&self) -> CooccurrenceReport {
        CooccurrenceReport::zero(self.fingerprint)
    }

    pub fn count_line(&self, line: &str, report: &mut CooccurrenceReport) {
        let tokens: Vec<Cow<'_, str>> = tokenize(line).collect();
        let tally = classify_sentence(&tokens, &self.pronouns, &self.occupations);
        report.add(&tally, self.policy);
    }

    /// Serial fold over one sentence per item.
    pub fn scan<'a>(&self, lines: impl IntoIterator<Item = &'a str>) -> CooccurrenceReport {
        let mut report = self.empty_report();
        for line in lines {
            self.count_line(line, &mut report);
        }
        report
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter() -> Counter {
        let occ = OccupationLexicon::new(
            &["doctor", "construction worker", "ceo"],
            &["nurse", "housekeeper", "construction"],
        )
        .unwrap();
        Counter::new(PronounLexicon::default(), occ, ClassPolicy::Independent)
    }

    fn tally(c: &Counter, line: &str) -> SentenceTally {
        let tokens: Vec<_> = tokenize(line).collect();
        classify_sentence(&tokens, &c.pronouns, &c.occupations)
    }

    #[test]
    fn hand_traced_sentences() {
        let c = counter();
        let t = tally(&c, "she is a nurse .");
        assert_eq!(t, SentenceTally { present: [false, true, false], male_occ: 0, female_occ: 1 });
        let t = tally(&c, "he is a nurse .");
        assert_eq!(t, SentenceTally { present: [true, false, false], male_occ: 0, female_occ: 1 });
        let t = tally(&c, "they saw the doctor and the nurse .");
        assert_eq!(t, SentenceTally { present: [false, false, true], male_occ: 1, female_occ: 1 });
    }

    #[test]
    fn three_line_report() {
        let c = counter();
        let r = c.scan(["she is a nurse .", "he is a nurse .", "they saw the doctor and the nurse ."]);
        assert_eq!(r.total_sentences, 3);
        assert_eq!(r.female, ClassCounts { sentences: 1, male_occ: 0, female_occ: 1 });
        assert_eq!(r.male, ClassCounts { sentences: 1, male_occ: 0, female_occ: 1 });
        assert_eq!(r.collective, ClassCounts { sentences: 1, male_occ: 1, female_occ: 1 });
        assert_eq!(r.pro(PronounClass::Female), Some(1));
        assert_eq!(r.anti(PronounClass::Male), Some(1));
        assert_eq!(r.pro(PronounClass::Collective), None);
    }

    #[test]
    fn longest_phrase_wins_without_overlap() {
        let c = counter();
        let t = tally(&c, "Her brother, a construction worker, met the CEO.");
        assert_eq!((t.male_occ, t.female_occ), (2, 0));
        let t = tally(&c, "his construction site");
        assert_eq!((t.male_occ, t.female_occ), (0, 1));
        let t = tally(&c, "nurse nurse nurse");
        assert_eq!(t.female_occ, 3);
    }

    #[test]
    fn multiple_classes() {
        let c = counter();
        let r = c.scan(["He told her about the doctor."]);
        assert_eq!(r.male.sentences, 1);
        assert_eq!(r.female.sentences, 1);
        assert_eq!(r.male.male_occ, 1);
        assert_eq!(r.female.male_occ, 1);

        let exclusive = Counter::new(c.pronouns.clone(), c.occupations.clone(), ClassPolicy::Exclusive);
        let r = exclusive.scan(["He told her about the doctor.", "She is a doctor."]);
        assert_eq!(r.total_sentences, 2);
        assert_eq!(r.male, ClassCounts::default());
        assert_eq!(r.female, ClassCounts { sentences: 1, male_occ: 1, female_occ: 0 });
        assert_ne!(exclusive.fingerprint(), c.fingerprint());
    }

    #[test]
    fn empty_and_lexicon_free_lines() {
        let c = counter();
        assert_eq!(c.scan([]), c.empty_report());
        let r = c.scan(["the doctor is in .", ""]);
        assert_eq!(r.total_sentences, 2);
        assert_eq!(r.male, ClassCounts::default());
        assert_eq!(r.female, ClassCounts::default());
        assert_eq!(r.collective, ClassCounts::default());
    }

    #[test]
    fn merge_identity_and_mismatch() {
        let c = counter();
        let r = c.scan(["she is a nurse ."]);
        assert_eq!(r.merge(&c.empty_report()).unwrap(), r);
        let other = Counter::new(PronounLexicon::default(), c.occupations.clone(), ClassPolicy::Exclusive);
        assert_eq!(r.merge(&other.empty_report()), Err(Error::LexiconMismatch));
    }

    #[test]
    fn lexicon_validation() {
        assert!(PronounLexicon::new(&["he"], &["he"], &["they"]).is_err());
        assert!(OccupationLexicon::new(&["nurse"], &["Nurse"]).is_err());
        assert!(OccupationLexicon::new(&["  "], &["nurse"]).is_err());
        let default = PronounLexicon::default();
        assert_eq!(default.tokens(PronounClass::Collective).len(), 4);
        assert_eq!(default.class_of("hers"), Some(PronounClass::Female));
        assert_eq!(default.class_of("herself"), None);
    }
}
