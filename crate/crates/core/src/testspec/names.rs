use alloc::string::{String, ToString};
use core::fmt;

use crate::{EncodingLevel, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestFamily {
    /// `weat1`..`weat10`, optionally with the `b` terms suffix.
    Caliskan,
    /// `weat+11`..`weat+13`.
    Additional,
    /// `weat+i1`..`weat+i5`.
    Intersectional,
    /// `weat+occ`.
    Occupation,
    /// `weat_hdb…`.
    GenderDoubleBind,
    /// `weat_r_hdb…`.
    RaceDoubleBind,
    /// `weat_angry…`.
    AngryBlackWoman,
}

/// Classification of a test identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestNameInfo {
    pub level: EncodingLevel,
    pub family: TestFamily,
    pub uses_terms_variant: bool,
    /// Numeric index for numbered families; for the prefix families
    /// (double binds, angry black woman) the remainder after the prefix
    /// without its leading underscore, if any.
    pub index: Option<String>,
}

const SENT_PREFIX: &str = "sent-weat";
const WORD_PREFIX: &str = "weat";

/// Prefix families, longest first so `_r_hdb` wins over nothing shorter.
const PREFIX_FAMILIES: [(&str, TestFamily); 3] = [
    ("_r_hdb", TestFamily::RaceDoubleBind),
    ("_hdb", TestFamily::GenderDoubleBind),
    ("_angry", TestFamily::AngryBlackWoman),
];

fn number_in(s: &str, lo: u32, hi: u32) -> bool {
    !s.is_empty()
        && !s.starts_with('0')
        && s.bytes().all(|b| b.is_ascii_digit())
        && s.parse::<u32>().is_ok_and(|n| (lo..=hi).contains(&n))
}

pub fn parse_test_name(id: &str) -> Result<TestNameInfo> {
    let bad = || Error::UnrecognizedName(id.to_string());
    let (level, rest) = if let Some(rest) = id.strip_prefix(SENT_PREFIX) {
        (EncodingLevel::Sentence, rest)
    } else if let Some(rest) = id.strip_prefix(WORD_PREFIX) {
        (EncodingLevel::Word, rest)
    } else {
        return Err(bad());
    };
    let info = |family, uses_terms_variant, index: Option<&str>| TestNameInfo {
        level,
        family,
        uses_terms_variant,
        index: index.map(String::from),
    };

    for (prefix, family) in PREFIX_FAMILIES {
        if let Some(tail) = rest.strip_prefix(prefix) {
            if tail.is_empty() {
                return Ok(info(family, false, None));
            }
            let index = tail.strip_prefix('_').filter(|t| !t.is_empty()).ok_or_else(bad)?;
            let terms = index.rsplit('_').next() == Some("b");
            return Ok(info(family, terms, Some(index)));
        }
    }
    if rest == "+occ" {
        return Ok(info(TestFamily::Occupation, false, None));
    }
    if let Some(n) = rest.strip_prefix("+i") {
        if number_in(n, 1, 5) {
            return Ok(info(TestFamily::Intersectional, false, Some(n)));
        }
        return Err(bad());
    }
    if let Some(n) = rest.strip_prefix('+') {
        if number_in(n, 11, 13) {
            return Ok(info(TestFamily::Additional, false, Some(n)));
        }
        return Err(bad());
    }
    let (n, terms) = match rest.strip_suffix('b') {
        Some(n) => (n, true),
        None => (rest, false),
    };
    if number_in(n, 1, 10) {
        return Ok(info(TestFamily::Caliskan, terms, Some(n)));
    }
    Err(bad())
}

impl fmt::Display for TestNameInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.level {
            EncodingLevel::Word => WORD_PREFIX,
            _ => SENT_PREFIX,
        })?;
        let index = self.index.as_deref().unwrap_or("");
        match self.family {
            TestFamily::Caliskan => {
                f.write_str(index)?;
                if self.uses_terms_variant {
                    f.write_str("b")?;
                }
                Ok(())
            }
            TestFamily::Additional => write!(f, "+{index}"),
            TestFamily::Intersectional => write!(f, "+i{index}"),
            TestFamily::Occupation => f.write_str("+occ"),
            TestFamily::GenderDoubleBind | TestFamily::RaceDoubleBind | TestFamily::AngryBlackWoman => {
                let prefix = PREFIX_FAMILIES
                    .iter()
                    .find(|(_, fam)| *fam == self.family)
                    .map(|(p, _)| *p)
                    .unwrap_or_default();
                f.write_str(prefix)?;
                match &self.index {
                    Some(tail) => write!(f, "_{tail}"),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Test identifier with any sentence-level prefix replaced by the word
/// prefix, so `weat+occ` and `sent-weat+occ` share a stem.
pub fn family_stem(id: &str) -> &str {
    id.strip_prefix("sent-").unwrap_or(id)
}
