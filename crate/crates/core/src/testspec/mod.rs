//! Building test specifications: naming conventions, template expansion
//! and composition of matched and intersectional tests.

mod names;
mod templates;

use alloc::format;
use alloc::string::String;

pub use self::names::{family_stem, parse_test_name, TestFamily, TestNameInfo};
pub use self::templates::{
    expand_templates, ArticleRule, SlotKind, TemplateSet, BLEACHED_ATTRIBUTE_TEMPLATES,
    BLEACHED_NAME_TEMPLATES, SLOT, UNBLEACHED_ATTRIBUTE, UNBLEACHED_COMPETENT_TARGET,
    UNBLEACHED_LIKABLE_TARGET,
};
use crate::{Category, EncodingLevel, Error, ItemSet, Result, TestSpecification};

/// Pairs existing target lists with attribute lists from another test.
///
/// This is how the matched tests are built, e.g. male/female names from
/// one test against pleasant/unpleasant attributes from another.
pub fn compose_matched_test(
    id: &str,
    category: Category,
    level: EncodingLevel,
    targets: (ItemSet, ItemSet),
    attributes: (ItemSet, ItemSet),
) -> Result<TestSpecification> {
    let (targ1, targ2) = targets;
    if targ1.len() != targ2.len() {
        return Err(Error::UnequalTargetSizes {
            targ1: targ1.len(),
            targ2: targ2.len(),
        });
    }
    let (attr1, attr2) = attributes;
    let spec = TestSpecification {
        id: String::from(id),
        level,
        category,
        targ1,
        targ2,
        attr1,
        attr2,
    };
    spec.validate()?;
    Ok(spec)
}

/// Name lists for the four race-by-gender groups.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionalGroups {
    pub ea_male: ItemSet,
    pub ea_female: ItemSet,
    pub aa_male: ItemSet,
    pub aa_female: ItemSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    EaMale,
    EaFemale,
    AaMale,
    AaFemale,
}

impl IntersectionalGroups {
    pub fn get(&self, group: Group) -> &ItemSet {
        match group {
            Group::EaMale => &self.ea_male,
            Group::EaFemale => &self.ea_female,
            Group::AaMale => &self.aa_male,
            Group::AaFemale => &self.aa_female,
        }
    }
}

/// Target pairing `(X, Y)` of intersectional variant 1..=5.
pub fn intersectional_pairing(variant: u8) -> Result<(Group, Group)> {
    use Group::*;
    match variant {
        1 => Ok((EaFemale, AaFemale)),
        2 => Ok((AaMale, AaFemale)),
        3 => Ok((EaMale, AaMale)),
        4 => Ok((EaMale, EaFemale)),
        5 => Ok((EaMale, AaFemale)),
        v => Err(Error::UnknownVariant(v)),
    }
}

/// Builds `weat+i{variant}` (or `sent-weat+i{variant}` above word level)
/// against pleasant/unpleasant attributes.
pub fn compose_intersectional(
    variant: u8,
    groups: &IntersectionalGroups,
    pleasant_unpleasant: (ItemSet, ItemSet),
    level: EncodingLevel,
) -> Result<TestSpecification> {
    let (x, y) = intersectional_pairing(variant)?;
    let prefix = match level {
        EncodingLevel::Word => "weat",
        _ => "sent-weat",
    };
    compose_matched_test(
        &format!("{prefix}+i{variant}"),
        Category::Intersectional,
        level,
        (groups.get(x).clone(), groups.get(y).clone()),
        pleasant_unpleasant,
    )
}
