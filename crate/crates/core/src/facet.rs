//! Facet formulas, analytico-synthetic class numbers and chain indexing.
//!
//! Formula grammar: `"[B]" ( INDICATOR "[" CODE "?"? "]" )*`. A class number
//! is the base notation followed, in formula order, by `indicator + full
//! notation` for every assigned facet. Optional facets that are not assigned
//! are omitted together with their indicator.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Identifier, Label};
use crate::schedule::{ClassificationSchedule, Concept, ResolveError, INDICATORS};

pub const HEADING_SEPARATOR: &str = ", ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("formula must start with `[B]`")]
    MissingBase,
    #[error("malformed formula at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown category code {0}")]
    UnknownCode(char),
    #[error("category {code} uses indicator `{expected}`, formula has `{found}`")]
    IndicatorMismatch {
        code: char,
        expected: char,
        found: char,
    },
    #[error("category {0} appears twice")]
    DuplicateCode(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("required facet {0} missing")]
    MissingRequired(char),
    #[error("facet {0} is not part of the formula")]
    NotInFormula(char),
    #[error(transparent)]
    Notation(#[from] ResolveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassNumberError {
    #[error("`{text}` does not start with base notation `{base}`")]
    BaseMismatch { text: String, base: String },
    #[error("unexpected indicator `{indicator}` at position {position}")]
    UnexpectedIndicator { indicator: char, position: usize },
    #[error("unresolvable {code} notation `{notation}`")]
    Unresolvable { code: char, notation: String },
    #[error("trailing garbage at position {position}")]
    TrailingGarbage { position: usize },
    #[error("class number belongs to schedule `{0}`")]
    WrongSchedule(String),
    #[error("unknown concept `{id}` in category {code}")]
    UnknownConcept { code: char, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormulaSlot {
    pub code: char,
    pub indicator: char,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetFormula {
    pub slots: Vec<FormulaSlot>,
}

impl FacetFormula {
    pub fn slot(&self, code: char) -> Option<&FormulaSlot> {
        self.slots.iter().find(|s| s.code == code)
    }
}

impl fmt::Display for FacetFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[B]")?;
        for slot in &self.slots {
            let optional = if slot.required { "" } else { "?" };
            write!(f, "{}[{}{}]", slot.indicator, slot.code, optional)?;
        }
        Ok(())
    }
}

pub fn parse_formula(
    text: &str,
    schedule: &ClassificationSchedule,
) -> Result<FacetFormula, FormulaError> {
    let rest = text.strip_prefix("[B]").ok_or(FormulaError::MissingBase)?;
    let chars: Vec<char> = rest.chars().collect();
    let offset = 3;
    let syntax = |at: usize, message: &str| FormulaError::Syntax {
        position: offset + at,
        message: message.to_string(),
    };
    let mut slots: Vec<FormulaSlot> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let indicator = chars[i];
        if !INDICATORS.contains(&indicator) {
            return Err(syntax(i, "expected an indicator"));
        }
        if chars.get(i + 1) != Some(&'[') {
            return Err(syntax(i + 1, "expected `[`"));
        }
        let code = *chars
            .get(i + 2)
            .filter(|c| c.is_ascii_alphabetic())
            .ok_or_else(|| syntax(i + 2, "expected a category code"))?;
        let mut j = i + 3;
        let required = if chars.get(j) == Some(&'?') {
            j += 1;
            false
        } else {
            true
        };
        if chars.get(j) != Some(&']') {
            return Err(syntax(j, "expected `]`"));
        }
        let category = schedule
            .category(code)
            .ok_or(FormulaError::UnknownCode(code))?;
        if category.indicator != indicator {
            return Err(FormulaError::IndicatorMismatch {
                code,
                expected: category.indicator,
                found: indicator,
            });
        }
        if slots.iter().any(|s| s.code == code) {
            return Err(FormulaError::DuplicateCode(code));
        }
        slots.push(FormulaSlot {
            code,
            indicator,
            required,
        });
        i = j + 1;
    }
    Ok(FacetFormula { slots })
}

/// One facet of a class number: the intra-array path from root to the
/// assigned concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetValue {
    pub code: char,
    pub path: Vec<Identifier>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassNumber {
    pub schedule_id: Identifier,
    pub base_notation: String,
    pub facets: Vec<FacetValue>,
}

impl ClassNumber {
    fn concepts<'s>(
        &self,
        schedule: &'s ClassificationSchedule,
        facet: &FacetValue,
    ) -> Result<(char, Vec<&'s Concept>), ClassNumberError> {
        let unknown = |id: &str| ClassNumberError::UnknownConcept {
            code: facet.code,
            id: id.to_string(),
        };
        let category = schedule
            .category(facet.code)
            .ok_or_else(|| unknown(""))?;
        let concepts = facet
            .path
            .iter()
            .map(|id| category.concept(id.as_str()).ok_or_else(|| unknown(id.as_str())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((category.indicator, concepts))
    }

    fn check_schedule(&self, schedule: &ClassificationSchedule) -> Result<(), ClassNumberError> {
        if self.schedule_id != schedule.id {
            return Err(ClassNumberError::WrongSchedule(self.schedule_id.to_string()));
        }
        Ok(())
    }

    /// The class-number string.
    pub fn render(&self, schedule: &ClassificationSchedule) -> Result<String, ClassNumberError> {
        self.check_schedule(schedule)?;
        let mut out = self.base_notation.clone();
        for facet in &self.facets {
            let (indicator, concepts) = self.concepts(schedule, facet)?;
            out.push(indicator);
            for c in concepts {
                out.push_str(&c.notation);
            }
        }
        Ok(out)
    }
}

/// Synthesizes a class number from `code -> full notation` assignments.
pub fn synthesize_class_number(
    schedule: &ClassificationSchedule,
    formula: &FacetFormula,
    assignments: &BTreeMap<char, String>,
) -> Result<(ClassNumber, String), SynthesisError> {
    if let Some(code) = assignments.keys().find(|c| formula.slot(**c).is_none()) {
        return Err(SynthesisError::NotInFormula(*code));
    }
    let mut facets = Vec::new();
    let mut text = schedule.base.notation.clone();
    for slot in &formula.slots {
        match assignments.get(&slot.code) {
            Some(notation) => {
                let path = schedule.resolve_notation(slot.code, notation)?;
                facets.push(FacetValue {
                    code: slot.code,
                    path: path.iter().map(|c| c.id.clone()).collect(),
                });
                text.push(slot.indicator);
                text.push_str(notation);
            }
            None if slot.required => return Err(SynthesisError::MissingRequired(slot.code)),
            None => {}
        }
    }
    let number = ClassNumber {
        schedule_id: schedule.id.clone(),
        base_notation: schedule.base.notation.clone(),
        facets,
    };
    Ok((number, text))
}

/// Parses a class-number string. Required slots are not enforced so that
/// truncated chain-index references parse as well.
pub fn parse_class_number(
    schedule: &ClassificationSchedule,
    formula: &FacetFormula,
    text: &str,
) -> Result<ClassNumber, ClassNumberError> {
    let base = schedule.base.notation.as_str();
    let chars: Vec<char> = text.chars().collect();
    let base_len = base.chars().count();
    let after_base = chars.get(base_len);
    if !text.starts_with(base) || after_base.is_some_and(|c| c.is_ascii_alphanumeric()) {
        return Err(ClassNumberError::BaseMismatch {
            text: text.to_string(),
            base: base.to_string(),
        });
    }
    let mut facets = Vec::new();
    let mut next_slot = 0;
    let mut i = base_len;
    while i < chars.len() {
        let indicator = chars[i];
        if !INDICATORS.contains(&indicator) {
            return Err(ClassNumberError::TrailingGarbage { position: i });
        }
        let found = formula.slots[next_slot..]
            .iter()
            .position(|s| s.indicator == indicator)
            .map(|p| p + next_slot)
            .ok_or(ClassNumberError::UnexpectedIndicator {
                indicator,
                position: i,
            })?;
        let slot = formula.slots[found];
        let start = i + 1;
        let mut end = start;
        while end < chars.len() && chars[end].is_ascii_alphanumeric() {
            end += 1;
        }
        let notation: String = chars[start..end].iter().collect();
        let path = schedule
            .resolve_notation(slot.code, &notation)
            .map_err(|_| ClassNumberError::Unresolvable {
                code: slot.code,
                notation: notation.clone(),
            })?;
        facets.push(FacetValue {
            code: slot.code,
            path: path.iter().map(|c| c.id.clone()).collect(),
        });
        next_slot = found + 1;
        i = end;
    }
    Ok(ClassNumber {
        schedule_id: schedule.id.clone(),
        base_notation: base.to_string(),
        facets,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLink {
    /// Class-number string up to and including this link.
    pub prefix: String,
    pub label: Label,
    pub sought: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubjectHeading {
    pub heading: String,
    pub reference: String,
}

/// The chain of a class number, most general first: the base, then every
/// concept along each facet's intra-array path.
pub fn chain_links(
    schedule: &ClassificationSchedule,
    number: &ClassNumber,
) -> Result<Vec<ChainLink>, ClassNumberError> {
    number.check_schedule(schedule)?;
    let mut links = vec![ChainLink {
        prefix: number.base_notation.clone(),
        label: schedule.base.label.clone(),
        sought: schedule.base.sought,
    }];
    let mut done = number.base_notation.clone();
    for facet in &number.facets {
        let (indicator, concepts) = number.concepts(schedule, facet)?;
        let mut prefix = done.clone();
        prefix.push(indicator);
        for c in concepts {
            prefix.push_str(&c.notation);
            links.push(ChainLink {
                prefix: prefix.clone(),
                label: c.label.clone(),
                sought: c.sought,
            });
        }
        done = prefix;
    }
    Ok(links)
}

/// One heading per sought link, most specific first. Each heading lists the
/// link's label followed by every more general label.
pub fn chain_index(
    schedule: &ClassificationSchedule,
    number: &ClassNumber,
) -> Result<Vec<SubjectHeading>, ClassNumberError> {
    let links = chain_links(schedule, number)?;
    let mut headings = Vec::new();
    for (i, link) in links.iter().enumerate().rev() {
        if !link.sought {
            continue;
        }
        let heading = links[..=i]
            .iter()
            .rev()
            .map(|l| l.label.text.as_str())
            .collect::<Vec<_>>()
            .join(HEADING_SEPARATOR);
        headings.push(SubjectHeading {
            heading,
            reference: link.prefix.clone(),
        });
    }
    Ok(headings)
}
