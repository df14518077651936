//! Identifiers, IRIs, labels, timestamps and lint findings shared by every
//! other module.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("identifier is empty")]
    Empty,
    #[error("`{ch}` illegal at index {index} in identifier `{text}`")]
    IllegalChar { text: String, ch: char, index: usize },
}

/// A non-empty token over `[A-Za-z0-9._-]`.
///
/// Notations, file names and IRI segments all use this charset so they can be
/// aligned without escaping.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Identifier(String);

pub fn is_identifier_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

pub fn validate_identifier(text: &str) -> Result<Identifier, IdentifierError> {
    if text.is_empty() {
        return Err(IdentifierError::Empty);
    }
    if let Some((index, ch)) = text.chars().enumerate().find(|(_, c)| !is_identifier_char(*c)) {
        return Err(IdentifierError::IllegalChar {
            text: text.to_string(),
            ch,
            index,
        });
    }
    Ok(Identifier(text.to_string()))
}

impl Identifier {
    pub fn new(text: impl AsRef<str>) -> Result<Self, IdentifierError> {
        validate_identifier(text.as_ref())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Identifier {
    type Error = IdentifierError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        validate_identifier(&value)
    }
}

impl From<Identifier> for String {
    fn from(value: Identifier) -> Self {
        value.0
    }
}

impl FromStr for Identifier {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        validate_identifier(s)
    }
}

impl std::borrow::Borrow<str> for Identifier {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Identifier {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("IRI `{0}` has no `scheme://` prefix")]
    MissingScheme(String),
    #[error("IRI `{0}` has an invalid scheme")]
    BadScheme(String),
    #[error("IRI `{0}` has an empty authority")]
    EmptyAuthority(String),
    #[error("IRI `{0}` has an empty path")]
    EmptyPath(String),
    #[error("IRI `{iri}` contains forbidden character {ch:?}")]
    ForbiddenChar { iri: String, ch: char },
}

/// Absolute IRI of the form `scheme://authority/path`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

fn is_forbidden_iri_char(c: char) -> bool {
    c.is_whitespace()
        || c.is_control()
        || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')
}

impl Iri {
    pub fn parse(text: impl AsRef<str>) -> Result<Self, IriError> {
        let text = text.as_ref();
        if let Some(ch) = text.chars().find(|c| is_forbidden_iri_char(*c)) {
            return Err(IriError::ForbiddenChar {
                iri: text.to_string(),
                ch,
            });
        }
        let (scheme, rest) = text
            .split_once("://")
            .ok_or_else(|| IriError::MissingScheme(text.to_string()))?;
        let mut chars = scheme.chars();
        let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(IriError::BadScheme(text.to_string()));
        }
        let (authority, path) = match rest.find('/') {
            Some(at) => rest.split_at(at),
            None => (rest, ""),
        };
        if authority.is_empty() {
            return Err(IriError::EmptyAuthority(text.to_string()));
        }
        if path.is_empty() {
            return Err(IriError::EmptyPath(text.to_string()));
        }
        Ok(Iri(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text after the last `/`.
    pub fn last_segment(&self) -> &str {
        self.0.rsplit('/').next().unwrap_or_default()
    }
}

impl TryFrom<String> for Iri {
    type Error = IriError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::parse(value)
    }
}

impl From<Iri> for String {
    fn from(value: Iri) -> Self {
        value.0
    }
}

impl FromStr for Iri {
    type Err = IriError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Iri::parse(s)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MintError {
    #[error("segment list is empty")]
    NoSegments,
    #[error(transparent)]
    Identifier(#[from] IdentifierError),
    #[error(transparent)]
    Iri(#[from] IriError),
}

fn percent_encode_segment(segment: &str, out: &mut String) {
    for byte in segment.bytes() {
        let c = byte as char;
        if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~') {
            out.push(c);
        } else {
            out.push_str(&format!("%{byte:02X}"));
        }
    }
}

/// Appends `/`-joined, percent-encoded segments to `base`.
///
/// A trailing `/` on the base is not doubled.
pub fn mint_iri(base: &Iri, segments: &[Identifier]) -> Result<Iri, MintError> {
    if segments.is_empty() {
        return Err(MintError::NoSegments);
    }
    let mut out = base.as_str().trim_end_matches('/').to_string();
    for segment in segments {
        out.push('/');
        percent_encode_segment(segment.as_str(), &mut out);
    }
    Ok(Iri::parse(out)?)
}

/// Validates each raw segment as an [`Identifier`] before minting.
pub fn mint_iri_str(base: &Iri, segments: &[&str]) -> Result<Iri, MintError> {
    let segments = segments
        .iter()
        .map(Identifier::new)
        .collect::<Result<Vec<_>, _>>()?;
    mint_iri(base, &segments)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label text is empty")]
    EmptyText,
    #[error("`{0}` is not a language tag")]
    BadLanguage(String),
}

/// Human-readable text tagged with a BCP-47-style language tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Label {
    pub text: String,
    pub language: String,
}

pub const DEFAULT_LANGUAGE: &str = "en";

pub fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let primary = parts.next().unwrap_or_default();
    let primary_ok = (1..=8).contains(&primary.len())
        && primary.chars().all(|c| c.is_ascii_alphabetic());
    primary_ok
        && parts.all(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

impl Label {
    pub fn new(text: impl Into<String>, language: impl Into<String>) -> Result<Self, LabelError> {
        let text = text.into();
        let language = language.into();
        if text.trim().is_empty() {
            return Err(LabelError::EmptyText);
        }
        if !is_language_tag(&language) {
            return Err(LabelError::BadLanguage(language));
        }
        Ok(Label { text, language })
    }

    pub fn en(text: impl Into<String>) -> Result<Self, LabelError> {
        Label::new(text, DEFAULT_LANGUAGE)
    }

    /// Trimmed, lowercased text used for uniqueness comparisons.
    pub fn key(&self) -> String {
        self.text.trim().to_lowercase()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimestampError {
    #[error("`{0}` is not an RFC 3339 timestamp")]
    Parse(String),
    #[error("`{0}` has sub-second precision")]
    SubSecond(String),
}

/// A UTC instant at second precision, rendered `YYYY-MM-DDTHH:MM:SSZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn parse(text: &str) -> Result<Self, TimestampError> {
        let parsed = DateTime::parse_from_rfc3339(text)
            .map_err(|_| TimestampError::Parse(text.to_string()))?;
        if parsed.timestamp_subsec_nanos() != 0 {
            return Err(TimestampError::SubSecond(text.to_string()));
        }
        Ok(Timestamp(parsed.with_timezone(&Utc)))
    }

    pub fn from_unix(seconds: i64) -> Option<Self> {
        Utc.timestamp_opt(seconds, 0).single().map(Timestamp)
    }

    pub fn now() -> Self {
        Timestamp::from_unix(Utc::now().timestamp()).expect("current time in range")
    }

    pub fn epoch() -> Self {
        Timestamp::from_unix(0).expect("epoch in range")
    }

    pub fn to_rfc3339(&self) -> String {
        self.0.to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    /// Colon-free rendering usable as an [`Identifier`] and file-name part,
    /// e.g. `2024-01-01T00-00-00Z`.
    pub fn to_segment(&self) -> String {
        self.0.format("%Y-%m-%dT%H-%M-%SZ").to_string()
    }

    pub fn as_datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl From<NaiveDate> for Timestamp {
    fn from(date: NaiveDate) -> Self {
        let midnight: NaiveDateTime = date.and_hms_opt(0, 0, 0).expect("midnight exists");
        Timestamp(Utc.from_utc_datetime(&midnight))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_id: Identifier,
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

macro_rules! rule_codes {
    ($($variant:ident => ($severity:ident, $summary:literal)),* $(,)?) => {
        /// Closed registry of lint and pipeline diagnostic codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum RuleCode {
            $($variant),*
        }

        impl RuleCode {
            pub const ALL: &'static [RuleCode] = &[$(RuleCode::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleCode::$variant => stringify!($variant)),*
                }
            }

            pub fn severity(self) -> Severity {
                match self {
                    $(RuleCode::$variant => Severity::$severity),*
                }
            }

            pub fn summary(self) -> &'static str {
                match self {
                    $(RuleCode::$variant => $summary),*
                }
            }
        }
    };
}

rule_codes! {
    IC1 => (Error, "siblings in an array share one characteristic"),
    IC2 => (Error, "chain characteristics follow the declared succession"),
    IC3 => (Warning, "array is exhaustive or has a residual member"),
    IC4 => (Error, "siblings have distinct characteristic values and labels"),
    IC5 => (Warning, "siblings are stored in helpful (ordinal) sequence"),
    CH1 => (Error, "each child adds exactly one division level"),
    VP1 => (Error, "labels avoid reticence stoplist words"),
    NP1 => (Error, "one identifier, one notation (synonym)"),
    NP2 => (Error, "one notation, one concept (homonym)"),
    CC1 => (Error, "records of one resource type share a field set"),
    CC2 => (Warning, "headings derive from chain links or sought fields"),
    CC3 => (Error, "local variation templates hold one {value} placeholder"),
    LO1 => (Warning, "schema class resolved to a lexical sense"),
    LO2 => (Error, "ontology has a single root"),
    LO3 => (Error, "ontology is an acyclic tree"),
    LO4 => (Error, "sibling labels are unique"),
    EP1 => (Error, "type has an identifying data property"),
    EP2 => (Error, "property domain and range resolve"),
    EP3 => (Error, "property not redeclared along an inheritance chain"),
    GR1 => (Warning, "node grounded by inheritance from an ancestor"),
    IG1 => (Warning, "cell value cast failed"),
    IG2 => (Error, "duplicate row identifier"),
    IG3 => (Error, "row identifier missing or malformed"),
    DL1 => (Error, "dangling link"),
    DL2 => (Warning, "dangling link skipped"),
    DL3 => (Warning, "dangling link stubbed"),
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleCode::ALL
            .iter()
            .copied()
            .find(|code| code.as_str() == s)
            .ok_or_else(|| format!("unknown rule code `{s}`"))
    }
}

impl Serialize for RuleCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A single diagnostic. `path` is a slash-separated location inside the linted
/// artifact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub code: RuleCode,
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl Finding {
    pub fn new(code: RuleCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            code,
            severity: code.severity(),
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {}: {}", self.severity, self.code, self.path, self.message)
    }
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(Finding::is_error)
}

/// Joins path parts with `/`.
pub fn path_of<I, S>(parts: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    parts
        .into_iter()
        .map(|p| p.as_ref().to_string())
        .collect::<Vec<_>>()
        .join("/")
}
