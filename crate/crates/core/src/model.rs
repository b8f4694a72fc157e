//! Shared vocabulary: databases, releases, records, sentences and occurrences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::normalize::normalize_text;

/// Short, case-insensitive database name such as `swissprot`.
///
/// Stored case-folded, so `SwissProt` and `swissprot` are the same id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DatabaseId(String);

impl DatabaseId {
    pub fn new(name: &str) -> Result<Self> {
        let invalid = |reason| Error::InvalidId {
            value: name.to_owned(),
            reason,
        };
        if name.is_empty() {
            return Err(invalid("database name is empty"));
        }
        if name.chars().any(char::is_whitespace) {
            return Err(invalid("database name contains whitespace"));
        }
        if name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(invalid("database name contains a path separator"));
        }
        if name.contains(['=', ',']) {
            return Err(invalid("database name contains '=' or ','"));
        }
        Ok(DatabaseId(name.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for DatabaseId {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        DatabaseId::new(&value)
    }
}

impl From<DatabaseId> for String {
    fn from(id: DatabaseId) -> String {
        id.0
    }
}

impl FromStr for DatabaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DatabaseId::new(s)
    }
}

impl fmt::Display for DatabaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One dated snapshot of a database.
///
/// The date is an upper bound on when any content first seen in this
/// release entered the database.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReleaseVersion {
    pub database: DatabaseId,
    pub label: String,
    pub ordinal: u32,
    pub date: NaiveDate,
    /// Set when the date was inherited from configuration rather than declared.
    #[serde(default)]
    pub date_estimated: bool,
}

impl fmt::Display for ReleaseVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.database, self.label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordId {
    pub database: DatabaseId,
    pub accession: String,
}

impl RecordId {
    pub fn new(database: DatabaseId, accession: impl Into<String>) -> Result<Self> {
        let accession = accession.into();
        if accession.is_empty() {
            return Err(Error::InvalidId {
                value: accession,
                reason: "accession is empty",
            });
        }
        if accession.contains(['\n', '\r', '\t']) {
            return Err(Error::InvalidId {
                value: accession,
                reason: "accession contains a tab or line break",
            });
        }
        Ok(RecordId {
            database,
            accession,
        })
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.database, self.accession)
    }
}

/// 128-bit content hash of a normalized sentence (XXH3-128, seed 0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Fingerprint(pub u128);

impl Fingerprint {
    /// Hashes `text` without checking that it is normalized.
    pub(crate) fn of_canonical(text: &str) -> Self {
        Fingerprint(xxhash_rust::xxh3::xxh3_128(text.as_bytes()))
    }

    pub fn to_be_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }

    pub fn from_be_bytes(bytes: [u8; 16]) -> Self {
        Fingerprint(u128::from_be_bytes(bytes))
    }
}

/// Fingerprints canonical sentence text, rejecting text that is not a fixed
/// point of normalization.
pub fn fingerprint(text: &str) -> Result<Fingerprint> {
    if !is_normalized(text) {
        return Err(Error::NotNormalized(text.to_owned()));
    }
    Ok(Fingerprint::of_canonical(text))
}

pub fn is_normalized(text: &str) -> bool {
    !text.is_empty() && normalize_text(text) == text
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({self})")
    }
}

impl FromStr for Fingerprint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 32 {
            return Err(Error::InvalidId {
                value: s.to_owned(),
                reason: "fingerprint must be 32 hex digits",
            });
        }
        u128::from_str_radix(s, 16)
            .map(Fingerprint)
            .map_err(|_| Error::InvalidId {
                value: s.to_owned(),
                reason: "fingerprint must be 32 hex digits",
            })
    }
}

impl TryFrom<String> for Fingerprint {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<Fingerprint> for String {
    fn from(fp: Fingerprint) -> String {
        fp.to_string()
    }
}

/// Canonical sentence text together with its fingerprint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedSentence {
    text: String,
    fingerprint: Fingerprint,
}

impl NormalizedSentence {
    /// Normalizes arbitrary raw text. Fails with [`Error::EmptySentence`]
    /// when nothing is left.
    pub fn new(raw: &str) -> Result<Self> {
        let text = normalize_text(raw);
        if text.is_empty() {
            return Err(Error::EmptySentence);
        }
        let fingerprint = Fingerprint::of_canonical(&text);
        Ok(NormalizedSentence { text, fingerprint })
    }

    /// Wraps text that must already be canonical.
    pub fn from_canonical(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let fingerprint = fingerprint(&text)?;
        Ok(NormalizedSentence { text, fingerprint })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn into_text(self) -> String {
        self.text
    }

    /// Pairs text with an arbitrary fingerprint to simulate hash collisions.
    #[cfg(test)]
    pub(crate) fn forged(text: &str, fingerprint: Fingerprint) -> Self {
        NormalizedSentence {
            text: text.to_owned(),
            fingerprint,
        }
    }
}

impl fmt::Display for NormalizedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A sentence observed in one record of one release.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub record: RecordId,
    pub sentence: Fingerprint,
    /// Ordinal of the release within `record.database`.
    pub release: u32,
}

/// Where a sentence has been seen: database → accession → release ordinals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SentenceTimeline {
    pub sentence: Fingerprint,
    pub databases: BTreeMap<DatabaseId, BTreeMap<String, BTreeSet<u32>>>,
}

impl SentenceTimeline {
    pub fn new(sentence: Fingerprint) -> Self {
        SentenceTimeline {
            sentence,
            databases: BTreeMap::new(),
        }
    }

    pub(crate) fn insert(&mut self, database: &DatabaseId, accession: &str, ordinal: u32) {
        self.databases
            .entry(database.clone())
            .or_default()
            .entry(accession.to_owned())
            .or_default()
            .insert(ordinal);
    }

    pub fn records(&self, database: &DatabaseId) -> Option<&BTreeMap<String, BTreeSet<u32>>> {
        self.databases.get(database)
    }

    pub fn presence(&self, database: &DatabaseId, accession: &str) -> Option<&BTreeSet<u32>> {
        self.databases.get(database)?.get(accession)
    }

    pub fn is_present(&self, database: &DatabaseId, accession: &str, ordinal: u32) -> bool {
        self.presence(database, accession)
            .is_some_and(|set| set.contains(&ordinal))
    }

    /// Ordinals at which any record of `database` holds the sentence.
    pub fn database_presence(&self, database: &DatabaseId) -> BTreeSet<u32> {
        self.databases
            .get(database)
            .map(|records| records.values().flatten().copied().collect())
            .unwrap_or_default()
    }

    /// Flattens the timeline back into occurrences.
    pub fn occurrences(&self) -> impl Iterator<Item = Occurrence> + '_ {
        self.databases.iter().flat_map(move |(db, records)| {
            records.iter().flat_map(move |(accession, ordinals)| {
                ordinals.iter().map(move |&release| Occurrence {
                    record: RecordId {
                        database: db.clone(),
                        accession: accession.clone(),
                    },
                    sentence: self.sentence,
                    release,
                })
            })
        })
    }
}

/// Closed date interval expressing release-granularity uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DateInterval {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateInterval {
    /// `self` lies entirely before `other`, with no shared day.
    pub fn strictly_before(&self, other: &DateInterval) -> bool {
        self.end < other.start
    }

    pub fn overlaps(&self, other: &DateInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for DateInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Uncertainty interval of an event first observed at release `ordinal`:
/// from the previous release's date (or `epoch` for the first release) to
/// the release date itself.
pub fn release_interval(dates: &[NaiveDate], epoch: NaiveDate, ordinal: u32) -> DateInterval {
    let i = ordinal as usize;
    let start = if i == 0 { epoch.min(dates[0]) } else { dates[i - 1] };
    DateInterval {
        start,
        end: dates[i],
    }
}
