//! Within-database propagation patterns.
//!
//! For a sentence and a record let R be the set of release ordinals where
//! the record holds the sentence and L the latest registered ordinal.
//!
//! * Transient: |R| = 1 and R ≠ {L}.
//! * PossiblyTransient: |R| = 1 and R = {L}.
//! * MissingOrigin: the sentence first appears (at v0) in exactly one
//!   record, the origin. Some other record later holds it at an ordinal
//!   where the origin does not. Witnesses are v0, the first appearance of
//!   the earliest such secondary, and the earliest ordinal after v0 where
//!   the origin lacks the sentence while a secondary has it.
//!
//! Sentences first seen in several records at once are not classified as
//! MissingOrigin; when one of those records later loses the sentence while
//! another keeps it, the sentence is tallied as an ambiguous origin.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatabaseId, Fingerprint, RecordId};
use crate::store::{Cell, Workspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternLabel {
    Transient,
    PossiblyTransient,
    MissingOrigin,
}

impl PatternLabel {
    pub const ALL: [PatternLabel; 3] = [
        PatternLabel::Transient,
        PatternLabel::PossiblyTransient,
        PatternLabel::MissingOrigin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternLabel::Transient => "transient",
            PatternLabel::PossiblyTransient => "possibly-transient",
            PatternLabel::MissingOrigin => "missing-origin",
        }
    }
}

impl fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PatternLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::NotFound(format!("pattern label {s:?}")))
    }
}

/// Releases and records that make an instance true.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The only release in which `record` held the sentence.
    Single { record: RecordId, release: u32 },
    MissingOrigin {
        origin: RecordId,
        secondaries: Vec<RecordId>,
        origin_first: u32,
        secondary_first: u32,
        removed_at: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternInstance {
    pub label: PatternLabel,
    pub sentence: Fingerprint,
    /// Database, or merge-group name for a merged view.
    pub database: DatabaseId,
    /// Databases whose records were examined.
    pub members: Vec<DatabaseId>,
    pub witness: Witness,
}

impl PatternInstance {
    /// Re-evaluates the defining predicate against the store.
    pub fn replay(&self, ws: &Workspace) -> Result<bool> {
        let timeline = ws.timeline(self.sentence)?;
        let latest = calendar_len(ws, &self.members)? - 1;
        let mut entries: BTreeMap<RecordId, BTreeSet<u32>> = BTreeMap::new();
        for db in &self.members {
            for (acc, ordinals) in timeline.records(db).into_iter().flatten() {
                entries.insert(RecordId::new(db.clone(), acc.clone())?, ordinals.clone());
            }
        }
        let present = |r: &RecordId, t: u32| entries.get(r).is_some_and(|p| p.contains(&t));
        Ok(match (&self.label, &self.witness) {
            (PatternLabel::Transient, Witness::Single { record, release }) => {
                entries.get(record).is_some_and(|p| p.len() == 1 && p.contains(release)) && *release != latest
            }
            (PatternLabel::PossiblyTransient, Witness::Single { record, release }) => {
                entries.get(record).is_some_and(|p| p.len() == 1 && p.contains(release)) && *release == latest
            }
            (
                PatternLabel::MissingOrigin,
                Witness::MissingOrigin {
                    origin,
                    secondaries,
                    origin_first,
                    secondary_first,
                    removed_at,
                },
            ) => {
                let v0 = entries.values().filter_map(|p| p.first()).min().copied();
                let at_v0: Vec<&RecordId> = entries.keys().filter(|r| present(r, *origin_first)).collect();
                let qualifies = |s: &RecordId| {
                    s != origin && entries[s].iter().any(|&t| !present(origin, t))
                };
                let hit = |t: u32| !present(origin, t) && secondaries.iter().any(|s| present(s, t));
                v0 == Some(*origin_first)
                    && at_v0 == [origin]
                    && !secondaries.is_empty()
                    && secondaries.iter().all(|s| entries.contains_key(s) && qualifies(s))
                    && secondaries.iter().filter_map(|s| entries[s].first()).min() == Some(secondary_first)
                    && *secondary_first > *origin_first
                    && *removed_at > *origin_first
                    && hit(*removed_at)
                    && !(*origin_first + 1..*removed_at).any(hit)
            }
            _ => false,
        })
    }
}

/// Transient or PossiblyTransient for one record's presence set, if either applies.
pub fn classify_presence(ordinals: &BTreeSet<u32>, latest: u32) -> Option<PatternLabel> {
    match ordinals.iter().collect::<Vec<_>>().as_slice() {
        [only] if **only == latest => Some(PatternLabel::PossiblyTransient),
        [_] => Some(PatternLabel::Transient),
        _ => None,
    }
}

/// Entry-level labels of one (sentence, record) pair.
pub fn classify_entry(ws: &Workspace, sentence: Fingerprint, record: &RecordId) -> Result<BTreeSet<PatternLabel>> {
    let latest = calendar_len(ws, std::slice::from_ref(&record.database))? - 1;
    let timeline = ws.timeline(sentence)?;
    let presence = timeline
        .presence(&record.database, &record.accession)
        .ok_or_else(|| Error::NotFound(format!("sentence {sentence} never occurs in {record}")))?;
    Ok(classify_presence(presence, latest).into_iter().collect())
}

/// Instances of every label plus sentence-level tallies.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PatternReport {
    pub database: Option<DatabaseId>,
    /// Sorted by fingerprint, then label.
    pub instances: Vec<PatternInstance>,
    /// Distinct sentences with at least one instance, per label.
    pub sentence_counts: BTreeMap<PatternLabel, u64>,
    pub ambiguous_origin: u64,
    /// Sum over releases of records seen earlier but holding nothing now.
    pub record_absences: u64,
}

impl PatternReport {
    pub fn of_label(&self, label: PatternLabel) -> impl Iterator<Item = &PatternInstance> {
        self.instances.iter().filter(move |i| i.label == label)
    }
}

fn calendar_len(ws: &Workspace, members: &[DatabaseId]) -> Result<u32> {
    let first = ws.releases(&members[0])?;
    if first.is_empty() {
        return Err(Error::NotFound(format!("{} has no releases", members[0])));
    }
    for db in &members[1..] {
        let dates: Vec<_> = ws.releases(db)?.iter().map(|r| r.date).collect();
        if dates != first.iter().map(|r| r.date).collect::<Vec<_>>() {
            return Err(Error::Registry(format!(
                "{db} and {} do not share a release calendar",
                members[0]
            )));
        }
    }
    Ok(first.len() as u32)
}

/// Detects all patterns in one database.
pub fn detect(ws: &Workspace, db: &DatabaseId) -> Result<PatternReport> {
    detect_merged(ws, db, std::slice::from_ref(db))
}

/// Detects patterns over the union of `members`, which must share one
/// release calendar, reporting them under `name`.
pub fn detect_merged(ws: &Workspace, name: &DatabaseId, members: &[DatabaseId]) -> Result<PatternReport> {
    if members.is_empty() {
        return Err(Error::Registry("no databases to scan".into()));
    }
    let releases = calendar_len(ws, members)?;
    for db in members {
        if !ws.fully_ingested(db)? {
            return Err(Error::NotFound(format!("{db} has releases that are not ingested")));
        }
    }
    let latest = releases - 1;
    let scope = ws.scope(members)?;
    let record = |c: &Cell| RecordId {
        database: scope.database(c.db).id.clone(),
        accession: scope.database(c.db).accession(c.record).to_owned(),
    };

    let mut report = PatternReport {
        database: Some(name.clone()),
        ..PatternReport::default()
    };
    for presence in scope.sentences()? {
        let presence = presence?;
        let entries = entries(&presence.cells);
        let mut labels = BTreeSet::new();
        let mut found = Vec::new();
        for (key, ordinals) in &entries {
            let label = match ordinals.as_slice() {
                [only] if *only == latest => PatternLabel::PossiblyTransient,
                [_] => PatternLabel::Transient,
                _ => continue,
            };
            labels.insert(label);
            found.push((
                label,
                Witness::Single {
                    record: record(key),
                    release: ordinals[0],
                },
            ));
        }
        match missing_origin(&entries) {
            Origin::Unique(w) => {
                labels.insert(PatternLabel::MissingOrigin);
                let mut secondaries: Vec<RecordId> = w.secondaries.iter().map(&record).collect();
                secondaries.sort();
                found.push((
                    PatternLabel::MissingOrigin,
                    Witness::MissingOrigin {
                        origin: record(&w.origin),
                        secondaries,
                        origin_first: w.v0,
                        secondary_first: w.v1,
                        removed_at: w.v2,
                    },
                ));
            }
            Origin::Ambiguous => report.ambiguous_origin += 1,
            Origin::None => {}
        }
        for label in labels {
            *report.sentence_counts.entry(label).or_default() += 1;
        }
        for (label, witness) in found {
            report.instances.push(PatternInstance {
                label,
                sentence: presence.sentence,
                database: name.clone(),
                members: members.to_vec(),
                witness,
            });
        }
    }
    report.instances.sort();
    for label in PatternLabel::ALL {
        report.sentence_counts.entry(label).or_default();
    }
    for db in members {
        report.record_absences += ws.record_absences(db)?.into_iter().flatten().sum::<u64>();
    }
    Ok(report)
}

pub fn detect_transient(ws: &Workspace, db: &DatabaseId) -> Result<Vec<PatternInstance>> {
    detect_label(ws, db, PatternLabel::Transient)
}

pub fn detect_possibly_transient(ws: &Workspace, db: &DatabaseId) -> Result<Vec<PatternInstance>> {
    detect_label(ws, db, PatternLabel::PossiblyTransient)
}

pub fn detect_missing_origin(ws: &Workspace, db: &DatabaseId) -> Result<Vec<PatternInstance>> {
    detect_label(ws, db, PatternLabel::MissingOrigin)
}

fn detect_label(ws: &Workspace, db: &DatabaseId, label: PatternLabel) -> Result<Vec<PatternInstance>> {
    Ok(detect(ws, db)?.instances.into_iter().filter(|i| i.label == label).collect())
}

/// Groups sorted cells into (entry, ascending ordinals).
fn entries(cells: &[Cell]) -> Vec<(Cell, Vec<u32>)> {
    let mut out: Vec<(Cell, Vec<u32>)> = Vec::new();
    for c in cells {
        match out.last_mut() {
            Some((k, ords)) if k.db == c.db && k.record == c.record => ords.push(c.release),
            _ => out.push((*c, vec![c.release])),
        }
    }
    out
}

struct OriginWitness {
    origin: Cell,
    secondaries: Vec<Cell>,
    v0: u32,
    v1: u32,
    v2: u32,
}

enum Origin {
    None,
    Unique(OriginWitness),
    Ambiguous,
}

fn missing_origin(entries: &[(Cell, Vec<u32>)]) -> Origin {
    let Some(v0) = entries.iter().map(|(_, o)| o[0]).min() else {
        return Origin::None;
    };
    let origins: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].1[0] == v0).collect();
    // Ordinals > v0 where entry `i` lacks the sentence while another entry has it.
    let lost_at = |i: usize| -> Option<u32> {
        let own = &entries[i].1;
        entries
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, (_, o))| o.iter().copied())
            .filter(|t| *t > v0 && own.binary_search(t).is_err())
            .min()
    };
    if origins.len() > 1 {
        return if origins.iter().any(|&i| lost_at(i).is_some()) {
            Origin::Ambiguous
        } else {
            Origin::None
        };
    }
    let o = origins[0];
    let own = &entries[o].1;
    let mut secondaries = Vec::new();
    let (mut v1, mut v2) = (u32::MAX, u32::MAX);
    for (j, (key, ords)) in entries.iter().enumerate() {
        if j == o {
            continue;
        }
        if let Some(t) = ords.iter().copied().find(|t| own.binary_search(t).is_err()) {
            secondaries.push(*key);
            v1 = v1.min(ords[0]);
            v2 = v2.min(t);
        }
    }
    if secondaries.is_empty() {
        return Origin::None;
    }
    Origin::Unique(OriginWitness {
        origin: entries[o].0,
        secondaries,
        v0,
        v1,
        v2,
    })
}
