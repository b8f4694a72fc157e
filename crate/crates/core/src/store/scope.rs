//! Sentence-ordered merge of occurrences across releases and databases.

use std::collections::BTreeMap;
use std::iter::Peekable;
use std::path::PathBuf;

use chrono::NaiveDate;
use itertools::Itertools;

use super::runs::{RunReader, SentenceRow};
use crate::error::{Error, Result};
use crate::model::{release_interval, DatabaseId, DateInterval, Fingerprint, ReleaseVersion};

/// One database inside a [`Scope`], with a record dictionary covering all of
/// its ingested releases.
pub struct DatabaseScope {
    pub id: DatabaseId,
    pub releases: Vec<ReleaseVersion>,
    pub epoch: NaiveDate,
    records: Vec<String>,
    remap: BTreeMap<u32, Vec<u32>>,
    runs: Vec<(u32, PathBuf)>,
}

impl DatabaseScope {
    pub(crate) fn new(
        id: DatabaseId,
        releases: Vec<ReleaseVersion>,
        epoch: NaiveDate,
        tables: BTreeMap<u32, Vec<String>>,
        runs: Vec<(u32, PathBuf)>,
    ) -> Self {
        let records: Vec<String> = tables.values().flatten().cloned().sorted_unstable().dedup().collect();
        let remap = tables
            .into_iter()
            .map(|(ordinal, names)| {
                let ids = names
                    .iter()
                    .map(|n| records.binary_search(n).expect("name is in the union") as u32)
                    .collect();
                (ordinal, ids)
            })
            .collect();
        DatabaseScope {
            id,
            releases,
            epoch,
            records,
            remap,
            runs,
        }
    }

    /// Accession of a scope-wide record index.
    pub fn accession(&self, record: u32) -> &str {
        &self.records[record as usize]
    }

    /// Distinct records across all ingested releases.
    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.releases.iter().map(|r| r.date).collect()
    }

    /// Ordinal of the latest registered release.
    pub fn latest(&self) -> Option<u32> {
        self.releases.len().checked_sub(1).map(|n| n as u32)
    }

    pub fn is_ingested(&self, ordinal: u32) -> bool {
        self.remap.contains_key(&ordinal)
    }

    pub fn fully_ingested(&self) -> bool {
        self.remap.len() == self.releases.len()
    }

    /// Uncertainty interval of an event first observed at `ordinal`.
    pub fn interval(&self, ordinal: u32) -> DateInterval {
        release_interval(&self.dates(), self.epoch, ordinal)
    }
}

/// A presence fact: the sentence is in `record` of database `db` at `release`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    /// Index into [`Scope::databases`].
    pub db: u16,
    pub record: u32,
    pub release: u32,
}

/// Every presence cell of one sentence, sorted by database, record, release.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentencePresence {
    pub sentence: Fingerprint,
    pub cells: Vec<Cell>,
}

impl SentencePresence {
    /// The contiguous cells belonging to database `db`.
    pub fn database_cells(&self, db: u16) -> &[Cell] {
        let lo = self.cells.partition_point(|c| c.db < db);
        let hi = self.cells.partition_point(|c| c.db <= db);
        &self.cells[lo..hi]
    }
}

/// A set of databases whose occurrences are merged by sentence.
pub struct Scope {
    dbs: Vec<DatabaseScope>,
}

impl Scope {
    pub(crate) fn new(dbs: Vec<DatabaseScope>) -> Self {
        assert!(dbs.len() <= u16::MAX as usize);
        Scope { dbs }
    }

    pub fn databases(&self) -> &[DatabaseScope] {
        &self.dbs
    }

    pub fn database(&self, db: u16) -> &DatabaseScope {
        &self.dbs[db as usize]
    }

    pub fn index_of(&self, id: &DatabaseId) -> Option<u16> {
        self.dbs.iter().position(|d| &d.id == id).map(|i| i as u16)
    }

    /// Streams every sentence present anywhere in scope, in fingerprint order.
    pub fn sentences(&self) -> Result<PresenceStream<'_>> {
        let mut sources: Vec<Box<dyn Iterator<Item = Result<(Fingerprint, Cell)>> + '_>> = Vec::new();
        for (db_idx, db) in self.dbs.iter().enumerate() {
            for (ordinal, path) in &db.runs {
                let remap = &db.remap[ordinal];
                let ordinal = *ordinal;
                let reader = RunReader::<SentenceRow>::open(path)?;
                sources.push(Box::new(reader.map(move |row| {
                    let row: SentenceRow = row?;
                    let record = *remap
                        .get(row.record as usize)
                        .ok_or_else(|| Error::Corrupt(format!("record index {} out of range", row.record)))?;
                    Ok((
                        row.sentence,
                        Cell {
                            db: db_idx as u16,
                            record,
                            release: ordinal,
                        },
                    ))
                })));
            }
        }
        let merged = sources.into_iter().kmerge_by(|a, b| match (a, b) {
            (Err(_), _) => true,
            (_, Err(_)) => false,
            (Ok(x), Ok(y)) => x < y,
        });
        Ok(PresenceStream {
            merged: (Box::new(merged) as Box<dyn Iterator<Item = _>>).peekable(),
        })
    }
}

pub struct PresenceStream<'a> {
    merged: Peekable<Box<dyn Iterator<Item = Result<(Fingerprint, Cell)>> + 'a>>,
}

impl Iterator for PresenceStream<'_> {
    type Item = Result<SentencePresence>;

    fn next(&mut self) -> Option<Self::Item> {
        let (sentence, cell) = match self.merged.next()? {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        let mut cells = vec![cell];
        loop {
            match self.merged.peek() {
                Some(Ok((fp, _))) if *fp == sentence => {
                    if let Some(Ok((_, c))) = self.merged.next() {
                        cells.push(c);
                    }
                }
                Some(Err(_)) => return self.merged.next().and_then(|r| r.err()).map(Err),
                _ => break,
            }
        }
        Some(Ok(SentencePresence { sentence, cells }))
    }
}
