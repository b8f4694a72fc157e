//! Workspace integrity check.

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use super::runs::{self, RecordRow, RunReader, SentenceRow};
use super::Workspace;
use crate::error::Result;
use crate::model::{fingerprint, is_normalized};

#[derive(Clone, Debug, Default, Serialize)]
pub struct IntegrityReport {
    pub releases_checked: u64,
    pub occurrences_checked: u64,
    pub sentences_checked: u64,
    /// Violations; empty for a healthy workspace.
    pub problems: Vec<String>,
    /// Leftover directories from interrupted ingests. Harmless.
    pub orphans: Vec<PathBuf>,
}

impl IntegrityReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

pub(super) fn verify(ws: &Workspace) -> Result<IntegrityReport> {
    let mut report = IntegrityReport::default();
    let mut referenced: HashSet<PathBuf> = HashSet::new();

    for (text_fp, text) in &ws.sentences {
        report.sentences_checked += 1;
        if !is_normalized(text) {
            report.problems.push(format!("sentence {text_fp} is not normalized"));
        } else if fingerprint(text).ok() != Some(*text_fp) {
            report.problems.push(format!("sentence {text_fp} does not hash to its key"));
        }
    }

    for (db, entry) in &ws.registry.databases {
        for (ordinal, r) in entry.releases.iter().enumerate() {
            let Some(recorded) = r.ingested else { continue };
            report.releases_checked += 1;
            let dir = ws.release_dir(db, ordinal as u32);
            referenced.insert(dir.clone());
            let name = format!("{db}@{}", r.label);
            let mut problem = |msg: String| report.problems.push(format!("{name}: {msg}"));

            let records = runs::read_records(&dir.join("records.bin"))?;
            if !records.windows(2).all(|w| w[0] < w[1]) {
                problem("record table is not strictly sorted".into());
            }
            if records.len() as u64 != recorded.records {
                problem(format!("{} records on disk, {} in registry", records.len(), recorded.records));
            }

            let by_record: Vec<RecordRow> = RunReader::open(&dir.join("by_record.run"))?.collect::<Result<_>>()?;
            let by_sentence: Vec<SentenceRow> =
                RunReader::open(&dir.join("by_sentence.run"))?.collect::<Result<_>>()?;
            if !by_record.windows(2).all(|w| w[0] < w[1]) {
                problem("by-record run is not strictly sorted".into());
            }
            if !by_sentence.windows(2).all(|w| w[0] < w[1]) {
                problem("by-sentence run is not strictly sorted".into());
            }
            if by_record.len() as u64 != recorded.occurrences {
                problem(format!(
                    "{} occurrences on disk, {} in registry",
                    by_record.len(),
                    recorded.occurrences
                ));
            }
            if by_record.iter().any(|r| r.record as usize >= records.len()) {
                problem("record index out of range".into());
            }
            let mut flipped: Vec<SentenceRow> = by_record
                .iter()
                .map(|r| SentenceRow {
                    sentence: r.sentence,
                    record: r.record,
                })
                .collect();
            flipped.sort_unstable();
            if flipped != by_sentence {
                problem("by-record and by-sentence runs disagree".into());
            }
            if let Some(missing) = by_sentence.iter().find(|r| !ws.sentences.contains_key(&r.sentence)) {
                problem(format!("sentence {} has no stored text", missing.sentence));
            }
            let used: HashSet<u32> = by_record.iter().map(|r| r.record).collect();
            if used.len() != records.len() {
                problem("record table lists records without occurrences".into());
            }
            report.occurrences_checked += by_record.len() as u64;
        }
    }

    let releases = ws.root.join("releases");
    if let Ok(dbs) = fs::read_dir(&releases) {
        for db in dbs.flatten() {
            for dir in fs::read_dir(db.path()).into_iter().flatten().flatten() {
                if !referenced.contains(&dir.path()) {
                    report.orphans.push(dir.path());
                }
            }
        }
    }
    for dir in fs::read_dir(ws.root.join("staging")).into_iter().flatten().flatten() {
        report.orphans.push(dir.path());
    }
    report.orphans.sort();
    Ok(report)
}
