use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::extract::FormatKind;
use crate::fixtures::Fixture;
use crate::manifest::{DatabaseManifest, Manifest, ReleaseManifest};
use crate::model::{DatabaseId, Fingerprint, NormalizedSentence, RecordId};
use crate::store::{IngestSummary, ReleaseSpec, Workspace};

/// One database of a presence corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusDatabase {
    pub name: DatabaseId,
    pub epoch: Option<NaiveDate>,
    /// (label, date) per release, in ordinal order.
    pub releases: Vec<(String, NaiveDate)>,
    pub records: Vec<String>,
}

impl CorpusDatabase {
    pub fn latest(&self) -> u32 {
        self.releases.len() as u32 - 1
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.releases.iter().map(|(_, d)| *d).collect()
    }

    pub fn epoch_or_first(&self) -> NaiveDate {
        self.epoch.unwrap_or(self.releases[0].1)
    }
}

/// Which (record, sentence) pairs hold in which release.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PresenceCell {
    pub db: u16,
    pub release: u32,
    pub record: u32,
    pub sentence: u32,
}

/// A corpus held as explicit presence cells over indexed databases,
/// records and sentence texts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PresenceCorpus {
    pub databases: Vec<CorpusDatabase>,
    /// Normalized sentence texts.
    pub sentences: Vec<String>,
    pub cells: BTreeSet<PresenceCell>,
}

impl PresenceCorpus {
    pub fn sentence_text(i: u32) -> String {
        format!("synthetic sentence {i:04}.")
    }

    pub fn record_name(i: u32) -> String {
        format!("R{i:04}")
    }

    pub fn fingerprint(&self, sentence: u32) -> Fingerprint {
        Fingerprint::of_canonical(&self.sentences[sentence as usize])
    }

    pub fn record_id(&self, db: u16, record: u32) -> RecordId {
        let d = &self.databases[db as usize];
        RecordId {
            database: d.name.clone(),
            accession: d.records[record as usize].clone(),
        }
    }

    pub fn occurrence_count(&self) -> usize {
        self.cells.len()
    }

    /// Cells of one release in (record, sentence) order.
    pub fn release_cells(&self, db: u16, release: u32) -> impl Iterator<Item = &PresenceCell> {
        let lo = PresenceCell { db, release, record: 0, sentence: 0 };
        let hi = PresenceCell {
            db,
            release,
            record: u32::MAX,
            sentence: u32::MAX,
        };
        self.cells.range(lo..=hi)
    }

    /// Builds a corpus from a fixture, numbering records and sentences in
    /// first-seen order.
    pub fn from_fixture(fixture: &Fixture) -> Result<Self> {
        let mut corpus = PresenceCorpus::default();
        for (d, fdb) in fixture.databases.iter().enumerate() {
            let mut records: Vec<String> = Vec::new();
            for (acc, text, ordinals) in &fdb.presence {
                let text = NormalizedSentence::new(text)?.into_text();
                let record = position_or_push(&mut records, acc);
                let sentence = position_or_push(&mut corpus.sentences, &text);
                for &release in ordinals {
                    corpus.cells.insert(PresenceCell {
                        db: d as u16,
                        release,
                        record,
                        sentence,
                    });
                }
            }
            corpus.databases.push(CorpusDatabase {
                name: fdb.name.clone(),
                epoch: fdb.epoch,
                releases: fdb.releases.clone(),
                records,
            });
        }
        Ok(corpus)
    }

    /// Registers and ingests every release.
    pub fn load(&self, ws: &mut Workspace) -> Result<Vec<IngestSummary>> {
        let mut out = Vec::new();
        for (d, db) in self.databases.iter().enumerate() {
            let specs: Vec<ReleaseSpec> = db
                .releases
                .iter()
                .map(|(label, date)| ReleaseSpec::new(label, *date))
                .collect();
            let versions = ws.register_database(&db.name, db.epoch, &specs)?;
            for v in versions {
                let occurrences = self.release_cells(d as u16, v.ordinal).map(|c| {
                    let text = NormalizedSentence::from_canonical(self.sentences[c.sentence as usize].as_str())?;
                    Ok((self.record_id(c.db, c.record), text))
                });
                out.push(ws.ingest(&v, occurrences)?);
            }
        }
        Ok(out)
    }

    /// One generic-tsv release file with a line per occurrence, so
    /// sentences without a final period stay separate.
    pub fn release_tsv(&self, db: u16, release: u32) -> String {
        let mut out = String::new();
        for c in self.release_cells(db, release) {
            let record = &self.databases[db as usize].records[c.record as usize];
            let _ = writeln!(out, "{record}\t{}", self.sentences[c.sentence as usize]);
        }
        out
    }

    /// Writes `<db>/<label>.tsv` per release plus `manifest.toml` under
    /// `dir` and returns the manifest path.
    pub fn write_tsv(&self, dir: &Path) -> Result<PathBuf> {
        let mut manifest = Manifest::default();
        for (d, db) in self.databases.iter().enumerate() {
            let sub = dir.join(db.name.as_str());
            fs::create_dir_all(&sub).map_err(Error::io(&sub))?;
            let mut releases = Vec::new();
            for (t, (label, date)) in db.releases.iter().enumerate() {
                let rel = PathBuf::from(db.name.as_str()).join(format!("{label}.tsv"));
                let path = dir.join(&rel);
                fs::write(&path, self.release_tsv(d as u16, t as u32)).map_err(Error::io(&path))?;
                releases.push(ReleaseManifest {
                    label: label.clone(),
                    date: Some(*date),
                    path: rel,
                    format: None,
                });
            }
            manifest.databases.push(DatabaseManifest {
                name: db.name.clone(),
                epoch: db.epoch,
                declared_date: None,
                format: Some(FormatKind::GenericTsv),
                topics: None,
                line_prefix: None,
                record_elements: None,
                id_attribute: None,
                text_elements: None,
                releases,
            });
        }
        let path = dir.join("manifest.toml");
        fs::write(&path, manifest.to_toml()).map_err(Error::io(&path))?;
        Ok(path)
    }
}

fn position_or_push(items: &mut Vec<String>, item: &str) -> u32 {
    match items.iter().position(|x| x == item) {
        Some(i) => i as u32,
        None => {
            items.push(item.to_owned());
            items.len() as u32 - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::ingest_manifest;

    #[test]
    fn tsv_round_trip_matches_direct_load() {
        let corpus = PresenceCorpus::from_fixture(&Fixture::retinal()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut direct = Workspace::create(dir.path().join("a")).unwrap();
        corpus.load(&mut direct).unwrap();

        let manifest = corpus.write_tsv(&dir.path().join("files")).unwrap();
        let mut via_files = Workspace::create(dir.path().join("b")).unwrap();
        ingest_manifest(&mut via_files, &Manifest::load(manifest).unwrap(), |_| {}).unwrap();

        assert_eq!(direct.fingerprints(), via_files.fingerprints());
        for f in direct.fingerprints() {
            assert_eq!(direct.timeline(f).unwrap(), via_files.timeline(f).unwrap());
        }
    }

    #[test]
    fn release_cells_are_scoped() {
        let corpus = PresenceCorpus::from_fixture(&Fixture::toy()).unwrap();
        assert_eq!(corpus.release_cells(0, 1).count(), 3);
        assert_eq!(corpus.occurrence_count(), 9);
        assert!(corpus.release_tsv(0, 0).starts_with("A\t"));
    }
}
