//! Persistent, versioned occurrence index.
//!
//! Layout of a workspace directory:
//!
//! ```text
//! FORMAT                      format tag, checked on open
//! workspace.json              registry; its atomic replacement commits an ingest
//! LOCK                        exclusive writer lock
//! staging/                    releases being built
//! releases/<db>/<ordinal>/
//!     records.bin             sorted accessions; row indices refer to these
//!     by_record.run           (record, fingerprint) rows, sorted
//!     by_sentence.run         (fingerprint, record) rows, sorted
//!     sentences.seg           texts first introduced by this ingest
//! ```
//!
//! Released data is immutable. Directories not referenced by the registry
//! are leftovers of an interrupted ingest and are ignored.

mod registry;
mod runs;
mod scope;
mod verify;

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions, TryLockError};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::ExtractStats;
use crate::model::{
    DatabaseId, Fingerprint, NormalizedSentence, Occurrence, RecordId, ReleaseVersion,
    SentenceTimeline,
};
use registry::{IngestRecord, Registry};
use runs::{RecordRow, RunReader, SentenceRow};

pub use registry::ReleaseSpec;
pub use scope::{Cell, DatabaseScope, PresenceStream, Scope, SentencePresence};
pub use verify::IntegrityReport;

pub const FORMAT_TAG: &str = "annotrace-workspace 1";
const FORMAT_FILE: &str = "FORMAT";
const LOCK_FILE: &str = "LOCK";

/// Counters reported for one ingested release.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub release: Option<ReleaseVersion>,
    pub records: u64,
    pub occurrences: u64,
    pub duplicates_collapsed: u64,
    pub empty_dropped: u64,
    pub parse_damage: u64,
    pub new_sentences: u64,
}

impl IngestSummary {
    /// Folds in the counters gathered while extracting the stream.
    pub fn with_extraction(mut self, stats: &ExtractStats) -> Self {
        self.duplicates_collapsed += stats.duplicates_collapsed;
        self.empty_dropped += stats.empty_dropped;
        self.parse_damage += stats.parse.damaged;
        self
    }
}

/// Whether writes are flushed to stable storage before an ingest commits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Durability {
    #[default]
    Synced,
    /// Skips fsync. Commits stay atomic but may be lost on power failure;
    /// meant for scratch workspaces.
    Unsynced,
}

/// Handle on a workspace directory.
///
/// Readers see the releases committed when the handle was opened; an ingest
/// through this handle refreshes it first.
pub struct Workspace {
    root: PathBuf,
    registry: Registry,
    sentences: HashMap<Fingerprint, Box<str>>,
    durability: Durability,
}

struct WriterLock {
    _file: File,
}

impl WriterLock {
    fn acquire(root: &Path) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(Error::io(&path))?;
        match file.try_lock() {
            Ok(()) => Ok(WriterLock { _file: file }),
            Err(TryLockError::WouldBlock) => Err(Error::Locked(root.to_owned())),
            Err(TryLockError::Error(e)) => Err(Error::Io { path, source: e }),
        }
    }
}

impl Workspace {
    /// Initializes an empty workspace. The directory may exist but must be empty.
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_owned();
        fs::create_dir_all(&root).map_err(Error::io(&root))?;
        if fs::read_dir(&root).map_err(Error::io(&root))?.next().is_some() {
            return Err(Error::Format {
                path: root,
                found: "non-empty directory".into(),
            });
        }
        let _lock = WriterLock::acquire(&root)?;
        for dir in ["staging", "releases"] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(Error::io(&p))?;
        }
        let registry = Registry::new(uuid::Uuid::new_v4().to_string());
        registry.save(&root, true)?;
        let tag = root.join(FORMAT_FILE);
        fs::write(&tag, format!("{FORMAT_TAG}\n")).map_err(Error::io(&tag))?;
        Ok(Workspace {
            root,
            registry,
            sentences: HashMap::new(),
            durability: Durability::default(),
        })
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_owned();
        let tag_path = root.join(FORMAT_FILE);
        let tag = match fs::read_to_string(&tag_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::Format {
                    path: root,
                    found: "no FORMAT tag".into(),
                })
            }
            Err(e) => return Err(Error::io(&tag_path)(e)),
        };
        if tag.trim_end() != FORMAT_TAG {
            return Err(Error::Format {
                path: root,
                found: tag.trim_end().to_owned(),
            });
        }
        let registry = Registry::load(&root)?;
        let mut ws = Workspace {
            root,
            registry,
            sentences: HashMap::new(),
            durability: Durability::default(),
        };
        ws.load_sentences()?;
        Ok(ws)
    }

    /// Opens the workspace at `root`, creating it if the directory is missing or empty.
    pub fn open_or_create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        let empty = match fs::read_dir(root) {
            Ok(mut entries) => entries.next().is_none(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
            Err(e) => return Err(Error::io(root)(e)),
        };
        if empty {
            Workspace::create(root)
        } else {
            Workspace::open(root)
        }
    }

    fn load_sentences(&mut self) -> Result<()> {
        let mut table: HashMap<Fingerprint, Box<str>> = HashMap::new();
        for (db, entry) in &self.registry.databases {
            for (ordinal, r) in entry.releases.iter().enumerate() {
                if r.ingested.is_none() {
                    continue;
                }
                let path = self.release_dir(db, ordinal as u32).join("sentences.seg");
                for (fp, text) in runs::read_segment(&path)? {
                    match table.entry(fp) {
                        Entry::Vacant(v) => {
                            v.insert(text.into_boxed_str());
                        }
                        Entry::Occupied(o) if **o.get() != *text => {
                            return Err(Error::Corrupt(format!(
                                "sentence {fp} stored with two texts: {:?} and {text:?}",
                                o.get()
                            )))
                        }
                        Entry::Occupied(_) => {}
                    }
                }
            }
        }
        self.sentences = table;
        Ok(())
    }

    pub fn set_durability(&mut self, durability: Durability) {
        self.durability = durability;
    }

    fn synced(&self) -> bool {
        self.durability == Durability::Synced
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn id(&self) -> &str {
        &self.registry.id
    }

    fn release_dir(&self, db: &DatabaseId, ordinal: u32) -> PathBuf {
        self.root.join("releases").join(db.as_str()).join(ordinal.to_string())
    }

    /// Registers `db` with its release calendar, or extends an existing one.
    /// Re-registering the same calendar is a no-op.
    pub fn register_database(
        &mut self,
        db: &DatabaseId,
        epoch: Option<NaiveDate>,
        releases: &[ReleaseSpec],
    ) -> Result<Vec<ReleaseVersion>> {
        let _lock = WriterLock::acquire(&self.root)?;
        self.refresh()?;
        let mut next = self.registry.clone();
        next.register(db, epoch, releases)?;
        if next != self.registry {
            next.save(&self.root, self.synced())?;
            self.registry = next;
        }
        self.releases(db)
    }

    /// Reloads the registry if another writer committed since this handle
    /// last looked.
    fn refresh(&mut self) -> Result<()> {
        let on_disk = Registry::load(&self.root)?;
        if on_disk != self.registry {
            self.registry = on_disk;
            self.load_sentences()?;
        }
        Ok(())
    }

    /// Registered databases in name order.
    pub fn databases(&self) -> Vec<DatabaseId> {
        self.registry.databases.keys().cloned().collect()
    }

    fn entry(&self, db: &DatabaseId) -> Result<&registry::DatabaseEntry> {
        self.registry
            .databases
            .get(db)
            .ok_or_else(|| Error::NotFound(format!("database {db}")))
    }

    /// All registered releases of `db` in ordinal order.
    pub fn releases(&self, db: &DatabaseId) -> Result<Vec<ReleaseVersion>> {
        let entry = self.entry(db)?;
        Ok((0..entry.releases.len()).map(|i| entry.version(db, i)).collect())
    }

    pub fn release(&self, db: &DatabaseId, label: &str) -> Result<ReleaseVersion> {
        let entry = self.entry(db)?;
        entry
            .releases
            .iter()
            .position(|r| r.label == label)
            .map(|i| entry.version(db, i))
            .ok_or_else(|| Error::NotFound(format!("release {db}@{label}")))
    }

    pub fn release_at(&self, db: &DatabaseId, ordinal: u32) -> Result<ReleaseVersion> {
        let entry = self.entry(db)?;
        if (ordinal as usize) < entry.releases.len() {
            Ok(entry.version(db, ordinal as usize))
        } else {
            Err(Error::NotFound(format!("release {db}#{ordinal}")))
        }
    }

    /// Latest registered release, ingested or not.
    pub fn latest(&self, db: &DatabaseId) -> Result<ReleaseVersion> {
        let n = self.entry(db)?.releases.len();
        match n {
            0 => Err(Error::NotFound(format!("{db} has no releases"))),
            n => self.release_at(db, n as u32 - 1),
        }
    }

    /// Start of the first release's uncertainty interval.
    pub fn epoch(&self, db: &DatabaseId) -> Result<NaiveDate> {
        self.entry(db)?
            .epoch_or_first()
            .ok_or_else(|| Error::NotFound(format!("{db} has no releases")))
    }

    fn ingest_record(&self, release: &ReleaseVersion) -> Option<IngestRecord> {
        self.registry
            .databases
            .get(&release.database)
            .and_then(|e| e.releases.get(release.ordinal as usize))
            .filter(|r| r.label == release.label)
            .and_then(|r| r.ingested)
    }

    pub fn is_ingested(&self, release: &ReleaseVersion) -> bool {
        self.ingest_record(release).is_some()
    }

    /// `true` when every registered release of `db` is ingested.
    pub fn fully_ingested(&self, db: &DatabaseId) -> Result<bool> {
        Ok(self.entry(db)?.releases.iter().all(|r| r.ingested.is_some()))
    }

    fn require_ingested(&self, release: &ReleaseVersion) -> Result<IngestRecord> {
        self.ingest_record(release)
            .ok_or_else(|| Error::NotFound(format!("release {release} is not ingested")))
    }

    fn check_registered(&self, release: &ReleaseVersion) -> Result<()> {
        let registered = self.release_at(&release.database, release.ordinal)?;
        if registered.label != release.label || registered.date != release.date {
            return Err(Error::Registry(format!(
                "release {release} does not match registered {registered}"
            )));
        }
        Ok(())
    }

    /// Ingests one release from a stream of occurrences.
    ///
    /// Nothing becomes visible unless the whole stream is consumed and
    /// written; on error the workspace is unchanged and the call can be
    /// repeated.
    pub fn ingest<I>(&mut self, release: &ReleaseVersion, occurrences: I) -> Result<IngestSummary>
    where
        I: IntoIterator<Item = Result<(RecordId, NormalizedSentence)>>,
    {
        let _lock = WriterLock::acquire(&self.root)?;
        self.refresh()?;
        self.check_registered(release)?;
        if self.is_ingested(release) {
            return Err(Error::AlreadyIngested(release.to_string()));
        }

        let mut record_ids: HashMap<String, u32> = HashMap::new();
        let mut rows: Vec<RecordRow> = Vec::new();
        let mut fresh: HashMap<Fingerprint, String> = HashMap::new();
        for item in occurrences {
            let (record, sentence) = item?;
            if record.database != release.database {
                return Err(Error::Registry(format!(
                    "record {record} does not belong to {}",
                    release.database
                )));
            }
            let fp = sentence.fingerprint();
            let known = self.sentences.get(&fp).map(|t| &**t).or(fresh.get(&fp).map(|t| t.as_str()));
            match known {
                Some(existing) if existing != sentence.text() => {
                    return Err(Error::Collision {
                        fingerprint: fp,
                        existing: existing.to_owned(),
                        incoming: sentence.into_text(),
                    })
                }
                Some(_) => {}
                None => {
                    fresh.insert(fp, sentence.into_text());
                }
            }
            let next = record_ids.len() as u32;
            let idx = *record_ids.entry(record.accession).or_insert(next);
            rows.push(RecordRow {
                record: idx,
                sentence: fp,
            });
        }

        let mut names: Vec<(String, u32)> = record_ids.into_iter().collect();
        names.sort_unstable();
        let mut remap = vec![0u32; names.len()];
        for (new, (_, old)) in names.iter().enumerate() {
            remap[*old as usize] = new as u32;
        }
        let names: Vec<String> = names.into_iter().map(|(n, _)| n).collect();
        for row in &mut rows {
            row.record = remap[row.record as usize];
        }
        rows.sort_unstable();
        let before = rows.len();
        rows.dedup();
        let duplicates = (before - rows.len()) as u64;

        let mut by_sentence: Vec<SentenceRow> = rows
            .iter()
            .map(|r| SentenceRow {
                sentence: r.sentence,
                record: r.record,
            })
            .collect();
        by_sentence.sort_unstable();
        let mut segment: Vec<(Fingerprint, &str)> = fresh.iter().map(|(fp, t)| (*fp, t.as_str())).collect();
        segment.sort_unstable();

        let stage = self
            .root
            .join("staging")
            .join(format!("{}.{}", release.database, release.ordinal));
        if stage.exists() {
            fs::remove_dir_all(&stage).map_err(Error::io(&stage))?;
        }
        fs::create_dir_all(&stage).map_err(Error::io(&stage))?;
        let sync = self.synced();
        runs::write_records(&stage.join("records.bin"), &names, sync)?;
        runs::write_run(&stage.join("by_record.run"), &rows, sync)?;
        runs::write_run(&stage.join("by_sentence.run"), &by_sentence, sync)?;
        runs::write_segment(&stage.join("sentences.seg"), &segment, sync)?;
        drop(by_sentence);

        let target = self.release_dir(&release.database, release.ordinal);
        let parent = target.parent().expect("release dir has a parent");
        fs::create_dir_all(parent).map_err(Error::io(parent))?;
        if target.exists() {
            fs::remove_dir_all(&target).map_err(Error::io(&target))?;
        }
        fs::rename(&stage, &target).map_err(Error::io(&target))?;
        if sync {
            registry::sync_dir(parent)?;
        }

        let record = IngestRecord {
            records: names.len() as u64,
            occurrences: rows.len() as u64,
            new_sentences: fresh.len() as u64,
        };
        let mut next = self.registry.clone();
        next.databases.get_mut(&release.database).expect("registered").releases[release.ordinal as usize]
            .ingested = Some(record);
        next.save(&self.root, self.synced())?;
        self.registry = next;
        self.sentences
            .extend(fresh.into_iter().map(|(fp, t)| (fp, t.into_boxed_str())));

        Ok(IngestSummary {
            release: Some(release.clone()),
            records: record.records,
            occurrences: record.occurrences,
            duplicates_collapsed: duplicates,
            new_sentences: record.new_sentences,
            ..IngestSummary::default()
        })
    }

    /// Stored text of a fingerprint.
    pub fn sentence_text(&self, fp: Fingerprint) -> Option<&str> {
        self.sentences.get(&fp).map(|t| &**t)
    }

    /// Number of distinct sentences across the workspace.
    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// All known fingerprints in ascending order.
    pub fn fingerprints(&self) -> Vec<Fingerprint> {
        let mut fps: Vec<_> = self.sentences.keys().copied().collect();
        fps.sort_unstable();
        fps
    }

    /// Exact presence of one sentence across every database and release.
    pub fn timeline(&self, fp: Fingerprint) -> Result<SentenceTimeline> {
        if !self.sentences.contains_key(&fp) {
            return Err(Error::NotFound(format!("sentence {fp}")));
        }
        let mut timeline = SentenceTimeline::new(fp);
        for (db, entry) in &self.registry.databases {
            for (ordinal, r) in entry.releases.iter().enumerate() {
                if r.ingested.is_none() {
                    continue;
                }
                let dir = self.release_dir(db, ordinal as u32);
                let hits = runs::lookup_sentence(&dir.join("by_sentence.run"), fp)?;
                if hits.is_empty() {
                    continue;
                }
                let names = runs::read_records(&dir.join("records.bin"))?;
                for idx in hits {
                    let name = names
                        .get(idx as usize)
                        .ok_or_else(|| Error::Corrupt(format!("{}: record index {idx} out of range", dir.display())))?;
                    timeline.insert(db, name, ordinal as u32);
                }
            }
        }
        Ok(timeline)
    }

    /// Normalizes `text` and looks up its timeline.
    pub fn timeline_by_text(&self, text: &str) -> Result<SentenceTimeline> {
        self.timeline(NormalizedSentence::new(text)?.fingerprint())
    }

    /// Every occurrence of an ingested release, ordered by record then fingerprint.
    pub fn release_occurrences(
        &self,
        release: &ReleaseVersion,
    ) -> Result<impl Iterator<Item = Result<Occurrence>> + 'static> {
        self.require_ingested(release)?;
        let dir = self.release_dir(&release.database, release.ordinal);
        let names = runs::read_records(&dir.join("records.bin"))?;
        let reader = RunReader::<RecordRow>::open(&dir.join("by_record.run"))?;
        let db = release.database.clone();
        let ordinal = release.ordinal;
        Ok(reader.map(move |row| {
            let row = row?;
            let accession = names
                .get(row.record as usize)
                .ok_or_else(|| Error::Corrupt(format!("record index {} out of range", row.record)))?;
            Ok(Occurrence {
                record: RecordId {
                    database: db.clone(),
                    accession: accession.clone(),
                },
                sentence: row.sentence,
                release: ordinal,
            })
        }))
    }

    /// `(fingerprint, number of records)` for an ingested release, in
    /// fingerprint order, computed in one pass over the sorted run.
    pub fn sentence_multiplicities(
        &self,
        release: &ReleaseVersion,
    ) -> Result<impl Iterator<Item = Result<(Fingerprint, u64)>> + 'static> {
        self.require_ingested(release)?;
        let path = self
            .release_dir(&release.database, release.ordinal)
            .join("by_sentence.run");
        Ok(Multiplicities {
            rows: RunReader::<SentenceRow>::open(&path)?.peekable(),
        })
    }

    /// Sorted accessions of an ingested release.
    pub fn release_records(&self, release: &ReleaseVersion) -> Result<Vec<String>> {
        self.require_ingested(release)?;
        runs::read_records(
            &self
                .release_dir(&release.database, release.ordinal)
                .join("records.bin"),
        )
    }

    /// Number of occurrences recorded in the registry for an ingested release.
    pub fn recorded_occurrences(&self, release: &ReleaseVersion) -> Result<u64> {
        Ok(self.require_ingested(release)?.occurrences)
    }

    /// For each release of `db`: how many records seen in some earlier
    /// ingested release hold no sentence in it. `None` for uningested releases.
    pub fn record_absences(&self, db: &DatabaseId) -> Result<Vec<Option<u64>>> {
        let mut seen: std::collections::BTreeSet<String> = Default::default();
        let mut out = Vec::new();
        for release in self.releases(db)? {
            if !self.is_ingested(&release) {
                out.push(None);
                continue;
            }
            let names = self.release_records(&release)?;
            let present: std::collections::HashSet<&str> = names.iter().map(String::as_str).collect();
            out.push(Some(seen.iter().filter(|n| !present.contains(n.as_str())).count() as u64));
            seen.extend(names);
        }
        Ok(out)
    }

    /// Loads record dictionaries for `databases` so their occurrences can be
    /// merged by sentence.
    pub fn scope(&self, databases: &[DatabaseId]) -> Result<Scope> {
        let mut dbs = Vec::with_capacity(databases.len());
        for db in databases {
            if dbs.iter().any(|d: &DatabaseScope| &d.id == db) {
                return Err(Error::Registry(format!("database {db} listed twice")));
            }
            let releases = self.releases(db)?;
            let mut tables: BTreeMap<u32, Vec<String>> = BTreeMap::new();
            for r in &releases {
                if self.is_ingested(r) {
                    tables.insert(r.ordinal, self.release_records(r)?);
                }
            }
            let run_paths = tables
                .keys()
                .map(|&o| (o, self.release_dir(db, o).join("by_sentence.run")))
                .collect();
            dbs.push(DatabaseScope::new(db.clone(), releases, self.epoch(db)?, tables, run_paths));
        }
        Ok(Scope::new(dbs))
    }

    /// Recomputes and cross-checks every index and table.
    pub fn verify(&self) -> Result<IntegrityReport> {
        verify::verify(self)
    }
}

struct Multiplicities {
    rows: std::iter::Peekable<RunReader<SentenceRow>>,
}

impl Iterator for Multiplicities {
    type Item = Result<(Fingerprint, u64)>;

    fn next(&mut self) -> Option<Self::Item> {
        let first = match self.rows.next()? {
            Ok(row) => row.sentence,
            Err(e) => return Some(Err(e)),
        };
        let mut n = 1;
        loop {
            match self.rows.peek() {
                Some(Ok(row)) if row.sentence == first => {
                    n += 1;
                    self.rows.next();
                }
                Some(Err(_)) => return self.rows.next().and_then(|r| r.err()).map(Err),
                _ => break,
            }
        }
        Some(Ok((first, n)))
    }
}
