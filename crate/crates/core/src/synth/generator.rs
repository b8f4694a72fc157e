//! Seeded corpora with planted pattern instances.
//!
//! A background of random add, copy and remove actions is simulated per
//! release, then each quota is met by planting fresh sentences whose
//! presence makes exactly the wanted instance true. The result is checked
//! against the brute-force oracle and re-rolled if any planted instance is
//! not found.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crossdb::{Confidence, CrossInstance, Destination};
use crate::error::{Error, Result};
use crate::model::{DatabaseId, DateInterval, Fingerprint};
use crate::patterns::{PatternInstance, PatternLabel, Witness};

use super::corpus::{CorpusDatabase, PresenceCell, PresenceCorpus};
use super::oracle::brute_force_detect;

const MAX_ATTEMPTS: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    #[serde(rename = "database")]
    pub databases: Vec<CalendarSpec>,
    /// Records per database.
    pub records: u32,
    /// Background sentences to draw from.
    pub vocabulary: u32,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub quotas: Quotas,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalendarSpec {
    pub name: DatabaseId,
    pub dates: Vec<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<NaiveDate>,
}

impl CalendarSpec {
    /// `n` releases `step_months` apart starting at `start`.
    pub fn regular(name: &str, start: NaiveDate, n: u32, step_months: u32) -> Result<Self> {
        let dates = (0..n)
            .map(|i| {
                start
                    .checked_add_months(chrono::Months::new(i * step_months))
                    .ok_or_else(|| Error::Generator("calendar runs past the supported dates".into()))
            })
            .collect::<Result<_>>()?;
        Ok(CalendarSpec {
            name: DatabaseId::new(name)?,
            dates,
            epoch: None,
        })
    }
}

/// Per record and release, the chance of each background action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rates {
    pub copy_within: f64,
    pub copy_cross: f64,
    pub remove: f64,
    pub add: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            copy_within: 0.1,
            copy_cross: 0.05,
            remove: 0.1,
            add: 0.3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quotas {
    pub transient: u32,
    pub possibly_transient: u32,
    pub missing_origin: u32,
    pub cross: u32,
}

/// Everything planted, in the shapes the detectors report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TruthManifest {
    pub seed: u64,
    pub attempt: u32,
    pub patterns: Vec<PatternInstance>,
    pub cross: Vec<CrossInstance>,
}

impl TruthManifest {
    pub fn count(&self, label: PatternLabel) -> usize {
        self.patterns.iter().filter(|p| p.label == label).count()
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub corpus: PresenceCorpus,
    pub truth: TruthManifest,
}

impl GeneratorSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Generator(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Generator(m));
        if self.databases.is_empty() {
            return fail("no databases".into());
        }
        for (i, db) in self.databases.iter().enumerate() {
            if self.databases[..i].iter().any(|d| d.name == db.name) {
                return fail(format!("database {} is listed twice", db.name));
            }
            if db.dates.is_empty() {
                return fail(format!("{} has no releases", db.name));
            }
            if db.dates.windows(2).any(|w| w[0] > w[1]) {
                return fail(format!("{} has dates out of order", db.name));
            }
            if db.epoch.is_some_and(|e| e > db.dates[0]) {
                return fail(format!("{} has an epoch after its first release", db.name));
            }
        }
        let r = &self.rates;
        for (name, v) in [("copy_within", r.copy_within), ("copy_cross", r.copy_cross), ("remove", r.remove), ("add", r.add)] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("rate {name} = {v} is outside [0, 1]"));
            }
        }
        let q = &self.quotas;
        let max_releases = self.databases.iter().map(|d| d.dates.len()).max().unwrap_or(0);
        let wanted = q.transient + q.possibly_transient + q.missing_origin + q.cross;
        if wanted > 0 && self.records == 0 {
            return fail("quotas need at least one record".into());
        }
        if q.transient > 0 && max_releases < 2 {
            return fail("transient instances need a database with a non-latest release".into());
        }
        if q.missing_origin > 0 && (max_releases < 3 || self.records < 2) {
            return fail("missing-origin instances need three releases and two records".into());
        }
        if q.cross > 0 && self.cross_pairs().is_empty() {
            return fail("cross instances need a database whose non-latest release predates another database's release".into());
        }
        Ok(())
    }

    /// (origin db, origin release, destination db, destination release)
    /// choices that make a cross instance.
    fn cross_pairs(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for (a, da) in self.databases.iter().enumerate() {
            for (b, db) in self.databases.iter().enumerate() {
                if a == b {
                    continue;
                }
                for a0 in 0..da.dates.len() - 1 {
                    for (b0, date) in db.dates.iter().enumerate() {
                        if *date > da.dates[a0] {
                            out.push((a, a0, b, b0));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Builds a corpus meeting every quota exactly, deterministically in the seed.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 0..MAX_ATTEMPTS {
        let generated = attempt_once(spec, &mut rng, attempt)?;
        if is_sound(&generated)? {
            return Ok(generated);
        }
    }
    Err(Error::Generator(format!(
        "planted instances were still masked after {MAX_ATTEMPTS} attempts"
    )))
}

fn is_sound(g: &Generated) -> Result<bool> {
    let found = brute_force_detect(&g.corpus, &[])?;
    let patterns_ok = g.truth.patterns.iter().all(|p| {
        found
            .patterns
            .get(&p.database)
            .is_some_and(|r| r.instances.contains(p))
    });
    Ok(patterns_ok && g.truth.cross.iter().all(|c| found.cross.contains(c)))
}

struct Planter<'a> {
    spec: &'a GeneratorSpec,
    corpus: PresenceCorpus,
    truth: TruthManifest,
}

impl Planter<'_> {
    fn fresh_sentence(&mut self) -> (u32, Fingerprint) {
        let i = self.corpus.sentences.len() as u32;
        self.corpus.sentences.push(PresenceCorpus::sentence_text(i));
        (i, self.corpus.fingerprint(i))
    }

    fn set(&mut self, db: usize, record: u32, sentence: u32, releases: impl IntoIterator<Item = usize>) {
        for release in releases {
            self.corpus.cells.insert(PresenceCell {
                db: db as u16,
                release: release as u32,
                record,
                sentence,
            });
        }
    }

    fn interval(&self, db: usize, v: usize) -> DateInterval {
        let d = &self.spec.databases[db];
        DateInterval {
            start: if v == 0 { d.epoch.unwrap_or(d.dates[0]) } else { d.dates[v - 1] },
            end: d.dates[v],
        }
    }

    fn single(&mut self, label: PatternLabel, db: usize, record: u32, release: usize) {
        let (s, fp) = self.fresh_sentence();
        self.set(db, record, s, [release]);
        let name = self.spec.databases[db].name.clone();
        self.truth.patterns.push(PatternInstance {
            label,
            sentence: fp,
            database: name.clone(),
            members: vec![name.clone()],
            witness: Witness::Single {
                record: self.corpus.record_id(db as u16, record),
                release: release as u32,
            },
        });
    }
}

fn attempt_once(spec: &GeneratorSpec, rng: &mut ChaCha8Rng, attempt: u32) -> Result<Generated> {
    let corpus = background(spec, rng);
    let mut p = Planter {
        spec,
        corpus,
        truth: TruthManifest {
            seed: spec.seed,
            attempt,
            ..TruthManifest::default()
        },
    };
    let n = |db: usize| spec.databases[db].dates.len();
    let dbs_with = |min: usize| -> Vec<usize> { (0..spec.databases.len()).filter(|&d| n(d) >= min).collect() };

    let transient_dbs = dbs_with(2);
    for _ in 0..spec.quotas.transient {
        let db = *transient_dbs.choose(rng).expect("validated");
        let record = rng.gen_range(0..spec.records);
        let release = rng.gen_range(0..n(db) - 1);
        p.single(PatternLabel::Transient, db, record, release);
    }
    for _ in 0..spec.quotas.possibly_transient {
        let db = rng.gen_range(0..spec.databases.len());
        let record = rng.gen_range(0..spec.records);
        p.single(PatternLabel::PossiblyTransient, db, record, n(db) - 1);
    }

    let origin_dbs = dbs_with(3);
    for _ in 0..spec.quotas.missing_origin {
        let db = *origin_dbs.choose(rng).expect("validated");
        let latest = n(db) - 1;
        // v0 < v1 < v2 <= latest: copied at v1, dropped by the origin at v2.
        let v0 = rng.gen_range(0..latest - 1);
        let v1 = rng.gen_range(v0 + 1..latest);
        let v2 = rng.gen_range(v1 + 1..=latest);
        let origin = rng.gen_range(0..spec.records);
        let secondary = (origin + rng.gen_range(1..spec.records)) % spec.records;
        let (s, fp) = p.fresh_sentence();
        p.set(db, origin, s, v0..v2);
        p.set(db, secondary, s, v1..=latest);
        let name = spec.databases[db].name.clone();
        p.truth.patterns.push(PatternInstance {
            label: PatternLabel::MissingOrigin,
            sentence: fp,
            database: name.clone(),
            members: vec![name],
            witness: Witness::MissingOrigin {
                origin: p.corpus.record_id(db as u16, origin),
                secondaries: vec![p.corpus.record_id(db as u16, secondary)],
                origin_first: v0 as u32,
                secondary_first: v1 as u32,
                removed_at: v2 as u32,
            },
        });
    }

    let pairs = spec.cross_pairs();
    for _ in 0..spec.quotas.cross {
        let &(a, a0, b, b0) = pairs.choose(rng).expect("validated");
        let a1 = rng.gen_range(a0..n(a) - 1);
        let (s, fp) = p.fresh_sentence();
        p.set(a, rng.gen_range(0..spec.records), s, a0..=a1);
        p.set(b, rng.gen_range(0..spec.records), s, b0..n(b));
        let origin_first = p.interval(a, a0);
        let dest_first = p.interval(b, b0);
        let dates = &spec.databases[a].dates;
        let confidence = if origin_first.strictly_before(&dest_first) {
            Confidence::DateOrdered
        } else {
            Confidence::Overlapping
        };
        p.truth.cross.push(CrossInstance {
            sentence: fp,
            origin: spec.databases[a].name.as_str().to_owned(),
            origin_first_seen: origin_first,
            origin_last_seen: DateInterval {
                start: dates[a1],
                end: dates[a1 + 1],
            },
            destinations: vec![Destination {
                group: spec.databases[b].name.as_str().to_owned(),
                first_seen: dest_first,
                confidence,
            }],
            confidence,
        });
    }

    p.truth.patterns.sort();
    p.truth.cross.sort();
    Ok(Generated {
        corpus: p.corpus,
        truth: p.truth,
    })
}

/// Random background drawn from the first `vocabulary` sentence numbers.
fn background(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> PresenceCorpus {
    let mut corpus = PresenceCorpus {
        databases: spec
            .databases
            .iter()
            .map(|c| CorpusDatabase {
                name: c.name.clone(),
                epoch: c.epoch,
                releases: c.dates.iter().enumerate().map(|(i, d)| (format!("r{i}"), *d)).collect(),
                records: (0..spec.records).map(PresenceCorpus::record_name).collect(),
            })
            .collect(),
        sentences: (0..spec.vocabulary).map(PresenceCorpus::sentence_text).collect(),
        cells: BTreeSet::new(),
    };
    if spec.vocabulary == 0 || spec.records == 0 {
        return corpus;
    }
    let r = &spec.rates;
    // Current holdings per database and record.
    let mut state: Vec<Vec<BTreeSet<u32>>> = vec![vec![BTreeSet::new(); spec.records as usize]; spec.databases.len()];
    let max_releases = spec.databases.iter().map(|d| d.dates.len()).max().unwrap_or(0);
    for t in 0..max_releases {
        for d in 0..spec.databases.len() {
            if t >= spec.databases[d].dates.len() {
                continue;
            }
            for rec in 0..spec.records as usize {
                if rng.gen_bool(r.add) {
                    let s = rng.gen_range(0..spec.vocabulary);
                    state[d][rec].insert(s);
                }
                if rng.gen_bool(r.copy_within) {
                    let from = rng.gen_range(0..spec.records as usize);
                    if let Some(&s) = pick(&state[d][from], rng) {
                        state[d][rec].insert(s);
                    }
                }
                if spec.databases.len() > 1 && rng.gen_bool(r.copy_cross) {
                    let other = (d + rng.gen_range(1..spec.databases.len())) % spec.databases.len();
                    let from = rng.gen_range(0..spec.records as usize);
                    if let Some(&s) = pick(&state[other][from], rng) {
                        state[d][rec].insert(s);
                    }
                }
                if rng.gen_bool(r.remove) {
                    if let Some(&s) = pick(&state[d][rec], rng) {
                        state[d][rec].remove(&s);
                    }
                }
                for &s in &state[d][rec] {
                    corpus.cells.insert(PresenceCell {
                        db: d as u16,
                        release: t as u32,
                        record: rec as u32,
                        sentence: s,
                    });
                }
            }
        }
    }
    corpus
}

fn pick<'a>(set: &'a BTreeSet<u32>, rng: &mut ChaCha8Rng) -> Option<&'a u32> {
    if set.is_empty() {
        None
    } else {
        set.iter().nth(rng.gen_range(0..set.len()))
    }
}

impl Generated {
    /// Writes release files, `manifest.toml` and `truth.json` under `dir`
    /// and returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let manifest = self.corpus.write_tsv(dir)?;
        let truth = dir.join("truth.json");
        let mut json = serde_json::to_string_pretty(&self.truth)?;
        json.push('\n');
        fs::write(&truth, json).map_err(Error::io(&truth))?;
        Ok(manifest)
    }
}
