//! `workspace.json`: the database registry and the ingest commit log.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatabaseId, ReleaseVersion};

pub(crate) const REGISTRY_FILE: &str = "workspace.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct Registry {
    pub id: String,
    pub databases: BTreeMap<DatabaseId, DatabaseEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct DatabaseEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<NaiveDate>,
    pub releases: Vec<ReleaseEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct ReleaseEntry {
    pub label: String,
    pub date: NaiveDate,
    #[serde(default)]
    pub date_estimated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingested: Option<IngestRecord>,
}

/// What the registry remembers about a committed ingest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct IngestRecord {
    pub records: u64,
    pub occurrences: u64,
    pub new_sentences: u64,
}

/// A release as declared before ingestion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReleaseSpec {
    pub label: String,
    pub date: NaiveDate,
    pub date_estimated: bool,
}

impl ReleaseSpec {
    pub fn new(label: impl Into<String>, date: NaiveDate) -> Self {
        ReleaseSpec {
            label: label.into(),
            date,
            date_estimated: false,
        }
    }
}

impl DatabaseEntry {
    pub fn version(&self, db: &DatabaseId, ordinal: usize) -> ReleaseVersion {
        let r = &self.releases[ordinal];
        ReleaseVersion {
            database: db.clone(),
            label: r.label.clone(),
            ordinal: ordinal as u32,
            date: r.date,
            date_estimated: r.date_estimated,
        }
    }

    pub fn epoch_or_first(&self) -> Option<NaiveDate> {
        self.epoch.or_else(|| self.releases.first().map(|r| r.date))
    }
}

impl Registry {
    pub fn new(id: String) -> Self {
        Registry {
            id,
            databases: BTreeMap::new(),
        }
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(REGISTRY_FILE);
        let bytes = fs::read(&path).map_err(Error::io(&path))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::Registry(format!("{}: {e}", path.display())))
    }

    /// Replaces the registry file atomically. This rename is the commit point
    /// of every ingest.
    pub fn save(&self, root: &Path, sync: bool) -> Result<()> {
        let tmp = root.join(format!("{REGISTRY_FILE}.tmp"));
        let path = root.join(REGISTRY_FILE);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        let mut f = File::create(&tmp).map_err(Error::io(&tmp))?;
        f.write_all(&bytes)
            .and_then(|_| if sync { f.sync_all() } else { Ok(()) })
            .map_err(Error::io(&tmp))?;
        fs::rename(&tmp, &path).map_err(Error::io(&path))?;
        if sync {
            sync_dir(root)?;
        }
        Ok(())
    }

    /// Adds a database or extends its release list. Already-registered
    /// releases must be repeated unchanged, in order.
    pub fn register(&mut self, db: &DatabaseId, epoch: Option<NaiveDate>, releases: &[ReleaseSpec]) -> Result<()> {
        let err = |msg: String| Err(Error::Registry(format!("{db}: {msg}")));
        for (i, r) in releases.iter().enumerate() {
            if r.label.is_empty() || r.label.contains(['\t', '\n', '\r']) {
                return err(format!("invalid release label {:?}", r.label));
            }
            if releases[..i].iter().any(|p| p.label == r.label) {
                return err(format!("duplicate release label {:?}", r.label));
            }
            if i > 0 && releases[i - 1].date > r.date {
                return err(format!("release {:?} is dated before its predecessor", r.label));
            }
        }
        if let (Some(e), Some(first)) = (epoch, releases.first()) {
            if e > first.date {
                return err(format!("epoch {e} is after the first release date {}", first.date));
            }
        }
        let entry = self.databases.entry(db.clone()).or_insert_with(|| DatabaseEntry {
            epoch,
            releases: Vec::new(),
        });
        if epoch.is_some() && entry.epoch.is_some() && entry.epoch != epoch {
            return err("epoch differs from the registered one".into());
        }
        entry.epoch = entry.epoch.or(epoch);
        if releases.len() < entry.releases.len() {
            return err(format!(
                "{} releases registered but only {} declared",
                entry.releases.len(),
                releases.len()
            ));
        }
        for (old, new) in entry.releases.iter().zip(releases) {
            if old.label != new.label || old.date != new.date {
                return err(format!(
                    "release {:?} ({}) conflicts with registered {:?} ({})",
                    new.label, new.date, old.label, old.date
                ));
            }
        }
        let known = entry.releases.len();
        entry.releases.extend(releases[known..].iter().map(|r| ReleaseEntry {
            label: r.label.clone(),
            date: r.date,
            date_estimated: r.date_estimated,
            ingested: None,
        }));
        Ok(())
    }
}

pub(crate) fn sync_dir(dir: &Path) -> Result<()> {
    File::open(dir)
        .and_then(|d| d.sync_all())
        .map_err(Error::io(dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn register_extends_and_rejects_conflicts() {
        let db = DatabaseId::new("x").unwrap();
        let mut reg = Registry::new("id".into());
        let v0 = ReleaseSpec::new("v0", d("2001-01-01"));
        let v1 = ReleaseSpec::new("v1", d("2002-01-01"));
        reg.register(&db, None, std::slice::from_ref(&v0)).unwrap();
        reg.register(&db, None, &[v0.clone(), v1.clone()]).unwrap();
        assert_eq!(reg.databases[&db].releases.len(), 2);
        assert!(reg.register(&db, None, std::slice::from_ref(&v0)).is_err());
        let moved = ReleaseSpec::new("v1", d("2002-02-01"));
        assert!(reg.register(&db, None, &[v0.clone(), moved]).is_err());
        assert!(reg.register(&db, None, &[v1.clone(), v0.clone()]).is_err());
        assert!(reg.register(&db, None, &[v0.clone(), v0]).is_err());
    }

    #[test]
    fn epoch_defaults_to_first_release() {
        let db = DatabaseId::new("x").unwrap();
        let mut reg = Registry::new("id".into());
        reg.register(&db, None, &[ReleaseSpec::new("a", d("2001-05-01"))]).unwrap();
        assert_eq!(reg.databases[&db].epoch_or_first(), Some(d("2001-05-01")));
        assert!(reg
            .register(&db, Some(d("2002-01-01")), &[ReleaseSpec::new("a", d("2001-05-01"))])
            .is_err());
    }
}
