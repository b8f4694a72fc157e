//! Workspace manifests: which files make up which releases.
//!
//! ```toml
//! [[database]]
//! name = "swissprot"
//! format = "line-prefixed-flat"
//! topics = ["FUNCTION", "SIMILARITY"]
//!
//! [[database.release]]
//! label = "2012_01"
//! date = "2012-01-25"
//! path = "sprot/2012_01.dat.gz"
//! ```
//!
//! Relative paths resolve against the manifest's directory. A release
//! without a `date` takes the database's `declared_date` and is marked as
//! estimated.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{extract_release, FormatKind, FormatOptions, TopicFilter};
use crate::model::{DatabaseId, ReleaseVersion};
use crate::store::{IngestSummary, ReleaseSpec, Workspace};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, rename = "database")]
    pub databases: Vec<DatabaseManifest>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatabaseManifest {
    pub name: DatabaseId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatKind>,
    /// Topic names to keep; absent means every block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_elements: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_elements: Option<Vec<String>>,
    #[serde(default, rename = "release")]
    pub releases: Vec<ReleaseManifest>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseManifest {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatKind>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut manifest = Manifest::parse(&text).map_err(|e| match e {
            Error::Manifest(m) => Error::Manifest(format!("{}: {m}", path.display())),
            other => other,
        })?;
        manifest.base = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok(manifest)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let manifest: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always representable")
    }

    fn validate(&self) -> Result<()> {
        for (i, db) in self.databases.iter().enumerate() {
            if self.databases[..i].iter().any(|d| d.name == db.name) {
                return Err(Error::Manifest(format!("database {} is listed twice", db.name)));
            }
            for r in &db.releases {
                if r.date.is_none() && db.declared_date.is_none() {
                    return Err(Error::Manifest(format!(
                        "{}@{} has no date and the database declares none",
                        db.name, r.label
                    )));
                }
                if r.format.or(db.format).is_none() {
                    return Err(Error::Manifest(format!("{}@{} has no format", db.name, r.label)));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_owned()
        } else {
            self.base.join(path)
        }
    }
}

impl DatabaseManifest {
    pub fn release_specs(&self) -> Vec<ReleaseSpec> {
        self.releases
            .iter()
            .map(|r| ReleaseSpec {
                label: r.label.clone(),
                date: r.date.or(self.declared_date).expect("validated"),
                date_estimated: r.date.is_none(),
            })
            .collect()
    }

    pub fn options(&self) -> FormatOptions {
        let mut o = FormatOptions::default();
        if let Some(p) = &self.line_prefix {
            o.line_prefix = p.clone();
        }
        if let Some(e) = &self.record_elements {
            o.record_elements = e.clone();
        }
        if let Some(a) = &self.id_attribute {
            o.id_attribute = a.clone();
        }
        if let Some(t) = &self.text_elements {
            o.text_elements = t.clone();
        }
        o
    }

    pub fn filter(&self) -> TopicFilter {
        match &self.topics {
            None => TopicFilter::All,
            Some(t) => TopicFilter::only(t),
        }
    }
}

/// What happened to one manifest release.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IngestOutcome {
    Ingested(IngestSummary),
    /// Already present in the workspace.
    Skipped(ReleaseVersion),
}

/// Registers every database in `manifest`, then ingests its releases in
/// manifest order, skipping those already ingested. `progress` sees each
/// outcome as soon as it is known.
pub fn ingest_manifest(
    ws: &mut Workspace,
    manifest: &Manifest,
    mut progress: impl FnMut(&IngestOutcome),
) -> Result<Vec<IngestOutcome>> {
    for db in &manifest.databases {
        ws.register_database(&db.name, db.epoch, &db.release_specs())?;
    }
    let mut outcomes = Vec::new();
    for db in &manifest.databases {
        let options = db.options();
        for r in &db.releases {
            let release = ws.release(&db.name, &r.label)?;
            let outcome = if ws.is_ingested(&release) {
                IngestOutcome::Skipped(release)
            } else {
                let path = manifest.resolve(&r.path);
                let format = r.format.or(db.format).expect("validated");
                let file = File::open(&path).map_err(Error::io(&path))?;
                let mut extraction = extract_release(file, format, &release, &options, db.filter())?;
                let summary = ws
                    .ingest(&release, &mut extraction)
                    .map_err(|e| with_path(e, &path))?;
                IngestOutcome::Ingested(summary.with_extraction(&extraction.stats()))
            };
            progress(&outcome);
            outcomes.push(outcome);
        }
    }
    Ok(outcomes)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { offset, record, message } => Error::Parse {
            offset,
            record,
            message: format!("{}: {message}", path.display()),
        },
        Error::Stream(source) => Error::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
[[database]]
name = "x"
format = "generic-tsv"
declared_date = "2003-06-01"

[[database.release]]
label = "v0"
date = "2001-01-01"
path = "x/v0.tsv"

[[database.release]]
label = "v1"
path = "x/v1.tsv"
"#;

    #[test]
    fn missing_date_falls_back_and_is_flagged() {
        let m = Manifest::parse(TOY).unwrap();
        let specs = m.databases[0].release_specs();
        assert!(!specs[0].date_estimated);
        assert!(specs[1].date_estimated);
        assert_eq!(specs[1].date, "2003-06-01".parse().unwrap());
    }

    #[test]
    fn round_trips_through_toml() {
        let m = Manifest::parse(TOY).unwrap();
        assert_eq!(Manifest::parse(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_manifests() {
        assert!(Manifest::parse("[[database]]\nname = \"a b\"\n").is_err());
        assert!(Manifest::parse("[[database]]\nname = \"x\"\n[[database.release]]\nlabel = \"v\"\npath = \"p\"\nformat = \"generic-tsv\"\n").is_err());
        assert!(Manifest::parse("[[database]]\nname = \"x\"\n[[database.release]]\nlabel = \"v\"\ndate = \"2001-01-01\"\npath = \"p\"\n").is_err());
        assert!(Manifest::parse("[[database]]\nname = \"x\"\nbogus = 1\n").is_err());
        assert_eq!(Manifest::parse("").unwrap().databases.len(), 0);
    }

    #[test]
    fn ingests_files_and_skips_repeats() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("x")).unwrap();
        fs::write(dir.path().join("x/v0.tsv"), "A\tOne. Two.\nA\tOne.\n").unwrap();
        fs::write(dir.path().join("x/v1.tsv"), "B\tThree.\n").unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, TOY).unwrap();
        let m = Manifest::load(&path).unwrap();
        let mut ws = Workspace::create(dir.path().join("ws")).unwrap();
        let mut seen = 0;
        let out = ingest_manifest(&mut ws, &m, |_| seen += 1).unwrap();
        assert_eq!(seen, 2);
        let IngestOutcome::Ingested(first) = &out[0] else { panic!() };
        assert_eq!(first.occurrences, 2);
        assert_eq!(first.duplicates_collapsed, 1);
        let again = ingest_manifest(&mut ws, &m, |_| {}).unwrap();
        assert!(again.iter().all(|o| matches!(o, IngestOutcome::Skipped(_))));
    }

    #[test]
    fn missing_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, TOY).unwrap();
        let m = Manifest::load(&path).unwrap();
        let mut ws = Workspace::create(dir.path().join("ws")).unwrap();
        let err = ingest_manifest(&mut ws, &m, |_| {}).unwrap_err();
        assert!(err.to_string().contains("v0.tsv"), "{err}");
    }
}
