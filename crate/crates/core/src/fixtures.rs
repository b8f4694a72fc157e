//! Small hand-built corpora with known answers, used by tests, examples and
//! the command line.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::Result;
use crate::model::{DatabaseId, NormalizedSentence, RecordId, ReleaseVersion};
use crate::store::{IngestSummary, ReleaseSpec, Workspace};

/// Sentence of the InterPro missing-origin example.
pub const KIR_SENTENCE: &str = "pyelonephritogenic e.coli specifically invade the uroepithelium by expressing between 100 and 300 pili on their cell surface";

/// Sentence shared by five database groups.
pub const VISUAL_PIGMENTS: &str = "visual pigments are the light-absorbing molecules that mediate vision.";

/// Stand-in text for the PRINTS to InterPro propagation example.
pub const RETINAL_SENTENCE: &str = "the retinal binding site lies within the seventh transmembrane domain.";

/// Texts of the toy corpus sentences `s1` to `s4`.
pub const TOY_SENTENCES: [&str; 4] = [
    "toy sentence one.",
    "toy sentence two.",
    "toy sentence three.",
    "toy sentence four.",
];

#[derive(Clone, Debug)]
pub struct FixtureDatabase {
    pub name: DatabaseId,
    pub epoch: Option<NaiveDate>,
    pub releases: Vec<(String, NaiveDate)>,
    /// `(accession, sentence text, release ordinals)`.
    pub presence: Vec<(String, String, Vec<u32>)>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub databases: Vec<FixtureDatabase>,
}

fn date(s: &str) -> NaiveDate {
    s.parse().expect("fixture dates are valid")
}

fn db(name: &str, releases: &[(&str, &str)], presence: &[(&str, &str, &[u32])]) -> FixtureDatabase {
    FixtureDatabase {
        name: DatabaseId::new(name).expect("fixture names are valid"),
        epoch: None,
        releases: releases.iter().map(|(l, d)| (l.to_string(), date(d))).collect(),
        presence: presence
            .iter()
            .map(|(a, s, o)| (a.to_string(), s.to_string(), o.to_vec()))
            .collect(),
    }
}

impl Fixture {
    /// Toy corpus: one database `x`, records A and B, releases v0 to v2.
    ///
    /// s1 in A at v0; s2 in B at v2; s3 in A at v0, v1 and in B at v1, v2;
    /// s4 in A throughout.
    pub fn toy() -> Self {
        let [s1, s2, s3, s4] = TOY_SENTENCES;
        Fixture {
            databases: vec![db(
                "x",
                &[("v0", "2001-01-01"), ("v1", "2002-01-01"), ("v2", "2003-01-01")],
                &[
                    ("A", s1, &[0]),
                    ("B", s2, &[2]),
                    ("A", s3, &[0, 1]),
                    ("B", s3, &[1, 2]),
                    ("A", s4, &[0, 1, 2]),
                ],
            )],
        }
    }

    /// InterPro missing-origin example: the sentence enters IPR004086 in
    /// 2001, is copied to IPR005430 a year later, and leaves IPR004086 in
    /// 2003 while IPR005430 keeps it.
    pub fn kir() -> Self {
        Fixture {
            databases: vec![db(
                "interpro",
                &[
                    ("2.0", "2000-05-01"),
                    ("3.0", "2001-04-01"),
                    ("5.0", "2002-03-01"),
                    ("7.0", "2003-02-01"),
                    ("8.0", "2004-01-15"),
                ],
                &[
                    ("IPR004086", KIR_SENTENCE, &[1, 2]),
                    ("IPR005430", KIR_SENTENCE, &[2, 3, 4]),
                    ("IPR004086", "this family consists of fimbrial proteins.", &[0, 1, 2, 3, 4]),
                    ("IPR005430", "this family consists of adhesin proteins.", &[2, 3, 4]),
                ],
            )],
        }
    }

    /// Cross-database example: a PRINTS fingerprint from 1999 to 2005, copied
    /// into InterPro IPR001055 in 2000 and IPR018298 in 2008.
    pub fn retinal() -> Self {
        Fixture {
            databases: vec![
                db(
                    "prints",
                    &[
                        ("21.0", "1998-07-01"),
                        ("23.0", "1999-07-01"),
                        ("35.0", "2002-07-01"),
                        ("38.0", "2005-07-01"),
                        ("41.0", "2008-09-01"),
                        ("42.0", "2010-01-01"),
                    ],
                    &[
                        ("PR00237", RETINAL_SENTENCE, &[1, 2, 3]),
                        ("PR00237", "rhodopsin-like gpcr superfamily signature.", &[0, 1, 2, 3, 4, 5]),
                    ],
                ),
                db(
                    "interpro",
                    &[
                        ("1.0", "1999-10-01"),
                        ("2.0", "2000-06-01"),
                        ("7.0", "2004-01-01"),
                        ("17.0", "2008-03-01"),
                        ("25.0", "2010-01-01"),
                    ],
                    &[
                        ("IPR001055", RETINAL_SENTENCE, &[1, 2, 3, 4]),
                        ("IPR018298", RETINAL_SENTENCE, &[3, 4]),
                        ("IPR001055", "this entry represents an opsin family.", &[0, 1, 2, 3, 4]),
                    ],
                ),
            ],
        }
    }

    /// Six single-release databases. [`VISUAL_PIGMENTS`] appears in five
    /// groups once Swiss-Prot and TrEMBL are merged as UniProtKB.
    pub fn shared_sentences() -> Self {
        let one = [("1", "2012-01-01")];
        Fixture {
            databases: vec![
                db(
                    "interpro",
                    &one,
                    &[("IPR000276", VISUAL_PIGMENTS, &[0]), ("IPR000276", "interpro only.", &[0])],
                ),
                db("nextprot", &one, &[("NX_P08100", VISUAL_PIGMENTS, &[0])]),
                db("prints", &one, &[("PR00238", VISUAL_PIGMENTS, &[0])]),
                db(
                    "prosite",
                    &one,
                    &[("PDOC00211", VISUAL_PIGMENTS, &[0]), ("PDOC00211", "prosite only.", &[0])],
                ),
                db(
                    "swissprot",
                    &one,
                    &[
                        ("P08100", VISUAL_PIGMENTS, &[0]),
                        ("P08100", "shared by both uniprot sections.", &[0]),
                    ],
                ),
                db(
                    "trembl",
                    &one,
                    &[
                        ("Q9XYZ1", "shared by both uniprot sections.", &[0]),
                        ("Q9XYZ1", "trembl only.", &[0]),
                    ],
                ),
            ],
        }
    }

    pub fn database(&self, name: &str) -> Option<&FixtureDatabase> {
        self.databases.iter().find(|d| d.name.as_str() == name)
    }

    /// Registers every database without ingesting anything.
    pub fn register(&self, ws: &mut Workspace) -> Result<()> {
        for d in &self.databases {
            let specs: Vec<_> = d.releases.iter().map(|(l, dt)| ReleaseSpec::new(l.clone(), *dt)).collect();
            ws.register_database(&d.name, d.epoch, &specs)?;
        }
        Ok(())
    }

    /// Registers and ingests everything, database by database, in release order.
    pub fn load(&self, ws: &mut Workspace) -> Result<Vec<IngestSummary>> {
        let order: Vec<_> = self
            .databases
            .iter()
            .flat_map(|d| (0..d.releases.len() as u32).map(move |o| (d.name.clone(), o)))
            .collect();
        self.load_in_order(ws, &order)
    }

    /// Registers everything, then ingests the given `(database, ordinal)` pairs in order.
    pub fn load_in_order(&self, ws: &mut Workspace, order: &[(DatabaseId, u32)]) -> Result<Vec<IngestSummary>> {
        self.register(ws)?;
        let mut out = Vec::new();
        for (name, ordinal) in order {
            let release = ws.release_at(name, *ordinal)?;
            out.push(ws.ingest(&release, self.occurrences(&release)?.into_iter().map(Ok))?);
        }
        Ok(out)
    }

    /// Occurrences of one release in record order.
    pub fn occurrences(&self, release: &ReleaseVersion) -> Result<Vec<(RecordId, NormalizedSentence)>> {
        let mut by_record: BTreeMap<&str, Vec<NormalizedSentence>> = BTreeMap::new();
        if let Some(d) = self.databases.iter().find(|d| d.name == release.database) {
            for (acc, text, ordinals) in &d.presence {
                if ordinals.contains(&release.ordinal) {
                    by_record
                        .entry(acc)
                        .or_default()
                        .push(NormalizedSentence::new(text)?);
                }
            }
        }
        let mut out = Vec::new();
        for (acc, sentences) in by_record {
            let record = RecordId::new(release.database.clone(), acc)?;
            out.extend(sentences.into_iter().map(|s| (record.clone(), s)));
        }
        Ok(out)
    }

    /// One release as a generic-tsv file body.
    pub fn release_tsv(&self, db: &str, ordinal: u32) -> String {
        let mut out = String::new();
        let Some(d) = self.database(db) else { return out };
        let mut lines: Vec<(&str, &str)> = d
            .presence
            .iter()
            .filter(|(_, _, o)| o.contains(&ordinal))
            .map(|(a, s, _)| (a.as_str(), s.as_str()))
            .collect();
        lines.sort_by_key(|(a, _)| *a);
        for (acc, text) in lines {
            out.push_str(acc);
            out.push('\t');
            out.push_str(text);
            out.push('\n');
        }
        out
    }
}
