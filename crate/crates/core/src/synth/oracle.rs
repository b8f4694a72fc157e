//! Literal evaluation of every pattern predicate over a dense presence
//! table. Slow on purpose: no indexes, no sorted-run tricks, just loops.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::crossdb::{Confidence, CrossInstance, Destination, MergeGroup};
use crate::error::{Error, Result};
use crate::model::{DatabaseId, DateInterval, RecordId};
use crate::patterns::{PatternInstance, PatternLabel, Witness};

use super::corpus::PresenceCorpus;

/// Largest table the oracle will materialize.
pub const CELL_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub instances: Vec<PatternInstance>,
    pub sentence_counts: BTreeMap<PatternLabel, u64>,
    pub ambiguous_origin: u64,
    pub record_absences: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleFindings {
    pub patterns: BTreeMap<DatabaseId, OracleReport>,
    pub cross: Vec<CrossInstance>,
}

struct Table {
    records: usize,
    releases: usize,
    sentences: usize,
    bits: Vec<bool>,
}

impl Table {
    fn at(&self, record: usize, release: usize, sentence: usize) -> bool {
        self.bits[(record * self.releases + release) * self.sentences + sentence]
    }
}

fn tables(corpus: &PresenceCorpus) -> Result<Vec<Table>> {
    let n = corpus.sentences.len() as u64;
    let cells: u64 = corpus
        .databases
        .iter()
        .map(|d| d.records.len() as u64 * d.releases.len() as u64 * n)
        .sum();
    if cells > CELL_LIMIT {
        return Err(Error::TooLarge { cells, limit: CELL_LIMIT });
    }
    let mut out: Vec<Table> = corpus
        .databases
        .iter()
        .map(|d| Table {
            records: d.records.len(),
            releases: d.releases.len(),
            sentences: n as usize,
            bits: vec![false; d.records.len() * d.releases.len() * n as usize],
        })
        .collect();
    for c in &corpus.cells {
        let t = &mut out[c.db as usize];
        let i = (c.record as usize * t.releases + c.release as usize) * t.sentences + c.sentence as usize;
        t.bits[i] = true;
    }
    Ok(out)
}

/// Every within-database instance and every cross-database instance, with
/// `merges` applied to the cross-database view.
pub fn brute_force_detect(corpus: &PresenceCorpus, merges: &[MergeGroup]) -> Result<OracleFindings> {
    let tables = tables(corpus)?;
    let mut findings = OracleFindings::default();
    for (d, db) in corpus.databases.iter().enumerate() {
        findings
            .patterns
            .insert(db.name.clone(), within(corpus, d, &tables[d]));
    }
    findings.cross = cross(corpus, &tables, merges)?;
    Ok(findings)
}

fn within(corpus: &PresenceCorpus, d: usize, t: &Table) -> OracleReport {
    let db = &corpus.databases[d];
    let latest = t.releases - 1;
    let rec = |r: usize| corpus.record_id(d as u16, r as u32);
    let mut report = OracleReport::default();
    for label in PatternLabel::ALL {
        report.sentence_counts.insert(label, 0);
    }

    for s in 0..t.sentences {
        let fp = corpus.fingerprint(s as u32);
        let mut labels = Vec::new();
        let mut push = |label: PatternLabel, witness: Witness, labels: &mut Vec<PatternLabel>| {
            if !labels.contains(&label) {
                labels.push(label);
            }
            report.instances.push(PatternInstance {
                label,
                sentence: fp,
                database: db.name.clone(),
                members: vec![db.name.clone()],
                witness,
            });
        };

        for r in 0..t.records {
            let present: Vec<usize> = (0..t.releases).filter(|&v| t.at(r, v, s)).collect();
            if present.len() == 1 {
                let label = if present[0] == latest {
                    PatternLabel::PossiblyTransient
                } else {
                    PatternLabel::Transient
                };
                push(
                    label,
                    Witness::Single {
                        record: rec(r),
                        release: present[0] as u32,
                    },
                    &mut labels,
                );
            }
        }

        // The earliest release where any record holds the sentence.
        let Some(v0) = (0..t.releases).find(|&v| (0..t.records).any(|r| t.at(r, v, s))) else {
            continue;
        };
        let first_holders: Vec<usize> = (0..t.records).filter(|&r| t.at(r, v0, s)).collect();
        if first_holders.len() == 1 {
            let o = first_holders[0];
            let secondaries: Vec<usize> = (0..t.records)
                .filter(|&r| r != o && (0..t.releases).any(|v| t.at(r, v, s) && !t.at(o, v, s)))
                .collect();
            if !secondaries.is_empty() {
                let v1 = (0..t.releases)
                    .find(|&v| secondaries.iter().any(|&r| t.at(r, v, s)))
                    .expect("secondaries hold the sentence somewhere");
                let v2 = (0..t.releases)
                    .find(|&v| !t.at(o, v, s) && secondaries.iter().any(|&r| t.at(r, v, s)))
                    .expect("secondaries outlive the origin somewhere");
                let mut names: Vec<RecordId> = secondaries.iter().map(|&r| rec(r)).collect();
                names.sort();
                push(
                    PatternLabel::MissingOrigin,
                    Witness::MissingOrigin {
                        origin: rec(o),
                        secondaries: names,
                        origin_first: v0 as u32,
                        secondary_first: v1 as u32,
                        removed_at: v2 as u32,
                    },
                    &mut labels,
                );
            }
        } else {
            let lost = first_holders.iter().any(|&o| {
                (v0 + 1..t.releases).any(|v| !t.at(o, v, s) && (0..t.records).any(|r| r != o && t.at(r, v, s)))
            });
            if lost {
                report.ambiguous_origin += 1;
            }
        }
        for label in labels {
            *report.sentence_counts.get_mut(&label).expect("seeded") += 1;
        }
    }
    report.instances.sort();

    for v in 1..t.releases {
        for r in 0..t.records {
            let seen_before = (0..v).any(|u| (0..t.sentences).any(|s| t.at(r, u, s)));
            let holds_now = (0..t.sentences).any(|s| t.at(r, v, s));
            if seen_before && !holds_now {
                report.record_absences += 1;
            }
        }
    }
    report
}

fn interval(dates: &[NaiveDate], epoch: NaiveDate, v: usize) -> DateInterval {
    DateInterval {
        start: if v == 0 { epoch } else { dates[v - 1] },
        end: dates[v],
    }
}

struct Sighting {
    first: DateInterval,
    last: DateInterval,
    in_latest: bool,
}

fn cross(corpus: &PresenceCorpus, tables: &[Table], merges: &[MergeGroup]) -> Result<Vec<CrossInstance>> {
    // Group names and member indices.
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    let mut claimed = vec![false; corpus.databases.len()];
    for m in merges {
        let mut members = Vec::new();
        for id in &m.members {
            let d = corpus
                .databases
                .iter()
                .position(|db| &db.name == id)
                .ok_or_else(|| Error::NotFound(format!("database {id}")))?;
            if claimed[d] {
                return Err(Error::Registry(format!("{id} is in two groups")));
            }
            claimed[d] = true;
            members.push(d);
        }
        groups.push((m.name.clone(), members));
    }
    for (d, db) in corpus.databases.iter().enumerate() {
        if !claimed[d] {
            groups.push((db.name.as_str().to_owned(), vec![d]));
        }
    }

    let mut out = Vec::new();
    for s in 0..corpus.sentences.len() {
        let sightings: Vec<Option<Sighting>> = groups
            .iter()
            .map(|(_, members)| {
                let mut first: Option<DateInterval> = None;
                let mut last: Option<DateInterval> = None;
                let mut in_latest = false;
                for &d in members {
                    let db = &corpus.databases[d];
                    let t = &tables[d];
                    let dates = db.dates();
                    for v in 0..t.releases {
                        if !(0..t.records).any(|r| t.at(r, v, s)) {
                            continue;
                        }
                        let f = interval(&dates, db.epoch_or_first(), v);
                        if first.is_none_or(|g| (f.end, f.start) < (g.end, g.start)) {
                            first = Some(f);
                        }
                        let l = DateInterval {
                            start: dates[v],
                            end: *dates.get(v + 1).unwrap_or(&dates[v]),
                        };
                        if last.is_none_or(|g| (l.start, l.end) > (g.start, g.end)) {
                            last = Some(l);
                        }
                        in_latest |= v == t.releases - 1;
                    }
                }
                Some(Sighting {
                    first: first?,
                    last: last?,
                    in_latest,
                })
            })
            .collect();

        for (o, origin) in sightings.iter().enumerate() {
            let Some(origin) = origin else { continue };
            let others = sightings.iter().enumerate().filter(|(g, x)| *g != o && x.is_some());
            if others.clone().count() == 0 {
                continue;
            }
            let strictly_first = others.clone().all(|(_, x)| origin.first.end < x.as_ref().unwrap().first.end);
            if !strictly_first || origin.in_latest {
                continue;
            }
            let destinations: Vec<Destination> = others
                .filter_map(|(g, x)| {
                    let x = x.as_ref().unwrap();
                    (x.in_latest && x.first.end > origin.first.end).then(|| Destination {
                        group: groups[g].0.clone(),
                        first_seen: x.first,
                        confidence: if origin.first.end < x.first.start {
                            Confidence::DateOrdered
                        } else {
                            Confidence::Overlapping
                        },
                    })
                })
                .collect();
            if destinations.is_empty() {
                continue;
            }
            let confidence = if destinations.iter().all(|d| d.confidence == Confidence::DateOrdered) {
                Confidence::DateOrdered
            } else {
                Confidence::Overlapping
            };
            out.push(CrossInstance {
                sentence: corpus.fingerprint(s as u32),
                origin: groups[o].0.clone(),
                origin_first_seen: origin.first,
                origin_last_seen: origin.last,
                destinations,
                confidence,
            });
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{Fixture, TOY_SENTENCES};
    use crate::model::NormalizedSentence;

    fn x() -> DatabaseId {
        DatabaseId::new("x").unwrap()
    }

    #[test]
    fn toy_hand_classification() {
        let corpus = PresenceCorpus::from_fixture(&Fixture::toy()).unwrap();
        let found = brute_force_detect(&corpus, &[]).unwrap();
        let report = &found.patterns[&x()];
        let fp = |i: usize| NormalizedSentence::new(TOY_SENTENCES[i]).unwrap().fingerprint();
        let rec = |a: &str| RecordId::new(x(), a).unwrap();
        let mut summary: Vec<_> = report
            .instances
            .iter()
            .map(|i| {
                let who = match &i.witness {
                    Witness::Single { record, .. } => record.clone(),
                    Witness::MissingOrigin { origin, .. } => origin.clone(),
                };
                (i.label, i.sentence, who)
            })
            .collect();
        let mut expected = vec![
            (PatternLabel::Transient, fp(0), rec("A")),
            (PatternLabel::PossiblyTransient, fp(1), rec("B")),
            (PatternLabel::MissingOrigin, fp(2), rec("A")),
        ];
        expected.sort();
        summary.sort();
        assert_eq!(summary, expected);
        assert_eq!(report.ambiguous_origin, 0);
        assert!(found.cross.is_empty());
    }

    #[test]
    fn empty_corpus_is_empty() {
        let found = brute_force_detect(&PresenceCorpus::default(), &[]).unwrap();
        assert!(found.patterns.is_empty() && found.cross.is_empty());
    }

    #[test]
    fn size_guard() {
        let mut corpus = PresenceCorpus::from_fixture(&Fixture::toy()).unwrap();
        corpus.sentences = (0..400_000).map(PresenceCorpus::sentence_text).collect();
        assert!(matches!(
            brute_force_detect(&corpus, &[]),
            Err(Error::TooLarge { .. })
        ));
    }
}
