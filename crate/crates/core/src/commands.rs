//! Report payloads for each CLI command, usable without the binary.

use std::str::FromStr;

use crate::crossdb::{self, CrossInstance, MergeGroup};
use crate::error::{Error, Result};
use crate::manifest::IngestOutcome;
use crate::metrics::{redundancy_profile, ReleaseSelector};
use crate::model::{DatabaseId, Fingerprint, NormalizedSentence};
use crate::patterns::{self, PatternLabel, PatternReport, Witness};
use crate::report::{Payload, Table, Value};
use crate::store::Workspace;
use crate::synth::Generated;

pub const STATS_COLUMNS: [&str; 9] = [
    "database",
    "release",
    "date",
    "total",
    "unique",
    "singleton",
    "unique_pct",
    "singleton_pct",
    "lifetime_unique",
];

fn all_or(ws: &Workspace, databases: &[DatabaseId]) -> Vec<DatabaseId> {
    if databases.is_empty() {
        ws.databases()
    } else {
        databases.to_vec()
    }
}

pub fn ingest(outcomes: &[IngestOutcome]) -> Payload {
    let mut t = Table::new(
        "ingest",
        &[
            "database",
            "release",
            "date",
            "date_estimated",
            "status",
            "records",
            "occurrences",
            "duplicates_collapsed",
            "empty_dropped",
            "parse_damage",
            "new_sentences",
        ],
    );
    for o in outcomes {
        match o {
            IngestOutcome::Ingested(s) => {
                let r = s.release.as_ref().expect("ingest summaries name their release");
                t.push(vec![
                    Value::text(&r.database),
                    Value::text(&r.label),
                    r.date.into(),
                    r.date_estimated.into(),
                    "ingested".into(),
                    s.records.into(),
                    s.occurrences.into(),
                    s.duplicates_collapsed.into(),
                    s.empty_dropped.into(),
                    s.parse_damage.into(),
                    s.new_sentences.into(),
                ]);
            }
            IngestOutcome::Skipped(r) => {
                let mut row = vec![
                    Value::text(&r.database),
                    Value::text(&r.label),
                    r.date.into(),
                    r.date_estimated.into(),
                    "skipped".into(),
                ];
                row.resize(11, Value::Null);
                t.push(row);
            }
        }
    }
    Payload::Tables(vec![t])
}

/// Per-release counts; releases that are registered but not ingested get
/// empty count cells.
pub fn stats(ws: &Workspace, databases: &[DatabaseId], selector: ReleaseSelector) -> Result<Payload> {
    let mut t = Table::new("stats", &STATS_COLUMNS);
    for row in redundancy_profile(ws, &all_or(ws, databases), selector)? {
        let c = row.counts.as_ref();
        t.push(vec![
            Value::text(&row.release.database),
            Value::text(&row.release.label),
            row.release.date.into(),
            Value::opt(c.map(|c| c.total)),
            Value::opt(c.map(|c| c.unique)),
            Value::opt(c.map(|c| c.singleton)),
            Value::opt(c.map(|c| c.unique_pct())),
            Value::opt(c.map(|c| c.singleton_pct())),
            Value::opt(row.lifetime_unique),
        ]);
    }
    Ok(Payload::Tables(vec![t]))
}

/// Pattern instances and per-label sentence counts, for each database or
/// for one merged view.
pub fn patterns(
    ws: &Workspace,
    databases: &[DatabaseId],
    label: Option<PatternLabel>,
    merged: Option<&MergeGroup>,
) -> Result<Payload> {
    let reports: Vec<PatternReport> = match merged {
        Some(g) => vec![patterns::detect_merged(ws, &DatabaseId::new(&g.name)?, &g.members)?],
        None => all_or(ws, databases)
            .iter()
            .map(|db| patterns::detect(ws, db))
            .collect::<Result<_>>()?,
    };
    let mut instances = Table::new(
        "instances",
        &[
            "database",
            "label",
            "fingerprint",
            "record",
            "release",
            "secondaries",
            "origin_first",
            "secondary_first",
            "removed_at",
            "text",
        ],
    );
    let mut counts = Table::new("counts", &["database", "label", "sentences"]);
    let mut summary = Table::new("summary", &["database", "ambiguous_origin", "record_absences"]);
    let label_of = |db: &DatabaseId, ordinal: u32| -> Result<Value> { Ok(Value::text(ws.release_at(db, ordinal)?.label)) };
    for report in &reports {
        let name = report.database.as_ref().expect("detector names its view");
        for i in report.instances.iter().filter(|i| label.is_none_or(|l| l == i.label)) {
            let text = ws.sentence_text(i.sentence).unwrap_or_default();
            let mut row = vec![Value::text(name), i.label.name().into(), Value::text(i.sentence)];
            match &i.witness {
                Witness::Single { record, release } => {
                    row.push(Value::text(&record.accession));
                    row.push(label_of(&record.database, *release)?);
                    row.extend([Value::Null, Value::Null, Value::Null, Value::Null]);
                }
                Witness::MissingOrigin {
                    origin,
                    secondaries,
                    origin_first,
                    secondary_first,
                    removed_at,
                } => {
                    let names: Vec<&str> = secondaries.iter().map(|s| s.accession.as_str()).collect();
                    let db = &origin.database;
                    row.push(Value::text(&origin.accession));
                    row.push(Value::Null);
                    row.push(names.join(",").into());
                    row.push(label_of(db, *origin_first)?);
                    row.push(label_of(db, *secondary_first)?);
                    row.push(label_of(db, *removed_at)?);
                }
            }
            row.push(text.into());
            instances.push(row);
        }
        for (l, n) in &report.sentence_counts {
            if label.is_none_or(|want| want == *l) {
                counts.push(vec![Value::text(name), l.name().into(), (*n).into()]);
            }
        }
        summary.push(vec![
            Value::text(name),
            report.ambiguous_origin.into(),
            report.record_absences.into(),
        ]);
    }
    Ok(Payload::Tables(vec![instances, counts, summary]))
}

pub fn partition(ws: &Workspace, merges: &[MergeGroup]) -> Result<Payload> {
    let mut t = Table::new("partition", &["combination", "groups", "count"]);
    for row in crossdb::combination_partition(ws, merges)? {
        t.push(vec![
            row.label().into(),
            (row.combination.len() as u64).into(),
            row.count.into(),
        ]);
    }
    Ok(Payload::Tables(vec![t]))
}

/// Cross-database instances, one row per destination.
pub fn cross_patterns(ws: &Workspace, merges: &[MergeGroup], origin: Option<&str>, destinations: &[String]) -> Result<Payload> {
    let found: Vec<CrossInstance> = match origin {
        Some(o) => crossdb::detect_cross_missing_origin(ws, merges, o, destinations)?,
        None => crossdb::detect_all_cross(ws, merges)?,
    };
    let mut t = Table::new(
        "cross_instances",
        &[
            "fingerprint",
            "origin",
            "origin_first_start",
            "origin_first_end",
            "origin_last_start",
            "origin_last_end",
            "destination",
            "destination_first_start",
            "destination_first_end",
            "destination_confidence",
            "confidence",
            "text",
        ],
    );
    for i in &found {
        let text = ws.sentence_text(i.sentence).unwrap_or_default();
        for d in &i.destinations {
            t.push(vec![
                Value::text(i.sentence),
                i.origin.as_str().into(),
                i.origin_first_seen.start.into(),
                i.origin_first_seen.end.into(),
                i.origin_last_seen.start.into(),
                i.origin_last_seen.end.into(),
                d.group.as_str().into(),
                d.first_seen.start.into(),
                d.first_seen.end.into(),
                Value::text(d.confidence),
                Value::text(i.confidence),
                text.into(),
            ]);
        }
    }
    Ok(Payload::Tables(vec![t]))
}

/// A 32-digit hex string naming a stored sentence, or sentence text.
pub fn resolve_sentence(ws: &Workspace, query: &str) -> Result<Fingerprint> {
    if query.len() == 32 {
        if let Ok(fp) = Fingerprint::from_str(query) {
            if ws.sentence_text(fp).is_some() {
                return Ok(fp);
            }
        }
    }
    let fp = NormalizedSentence::new(query)?.fingerprint();
    if ws.sentence_text(fp).is_none() {
        return Err(Error::NotFound(format!("sentence {query:?}")));
    }
    Ok(fp)
}

pub fn timeline(ws: &Workspace, merges: &[MergeGroup], query: &str, chart: bool) -> Result<Payload> {
    let fp = resolve_sentence(ws, query)?;
    let tl = crossdb::cross_timeline(ws, merges, fp)?;
    if chart {
        return Ok(Payload::Series(crossdb::step_series(&tl)));
    }
    let mut sentence = Table::new("sentence", &["fingerprint", "text"]);
    sentence.push(vec![Value::text(tl.sentence), tl.text.as_str().into()]);
    let mut presence = Table::new("presence", &["group", "database", "record", "release", "date", "present"]);
    for (group, records) in &tl.groups {
        for (record, points) in records {
            for p in points {
                presence.push(vec![
                    group.as_str().into(),
                    Value::text(&record.database),
                    record.accession.as_str().into(),
                    p.release.as_str().into(),
                    p.date.into(),
                    p.present.into(),
                ]);
            }
        }
    }
    let mut events = Table::new(
        "events",
        &["date", "interval_start", "interval_end", "group", "database", "record", "kind", "release"],
    );
    for e in &tl.events {
        events.push(vec![
            e.date.into(),
            e.interval.start.into(),
            e.interval.end.into(),
            e.group.as_str().into(),
            Value::text(&e.record.database),
            e.record.accession.as_str().into(),
            Value::text(e.kind),
            e.release.as_str().into(),
        ]);
    }
    Ok(Payload::Tables(vec![sentence, presence, events]))
}

/// Integrity check results; the flag is false when problems were found.
pub fn integrity(ws: &Workspace) -> Result<(Payload, bool)> {
    let report = ws.verify()?;
    let mut summary = Table::new(
        "integrity",
        &["releases_checked", "occurrences_checked", "sentences_checked", "problems", "orphans"],
    );
    summary.push(vec![
        report.releases_checked.into(),
        report.occurrences_checked.into(),
        report.sentences_checked.into(),
        (report.problems.len() as u64).into(),
        (report.orphans.len() as u64).into(),
    ]);
    let mut findings = Table::new("findings", &["kind", "detail"]);
    for p in &report.problems {
        findings.push(vec!["problem".into(), p.as_str().into()]);
    }
    for o in &report.orphans {
        findings.push(vec!["orphan".into(), o.display().to_string().into()]);
    }
    Ok((Payload::Tables(vec![summary, findings]), report.is_ok()))
}

pub fn synth(generated: &Generated) -> Payload {
    let mut planted = Table::new("planted", &["kind", "count"]);
    for label in PatternLabel::ALL {
        planted.push(vec![label.name().into(), (generated.truth.count(label) as u64).into()]);
    }
    planted.push(vec!["cross".into(), (generated.truth.cross.len() as u64).into()]);
    let mut corpus = Table::new("corpus", &["database", "releases", "records", "occurrences"]);
    for (d, db) in generated.corpus.databases.iter().enumerate() {
        let occurrences = generated.corpus.cells.iter().filter(|c| c.db as usize == d).count() as u64;
        corpus.push(vec![
            Value::text(&db.name),
            (db.releases.len() as u64).into(),
            (db.records.len() as u64).into(),
            occurrences.into(),
        ]);
    }
    Payload::Tables(vec![planted, corpus])
}
