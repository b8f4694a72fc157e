//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;

use annotrace::commands;
use annotrace::crossdb::{self, MergeGroup};
use annotrace::extract::{extract_release, FormatKind, FormatOptions, TopicFilter};
use annotrace::fixtures::{Fixture, KIR_SENTENCE, RETINAL_SENTENCE};
use annotrace::manifest::{ingest_manifest, Manifest};
use annotrace::metrics::{self, ReleaseSelector};
use annotrace::model::{DatabaseId, NormalizedSentence, ReleaseVersion};
use annotrace::patterns::{self, PatternLabel, Witness};
use annotrace::store::{ReleaseSpec, Workspace};
use annotrace::synth::scale::ScaleSpec;
use annotrace::synth::{generate, random_corpus, CalendarSpec, GeneratorSpec, PresenceCorpus, Quotas, Rates, SmallBounds};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn d(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn id(s: &str) -> DatabaseId {
    DatabaseId::new(s).unwrap()
}

fn workspace(dir: &tempfile::TempDir, name: &str) -> Result<Workspace, String> {
    Workspace::create(dir.path().join(name)).map_err(e)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let corpora = 1000u64;
    let dir = tempfile::tempdir().map_err(e)?;
    for seed in 0..corpora {
        let corpus = random_corpus(seed, SmallBounds::default());
        let root = dir.path().join(seed.to_string());
        let ws = common::load(&corpus, &root);
        let merges = common::merges_for(&corpus, seed);
        common::compare(&ws, &corpus, &merges).map_err(|m| format!("seed {seed}: {m}"))?;
        drop(ws);
        std::fs::remove_dir_all(&root).map_err(e)?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:.1?}, limit 60s"))?;
    Ok(format!("{corpora} corpora, 0 mismatches, {elapsed:.1?}"))
}

fn planted_recovery() -> Outcome {
    let spec = GeneratorSpec {
        seed: 20240611,
        databases: vec![
            CalendarSpec::regular("alpha", d("2001-01-15"), 6, 12).map_err(e)?,
            CalendarSpec::regular("beta", d("2001-07-15"), 6, 12).map_err(e)?,
        ],
        records: 40,
        vocabulary: 300,
        rates: Rates::default(),
        quotas: Quotas {
            transient: 50,
            possibly_transient: 50,
            missing_origin: 50,
            cross: 20,
        },
    };
    let generated = generate(&spec).map_err(e)?;
    let truth = &generated.truth;
    check(
        truth.count(PatternLabel::Transient) == 50
            && truth.count(PatternLabel::PossiblyTransient) == 50
            && truth.count(PatternLabel::MissingOrigin) == 50
            && truth.cross.len() == 20,
        || "manifest does not meet the quotas".into(),
    )?;

    let dir = tempfile::tempdir().map_err(e)?;
    let manifest = generated.write(&dir.path().join("corpus")).map_err(e)?;
    let mut ws = workspace(&dir, "ws")?;
    ingest_manifest(&mut ws, &Manifest::load(&manifest).map_err(e)?, |_| {}).map_err(e)?;

    let mut reported = Vec::new();
    for db in ws.databases() {
        reported.extend(patterns::detect(&ws, &db).map_err(e)?.instances);
    }
    let cross = crossdb::detect_all_cross(&ws, &[]).map_err(e)?;
    let missed = truth.patterns.iter().filter(|p| !reported.contains(p)).count()
        + truth.cross.iter().filter(|c| !cross.contains(c)).count();
    check(missed == 0, || format!("{missed} planted instances not reported"))?;

    let mut unsound = 0;
    for p in &reported {
        unsound += !p.replay(&ws).map_err(e)? as usize;
    }
    for c in &cross {
        unsound += !c.replay(&ws, &[]).map_err(e)? as usize;
    }
    check(unsound == 0, || format!("{unsound} reported instances fail replay"))?;
    Ok(format!(
        "recall 1.0 over {} planted, soundness 1.0 over {} reported",
        truth.patterns.len() + truth.cross.len(),
        reported.len() + cross.len()
    ))
}

fn normalization_fidelity() -> Outcome {
    let expected = "may be a transcription factor with important functions in eye and nasal development.";
    let block = "ID   A1   Reviewed;\n\
CC -!- FUNCTION: May be a transcription factor with important functions\n\
CC     in eye and nasal development.\n\
//\n";
    let release = ReleaseVersion {
        database: id("swissprot"),
        label: "1".into(),
        ordinal: 0,
        date: d("2012-01-01"),
        date_estimated: false,
    };
    let got: Vec<(String, String)> = extract_release(
        block.as_bytes(),
        FormatKind::LinePrefixedFlat,
        &release,
        &FormatOptions::default(),
        TopicFilter::only(["FUNCTION"]),
    )
    .map_err(e)?
    .map(|r| r.map(|(rec, s)| (rec.accession, s.into_text())))
    .collect::<Result<_, _>>()
    .map_err(e)?;
    check(got == [("A1".to_owned(), expected.to_owned())], || format!("got {got:?}"))?;
    let direct = NormalizedSentence::new("May be a transcription factor with important functions\n in eye and nasal development.")
        .map_err(e)?;
    check(direct.text() == expected, || format!("normalized to {:?}", direct.text()))?;
    Ok("byte-exact".into())
}

fn fixture_classifications() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let mut kir = workspace(&dir, "kir")?;
    Fixture::kir().load(&mut kir).map_err(e)?;
    let fp2 = NormalizedSentence::new(KIR_SENTENCE).map_err(e)?.fingerprint();
    let found = patterns::detect_missing_origin(&kir, &id("interpro")).map_err(e)?;
    let hit = found.iter().find(|i| i.sentence == fp2).ok_or("kir sentence not classified")?;
    match &hit.witness {
        Witness::MissingOrigin { origin, .. } if origin.accession == "IPR004086" => {}
        other => return Err(format!("unexpected witness {other:?}")),
    }

    let mut retinal = workspace(&dir, "retinal")?;
    Fixture::retinal().load(&mut retinal).map_err(e)?;
    let cross = crossdb::detect_all_cross(&retinal, &[]).map_err(e)?;
    check(cross.len() == 1, || format!("{} cross instances", cross.len()))?;
    let c = &cross[0];
    let fp3 = NormalizedSentence::new(RETINAL_SENTENCE).map_err(e)?.fingerprint();
    let dests: Vec<&str> = c.destinations.iter().map(|d| d.group.as_str()).collect();
    check(c.sentence == fp3 && c.origin == "prints" && dests == ["interpro"], || {
        format!("got origin {} destinations {dests:?}", c.origin)
    })?;
    Ok(format!("kir origin IPR004086; retinal prints -> interpro ({})", c.confidence))
}

fn counting_invariants() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let mut corpora: Vec<PresenceCorpus> = (0..200).map(|s| random_corpus(10_000 + s, SmallBounds::default())).collect();
    for f in [Fixture::toy(), Fixture::kir(), Fixture::retinal(), Fixture::shared_sentences()] {
        corpora.push(PresenceCorpus::from_fixture(&f).map_err(e)?);
    }
    let mut releases = 0;
    for (i, corpus) in corpora.iter().enumerate() {
        let ws = common::load(corpus, &dir.path().join(i.to_string()));
        let dbs = ws.databases();
        for db in &dbs {
            for r in ws.releases(db).map_err(e)? {
                let c = metrics::release_counts(&ws, &r).map_err(e)?;
                check(c.singleton <= c.unique && c.unique <= c.total, || format!("corpus {i} {r}: {c:?}"))?;
                releases += 1;
            }
        }
        let lifetime = ws.sentence_count() as u64;
        let sum = |merges: &[MergeGroup]| -> Result<u64, String> {
            Ok(crossdb::combination_partition(&ws, merges).map_err(e)?.iter().map(|r| r.count).sum())
        };
        let plain = sum(&[])?;
        check(plain == lifetime, || format!("corpus {i}: partition sums to {plain}, lifetime {lifetime}"))?;
        if dbs.len() >= 2 {
            let merged = sum(&[MergeGroup::new("pair", &dbs[..2]).map_err(e)?])?;
            check(merged == plain, || format!("corpus {i}: merged sum {merged} vs {plain}"))?;
        }
    }
    let shared = &corpora[corpora.len() - 1];
    let ws = common::load(shared, &dir.path().join("uniprot"));
    let merges = [MergeGroup::new("uniprotkb", &[id("swissprot"), id("trembl")]).map_err(e)?];
    let a = crossdb::combination_partition(&ws, &[]).map_err(e)?;
    let b = crossdb::combination_partition(&ws, &merges).map_err(e)?;
    check(b.len() <= a.len(), || "merging added combination rows".into())?;
    Ok(format!("{} corpora, {releases} releases", corpora.len()))
}

/// Every query payload for a workspace, as JSON text.
fn payloads(ws: &Workspace) -> Result<Vec<String>, String> {
    let mut out = vec![
        commands::stats(ws, &[], ReleaseSelector::All).map_err(e)?.to_json(),
        commands::patterns(ws, &[], None, None).map_err(e)?.to_json(),
        commands::partition(ws, &[]).map_err(e)?.to_json(),
        commands::cross_patterns(ws, &[], None, &[]).map_err(e)?.to_json(),
        commands::integrity(ws).map_err(e)?.0.to_json(),
    ];
    for fp in ws.fingerprints() {
        out.push(commands::timeline(ws, &[], &fp.to_string(), false).map_err(e)?.to_json());
        out.push(commands::timeline(ws, &[], &fp.to_string(), true).map_err(e)?.to_json());
    }
    Ok(out)
}

fn determinism_and_persistence() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let mut corpora = vec![PresenceCorpus::from_fixture(&Fixture::retinal()).map_err(e)?];
    corpora.extend((0..20).map(|s| random_corpus(50_000 + s, SmallBounds::default())));
    let mut compared = 0;
    for (i, corpus) in corpora.iter().enumerate() {
        let forward = common::load(corpus, &dir.path().join(format!("{i}-fwd")));
        let baseline = payloads(&forward)?;

        // Same releases, registered up front and ingested last to first.
        let mut backward = workspace(&dir, &format!("{i}-rev"))?;
        let mut order = Vec::new();
        for db in &corpus.databases {
            let specs: Vec<ReleaseSpec> = db.releases.iter().map(|(l, d)| ReleaseSpec::new(l, *d)).collect();
            order.extend(backward.register_database(&db.name, db.epoch, &specs).map_err(e)?);
        }
        order.reverse();
        for r in &order {
            let occ = forward.release_occurrences(r).map_err(e)?.map(|o| {
                let o = o?;
                let text = forward.sentence_text(o.sentence).expect("stored").to_owned();
                Ok((o.record, NormalizedSentence::from_canonical(text)?))
            });
            backward.ingest(r, occ).map_err(e)?;
        }
        let permuted = payloads(&backward)?;
        check(permuted == baseline, || format!("corpus {i}: ingest order changed a payload"))?;

        drop(forward);
        let reopened = Workspace::open(dir.path().join(format!("{i}-fwd"))).map_err(e)?;
        check(payloads(&reopened)? == baseline, || format!("corpus {i}: reopen changed a payload"))?;
        compared += baseline.len();
    }
    Ok(format!("{compared} payloads identical across permutation and reopen"))
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

fn scale_smoke() -> Outcome {
    let spec = ScaleSpec::ten_million();
    spec.validate().map_err(e)?;
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(e)?;
    let mut ws = workspace(&dir, "ws")?;
    let db = id("scale");
    let specs: Vec<ReleaseSpec> = (0..spec.releases)
        .map(|t| ReleaseSpec::new(format!("r{t}"), d("2001-01-01") + chrono::Months::new(t * 6)))
        .collect();
    let releases = ws.register_database(&db, None, &specs).map_err(e)?;
    let mut ingested = 0;
    for r in &releases {
        let mut extraction = extract_release(
            spec.release_reader(r.ordinal),
            FormatKind::GenericTsv,
            r,
            &FormatOptions::default(),
            TopicFilter::All,
        )
        .map_err(e)?;
        ingested += ws.ingest(r, &mut extraction).map_err(e)?.occurrences;
    }
    check(ingested == spec.total_occurrences(), || format!("ingested {ingested} occurrences"))?;
    let profile = metrics::redundancy_profile(&ws, std::slice::from_ref(&db), ReleaseSelector::All).map_err(e)?;
    let ingest_and_stats = start.elapsed();

    let mut lifetime: HashSet<u64> = HashSet::new();
    for (row, r) in profile.iter().zip(&releases) {
        let c = row.counts.as_ref().ok_or("missing counts")?;
        let recount = metrics::recount(ws.release_occurrences(r).map_err(e)?.map(|o| o.unwrap()));
        check((c.total, c.unique, c.singleton) == recount, || format!("{r}: {c:?} vs recount {recount:?}"))?;
        let mut from_spec: HashMap<u64, u32> = HashMap::new();
        for rec in 0..spec.records {
            for s in spec.sentences(r.ordinal, rec) {
                *from_spec.entry(s).or_default() += 1;
                lifetime.insert(s);
            }
        }
        let expected = (
            spec.occurrences_per_release(),
            from_spec.len() as u64,
            from_spec.values().filter(|&&n| n == 1).count() as u64,
        );
        check(recount == expected, || format!("{r}: recount {recount:?} vs generator {expected:?}"))?;
    }
    let lifetime_unique = profile[0].lifetime_unique.ok_or("no lifetime count")?;
    check(lifetime_unique == lifetime.len() as u64, || {
        format!("lifetime {lifetime_unique} vs generator {}", lifetime.len())
    })?;

    check(ingest_and_stats < Duration::from_secs(600), || format!("took {ingest_and_stats:.1?}"))?;
    let peak = peak_rss_kib().ok_or("VmHWM unavailable")?;
    check(peak < 4 * 1024 * 1024, || format!("peak {} MiB", peak / 1024))?;
    Ok(format!(
        "{} occurrences ingested with stats in {ingest_and_stats:.1?}, peak {} MiB",
        spec.total_occurrences(),
        peak / 1024
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("oracle-equivalence", oracle_equivalence),
        ("planted-pattern-recovery", planted_recovery),
        ("normalization-fidelity", normalization_fidelity),
        ("fixture-classifications", fixture_classifications),
        ("counting-invariants", counting_invariants),
        ("determinism-and-persistence", determinism_and_persistence),
        ("scale-smoke", scale_smoke),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
