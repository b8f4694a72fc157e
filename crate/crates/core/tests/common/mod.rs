#![allow(dead_code)]

use annotrace::crossdb::{detect_all_cross, MergeGroup};
use annotrace::patterns::detect;
use annotrace::store::{Durability, Workspace};
use annotrace::synth::{brute_force_detect, PresenceCorpus};

/// Loads `corpus` into a fresh workspace under `root`.
pub fn load(corpus: &PresenceCorpus, root: &std::path::Path) -> Workspace {
    let mut ws = Workspace::create(root).expect("create workspace");
    ws.set_durability(Durability::Unsynced);
    corpus.load(&mut ws).expect("load corpus");
    ws
}

/// Compares every detector against the oracle on a loaded corpus and
/// describes the first disagreement.
pub fn compare(ws: &Workspace, corpus: &PresenceCorpus, merges: &[MergeGroup]) -> Result<(), String> {
    let oracle = brute_force_detect(corpus, merges).map_err(|e| e.to_string())?;
    for (db, expected) in &oracle.patterns {
        let got = detect(ws, db).map_err(|e| e.to_string())?;
        if got.instances != expected.instances {
            return Err(format!("{db}: instances differ\n  detector {:?}\n  oracle   {:?}", got.instances, expected.instances));
        }
        if got.sentence_counts != expected.sentence_counts {
            return Err(format!("{db}: sentence counts {:?} vs {:?}", got.sentence_counts, expected.sentence_counts));
        }
        if got.ambiguous_origin != expected.ambiguous_origin {
            return Err(format!("{db}: ambiguous {} vs {}", got.ambiguous_origin, expected.ambiguous_origin));
        }
        if got.record_absences != expected.record_absences {
            return Err(format!("{db}: record absences {} vs {}", got.record_absences, expected.record_absences));
        }
    }
    let cross = detect_all_cross(ws, merges).map_err(|e| e.to_string())?;
    if cross != oracle.cross {
        return Err(format!("cross instances differ\n  detector {cross:?}\n  oracle   {:?}", oracle.cross));
    }
    Ok(())
}

/// Merges the first two databases when there are at least three, so the
/// merged view and plain singletons are both exercised.
pub fn merges_for(corpus: &PresenceCorpus, seed: u64) -> Vec<MergeGroup> {
    if corpus.databases.len() >= 3 && seed.is_multiple_of(2) {
        let members = [corpus.databases[0].name.clone(), corpus.databases[1].name.clone()];
        vec![MergeGroup::new("merged", &members).expect("valid group")]
    } else {
        Vec::new()
    }
}
