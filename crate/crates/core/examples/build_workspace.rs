//! Builds a workspace from release files listed in a manifest, then
//! checks it. Run with `cargo run --example build_workspace [DIR]`.

use std::path::PathBuf;

use annotrace::fixtures::Fixture;
use annotrace::manifest::{ingest_manifest, IngestOutcome, Manifest};
use annotrace::store::Workspace;
use annotrace::synth::PresenceCorpus;

fn main() -> annotrace::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("annotrace-build-example"));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| annotrace::Error::Io { path: dir.clone(), source: e })?;
    }

    // Release files for the toy corpus, one generic-tsv file per release.
    let manifest_path = PresenceCorpus::from_fixture(&Fixture::toy())?.write_tsv(&dir.join("files"))?;
    println!("{}", std::fs::read_to_string(&manifest_path).unwrap_or_default());

    let mut ws = Workspace::create(dir.join("ws"))?;
    ingest_manifest(&mut ws, &Manifest::load(&manifest_path)?, |outcome| match outcome {
        IngestOutcome::Ingested(s) => println!(
            "ingested {}: {} records, {} occurrences, {} new sentences",
            s.release.as_ref().expect("named release"),
            s.records,
            s.occurrences,
            s.new_sentences
        ),
        IngestOutcome::Skipped(r) => println!("skipped {r}"),
    })?;

    let report = ws.verify()?;
    println!("workspace {} at {}: {} problems", ws.id(), ws.root().display(), report.problems.len());
    Ok(())
}
