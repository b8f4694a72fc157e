//! Generates a corpus with planted patterns, ingests it and checks that
//! the detectors recover every planted instance.
//!
//! `cargo run --example synth_corpus [SPEC.toml]`; defaults to
//! `examples/synth_spec.toml`.

use annotrace::crossdb::detect_all_cross;
use annotrace::manifest::{ingest_manifest, Manifest};
use annotrace::patterns::detect;
use annotrace::store::Workspace;
use annotrace::synth::{generate, GeneratorSpec};

fn main() -> annotrace::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synth_spec.toml").to_owned());
    let text = std::fs::read_to_string(&path).map_err(|e| annotrace::Error::Io { path: path.clone().into(), source: e })?;
    let generated = generate(&GeneratorSpec::from_toml(&text)?)?;

    let dir = tempfile::tempdir().expect("temp dir");
    let manifest = generated.write(&dir.path().join("corpus"))?;
    let mut ws = Workspace::create(dir.path().join("ws"))?;
    ingest_manifest(&mut ws, &Manifest::load(&manifest)?, |_| {})?;

    let mut found = Vec::new();
    for db in ws.databases() {
        found.extend(detect(&ws, &db)?.instances);
    }
    let recovered = generated.truth.patterns.iter().filter(|p| found.contains(p)).count();
    println!("within-database: {recovered}/{} planted instances recovered", generated.truth.patterns.len());

    let cross = detect_all_cross(&ws, &[])?;
    let recovered = generated.truth.cross.iter().filter(|c| cross.contains(c)).count();
    println!("cross-database: {recovered}/{} planted instances recovered", generated.truth.cross.len());
    println!("generator attempt {}", generated.truth.attempt);
    Ok(())
}
