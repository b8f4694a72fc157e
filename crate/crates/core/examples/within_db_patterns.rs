//! Transient, possibly-transient and missing-origin sentences in one
//! database, using the InterPro Kir1.1 example.

use annotrace::fixtures::Fixture;
use annotrace::model::DatabaseId;
use annotrace::patterns::{detect, PatternLabel, Witness};
use annotrace::store::Workspace;

fn main() -> annotrace::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut ws = Workspace::create(dir.path())?;
    Fixture::kir().load(&mut ws)?;

    let db = DatabaseId::new("interpro")?;
    let report = detect(&ws, &db)?;
    for (label, n) in &report.sentence_counts {
        println!("{}: {n} sentences", label.name());
    }
    println!("ambiguous origins skipped: {}", report.ambiguous_origin);

    for inst in report.of_label(PatternLabel::MissingOrigin) {
        let Witness::MissingOrigin { origin, secondaries, removed_at, .. } = &inst.witness else {
            continue;
        };
        let text = ws.sentence_text(inst.sentence).unwrap_or("?");
        let removed = ws.release_at(&db, *removed_at)?;
        println!("{text}");
        println!("  origin {} lost it in {}", origin.accession, removed.label);
        for s in secondaries {
            println!("  still held by {}", s.accession);
        }
        assert!(inst.replay(&ws)?);
    }
    Ok(())
}
