//! Sentence sharing between databases: which group combinations hold how
//! many sentences, and which sentences look copied from a group that later
//! dropped them.

use annotrace::crossdb::{combination_partition, detect_all_cross, MergeGroup};
use annotrace::fixtures::Fixture;
use annotrace::model::DatabaseId;
use annotrace::store::Workspace;

fn main() -> annotrace::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut ws = Workspace::create(dir.path())?;
    Fixture::shared_sentences().load(&mut ws)?;

    let uniprotkb = MergeGroup::new("uniprotkb", &[DatabaseId::new("swissprot")?, DatabaseId::new("trembl")?])?;
    for row in combination_partition(&ws, std::slice::from_ref(&uniprotkb))? {
        println!("{}\t{}", row.label(), row.count);
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let mut ws = Workspace::create(dir.path())?;
    Fixture::retinal().load(&mut ws)?;
    for inst in detect_all_cross(&ws, &[])? {
        let text = ws.sentence_text(inst.sentence).unwrap_or("?");
        let to: Vec<&str> = inst.destinations.iter().map(|d| d.group.as_str()).collect();
        println!(
            "{} -> {} ({}), first seen {}..{}: {text}",
            inst.origin,
            to.join(","),
            inst.confidence,
            inst.origin_first_seen.start,
            inst.origin_first_seen.end
        );
    }
    Ok(())
}
