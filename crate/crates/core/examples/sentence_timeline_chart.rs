//! Presence history of one sentence across every database that ever held
//! it, printed as an event list and as step series ready for plotting.

use annotrace::crossdb::{cross_timeline, step_series};
use annotrace::fixtures::{Fixture, RETINAL_SENTENCE};
use annotrace::model::fingerprint;
use annotrace::store::Workspace;

fn main() -> annotrace::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut ws = Workspace::create(dir.path())?;
    Fixture::retinal().load(&mut ws)?;

    let timeline = cross_timeline(&ws, &[], fingerprint(RETINAL_SENTENCE)?)?;
    println!("{}", timeline.text);
    for event in &timeline.events {
        println!("  {event:?}");
    }
    for series in step_series(&timeline) {
        let steps: Vec<String> = series.steps.iter().map(|(d, p)| format!("{d}:{p}")).collect();
        println!("{}\t{}\t{}", series.group, series.record.accession, steps.join(" "));
    }
    Ok(())
}
