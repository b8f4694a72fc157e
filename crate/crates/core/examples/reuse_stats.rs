//! Redundancy profile of a database: total, unique and singleton counts
//! per release, plus distinct sentences over its whole history.

use annotrace::fixtures::Fixture;
use annotrace::metrics::{lifetime_unique, redundancy_profile, ReleaseSelector};
use annotrace::model::DatabaseId;
use annotrace::store::Workspace;

fn main() -> annotrace::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut ws = Workspace::create(dir.path())?;
    Fixture::toy().load(&mut ws)?;

    let x = DatabaseId::new("x")?;
    println!("release\ttotal\tunique\tsingleton\tunique%\tsingleton%");
    for row in redundancy_profile(&ws, std::slice::from_ref(&x), ReleaseSelector::All)? {
        let Some(c) = row.counts else { continue };
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.release.label,
            c.total,
            c.unique,
            c.singleton,
            c.unique_pct(),
            c.singleton_pct()
        );
    }
    println!("lifetime unique: {}", lifetime_unique(&ws, &x)?.total_unique);
    Ok(())
}
