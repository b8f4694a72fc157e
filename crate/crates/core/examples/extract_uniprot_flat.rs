//! Parses a small line-prefixed flat file and prints the normalized
//! sentences of each record, keeping only FUNCTION comment blocks.

use annotrace::extract::{extract_release, FormatKind, FormatOptions, TopicFilter};
use annotrace::model::{DatabaseId, ReleaseVersion};

const RELEASE: &str = "\
ID   OPSD_HUMAN              Reviewed;         348 AA.
AC   P08100;
CC   -!- FUNCTION: Photoreceptor required for image-forming vision at low
CC       light intensity. Required for photoreceptor cell viability after
CC       birth (PubMed:12345678).
CC   -!- SUBCELLULAR LOCATION: Membrane; Multi-pass membrane protein.
//
ID   OPSD_BOVIN              Reviewed;         348 AA.
AC   P02699;
CC   -!- FUNCTION: Photoreceptor required for image-forming vision at low
CC       light intensity. Light-induced isomerization of 11-cis to all-trans
CC       retinal triggers a conformational change.
//
";

fn main() -> annotrace::Result<()> {
    let release = ReleaseVersion {
        database: DatabaseId::new("swissprot")?,
        label: "2024_01".into(),
        ordinal: 0,
        date: "2024-01-24".parse().expect("valid date"),
        date_estimated: false,
    };
    let mut extraction = extract_release(
        RELEASE.as_bytes(),
        FormatKind::LinePrefixedFlat,
        &release,
        &FormatOptions::default(),
        TopicFilter::only(["FUNCTION"]),
    )?;
    for item in extraction.by_ref() {
        let (record, sentence) = item?;
        println!("{}\t{}\t{}", record.accession, sentence.fingerprint(), sentence.text());
    }
    let stats = extraction.stats();
    eprintln!(
        "{} records, {} sentences, {} blocks filtered",
        stats.parse.records, stats.sentences, stats.blocks_filtered
    );
    Ok(())
}
