//! Pulls abstract text out of InterPro-style XML entries. Citation and
//! database cross-reference markup is stripped before splitting.

use annotrace::extract::{parse_release, split_sentences, FormatKind, FormatOptions};
use annotrace::model::{DatabaseId, NormalizedSentence, ReleaseVersion};

const RELEASE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<interprodb>
  <interpro id="IPR004086" type="Family">
    <name>K+ channel, inward rectifier, Kir1.1</name>
    <abstract>
      <p>Potassium channels are the most diverse group of ion channels
      <cite idref="PUB00000001"/>. Kir1.1 is found in the kidney
      (<db_xref db="PFAM" dbkey="PF01007"/>).</p>
    </abstract>
  </interpro>
  <interpro id="IPR005430" type="Family">
    <abstract><p>Fimbriae are hair-like surface appendages. They mediate adhesion.</p></abstract>
  </interpro>
</interprodb>
"#;

fn main() -> annotrace::Result<()> {
    let release = ReleaseVersion {
        database: DatabaseId::new("interpro")?,
        label: "98.0".into(),
        ordinal: 0,
        date: "2024-02-01".parse().expect("valid date"),
        date_estimated: false,
    };
    let mut parser = parse_release(RELEASE.as_bytes(), FormatKind::XmlAbstract, &release, &FormatOptions::default())?;
    for record in parser.by_ref() {
        let record = record?;
        println!("{}", record.record.accession);
        for block in &record.blocks {
            for raw in split_sentences(block.body()) {
                match NormalizedSentence::new(&raw) {
                    Ok(s) => println!("  {}", s.text()),
                    Err(e) => eprintln!("  skipped {raw:?}: {e}"),
                }
            }
        }
    }
    eprintln!("{:?}", parser.summary());
    Ok(())
}
