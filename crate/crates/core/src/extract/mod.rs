//! Release-file parsing and sentence extraction.
//!
//! [`parse_release`] turns a release file into a stream of
//! [`RawRecordText`] with format markup removed; [`extract_release`] goes on
//! to split, normalize and de-duplicate sentences per record.

mod flat;
mod keyed;
pub mod markup;
pub mod normalize;
mod source;
pub mod split;
mod tsv;
mod xml;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatabaseId, Fingerprint, NormalizedSentence, RecordId, ReleaseVersion};

pub use markup::strip_markup;
pub use normalize::normalize;
pub use split::split_sentences;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatKind {
    LinePrefixedFlat,
    XmlAbstract,
    KeyedBlock,
    GenericTsv,
}

impl FormatKind {
    pub const ALL: [FormatKind; 4] = [
        FormatKind::LinePrefixedFlat,
        FormatKind::XmlAbstract,
        FormatKind::KeyedBlock,
        FormatKind::GenericTsv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormatKind::LinePrefixedFlat => "line-prefixed-flat",
            FormatKind::XmlAbstract => "xml-abstract",
            FormatKind::KeyedBlock => "keyed-block",
            FormatKind::GenericTsv => "generic-tsv",
        }
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormatKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormatKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Manifest(format!("unknown format {s:?}")))
    }
}

/// Per-format grammar knobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatOptions {
    /// Line code of annotation lines in line-prefixed files.
    pub line_prefix: String,
    /// Element names that delimit records in XML files.
    pub record_elements: Vec<String>,
    /// Attribute carrying the record id in XML files.
    pub id_attribute: String,
    /// Child elements whose text is annotation in XML files.
    pub text_elements: Vec<String>,
}

impl Default for FormatOptions {
    fn default() -> Self {
        FormatOptions {
            line_prefix: "CC".into(),
            record_elements: vec!["interpro".into(), "entry".into()],
            id_attribute: "id".into(),
            text_elements: vec!["abstract".into()],
        }
    }
}

/// Which blocks count as textual annotation.
///
/// Topics are the `-!- TOPIC:` names of line-prefixed files and the text
/// element names of XML files; keyed-block and TSV blocks carry no topic
/// and pass every filter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TopicFilter {
    #[default]
    All,
    Only(BTreeSet<String>),
}

impl TopicFilter {
    pub fn only<I, S>(topics: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TopicFilter::Only(topics.into_iter().map(|t| t.as_ref().to_uppercase()).collect())
    }

    pub fn accepts(&self, block: &Block, format: FormatKind) -> bool {
        match (self, &block.topic) {
            (TopicFilter::All, _) => true,
            (TopicFilter::Only(_), None) => {
                matches!(format, FormatKind::KeyedBlock | FormatKind::GenericTsv)
            }
            (TopicFilter::Only(set), Some(topic)) => set.contains(&topic.to_uppercase()),
        }
    }
}

/// One markup-free text block of a record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub topic: Option<String>,
    pub text: String,
}

impl Block {
    /// Text with a leading `TOPIC:` label removed.
    pub fn body(&self) -> &str {
        if let Some(topic) = &self.topic {
            if let Some(rest) = self.text.strip_prefix(topic.as_str()) {
                if let Some(rest) = rest.strip_prefix(':') {
                    return rest.trim_start();
                }
            }
        }
        &self.text
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRecordText {
    pub record: RecordId,
    pub blocks: Vec<Block>,
}

impl RawRecordText {
    pub fn texts(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.text.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseSummary {
    pub records: u64,
    pub bytes_read: u64,
    pub replacement_chars: u64,
    /// Records skipped because of recoverable damage.
    pub damaged: u64,
}

enum Grammar<'a> {
    Flat(flat::FlatParser<'a>),
    Xml(xml::XmlParser<'a>),
    Keyed(keyed::KeyedParser<'a>),
    Tsv(tsv::TsvParser<'a>),
}

/// Streaming record parser for one release file.
pub struct RecordParser<'a> {
    grammar: Grammar<'a>,
    summary: ParseSummary,
    failed: bool,
}

/// Opens `input` (plain or gzip) as a record stream in the given format.
pub fn parse_release<'a>(
    input: impl Read + 'a,
    format: FormatKind,
    release: &ReleaseVersion,
    options: &FormatOptions,
) -> Result<RecordParser<'a>> {
    let source = source::open_source(input)?;
    let db = release.database.clone();
    let grammar = match format {
        FormatKind::LinePrefixedFlat => {
            Grammar::Flat(flat::FlatParser::new(source, db, &options.line_prefix))
        }
        FormatKind::XmlAbstract => Grammar::Xml(xml::XmlParser::new(source, db, options)),
        FormatKind::KeyedBlock => Grammar::Keyed(keyed::KeyedParser::new(source, db)),
        FormatKind::GenericTsv => Grammar::Tsv(tsv::TsvParser::new(source, db)),
    };
    Ok(RecordParser {
        grammar,
        summary: ParseSummary::default(),
        failed: false,
    })
}

impl RecordParser<'_> {
    pub fn summary(&self) -> ParseSummary {
        let (bytes, replacements) = match &self.grammar {
            Grammar::Flat(p) => p.repair_stats(),
            Grammar::Xml(p) => p.repair_stats(),
            Grammar::Keyed(p) => p.repair_stats(),
            Grammar::Tsv(p) => p.repair_stats(),
        };
        ParseSummary {
            bytes_read: bytes,
            replacement_chars: replacements,
            ..self.summary
        }
    }
}

impl Iterator for RecordParser<'_> {
    type Item = Result<RawRecordText>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let damaged = &mut self.summary.damaged;
        let next = match &mut self.grammar {
            Grammar::Flat(p) => p.next_record(damaged),
            Grammar::Xml(p) => p.next_record(damaged),
            Grammar::Keyed(p) => p.next_record(damaged),
            Grammar::Tsv(p) => p.next_record(damaged),
        };
        match next {
            Ok(Some(record)) => {
                self.summary.records += 1;
                Some(Ok(record))
            }
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExtractStats {
    pub parse: ParseSummary,
    pub sentences: u64,
    /// Repeats of a sentence within one record, collapsed to one.
    pub duplicates_collapsed: u64,
    /// Sentences that normalized to nothing.
    pub empty_dropped: u64,
    /// Blocks rejected by the topic filter.
    pub blocks_filtered: u64,
}

/// Parse → strip → split → normalize pipeline yielding one item per
/// distinct sentence of each record.
pub struct Extraction<'a> {
    parser: RecordParser<'a>,
    format: FormatKind,
    filter: TopicFilter,
    pending: std::vec::IntoIter<(RecordId, NormalizedSentence)>,
    stats: ExtractStats,
}

pub fn extract_release<'a>(
    input: impl Read + 'a,
    format: FormatKind,
    release: &ReleaseVersion,
    options: &FormatOptions,
    filter: TopicFilter,
) -> Result<Extraction<'a>> {
    Ok(Extraction {
        parser: parse_release(input, format, release, options)?,
        format,
        filter,
        pending: Vec::new().into_iter(),
        stats: ExtractStats::default(),
    })
}

impl Extraction<'_> {
    pub fn stats(&self) -> ExtractStats {
        ExtractStats {
            parse: self.parser.summary(),
            ..self.stats
        }
    }

    fn sentences_of(&mut self, raw: RawRecordText) -> Vec<(RecordId, NormalizedSentence)> {
        let mut seen: HashSet<Fingerprint> = HashSet::new();
        let mut out = Vec::new();
        for block in &raw.blocks {
            if !self.filter.accepts(block, self.format) {
                self.stats.blocks_filtered += 1;
                continue;
            }
            for piece in split_sentences(block.body()) {
                match normalize(&piece) {
                    Ok(sentence) => {
                        if seen.insert(sentence.fingerprint()) {
                            out.push((raw.record.clone(), sentence));
                        } else {
                            self.stats.duplicates_collapsed += 1;
                        }
                    }
                    Err(Error::EmptySentence) => self.stats.empty_dropped += 1,
                    Err(_) => unreachable!("normalize only fails on empty input"),
                }
            }
        }
        self.stats.sentences += out.len() as u64;
        out
    }
}

impl Iterator for Extraction<'_> {
    type Item = Result<(RecordId, NormalizedSentence)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(item) = self.pending.next() {
                return Some(Ok(item));
            }
            match self.parser.next()? {
                Ok(raw) => self.pending = self.sentences_of(raw).into_iter(),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub(crate) fn structural(offset: u64, record: Option<&str>, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        record: record.map(str::to_owned),
        message: message.into(),
    }
}

pub(crate) fn make_record(db: &DatabaseId, accession: &str) -> Option<RecordId> {
    RecordId::new(db.clone(), accession).ok()
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use chrono::NaiveDate;

    pub fn release(db: &str) -> ReleaseVersion {
        ReleaseVersion {
            database: DatabaseId::new(db).unwrap(),
            label: "r1".into(),
            ordinal: 0,
            date: NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(),
            date_estimated: false,
        }
    }

    pub fn parse_all(input: &[u8], format: FormatKind) -> Result<(Vec<RawRecordText>, ParseSummary)> {
        let mut parser = parse_release(input, format, &release("x"), &FormatOptions::default())?;
        let records = parser.by_ref().collect::<Result<Vec<_>>>()?;
        Ok((records, parser.summary()))
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    const FLAT: &str = "ID   A1   Reviewed;\n\
CC   -!- FUNCTION: May be a transcription factor with important functions\n\
CC       in eye and nasal development.\n\
CC   -!- SIMILARITY: Belongs to the paired homeobox family.\n\
CC   ---------------------------------------------------------------------------\n\
CC   Copyrighted by the UniProt Consortium.\n\
//\n";

    fn extract(input: &str, format: FormatKind, filter: TopicFilter) -> Vec<(String, String)> {
        extract_release(input.as_bytes(), format, &release("x"), &FormatOptions::default(), filter)
            .unwrap()
            .map(|r| r.map(|(rec, s)| (rec.accession, s.into_text())))
            .collect::<Result<_>>()
            .unwrap()
    }

    #[test]
    fn topic_filter_selects_function_block() {
        let got = extract(FLAT, FormatKind::LinePrefixedFlat, TopicFilter::only(["FUNCTION"]));
        assert_eq!(
            got,
            [(
                "A1".to_owned(),
                "may be a transcription factor with important functions in eye and nasal development."
                    .to_owned()
            )]
        );
    }

    #[test]
    fn unfiltered_extraction_skips_copyright_lines() {
        let got = extract(FLAT, FormatKind::LinePrefixedFlat, TopicFilter::All);
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].1, "belongs to the paired homeobox family.");
    }

    #[test]
    fn repeated_sentence_in_one_record_collapses() {
        let input = "A1\tBinds DNA. Binds  dna.\nA1\tbinds DNA.\n";
        let mut ex = extract_release(
            input.as_bytes(),
            FormatKind::GenericTsv,
            &release("x"),
            &FormatOptions::default(),
            TopicFilter::All,
        )
        .unwrap();
        let got: Vec<_> = ex.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(ex.stats().duplicates_collapsed, 2);
    }

    #[test]
    fn record_with_only_empty_text_yields_nothing() {
        let input = "{PDOC1}\n{BEGIN}\n   \n{END}\n";
        assert!(extract(input, FormatKind::KeyedBlock, TopicFilter::All).is_empty());
    }

    #[test]
    fn rewrapping_continuation_lines_does_not_change_sentences() {
        let text = "May be a transcription factor with important functions in eye and nasal development. Binds DNA in E. coli cells.";
        let words: Vec<&str> = text.split(' ').collect();
        let mut expected = None;
        for width in [20, 35, 50, 80, 200] {
            let mut lines = vec![String::from("CC   -!- FUNCTION:")];
            for w in &words {
                let last = lines.last_mut().unwrap();
                if last.len() + w.len() + 1 > width {
                    lines.push(format!("CC       {w}"));
                } else {
                    last.push(' ');
                    last.push_str(w);
                }
            }
            let input = format!("ID   A1\n{}\n//\n", lines.join("\n"));
            let got = extract(&input, FormatKind::LinePrefixedFlat, TopicFilter::All);
            assert_eq!(got.len(), 2);
            match &expected {
                None => expected = Some(got),
                Some(e) => assert_eq!(&got, e, "width {width}"),
            }
        }
    }

    #[test]
    fn format_names_round_trip() {
        for k in FormatKind::ALL {
            assert_eq!(k.name().parse::<FormatKind>().unwrap(), k);
        }
        assert!("csv".parse::<FormatKind>().is_err());
    }
}
