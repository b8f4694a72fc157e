//! Line-prefixed flat files (UniProtKB `.dat` style).
//!
//! Records run from an `ID` line to a `//` line. Annotation lines carry the
//! configured two-letter code; `-!- TOPIC:` opens a block, other lines
//! continue it, and a `---` rule closes it (the copyright trailer that
//! follows is ignored).

use super::markup::strip_prefixed_lines;
use super::source::{Lines, Source};
use super::{make_record, structural, Block, RawRecordText};
use crate::error::Result;
use crate::model::DatabaseId;

pub(crate) struct FlatParser<'a> {
    lines: Lines<'a>,
    db: DatabaseId,
    prefix: String,
}

struct OpenRecord {
    id: Option<String>,
    start: u64,
    blocks: Vec<Block>,
    block: Option<(Option<String>, String)>,
    muted: bool,
}

impl OpenRecord {
    fn close_block(&mut self, prefix: &str) {
        if let Some((topic, raw)) = self.block.take() {
            let text = strip_prefixed_lines(&raw, Some(prefix));
            if !text.is_empty() {
                self.blocks.push(Block { topic, text });
            }
        }
    }
}

impl<'a> FlatParser<'a> {
    pub(crate) fn new(source: Source<'a>, db: DatabaseId, prefix: &str) -> Self {
        FlatParser {
            lines: Lines::new(source),
            db,
            prefix: prefix.to_owned(),
        }
    }

    pub(crate) fn repair_stats(&self) -> (u64, u64) {
        self.lines.repair_stats()
    }

    pub(crate) fn next_record(&mut self, damaged: &mut u64) -> Result<Option<RawRecordText>> {
        let mut open: Option<OpenRecord> = None;
        let mut orphan = false;

        while let Some((offset, line)) = self.lines.next_line()? {
            if line.trim_end() == "//" {
                match open.take() {
                    Some(mut rec) => {
                        rec.close_block(&self.prefix);
                        match rec.id.as_deref().and_then(|id| make_record(&self.db, id)) {
                            Some(record) => {
                                return Ok(Some(RawRecordText {
                                    record,
                                    blocks: rec.blocks,
                                }))
                            }
                            None => *damaged += 1,
                        }
                    }
                    None if orphan => *damaged += 1,
                    None => {}
                }
                orphan = false;
                continue;
            }

            if let Some(rest) = line_code(line, "ID") {
                if let Some(rec) = &open {
                    return Err(structural(
                        offset,
                        rec.id.as_deref(),
                        "new ID line before the record's // terminator",
                    ));
                }
                open = Some(OpenRecord {
                    id: rest.split_whitespace().next().map(str::to_owned),
                    start: offset,
                    blocks: Vec::new(),
                    block: None,
                    muted: false,
                });
                orphan = false;
                continue;
            }

            let Some(rec) = open.as_mut() else {
                orphan |= !line.trim().is_empty();
                continue;
            };
            let Some(content) = line_code(line, &self.prefix) else {
                continue;
            };
            let content = content.trim_start();
            if let Some(topic_line) = content.strip_prefix("-!-") {
                rec.close_block(&self.prefix);
                rec.muted = false;
                let topic = topic_line
                    .split_once(':')
                    .map(|(t, _)| t.trim().to_owned())
                    .filter(|t| !t.is_empty());
                rec.block = Some((topic, format!("{line}\n")));
            } else if content.starts_with("---") {
                rec.close_block(&self.prefix);
                rec.muted = true;
            } else if !rec.muted {
                let (_, raw) = rec.block.get_or_insert_with(|| (None, String::new()));
                raw.push_str(line);
                raw.push('\n');
            }
        }

        if let Some(rec) = open {
            return Err(structural(
                rec.start,
                rec.id.as_deref(),
                "unterminated record at end of input",
            ));
        }
        if orphan {
            *damaged += 1;
        }
        Ok(None)
    }
}

/// Content after `code` when `line` starts with that line code.
fn line_code<'l>(line: &'l str, code: &str) -> Option<&'l str> {
    let rest = line.strip_prefix(code)?;
    (rest.is_empty() || rest.starts_with([' ', '\t'])).then_some(rest)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::parse_all;
    use super::super::FormatKind;
    use crate::Error;
    use std::io::{Cursor, Read as _};

    #[test]
    fn parses_minimal_record() {
        let input = b"ID A1\nCC -!- FUNCTION: Binds DNA.\n//\n";
        let (recs, summary) = parse_all(input, FormatKind::LinePrefixedFlat).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].record.accession, "A1");
        assert_eq!(recs[0].texts(), ["FUNCTION: Binds DNA."]);
        assert_eq!(recs[0].blocks[0].topic.as_deref(), Some("FUNCTION"));
        assert_eq!(summary.records, 1);
        assert_eq!(summary.bytes_read, input.len() as u64);
    }

    #[test]
    fn empty_input_has_no_records() {
        let (recs, summary) = parse_all(b"", FormatKind::LinePrefixedFlat).unwrap();
        assert!(recs.is_empty());
        assert_eq!(summary.records, 0);
    }

    #[test]
    fn unterminated_record_reports_offset_and_id() {
        let err = parse_all(b"ID A1\n//\nID B2\nCC -!- X: y.\n", FormatKind::LinePrefixedFlat).unwrap_err();
        match err {
            Error::Parse { offset, record, .. } => {
                assert_eq!(offset, 9);
                assert_eq!(record.as_deref(), Some("B2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn record_without_id_is_skipped_and_counted() {
        let input = b"CC -!- FUNCTION: lost.\n//\nID   \nCC -!- A: b.\n//\nID B2\n//\n";
        let (recs, summary) = parse_all(input, FormatKind::LinePrefixedFlat).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].record.accession, "B2");
        assert!(recs[0].blocks.is_empty());
        assert_eq!(summary.damaged, 2);
    }

    #[test]
    fn other_line_codes_are_ignored() {
        let input = b"ID A1\nDE   RecName: Full=Thing;\nCCX not a comment\nCC   -!- FUNCTION: Kept.\n//\n";
        let (recs, _) = parse_all(input, FormatKind::LinePrefixedFlat).unwrap();
        assert_eq!(recs[0].texts(), ["FUNCTION: Kept."]);
    }

    #[test]
    fn chunked_input_parses_identically() {
        let input: &[u8] = b"ID A1 x\nCC -!- FUNCTION: Binds DNA.\nCC     More text.\n//\nID B2\nCC   -!- CAUTION: Odd \xff byte.\n//\n";
        let whole = parse_all(input, FormatKind::LinePrefixedFlat).unwrap();
        for cut in 0..input.len() {
            let mut parser = super::super::parse_release(
                Cursor::new(&input[..cut]).chain(Cursor::new(&input[cut..])),
                FormatKind::LinePrefixedFlat,
                &super::super::test_support::release("x"),
                &Default::default(),
            )
            .unwrap();
            let recs: Vec<_> = parser.by_ref().collect::<crate::Result<_>>().unwrap();
            assert_eq!(recs, whole.0, "cut at {cut}");
            assert_eq!(parser.summary(), whole.1);
        }
        assert_eq!(whole.1.replacement_chars, 1);
    }
}
