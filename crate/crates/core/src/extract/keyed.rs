//! Keyed-block files (PROSITE documentation style).
//!
//! ```text
//! {PDOC00001}
//! {PS00001; ASN_GLYCOSYLATION}
//! {BEGIN}
//! ...annotation paragraphs...
//! {END}
//! ```
//!
//! The first non-blank line after the previous `{END}` names the record.
//! Blank lines inside the body separate blocks.

use super::markup::strip_markup;
use super::source::{Lines, Source};
use super::{make_record, structural, Block, FormatKind, RawRecordText};
use crate::error::Result;
use crate::model::DatabaseId;

pub(crate) struct KeyedParser<'a> {
    lines: Lines<'a>,
    db: DatabaseId,
}

impl<'a> KeyedParser<'a> {
    pub(crate) fn new(source: Source<'a>, db: DatabaseId) -> Self {
        KeyedParser {
            lines: Lines::new(source),
            db,
        }
    }

    pub(crate) fn repair_stats(&self) -> (u64, u64) {
        self.lines.repair_stats()
    }

    pub(crate) fn next_record(&mut self, damaged: &mut u64) -> Result<Option<RawRecordText>> {
        let mut header: Option<Option<String>> = None;
        // (id, start offset, finished blocks, current paragraph)
        let mut body: Option<(Option<String>, u64, Vec<Block>, String)> = None;

        while let Some((offset, line)) = self.lines.next_line()? {
            let trimmed = line.trim();
            match body.as_mut() {
                None => match trimmed {
                    "{BEGIN}" => {
                        body = Some((header.take().flatten(), offset, Vec::new(), String::new()));
                    }
                    "{END}" => {
                        *damaged += 1;
                        header = None;
                    }
                    "" => {}
                    _ => {
                        header.get_or_insert_with(|| record_key(trimmed));
                    }
                },
                Some((id, _, blocks, para)) => match trimmed {
                    "{END}" => {
                        flush(blocks, para);
                        let record = id.as_deref().and_then(|id| make_record(&self.db, id));
                        let blocks = std::mem::take(blocks);
                        match record {
                            Some(record) => return Ok(Some(RawRecordText { record, blocks })),
                            None => {
                                *damaged += 1;
                                body = None;
                            }
                        }
                    }
                    "{BEGIN}" => {
                        return Err(structural(offset, id.as_deref(), "nested {BEGIN}"));
                    }
                    "" => flush(blocks, para),
                    _ => {
                        para.push_str(line);
                        para.push('\n');
                    }
                },
            }
        }

        if let Some((id, start, _, _)) = body {
            return Err(structural(start, id.as_deref(), "{BEGIN} without {END} at end of input"));
        }
        Ok(None)
    }
}

fn flush(blocks: &mut Vec<Block>, para: &mut String) {
    let text = strip_markup(para, FormatKind::KeyedBlock);
    para.clear();
    if !text.is_empty() {
        blocks.push(Block { topic: None, text });
    }
}

/// `{PDOC00001}` or `{PS00001; NAME}` → the leading key.
fn record_key(line: &str) -> Option<String> {
    let inner = line.trim_start_matches('{').trim_end_matches('}');
    inner
        .split(|c: char| c == ';' || c.is_whitespace())
        .next()
        .map(str::trim)
        .filter(|k| !k.is_empty())
        .map(str::to_owned)
}
