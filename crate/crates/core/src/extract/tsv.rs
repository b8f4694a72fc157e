//! `record-id<TAB>text` lines; consecutive lines with one id form a record.

use super::source::{Lines, Source};
use super::{make_record, Block, RawRecordText};
use crate::error::Result;
use crate::model::{DatabaseId, RecordId};

pub(crate) struct TsvParser<'a> {
    lines: Lines<'a>,
    db: DatabaseId,
    carry: Option<(RecordId, String)>,
}

impl<'a> TsvParser<'a> {
    pub(crate) fn new(source: Source<'a>, db: DatabaseId) -> Self {
        TsvParser {
            lines: Lines::new(source),
            db,
            carry: None,
        }
    }

    pub(crate) fn repair_stats(&self) -> (u64, u64) {
        self.lines.repair_stats()
    }

    pub(crate) fn next_record(&mut self, damaged: &mut u64) -> Result<Option<RawRecordText>> {
        let mut current: Option<RawRecordText> = self.carry.take().map(|(record, text)| RawRecordText {
            record,
            blocks: vec![Block { topic: None, text }],
        });

        while let Some((_, line)) = self.lines.next_line()? {
            if line.trim().is_empty() {
                continue;
            }
            let Some((id, text)) = line
                .split_once('\t')
                .and_then(|(id, text)| make_record(&self.db, id.trim()).map(|r| (r, text)))
            else {
                *damaged += 1;
                continue;
            };
            match current.as_mut() {
                Some(rec) if rec.record == id => rec.blocks.push(Block {
                    topic: None,
                    text: text.to_owned(),
                }),
                Some(_) => {
                    self.carry = Some((id, text.to_owned()));
                    return Ok(current);
                }
                None => {
                    current = Some(RawRecordText {
                        record: id,
                        blocks: vec![Block {
                            topic: None,
                            text: text.to_owned(),
                        }],
                    })
                }
            }
        }
        Ok(current)
    }
}
