//! XML abstract files (InterPro `interpro.xml` style).
//!
//! A record is any configured record element carrying the id attribute.
//! Each configured text child becomes one block: descendant tags are
//! dropped, their text kept, entities decoded.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::markup::decode_entities;
use super::source::Source;
use super::{make_record, structural, Block, FormatOptions, RawRecordText};
use crate::error::Result;
use crate::model::DatabaseId;

pub(crate) struct XmlParser<'a> {
    reader: Reader<Source<'a>>,
    buf: Vec<u8>,
    db: DatabaseId,
    record_elements: Vec<Vec<u8>>,
    id_attribute: String,
    text_elements: Vec<Vec<u8>>,
    depth: usize,
}

struct OpenRecord {
    id: Option<String>,
    start: u64,
    depth: usize,
    blocks: Vec<Block>,
    capture: Option<(String, usize, String)>,
}

impl<'a> XmlParser<'a> {
    pub(crate) fn new(source: Source<'a>, db: DatabaseId, options: &FormatOptions) -> Self {
        let mut reader = Reader::from_reader(source);
        reader.config_mut().check_end_names = true;
        XmlParser {
            reader,
            buf: Vec::new(),
            db,
            record_elements: options.record_elements.iter().map(|s| s.as_bytes().to_vec()).collect(),
            id_attribute: options.id_attribute.clone(),
            text_elements: options.text_elements.iter().map(|s| s.as_bytes().to_vec()).collect(),
            depth: 0,
        }
    }

    pub(crate) fn repair_stats(&self) -> (u64, u64) {
        let r = self.reader.get_ref().get_ref();
        (r.bytes_in(), r.replacements())
    }

    fn record_id(id_attribute: &str, e: &BytesStart<'_>) -> Option<String> {
        e.attributes()
            .flatten()
            .find(|a| a.key.as_ref() == id_attribute.as_bytes())
            .map(|a| decode_entities(&String::from_utf8_lossy(&a.value)).trim().to_owned())
            .filter(|id| !id.is_empty())
    }

    fn finish(db: &DatabaseId, rec: OpenRecord, damaged: &mut u64) -> Option<RawRecordText> {
        match rec.id.as_deref().and_then(|id| make_record(db, id)) {
            Some(record) => Some(RawRecordText {
                record,
                blocks: rec.blocks,
            }),
            None => {
                *damaged += 1;
                None
            }
        }
    }

    pub(crate) fn next_record(&mut self, damaged: &mut u64) -> Result<Option<RawRecordText>> {
        let mut open: Option<OpenRecord> = None;
        loop {
            self.buf.clear();
            let position = self.reader.buffer_position();
            let event = self.reader.read_event_into(&mut self.buf).map_err(|e| {
                structural(
                    self.reader.error_position(),
                    open.as_ref().and_then(|r| r.id.as_deref()),
                    e.to_string(),
                )
            })?;
            match event {
                Event::Start(e) => {
                    let name = e.local_name().as_ref().to_vec();
                    match open.as_mut() {
                        None if self.record_elements.contains(&name) => {
                            open = Some(OpenRecord {
                                id: Self::record_id(&self.id_attribute, &e),
                                start: position,
                                depth: self.depth,
                                blocks: Vec::new(),
                                capture: None,
                            });
                        }
                        Some(rec) if rec.capture.is_none() && self.text_elements.contains(&name) => {
                            let topic = String::from_utf8_lossy(&name).into_owned();
                            rec.capture = Some((topic, self.depth, String::new()));
                        }
                        _ => {}
                    }
                    self.depth += 1;
                }
                Event::Empty(e) => {
                    let name = e.local_name();
                    if open.is_none() && self.record_elements.iter().any(|r| r == name.as_ref()) {
                        let rec = OpenRecord {
                            id: Self::record_id(&self.id_attribute, &e),
                            start: position,
                            depth: self.depth,
                            blocks: Vec::new(),
                            capture: None,
                        };
                        if let Some(raw) = Self::finish(&self.db, rec, damaged) {
                            return Ok(Some(raw));
                        }
                    }
                }
                Event::Text(t) => {
                    if let Some((_, _, text)) = open.as_mut().and_then(|r| r.capture.as_mut()) {
                        text.push_str(&decode_entities(&String::from_utf8_lossy(&t)));
                    }
                }
                Event::CData(t) => {
                    if let Some((_, _, text)) = open.as_mut().and_then(|r| r.capture.as_mut()) {
                        text.push_str(&String::from_utf8_lossy(&t));
                    }
                }
                Event::End(_) => {
                    self.depth = self.depth.saturating_sub(1);
                    if let Some(rec) = open.as_mut() {
                        if rec.capture.as_ref().is_some_and(|(_, d, _)| *d == self.depth) {
                            let (topic, _, text) = rec.capture.take().unwrap_or_default();
                            rec.blocks.push(Block {
                                topic: Some(topic),
                                text,
                            });
                        }
                        if rec.depth == self.depth {
                            let rec = open.take().expect("record is open");
                            if let Some(raw) = Self::finish(&self.db, rec, damaged) {
                                return Ok(Some(raw));
                            }
                        }
                    }
                }
                Event::Eof => {
                    if let Some(rec) = open {
                        return Err(structural(
                            rec.start,
                            rec.id.as_deref(),
                            "unterminated record at end of input",
                        ));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}
