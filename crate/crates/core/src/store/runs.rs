//! Fixed-width sorted run files and the per-release record table.
//!
//! Every file starts with an 8-byte magic, a little-endian `u32` format
//! version and a little-endian `u64` entry count. Run rows are big-endian so
//! byte order equals numeric order.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::marker::PhantomData;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Fingerprint;

pub(crate) const RUN_VERSION: u32 = 1;
const HEADER_LEN: u64 = 20;

pub(crate) const BY_SENTENCE_MAGIC: &[u8; 8] = b"ATRSENT\0";
pub(crate) const BY_RECORD_MAGIC: &[u8; 8] = b"ATRRECD\0";
pub(crate) const RECORDS_MAGIC: &[u8; 8] = b"ATRRECS\0";
pub(crate) const SEGMENT_MAGIC: &[u8; 8] = b"ATRTEXT\0";

/// A fixed-width row of a sorted run.
pub(crate) trait Row: Copy + Ord {
    const WIDTH: usize;
    const MAGIC: &'static [u8; 8];
    fn encode(&self, out: &mut [u8]);
    fn decode(bytes: &[u8]) -> Self;
}

/// `(sentence, record)` ordered by sentence first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct SentenceRow {
    pub sentence: Fingerprint,
    pub record: u32,
}

/// `(record, sentence)` ordered by record first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct RecordRow {
    pub record: u32,
    pub sentence: Fingerprint,
}

impl Row for SentenceRow {
    const WIDTH: usize = 20;
    const MAGIC: &'static [u8; 8] = BY_SENTENCE_MAGIC;
    fn encode(&self, out: &mut [u8]) {
        out[..16].copy_from_slice(&self.sentence.to_be_bytes());
        out[16..20].copy_from_slice(&self.record.to_be_bytes());
    }
    fn decode(b: &[u8]) -> Self {
        SentenceRow {
            sentence: Fingerprint::from_be_bytes(b[..16].try_into().unwrap()),
            record: u32::from_be_bytes(b[16..20].try_into().unwrap()),
        }
    }
}

impl Row for RecordRow {
    const WIDTH: usize = 20;
    const MAGIC: &'static [u8; 8] = BY_RECORD_MAGIC;
    fn encode(&self, out: &mut [u8]) {
        out[..4].copy_from_slice(&self.record.to_be_bytes());
        out[4..20].copy_from_slice(&self.sentence.to_be_bytes());
    }
    fn decode(b: &[u8]) -> Self {
        RecordRow {
            record: u32::from_be_bytes(b[..4].try_into().unwrap()),
            sentence: Fingerprint::from_be_bytes(b[4..20].try_into().unwrap()),
        }
    }
}

fn write_header(w: &mut impl Write, magic: &[u8; 8], count: u64) -> io::Result<()> {
    w.write_all(magic)?;
    w.write_all(&RUN_VERSION.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())
}

fn read_header(r: &mut impl Read, magic: &[u8; 8], path: &Path) -> Result<u64> {
    let mut head = [0u8; HEADER_LEN as usize];
    r.read_exact(&mut head).map_err(Error::io(path))?;
    let version = u32::from_le_bytes(head[8..12].try_into().unwrap());
    if &head[..8] != magic || version != RUN_VERSION {
        return Err(Error::Format {
            path: path.to_owned(),
            found: format!("{}/v{version}", String::from_utf8_lossy(&head[..8])),
        });
    }
    Ok(u64::from_le_bytes(head[12..20].try_into().unwrap()))
}

/// Writes `rows`, which must already be sorted and distinct.
pub(crate) fn write_run<T: Row>(path: &Path, rows: &[T], sync: bool) -> Result<()> {
    debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    let mut buf = vec![0u8; T::WIDTH];
    let mut write = |w: &mut BufWriter<File>| -> io::Result<()> {
        write_header(w, T::MAGIC, rows.len() as u64)?;
        for row in rows {
            row.encode(&mut buf);
            w.write_all(&buf)?;
        }
        w.flush()?;
        if sync {
            w.get_ref().sync_all()?;
        }
        Ok(())
    };
    write(&mut w).map_err(Error::io(path))
}

/// Streaming reader over a run file.
pub(crate) struct RunReader<T> {
    reader: BufReader<File>,
    remaining: u64,
    buf: Vec<u8>,
    path: std::path::PathBuf,
    _row: PhantomData<T>,
}

impl<T: Row> RunReader<T> {
    pub(crate) fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(Error::io(path))?;
        let mut reader = BufReader::with_capacity(256 * 1024, file);
        let remaining = read_header(&mut reader, T::MAGIC, path)?;
        Ok(RunReader {
            reader,
            remaining,
            buf: vec![0; T::WIDTH],
            path: path.to_owned(),
            _row: PhantomData,
        })
    }
}

impl<T: Row> Iterator for RunReader<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(
            self.reader
                .read_exact(&mut self.buf)
                .map(|_| T::decode(&self.buf))
                .map_err(Error::io(&self.path)),
        )
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

/// Record indices holding `sentence` in a by-sentence run, found by binary
/// search without reading the whole file.
pub(crate) fn lookup_sentence(path: &Path, sentence: Fingerprint) -> Result<Vec<u32>> {
    let mut file = File::open(path).map_err(Error::io(path))?;
    let count = read_header(&mut file, SentenceRow::MAGIC, path)?;
    let mut buf = [0u8; SentenceRow::WIDTH];
    let mut row_at = |i: u64| -> Result<SentenceRow> {
        file.seek(SeekFrom::Start(HEADER_LEN + i * SentenceRow::WIDTH as u64))
            .and_then(|_| file.read_exact(&mut buf))
            .map_err(Error::io(path))?;
        Ok(SentenceRow::decode(&buf))
    };
    let (mut lo, mut hi) = (0u64, count);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if row_at(mid)?.sentence < sentence {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let mut hits = Vec::new();
    let mut i = lo;
    while i < count {
        let row = row_at(i)?;
        if row.sentence != sentence {
            break;
        }
        hits.push(row.record);
        i += 1;
    }
    Ok(hits)
}

pub(crate) fn write_records(path: &Path, names: &[String], sync: bool) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        write_header(w, RECORDS_MAGIC, names.len() as u64)?;
        for name in names {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
        }
        w.flush()?;
        if sync {
            w.get_ref().sync_all()?;
        }
        Ok(())
    };
    write(&mut w).map_err(Error::io(path))
}

pub(crate) fn read_records(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut r = BufReader::new(file);
    let count = read_header(&mut r, RECORDS_MAGIC, path)?;
    let mut names = Vec::with_capacity(count as usize);
    for _ in 0..count {
        names.push(read_string(&mut r, path)?);
    }
    Ok(names)
}

fn read_string(r: &mut impl Read, path: &Path) -> Result<String> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(Error::io(path))?;
    let mut bytes = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut bytes).map_err(Error::io(path))?;
    String::from_utf8(bytes).map_err(|_| Error::Corrupt(format!("{}: invalid UTF-8", path.display())))
}

/// Sentence-text segment: `(fingerprint, text)` pairs sorted by fingerprint.
pub(crate) fn write_segment(path: &Path, entries: &[(Fingerprint, &str)], sync: bool) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        write_header(w, SEGMENT_MAGIC, entries.len() as u64)?;
        for (fp, text) in entries {
            w.write_all(&fp.to_be_bytes())?;
            w.write_all(&(text.len() as u32).to_le_bytes())?;
            w.write_all(text.as_bytes())?;
        }
        w.flush()?;
        if sync {
            w.get_ref().sync_all()?;
        }
        Ok(())
    };
    write(&mut w).map_err(Error::io(path))
}

pub(crate) fn read_segment(path: &Path) -> Result<Vec<(Fingerprint, String)>> {
    let file = File::open(path).map_err(Error::io(path))?;
    let mut r = BufReader::new(file);
    let count = read_header(&mut r, SEGMENT_MAGIC, path)?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut fp = [0u8; 16];
        r.read_exact(&mut fp).map_err(Error::io(path))?;
        out.push((Fingerprint::from_be_bytes(fp), read_string(&mut r, path)?));
    }
    Ok(out)
}
