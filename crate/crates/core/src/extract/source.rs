//! Byte-level input plumbing: gzip sniffing and lossy UTF-8 repair.

use std::io::{self, BufRead, BufReader, Cursor, Read};

use flate2::read::MultiGzDecoder;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];
const REPLACEMENT: &[u8] = "\u{FFFD}".as_bytes();

pub(crate) type Source<'a> = BufReader<Utf8Repair<Box<dyn Read + 'a>>>;

/// Wraps raw input, transparently gunzipping when it starts with the gzip
/// magic bytes.
pub(crate) fn open_source<'a>(mut input: impl Read + 'a) -> io::Result<Source<'a>> {
    let mut head = Vec::with_capacity(2);
    (&mut input).take(2).read_to_end(&mut head)?;
    let gz = head == GZIP_MAGIC;
    let rejoined = Cursor::new(head).chain(input);
    let inner: Box<dyn Read + 'a> = if gz {
        Box::new(MultiGzDecoder::new(rejoined))
    } else {
        Box::new(rejoined)
    };
    Ok(BufReader::with_capacity(64 * 1024, Utf8Repair::new(inner)))
}

/// Passes valid UTF-8 through and replaces each invalid sequence with
/// U+FFFD, counting replacements. Sequences split across reads are
/// reassembled before judging them.
pub(crate) struct Utf8Repair<R> {
    inner: R,
    raw: Vec<u8>,
    pending: Vec<u8>,
    out: Vec<u8>,
    out_pos: usize,
    eof: bool,
    bytes_in: u64,
    replacements: u64,
}

impl<R: Read> Utf8Repair<R> {
    fn new(inner: R) -> Self {
        Utf8Repair {
            inner,
            raw: vec![0; 64 * 1024],
            pending: Vec::new(),
            out: Vec::new(),
            out_pos: 0,
            eof: false,
            bytes_in: 0,
            replacements: 0,
        }
    }

    pub(crate) fn bytes_in(&self) -> u64 {
        self.bytes_in
    }

    pub(crate) fn replacements(&self) -> u64 {
        self.replacements
    }

    fn refill(&mut self) -> io::Result<()> {
        self.out.clear();
        self.out_pos = 0;
        while self.out.is_empty() && !self.eof {
            let n = self.inner.read(&mut self.raw)?;
            self.bytes_in += n as u64;
            if n == 0 {
                self.eof = true;
            }
            self.pending.extend_from_slice(&self.raw[..n]);
            let consumed = repair(&self.pending, self.eof, &mut self.out, &mut self.replacements);
            self.pending.drain(..consumed);
        }
        Ok(())
    }
}

/// Appends the repaired prefix of `input` to `out` and returns how many
/// input bytes were consumed; an incomplete trailing sequence is left
/// unconsumed unless `eof`.
fn repair(input: &[u8], eof: bool, out: &mut Vec<u8>, replacements: &mut u64) -> usize {
    let mut rest = input;
    loop {
        match std::str::from_utf8(rest) {
            Ok(s) => {
                out.extend_from_slice(s.as_bytes());
                return input.len();
            }
            Err(e) => {
                let valid = e.valid_up_to();
                out.extend_from_slice(&rest[..valid]);
                match e.error_len() {
                    Some(bad) => {
                        out.extend_from_slice(REPLACEMENT);
                        *replacements += 1;
                        rest = &rest[valid + bad..];
                    }
                    None if eof => {
                        out.extend_from_slice(REPLACEMENT);
                        *replacements += 1;
                        return input.len();
                    }
                    None => return input.len() - (rest.len() - valid),
                }
            }
        }
    }
}

impl<R: Read> Read for Utf8Repair<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.out_pos == self.out.len() {
            self.refill()?;
        }
        let available = &self.out[self.out_pos..];
        let n = available.len().min(buf.len());
        buf[..n].copy_from_slice(&available[..n]);
        self.out_pos += n;
        Ok(n)
    }
}

/// Line iterator over a repaired source that tracks byte offsets.
pub(crate) struct Lines<'a> {
    source: Source<'a>,
    buf: String,
    offset: u64,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(source: Source<'a>) -> Self {
        Lines {
            source,
            buf: String::new(),
            offset: 0,
        }
    }

    /// Next line without its terminator, with the byte offset where it starts.
    pub(crate) fn next_line(&mut self) -> io::Result<Option<(u64, &str)>> {
        self.buf.clear();
        let n = self.source.read_line(&mut self.buf)?;
        if n == 0 {
            return Ok(None);
        }
        let start = self.offset;
        self.offset += n as u64;
        let line = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
        let line = line.strip_suffix('\r').unwrap_or(line);
        Ok(Some((start, line)))
    }

    pub(crate) fn repair_stats(&self) -> (u64, u64) {
        let r = self.source.get_ref();
        (r.bytes_in(), r.replacements())
    }
}
