//! Large generic-tsv releases produced on the fly.
//!
//! Record `i` of release `t` holds `per_record` sentences whose numbers are
//! `(i * stride + j * step + t * shift) mod vocabulary` for `j` in
//! `0..per_record`. With `step` coprime to `vocabulary` and
//! `per_record <= vocabulary` the sentences of one record are distinct, so
//! every release holds exactly `records * per_record` occurrences.

use std::io::{self, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub releases: u32,
    pub records: u32,
    pub per_record: u32,
    pub vocabulary: u32,
}

impl ScaleSpec {
    /// Five releases of two million occurrences each.
    pub fn ten_million() -> Self {
        ScaleSpec {
            releases: 5,
            records: 400_000,
            per_record: 5,
            vocabulary: 1_000_003,
        }
    }

    pub fn occurrences_per_release(&self) -> u64 {
        self.records as u64 * self.per_record as u64
    }

    pub fn total_occurrences(&self) -> u64 {
        self.occurrences_per_release() * self.releases as u64
    }

    fn step(&self) -> u64 {
        (1..self.vocabulary as u64)
            .map(|k| self.vocabulary as u64 / 3 + k)
            .find(|s| gcd(*s, self.vocabulary as u64) == 1)
            .unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocabulary == 0 || self.per_record > self.vocabulary {
            return Err(Error::Generator("per_record must not exceed a nonzero vocabulary".into()));
        }
        Ok(())
    }

    /// Sentence numbers held by `record` in `release`.
    pub fn sentences(&self, release: u32, record: u32) -> impl Iterator<Item = u64> + '_ {
        let v = self.vocabulary as u64;
        let step = self.step();
        let base = (record as u64 * 7919 + release as u64 * 104_729) % v;
        (0..self.per_record as u64).map(move |j| (base + j * step) % v)
    }

    /// A reader producing the generic-tsv text of one release.
    pub fn release_reader(&self, release: u32) -> ReleaseReader<'_> {
        ReleaseReader {
            spec: self,
            release,
            record: 0,
            buf: Vec::new(),
            pos: 0,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub struct ReleaseReader<'a> {
    spec: &'a ScaleSpec,
    release: u32,
    record: u32,
    buf: Vec<u8>,
    pos: usize,
}

impl Read for ReleaseReader<'_> {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        use std::io::Write;
        while self.pos == self.buf.len() {
            if self.record == self.spec.records {
                return Ok(0);
            }
            self.buf.clear();
            self.pos = 0;
            write!(self.buf, "S{:07}\t", self.record)?;
            for (j, s) in self.spec.sentences(self.release, self.record).enumerate() {
                if j > 0 {
                    self.buf.push(b' ');
                }
                write!(self.buf, "synthetic sentence {s:07}.")?;
            }
            self.buf.push(b'\n');
            self.record += 1;
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn records_hold_distinct_sentences() {
        let spec = ScaleSpec {
            releases: 2,
            records: 50,
            per_record: 7,
            vocabulary: 30,
        };
        for t in 0..2 {
            for r in 0..50 {
                let s: HashSet<u64> = spec.sentences(t, r).collect();
                assert_eq!(s.len(), 7);
            }
        }
        let mut text = String::new();
        spec.release_reader(1).read_to_string(&mut text).unwrap();
        assert_eq!(text.lines().count(), 50);
        assert!(text.starts_with("S0000000\tsynthetic sentence "));
    }
}
