use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::DatabaseId;

use super::corpus::{CorpusDatabase, PresenceCell, PresenceCorpus};

/// Upper bounds for [`random_corpus`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallBounds {
    pub databases: u32,
    /// Records over all databases.
    pub records: u32,
    pub releases: u32,
    pub sentences: u32,
}

impl Default for SmallBounds {
    fn default() -> Self {
        SmallBounds {
            databases: 3,
            records: 20,
            releases: 6,
            sentences: 200,
        }
    }
}

/// A small random corpus. Dates are drawn from a coarse grid so that ties
/// within and across databases are common.
pub fn random_corpus(seed: u64, bounds: SmallBounds) -> PresenceCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_dbs = rng.gen_range(1..=bounds.databases.max(1));
    let mut records_left = bounds.records.max(n_dbs);
    let sentences = rng.gen_range(1..=bounds.sentences.max(1));
    // A small active pool makes sharing likely; the rest stay rare.
    let pool = rng.gen_range(1..=sentences.min(12));
    let density = rng.gen_range(0.05..0.6);
    let base = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");

    let mut corpus = PresenceCorpus {
        sentences: (0..sentences).map(PresenceCorpus::sentence_text).collect(),
        ..PresenceCorpus::default()
    };
    for d in 0..n_dbs {
        let share = if d + 1 == n_dbs {
            records_left
        } else {
            rng.gen_range(1..=records_left - (n_dbs - d - 1))
        };
        records_left -= share;
        let records = rng.gen_range(1..=share);
        let releases = rng.gen_range(1..=bounds.releases.max(1));
        let mut day = rng.gen_range(0..4u64) * 90;
        let mut dates = Vec::new();
        for _ in 0..releases {
            dates.push(base + Days::new(day));
            day += rng.gen_range(0..3u64) * 90;
        }
        let epoch = rng.gen_bool(0.3).then(|| dates[0] - Days::new(rng.gen_range(1..400)));
        corpus.databases.push(CorpusDatabase {
            name: DatabaseId::new(&format!("db{d}")).expect("valid name"),
            epoch,
            releases: dates.iter().enumerate().map(|(i, d)| (format!("r{i}"), *d)).collect(),
            records: (0..records).map(PresenceCorpus::record_name).collect(),
        });
        let mut cells = BTreeSet::new();
        for record in 0..records {
            for release in 0..releases {
                for sentence in 0..pool {
                    if rng.gen_bool(density) {
                        cells.insert((release, record, sentence));
                    }
                }
                if rng.gen_bool(0.2) {
                    cells.insert((release, record, rng.gen_range(0..sentences)));
                }
            }
        }
        corpus.cells.extend(cells.into_iter().map(|(release, record, sentence)| PresenceCell {
            db: d as u16,
            release,
            record,
            sentence,
        }));
    }
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stays_within_bounds_and_is_deterministic() {
        for seed in 0..200 {
            let c = random_corpus(seed, SmallBounds::default());
            assert!(c.databases.len() <= 3);
            assert!(c.databases.iter().map(|d| d.records.len()).sum::<usize>() <= 20);
            assert!(c.databases.iter().all(|d| !d.releases.is_empty() && d.releases.len() <= 6));
            assert!(c.sentences.len() <= 200);
            assert!(c.databases.iter().all(|d| d.dates().windows(2).all(|w| w[0] <= w[1])));
            assert_eq!(c, random_corpus(seed, SmallBounds::default()));
        }
    }
}
