//! Per-release and per-lifetime reuse counts.
//!
//! `total` counts occurrences, so a sentence held by k records counts k
//! times. `unique` counts distinct sentences and `singleton` those held by
//! exactly one record.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{DatabaseId, Occurrence, ReleaseVersion};
use crate::store::Workspace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReleaseCounts {
    pub release: ReleaseVersion,
    pub total: u64,
    pub unique: u64,
    pub singleton: u64,
}

impl ReleaseCounts {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn unique_pct(&self) -> Percent {
        Percent::of(self.unique, self.total)
    }

    pub fn singleton_pct(&self) -> Percent {
        Percent::of(self.singleton, self.total)
    }

    fn checked(self) -> Result<Self> {
        let ok = self.singleton <= self.unique && self.unique <= self.total && (self.unique == 0) == (self.total == 0);
        if ok {
            Ok(self)
        } else {
            Err(Error::Corrupt(format!(
                "{}: counts violate singleton <= unique <= total ({}, {}, {})",
                self.release, self.singleton, self.unique, self.total
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LifetimeCounts {
    pub database: DatabaseId,
    pub total_unique: u64,
}

/// A percentage held in hundredths, rounded half-to-even.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(pub u32);

impl Percent {
    /// `part / whole` as a percentage; zero when `whole` is zero.
    pub fn of(part: u64, whole: u64) -> Self {
        if whole == 0 {
            return Percent(0);
        }
        let scaled = part as u128 * 10_000;
        let (q, r) = (scaled / whole as u128, scaled % whole as u128);
        let twice = 2 * r;
        let round_up = twice > whole as u128 || (twice == whole as u128 && q % 2 == 1);
        Percent((q + round_up as u128) as u32)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

/// Counts for one ingested release in a single pass over its sorted run.
pub fn release_counts(ws: &Workspace, release: &ReleaseVersion) -> Result<ReleaseCounts> {
    let (mut total, mut unique, mut singleton) = (0, 0, 0);
    for item in ws.sentence_multiplicities(release)? {
        let (_, n) = item?;
        total += n;
        unique += 1;
        singleton += (n == 1) as u64;
    }
    ReleaseCounts {
        release: release.clone(),
        total,
        unique,
        singleton,
    }
    .checked()
}

/// Distinct sentences over every ingested release of `db`.
pub fn lifetime_unique(ws: &Workspace, db: &DatabaseId) -> Result<LifetimeCounts> {
    let ingested: Vec<_> = ws.releases(db)?.into_iter().filter(|r| ws.is_ingested(r)).collect();
    if ingested.is_empty() {
        return Err(Error::NotFound(format!("{db} has no ingested releases")));
    }
    let streams = ingested
        .iter()
        .map(|r| ws.sentence_multiplicities(r))
        .collect::<Result<Vec<_>>>()?;
    let mut total_unique = 0;
    let mut last = None;
    for item in streams.into_iter().kmerge_by(|a, b| match (a, b) {
        (Err(_), _) => true,
        (_, Err(_)) => false,
        (Ok(x), Ok(y)) => x.0 < y.0,
    }) {
        let (fp, _) = item?;
        if last != Some(fp) {
            total_unique += 1;
            last = Some(fp);
        }
    }
    Ok(LifetimeCounts {
        database: db.clone(),
        total_unique,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReleaseSelector {
    #[default]
    Latest,
    All,
}

impl std::str::FromStr for ReleaseSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latest" => Ok(ReleaseSelector::Latest),
            "all" => Ok(ReleaseSelector::All),
            other => Err(Error::NotFound(format!("release selector {other:?} (expected latest or all)"))),
        }
    }
}

/// One row of a redundancy profile. `counts` is `None` when the selected
/// release is registered but not ingested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileRow {
    pub release: ReleaseVersion,
    pub counts: Option<ReleaseCounts>,
    pub lifetime_unique: Option<u64>,
}

/// Counts for the selected releases of each database, sorted by database
/// then ordinal.
pub fn redundancy_profile(ws: &Workspace, databases: &[DatabaseId], selector: ReleaseSelector) -> Result<Vec<ProfileRow>> {
    let mut rows = Vec::new();
    for db in databases.iter().sorted().dedup() {
        let releases = match selector {
            ReleaseSelector::All => ws.releases(db)?,
            ReleaseSelector::Latest => vec![ws.latest(db)?],
        };
        let lifetime = match lifetime_unique(ws, db) {
            Ok(l) => Some(l.total_unique),
            Err(Error::NotFound(_)) => None,
            Err(e) => return Err(e),
        };
        for release in releases {
            let counts = if ws.is_ingested(&release) {
                Some(release_counts(ws, &release)?)
            } else {
                None
            };
            rows.push(ProfileRow {
                release,
                counts,
                lifetime_unique: lifetime,
            });
        }
    }
    Ok(rows)
}

/// Counts from a fully materialized occurrence list, with no reliance on
/// sort order. Used to cross-check [`release_counts`].
pub fn recount(occurrences: impl IntoIterator<Item = Occurrence>) -> (u64, u64, u64) {
    let mut per_sentence: HashMap<_, u64> = HashMap::new();
    let mut total = 0;
    for o in occurrences {
        total += 1;
        *per_sentence.entry(o.sentence).or_default() += 1;
    }
    let singleton = per_sentence.values().filter(|&&n| n == 1).count() as u64;
    (total, per_sentence.len() as u64, singleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;
    use crate::model::{NormalizedSentence, RecordId};
    use crate::store::ReleaseSpec;
    use proptest::prelude::*;

    fn x() -> DatabaseId {
        DatabaseId::new("x").unwrap()
    }

    fn toy() -> (tempfile::TempDir, Workspace) {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        Fixture::toy().load(&mut ws).unwrap();
        (dir, ws)
    }

    #[test]
    fn toy_second_release_counts() {
        let (_d, ws) = toy();
        let c = release_counts(&ws, &ws.release_at(&x(), 1).unwrap()).unwrap();
        assert_eq!((c.total, c.unique, c.singleton), (3, 2, 1));
        assert_eq!(c.unique_pct().to_string(), "66.67");
        assert_eq!(c.singleton_pct().to_string(), "33.33");
    }

    #[test]
    fn toy_first_and_latest_counts() {
        let (_d, ws) = toy();
        let c0 = release_counts(&ws, &ws.release_at(&x(), 0).unwrap()).unwrap();
        assert_eq!((c0.total, c0.unique, c0.singleton), (3, 3, 3));
        let c2 = release_counts(&ws, &ws.latest(&x()).unwrap()).unwrap();
        assert_eq!((c2.total, c2.unique, c2.singleton), (3, 3, 3));
    }

    #[test]
    fn toy_lifetime_unique_is_four() {
        let (_d, ws) = toy();
        assert_eq!(lifetime_unique(&ws, &x()).unwrap().total_unique, 4);
    }

    #[test]
    fn empty_release_counts_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        let v = ws
            .register_database(&x(), None, &[ReleaseSpec::new("v0", "2001-01-01".parse().unwrap())])
            .unwrap();
        ws.ingest(&v[0], std::iter::empty()).unwrap();
        let c = release_counts(&ws, &v[0]).unwrap();
        assert_eq!((c.total, c.unique, c.singleton), (0, 0, 0));
        assert!(c.is_empty());
        assert_eq!(c.unique_pct(), Percent(0));
        let profile = redundancy_profile(&ws, &[x()], ReleaseSelector::Latest).unwrap();
        assert_eq!(profile[0].lifetime_unique, Some(0));
    }

    #[test]
    fn fully_redundant_release() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        let v = ws
            .register_database(&x(), None, &[ReleaseSpec::new("v0", "2001-01-01".parse().unwrap())])
            .unwrap();
        let s = NormalizedSentence::new("everywhere.").unwrap();
        let occ = (0..3).map(|i| Ok((RecordId::new(x(), format!("R{i}")).unwrap(), s.clone())));
        ws.ingest(&v[0], occ).unwrap();
        let c = release_counts(&ws, &v[0]).unwrap();
        assert_eq!(c.unique_pct().to_string(), "33.33");
        assert_eq!(c.singleton_pct().to_string(), "0.00");
    }

    #[test]
    fn uningested_selection_is_reported_per_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        let toy = Fixture::toy();
        toy.load_in_order(&mut ws, &[(x(), 0)]).unwrap();
        let rows = redundancy_profile(&ws, &[x()], ReleaseSelector::All).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].counts.is_some());
        assert!(rows[1].counts.is_none() && rows[2].counts.is_none());
        assert!(matches!(
            lifetime_unique(&ws, &DatabaseId::new("y").unwrap()),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn percent_rounds_half_to_even() {
        assert_eq!(Percent::of(2, 3).to_string(), "66.67");
        assert_eq!(Percent::of(1, 3).to_string(), "33.33");
        // 1/8 = 12.5% exactly, 1/16 = 6.25%, 1/32 = 3.125% -> 3.12, 3/32 = 9.375% -> 9.38
        assert_eq!(Percent::of(1, 8).to_string(), "12.50");
        assert_eq!(Percent::of(1, 32).to_string(), "3.12");
        assert_eq!(Percent::of(3, 32).to_string(), "9.38");
        assert_eq!(Percent::of(5, 5).to_string(), "100.00");
        assert_eq!(Percent::of(0, 0), Percent(0));
    }

    proptest! {
        #[test]
        fn percent_matches_exact_rational_rounding(part in 0u64..10_000, extra in 0u64..10_000) {
            let whole = part + extra;
            prop_assume!(whole > 0);
            let p = Percent::of(part, whole).0 as u128;
            // |p/100 - 100 part/whole| <= 1/200, with ties going to even p.
            let lhs = p * whole as u128;
            let exact = part as u128 * 10_000;
            let diff2 = (2 * lhs).abs_diff(2 * exact);
            prop_assert!(diff2 <= whole as u128);
            if diff2 == whole as u128 {
                prop_assert_eq!(p % 2, 0);
            }
        }
    }
}
