//! Sharing and propagation of sentences between databases.
//!
//! Databases can be merged into named groups (Swiss-Prot and TrEMBL as
//! UniProtKB, say). A database outside every merge group forms a group of
//! its own, named after it.
//!
//! Release dates are upper bounds: a sentence first seen at release `t`
//! entered at some point in `[date(t-1), date(t)]`, with the database epoch
//! standing in for `date(-1)`. Comparisons between databases use these
//! closed intervals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatabaseId, DateInterval, Fingerprint, RecordId};
use crate::store::{Scope, SentencePresence, Workspace};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MergeGroup {
    pub name: String,
    pub members: Vec<DatabaseId>,
}

impl MergeGroup {
    pub fn new(name: &str, members: &[DatabaseId]) -> Result<Self> {
        // Group names share the database name rules.
        let name = DatabaseId::new(name)?.as_str().to_owned();
        if members.is_empty() {
            return Err(Error::Registry(format!("group {name} has no members")));
        }
        let mut members = members.to_vec();
        members.sort();
        members.dedup();
        Ok(MergeGroup { name, members })
    }

    fn singleton(db: &DatabaseId) -> Self {
        MergeGroup {
            name: db.as_str().to_owned(),
            members: vec![db.clone()],
        }
    }
}

/// `name=db1,db2`.
impl FromStr for MergeGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, members) = s
            .split_once('=')
            .ok_or_else(|| Error::Registry(format!("merge group {s:?} is not name=db1,db2")))?;
        let members = members
            .split(',')
            .map(|m| DatabaseId::new(m.trim()))
            .collect::<Result<Vec<_>>>()?;
        MergeGroup::new(name.trim(), &members)
    }
}

impl fmt::Display for MergeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<&str> = self.members.iter().map(DatabaseId::as_str).collect();
        write!(f, "{}={}", self.name, members.join(","))
    }
}

/// Complete assignment of registered databases to groups, sorted by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grouping {
    groups: Vec<MergeGroup>,
}

impl Grouping {
    /// Completes `merges` with singleton groups for every other registered
    /// database.
    pub fn resolve(ws: &Workspace, merges: &[MergeGroup]) -> Result<Self> {
        let registered: BTreeSet<DatabaseId> = ws.databases().into_iter().collect();
        let mut assigned: BTreeSet<&DatabaseId> = BTreeSet::new();
        for g in merges {
            for m in &g.members {
                if !registered.contains(m) {
                    return Err(Error::NotFound(format!("database {m} in group {}", g.name)));
                }
                if !assigned.insert(m) {
                    return Err(Error::Registry(format!("database {m} is in more than one group")));
                }
            }
        }
        let mut groups: Vec<MergeGroup> = merges.to_vec();
        groups.extend(registered.iter().filter(|d| !assigned.contains(d)).map(MergeGroup::singleton));
        groups.sort();
        if let Some(w) = groups.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(Error::Registry(format!("group name {} is used twice", w[0].name)));
        }
        Ok(Grouping { groups })
    }

    pub fn groups(&self) -> &[MergeGroup] {
        &self.groups
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    fn databases(&self) -> Vec<DatabaseId> {
        self.groups.iter().flat_map(|g| g.members.iter().cloned()).collect()
    }

    /// Group index of each database position in a scope built from [`Self::databases`].
    fn scope_groups(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| std::iter::repeat_n(i, g.members.len()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinationRow {
    /// Group names, sorted.
    pub combination: Vec<String>,
    pub count: u64,
}

impl CombinationRow {
    pub fn label(&self) -> String {
        self.combination.join(";")
    }
}

/// Each distinct sentence assigned to the exact set of groups it has ever
/// appeared in. Sorted by count descending, then combination.
pub fn combination_partition(ws: &Workspace, merges: &[MergeGroup]) -> Result<Vec<CombinationRow>> {
    let grouping = Grouping::resolve(ws, merges)?;
    let dbs = grouping.databases();
    if !dbs.iter().any(|d| ws.releases(d).is_ok_and(|rs| rs.iter().any(|r| ws.is_ingested(r)))) {
        return Err(Error::NotFound("no ingested releases in the workspace".into()));
    }
    let to_group = grouping.scope_groups();
    let scope = ws.scope(&dbs)?;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for presence in scope.sentences()? {
        let presence = presence?;
        let mut key: Vec<usize> = presence.cells.iter().map(|c| to_group[c.db as usize]).collect();
        key.dedup();
        *counts.entry(key).or_default() += 1;
    }
    let mut rows: Vec<CombinationRow> = counts
        .into_iter()
        .map(|(key, count)| CombinationRow {
            combination: key.into_iter().map(|g| grouping.groups[g].name.clone()).collect(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label().cmp(&b.label())));
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Appears,
    Disappears,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Appears => "appears",
            EventKind::Disappears => "disappears",
        })
    }
}

/// A change of presence in one record, dated by the release that shows it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CrossEvent {
    pub date: NaiveDate,
    pub interval: DateInterval,
    pub group: String,
    pub record: RecordId,
    pub kind: EventKind,
    pub release: String,
}

/// Presence of one record at one release.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresencePoint {
    pub release: String,
    pub date: NaiveDate,
    pub present: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossTimeline {
    pub sentence: Fingerprint,
    pub text: String,
    /// group → record → one point per ingested release of its database.
    pub groups: BTreeMap<String, BTreeMap<RecordId, Vec<PresencePoint>>>,
    /// Sorted by date.
    pub events: Vec<CrossEvent>,
}

/// Every record holding `sentence` at any time, across all groups, with
/// a date-sorted event list.
pub fn cross_timeline(ws: &Workspace, merges: &[MergeGroup], sentence: Fingerprint) -> Result<CrossTimeline> {
    let grouping = Grouping::resolve(ws, merges)?;
    let timeline = ws.timeline(sentence)?;
    let text = ws.sentence_text(sentence).unwrap_or_default().to_owned();
    let mut groups: BTreeMap<String, BTreeMap<RecordId, Vec<PresencePoint>>> = BTreeMap::new();
    let mut events = Vec::new();
    for group in grouping.groups() {
        for db in &group.members {
            let Some(records) = timeline.records(db) else { continue };
            let releases = ws.releases(db)?;
            let epoch = ws.epoch(db)?;
            let dates: Vec<NaiveDate> = releases.iter().map(|r| r.date).collect();
            for (acc, ordinals) in records {
                let record = RecordId::new(db.clone(), acc.clone())?;
                let mut points = Vec::new();
                let mut previous: Option<bool> = None;
                for r in releases.iter().filter(|r| ws.is_ingested(r)) {
                    let present = ordinals.contains(&r.ordinal);
                    points.push(PresencePoint {
                        release: r.label.clone(),
                        date: r.date,
                        present,
                    });
                    let kind = match (previous, present) {
                        (None | Some(false), true) => Some(EventKind::Appears),
                        (Some(true), false) => Some(EventKind::Disappears),
                        _ => None,
                    };
                    if let Some(kind) = kind {
                        let interval = crate::model::release_interval(&dates, epoch, r.ordinal);
                        events.push(CrossEvent {
                            date: r.date,
                            interval,
                            group: group.name.clone(),
                            record: record.clone(),
                            kind,
                            release: r.label.clone(),
                        });
                    }
                    previous = Some(present);
                }
                groups.entry(group.name.clone()).or_default().insert(record, points);
            }
        }
    }
    events.sort();
    Ok(CrossTimeline {
        sentence,
        text,
        groups,
        events,
    })
}

/// One plotting series: a record's presence as (date, 0/1) steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepSeries {
    pub group: String,
    pub record: RecordId,
    pub steps: Vec<(NaiveDate, u8)>,
}

/// Chart-ready series, one per record, in group then record order.
pub fn step_series(timeline: &CrossTimeline) -> Vec<StepSeries> {
    timeline
        .groups
        .iter()
        .flat_map(|(group, records)| {
            records.iter().map(move |(record, points)| StepSeries {
                group: group.clone(),
                record: record.clone(),
                steps: points.iter().map(|p| (p.date, p.present as u8)).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    /// The origin's first-seen interval ends before the destination's begins.
    DateOrdered,
    Overlapping,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::DateOrdered => "date-ordered",
            Confidence::Overlapping => "overlapping",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Destination {
    pub group: String,
    pub first_seen: DateInterval,
    pub confidence: Confidence,
}

/// Heuristic missing-origin candidate spanning groups.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CrossInstance {
    pub sentence: Fingerprint,
    pub origin: String,
    pub origin_first_seen: DateInterval,
    /// From the last release holding the sentence to the first without it.
    pub origin_last_seen: DateInterval,
    pub destinations: Vec<Destination>,
    /// Date-ordered only when every destination is.
    pub confidence: Confidence,
}

/// Per-group facts about one sentence.
#[derive(Clone, Copy, Debug)]
struct GroupFacts {
    first: DateInterval,
    last: DateInterval,
    in_latest: bool,
}

impl GroupFacts {
    fn of_database(dates: &[NaiveDate], epoch: NaiveDate, first: u32, last: u32) -> Self {
        let last_date = dates[last as usize];
        GroupFacts {
            first: crate::model::release_interval(dates, epoch, first),
            last: DateInterval {
                start: last_date,
                end: dates.get(last as usize + 1).copied().unwrap_or(last_date),
            },
            in_latest: last as usize + 1 == dates.len(),
        }
    }

    /// Folds a member database into its group: earliest first sighting,
    /// latest last sighting.
    fn combine(slot: &mut Option<GroupFacts>, f: GroupFacts) {
        *slot = Some(match *slot {
            None => f,
            Some(g) => GroupFacts {
                first: if (f.first.end, f.first.start) < (g.first.end, g.first.start) {
                    f.first
                } else {
                    g.first
                },
                last: if (f.last.start, f.last.end) > (g.last.start, g.last.end) {
                    f.last
                } else {
                    g.last
                },
                in_latest: g.in_latest || f.in_latest,
            },
        });
    }
}

fn group_facts(scope: &Scope, to_group: &[usize], groups: usize, presence: &SentencePresence) -> Vec<Option<GroupFacts>> {
    let mut facts: Vec<Option<GroupFacts>> = vec![None; groups];
    for (db_idx, db) in scope.databases().iter().enumerate() {
        let cells = presence.database_cells(db_idx as u16);
        let (Some(first), Some(last)) = (cells.iter().map(|c| c.release).min(), cells.iter().map(|c| c.release).max())
        else {
            continue;
        };
        let f = GroupFacts::of_database(&db.dates(), db.epoch, first, last);
        GroupFacts::combine(&mut facts[to_group[db_idx]], f);
    }
    facts
}

fn classify(sentence: Fingerprint, grouping: &Grouping, facts: &[Option<GroupFacts>], origin: usize, destinations: &[usize]) -> Option<CrossInstance> {
    let o = facts[origin]?;
    let earliest = facts
        .iter()
        .enumerate()
        .filter(|(g, f)| *g != origin && f.is_some())
        .all(|(_, f)| o.first.end < f.expect("filtered").first.end);
    if !earliest || o.in_latest {
        return None;
    }
    let dests: Vec<Destination> = destinations
        .iter()
        .filter(|&&d| d != origin)
        .filter_map(|&d| {
            let f = facts[d]?;
            (f.in_latest && f.first.end > o.first.end).then(|| Destination {
                group: grouping.groups[d].name.clone(),
                first_seen: f.first,
                confidence: if o.first.strictly_before(&f.first) {
                    Confidence::DateOrdered
                } else {
                    Confidence::Overlapping
                },
            })
        })
        .collect();
    if dests.is_empty() {
        return None;
    }
    let confidence = if dests.iter().all(|d| d.confidence == Confidence::DateOrdered) {
        Confidence::DateOrdered
    } else {
        Confidence::Overlapping
    };
    Some(CrossInstance {
        sentence,
        origin: grouping.groups[origin].name.clone(),
        origin_first_seen: o.first,
        origin_last_seen: o.last,
        destinations: dests,
        confidence,
    })
}

fn require_fully_ingested(ws: &Workspace, grouping: &Grouping) -> Result<()> {
    for db in grouping.databases() {
        if !ws.fully_ingested(&db)? {
            return Err(Error::NotFound(format!("{db} has releases that are not ingested")));
        }
    }
    Ok(())
}

/// Candidates originating in `origin` and surviving in one of
/// `destinations` (all other groups when empty). Sorted by fingerprint.
pub fn detect_cross_missing_origin(
    ws: &Workspace,
    merges: &[MergeGroup],
    origin: &str,
    destinations: &[String],
) -> Result<Vec<CrossInstance>> {
    let grouping = Grouping::resolve(ws, merges)?;
    require_fully_ingested(ws, &grouping)?;
    let o = grouping
        .index_of(origin)
        .ok_or_else(|| Error::NotFound(format!("group {origin}")))?;
    let dests: Vec<usize> = if destinations.is_empty() {
        (0..grouping.groups.len()).filter(|&g| g != o).collect()
    } else {
        destinations
            .iter()
            .map(|d| grouping.index_of(d).ok_or_else(|| Error::NotFound(format!("group {d}"))))
            .collect::<Result<_>>()?
    };
    if dests.contains(&o) {
        return Err(Error::Registry(format!("{origin} is both origin and destination")));
    }
    scan(ws, &grouping, |facts| match facts[o] {
        Some(_) => vec![(o, dests.clone())],
        None => Vec::new(),
    })
}

/// Candidates for every possible origin group.
pub fn detect_all_cross(ws: &Workspace, merges: &[MergeGroup]) -> Result<Vec<CrossInstance>> {
    let grouping = Grouping::resolve(ws, merges)?;
    require_fully_ingested(ws, &grouping)?;
    let n = grouping.groups.len();
    scan(ws, &grouping, |facts| {
        (0..n)
            .filter(|&o| facts[o].is_some())
            .map(|o| (o, (0..n).filter(|&g| g != o).collect()))
            .collect()
    })
}

fn scan(
    ws: &Workspace,
    grouping: &Grouping,
    mut candidates: impl FnMut(&[Option<GroupFacts>]) -> Vec<(usize, Vec<usize>)>,
) -> Result<Vec<CrossInstance>> {
    let to_group = grouping.scope_groups();
    let scope = ws.scope(&grouping.databases())?;
    let mut out = Vec::new();
    for presence in scope.sentences()? {
        let presence = presence?;
        let facts = group_facts(&scope, &to_group, grouping.groups.len(), &presence);
        if facts.iter().filter(|f| f.is_some()).count() < 2 {
            continue;
        }
        for (origin, dests) in candidates(&facts) {
            out.extend(classify(presence.sentence, grouping, &facts, origin, &dests));
        }
    }
    out.sort();
    Ok(out)
}

impl CrossInstance {
    /// Re-derives the instance from the sentence's timeline.
    pub fn replay(&self, ws: &Workspace, merges: &[MergeGroup]) -> Result<bool> {
        let grouping = Grouping::resolve(ws, merges)?;
        let timeline = ws.timeline(self.sentence)?;
        let mut facts: Vec<Option<GroupFacts>> = vec![None; grouping.groups.len()];
        for (g, group) in grouping.groups().iter().enumerate() {
            for db in &group.members {
                let present = timeline.database_presence(db);
                let (Some(&first), Some(&last)) = (present.first(), present.last()) else {
                    continue;
                };
                let dates: Vec<NaiveDate> = ws.releases(db)?.iter().map(|r| r.date).collect();
                let f = GroupFacts::of_database(&dates, ws.epoch(db)?, first, last);
                GroupFacts::combine(&mut facts[g], f);
            }
        }
        let Some(o) = grouping.index_of(&self.origin) else { return Ok(false) };
        let dests: Vec<usize> = self
            .destinations
            .iter()
            .filter_map(|d| grouping.index_of(&d.group))
            .collect();
        Ok(dests.len() == self.destinations.len()
            && classify(self.sentence, &grouping, &facts, o, &dests).as_ref() == Some(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{Fixture, RETINAL_SENTENCE, VISUAL_PIGMENTS};
    use crate::model::NormalizedSentence;
    use crate::patterns;
    use crate::store::ReleaseSpec;

    fn id(s: &str) -> DatabaseId {
        DatabaseId::new(s).unwrap()
    }

    fn fp(text: &str) -> Fingerprint {
        NormalizedSentence::new(text).unwrap().fingerprint()
    }

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn load(f: &Fixture) -> (tempfile::TempDir, Workspace) {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        f.load(&mut ws).unwrap();
        (dir, ws)
    }

    fn uniprot() -> MergeGroup {
        "uniprotkb=swissprot,trembl".parse().unwrap()
    }

    /// Databases `g1`, `g2`, one release each, from `(db, accession, text)`.
    fn two_group(rows: &[(&str, &str, &str)]) -> (tempfile::TempDir, Workspace) {
        let dbs = ["g1", "g2"].map(|n| crate::fixtures::FixtureDatabase {
            name: id(n),
            epoch: None,
            releases: vec![("1".into(), d("2010-01-01"))],
            presence: rows
                .iter()
                .filter(|r| r.0 == n)
                .map(|(_, a, s)| (a.to_string(), s.to_string(), vec![0]))
                .collect(),
        });
        load(&Fixture {
            databases: dbs.to_vec(),
        })
    }

    #[test]
    fn two_sentence_partition() {
        let (_d, ws) = two_group(&[("g1", "A", "x."), ("g1", "A", "y."), ("g2", "B", "y.")]);
        let rows = combination_partition(&ws, &[]).unwrap();
        let got: Vec<_> = rows.iter().map(|r| (r.label(), r.count)).collect();
        assert_eq!(got, [("g1".to_string(), 1), ("g1;g2".to_string(), 1)]);
    }

    #[test]
    fn single_database_partition_is_lifetime_unique() {
        let (_d, ws) = load(&Fixture::toy());
        let rows = combination_partition(&ws, &[]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].count, 4);
    }

    #[test]
    fn visual_pigments_is_in_the_five_way_row() {
        let (_d, ws) = load(&Fixture::shared_sentences());
        let rows = combination_partition(&ws, &[uniprot()]).unwrap();
        let five: Vec<_> = rows.iter().filter(|r| r.combination.len() == 5).collect();
        assert_eq!(five.len(), 1);
        assert_eq!(five[0].label(), "interpro;nextprot;prints;prosite;uniprotkb");
        assert_eq!(five[0].count, 1);
        let total: u64 = rows.iter().map(|r| r.count).sum();
        assert_eq!(total, ws.sentence_count() as u64);
        let t = ws.timeline(fp(VISUAL_PIGMENTS)).unwrap();
        assert_eq!(t.databases.len(), 5);
    }

    #[test]
    fn merging_never_adds_rows_or_changes_the_sum() {
        let (_d, ws) = load(&Fixture::shared_sentences());
        let split = combination_partition(&ws, &[]).unwrap();
        let merged = combination_partition(&ws, &[uniprot()]).unwrap();
        assert!(merged.len() <= split.len());
        let sum = |rows: &[CombinationRow]| rows.iter().map(|r| r.count).sum::<u64>();
        assert_eq!(sum(&split), sum(&merged));
        // "shared by both uniprot sections." moves from {swissprot,trembl} to {uniprotkb}.
        assert!(split.iter().any(|r| r.label() == "swissprot;trembl"));
        assert!(merged.iter().all(|r| !r.label().contains("swissprot")));
    }

    #[test]
    fn overlapping_groups_are_rejected() {
        let (_d, ws) = load(&Fixture::shared_sentences());
        let a: MergeGroup = "a=swissprot,trembl".parse().unwrap();
        let b: MergeGroup = "b=trembl".parse().unwrap();
        assert!(combination_partition(&ws, &[a, b]).is_err());
        let missing: MergeGroup = "c=nosuchdb".parse().unwrap();
        assert!(matches!(combination_partition(&ws, &[missing]), Err(Error::NotFound(_))));
    }

    #[test]
    fn retinal_yields_one_date_ordered_instance() {
        let (_d, ws) = load(&Fixture::retinal());
        let found = detect_all_cross(&ws, &[]).unwrap();
        assert_eq!(found.len(), 1);
        let c = &found[0];
        assert_eq!(c.sentence, fp(RETINAL_SENTENCE));
        assert_eq!(c.origin, "prints");
        assert_eq!(c.destinations.len(), 1);
        assert_eq!(c.destinations[0].group, "interpro");
        assert_eq!(c.confidence, Confidence::DateOrdered);
        assert_eq!(c.origin_first_seen, DateInterval { start: d("1998-07-01"), end: d("1999-07-01") });
        assert_eq!(c.destinations[0].first_seen, DateInterval { start: d("1999-10-01"), end: d("2000-06-01") });
        assert_eq!(c.origin_last_seen, DateInterval { start: d("2005-07-01"), end: d("2008-09-01") });
        assert!(c.replay(&ws, &[]).unwrap());
        assert_eq!(detect_cross_missing_origin(&ws, &[], "prints", &["interpro".into()]).unwrap(), found);
        assert!(detect_cross_missing_origin(&ws, &[], "interpro", &[]).unwrap().is_empty());
    }

    #[test]
    fn retinal_is_not_a_within_database_pattern() {
        let (_d, ws) = load(&Fixture::retinal());
        let r = patterns::detect(&ws, &id("interpro")).unwrap();
        assert!(r.instances.iter().all(|i| i.sentence != fp(RETINAL_SENTENCE)));
    }

    #[test]
    fn retinal_events_put_prints_first() {
        let (_d, ws) = load(&Fixture::retinal());
        let t = cross_timeline(&ws, &[], fp(RETINAL_SENTENCE)).unwrap();
        let appear: Vec<_> = t
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Appears)
            .map(|e| (e.group.as_str(), e.record.accession.as_str(), e.date))
            .collect();
        assert_eq!(
            appear,
            [
                ("prints", "PR00237", d("1999-07-01")),
                ("interpro", "IPR001055", d("2000-06-01")),
                ("interpro", "IPR018298", d("2008-03-01")),
            ]
        );
        let gone: Vec<_> = t.events.iter().filter(|e| e.kind == EventKind::Disappears).collect();
        assert_eq!(gone.len(), 1);
        assert_eq!(gone[0].interval, DateInterval { start: d("2005-07-01"), end: d("2008-09-01") });
        assert_eq!(step_series(&t).len(), 3);
    }

    #[test]
    fn single_group_timeline() {
        let (_d, ws) = load(&Fixture::toy());
        let t = cross_timeline(&ws, &[], fp(crate::fixtures::TOY_SENTENCES[2])).unwrap();
        assert_eq!(t.groups.len(), 1);
        let series = step_series(&t);
        let steps: Vec<Vec<u8>> = series.iter().map(|s| s.steps.iter().map(|p| p.1).collect()).collect();
        assert_eq!(steps, [vec![1, 1, 0], vec![0, 1, 1]]);
    }

    #[test]
    fn present_in_both_latest_releases_is_not_an_instance() {
        let mut f = Fixture::retinal();
        for p in &mut f.databases[0].presence {
            if p.1 == RETINAL_SENTENCE {
                p.2 = vec![1, 2, 3, 4, 5];
            }
        }
        let (_d, ws) = load(&f);
        assert!(detect_all_cross(&ws, &[]).unwrap().is_empty());
    }

    #[test]
    fn overlapping_first_seen_intervals_degrade_confidence() {
        let dir = tempfile::tempdir().unwrap();
        let mut ws = Workspace::create(dir.path()).unwrap();
        let s = NormalizedSentence::new("copied quickly.").unwrap();
        // a: [2000-01-01, 2001-01-01], first seen 2001-01-01
        // b: [2000-06-01, 2001-06-01], first seen 2001-06-01: later but overlapping.
        let specs = |dates: &[&str]| dates.iter().enumerate().map(|(i, s)| ReleaseSpec::new(i.to_string(), d(s))).collect::<Vec<_>>();
        let plan = [
            ("a", specs(&["2000-01-01", "2001-01-01", "2002-01-01"]), vec![1]),
            ("b", specs(&["2000-06-01", "2001-06-01", "2002-06-01"]), vec![1, 2]),
        ];
        for (name, cal, ords) in plan {
            for r in ws.register_database(&id(name), None, &cal).unwrap() {
                let occ: Vec<_> = if ords.contains(&r.ordinal) {
                    vec![Ok((RecordId::new(id(name), "R").unwrap(), s.clone()))]
                } else {
                    vec![]
                };
                ws.ingest(&r, occ).unwrap();
            }
        }
        let found = detect_all_cross(&ws, &[]).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].confidence, Confidence::Overlapping);
        assert!(found[0].replay(&ws, &[]).unwrap());
    }

    #[test]
    fn merge_group_syntax() {
        let g: MergeGroup = "UniProtKB = trembl, swissprot".parse().unwrap();
        assert_eq!(g.to_string(), "uniprotkb=swissprot,trembl");
        assert!("nogroup".parse::<MergeGroup>().is_err());
        assert!("x=".parse::<MergeGroup>().is_err());
    }
}
