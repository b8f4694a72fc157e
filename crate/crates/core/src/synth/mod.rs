//! Synthetic corpora and the brute-force reference detector.

mod corpus;
mod generator;
mod oracle;
mod random;
pub mod scale;

pub use corpus::{CorpusDatabase, PresenceCell, PresenceCorpus};
pub use generator::{generate, CalendarSpec, Generated, GeneratorSpec, Quotas, Rates, TruthManifest};
pub use oracle::{brute_force_detect, OracleFindings, OracleReport, CELL_LIMIT};
pub use random::{random_corpus, SmallBounds};
