mod common;

use annotrace::synth::{random_corpus, SmallBounds};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detectors_match_brute_force(seed in any::<u64>()) {
        let corpus = random_corpus(seed, SmallBounds::default());
        let dir = tempfile::tempdir().unwrap();
        let ws = common::load(&corpus, dir.path());
        let merges = common::merges_for(&corpus, seed);
        if let Err(e) = common::compare(&ws, &corpus, &merges) {
            prop_assert!(false, "seed {}: {}", seed, e);
        }
    }
}
