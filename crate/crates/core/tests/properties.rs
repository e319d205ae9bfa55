mod common;

use common::suites;
use proptest::prelude::*;

#[test]
fn probabilities_in_range() {
    suites::probability_range(200, 14).unwrap();
}

#[test]
fn cone_round_trips() {
    suites::cone_round_trips().unwrap();
}

#[test]
fn nesting_on_all_compositions() {
    suites::nesting().unwrap();
}

#[test]
fn joint_measurability_witnesses_are_sound() {
    suites::joint_measurability_witnesses().unwrap();
}

#[test]
fn qubit_is_self_dual() {
    suites::qubit_self_duality(1000, 3).unwrap();
}

thread_local! {
    static CORPUS: Vec<suites::Extremes> = suites::corpus_extremes();
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 600, ..ProptestConfig::default() })]

    #[test]
    fn behaviors_never_signal(seed in any::<u64>(), pick in 0usize..64) {
        CORPUS.with(|corpus| suites::random_behavior_is_no_signaling(&corpus[pick % corpus.len()], seed))
            .map_err(TestCaseError::fail)?;
    }

    #[test]
    fn random_systems_stay_in_range(seed in any::<u64>()) {
        suites::random_system_in_range(seed).map_err(TestCaseError::fail)?;
    }
}
