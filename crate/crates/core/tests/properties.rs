mod common;

const CASES: u32 = 1000;

#[test]
fn window_and_distance_are_monotone() {
    common::window_distance_monotonicity(CASES).unwrap();
}

#[test]
fn snapshots_round_trip() {
    common::snapshot_round_trip(CASES).unwrap();
}

#[test]
fn strengths_count_observations() {
    common::strength_accounting(300).unwrap();
}

#[test]
fn prompt_set_respects_capacity() {
    common::prompt_set_capacity(CASES).unwrap();
}

#[test]
fn ranking_is_scale_invariant() {
    common::argmax_stability(CASES).unwrap();
}

#[test]
fn vector_query_matches_exact_scan() {
    common::vecstore_oracle(CASES).unwrap();
}

#[test]
fn perfect_discriminator_dominates() {
    common::perfect_discriminator_dominance(CASES).unwrap();
}

#[test]
fn porter_matches_published_vocabulary() {
    assert_eq!(common::porter_vocabulary().unwrap(), 23_531);
}
