mod common;

use blendcast::training::CellKind;
use common::gradcheck::{dense_case, gru_case, lstm_case, stacked_case, ACTIVATIONS};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lstm_cell_matches_finite_differences(input in 1usize..=8, hidden in 1usize..=8, seed in any::<u64>()) {
        let e = lstm_case(input, hidden, seed);
        prop_assert!(e < 1e-5, "relative error {e:e}");
    }

    #[test]
    fn gru_cell_matches_finite_differences(input in 1usize..=8, hidden in 1usize..=8, seed in any::<u64>()) {
        let e = gru_case(input, hidden, seed);
        prop_assert!(e < 1e-5, "relative error {e:e}");
    }

    #[test]
    fn dense_layer_matches_finite_differences(
        input in 1usize..=8,
        output in 1usize..=8,
        act in 0usize..4,
        seed in any::<u64>(),
    ) {
        let e = dense_case(input, output, ACTIVATIONS[act], seed);
        prop_assert!(e < 1e-5, "relative error {e:e}");
    }
}

#[test]
fn stacked_lstm_gradient() {
    for seed in 0..5 {
        let e = stacked_case(CellKind::Lstm, seed);
        assert!(e < 1e-4, "seed {seed}: relative error {e:e}");
    }
}

#[test]
fn stacked_gru_gradient() {
    for seed in 0..5 {
        let e = stacked_case(CellKind::Gru, seed);
        assert!(e < 1e-4, "seed {seed}: relative error {e:e}");
    }
}
