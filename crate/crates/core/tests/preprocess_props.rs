mod common;

use common::*;
use proptest::prelude::*;
use trajbench::rng::item_rng;
use trajbench::traj_core::{preprocess_geolife, PreprocessConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_satisfies_invariants(seed in any::<u64>(), n in 1usize..12) {
        let cfg = PreprocessConfig::default();
        let raw = raw_geolife(&mut item_rng(seed, 0), n);
        let out = preprocess_geolife(&raw, &cfg).unwrap();
        prop_assert_eq!(check_preprocessed(&out, &cfg), Ok(()));
        // compliant input passes through unchanged
        prop_assert_eq!(preprocess_geolife(&out, &cfg).unwrap(), out);
    }

    #[test]
    fn custom_parameters_hold_too(seed in any::<u64>(), interval in 1i64..30, min_len in 2usize..20, extra in 0usize..100) {
        let cfg = PreprocessConfig { interval_s: interval, gap_s: 4 * interval + 30, min_len, max_len: min_len + extra, ..Default::default() };
        let raw = raw_geolife(&mut item_rng(seed, 1), 6);
        let out = preprocess_geolife(&raw, &cfg).unwrap();
        prop_assert_eq!(check_preprocessed(&out, &cfg), Ok(()));
    }
}
