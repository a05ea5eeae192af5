mod common;

use common::*;
use rand::Rng;
use trajbench::metrics_point::{hausdorff_points, wasserstein, GroundMetric, WassersteinMethod};
use trajbench::metrics_traj::dtw;
use trajbench::rng::item_rng;

#[test]
fn hausdorff_matches_brute_force_on_both_metrics() {
    for k in 0..40 {
        let mut r = item_rng(11, k);
        let (na, nb) = (r.gen_range(1..=120), r.gen_range(1..=120));
        let a = random_points(&mut r, na, 39.9, 116.4, 0.1);
        let b = random_points(&mut r, nb, 39.95, 116.38, 0.12);
        for m in [GroundMetric::Haversine, GroundMetric::Euclidean] {
            assert_eq!(hausdorff_points(&a, &b, m).unwrap(), brute_hausdorff(&a, &b, m), "instance {k}, {m:?}");
        }
    }
}

#[test]
fn hausdorff_with_duplicates_and_identical_sets() {
    let mut r = item_rng(12, 0);
    let mut a = random_points(&mut r, 50, 0.0, 0.0, 1.0);
    a.extend(a.clone());
    assert_eq!(hausdorff_points(&a, &a, GroundMetric::Euclidean).unwrap(), 0.0);
    let b = vec![a[0]; 7];
    assert_eq!(hausdorff_points(&a, &b, GroundMetric::Haversine).unwrap(), brute_hausdorff(&a, &b, GroundMetric::Haversine));
}

#[test]
fn dtw_matches_path_enumeration_and_recursion() {
    for k in 0..60 {
        let mut r = item_rng(13, k);
        let (n, m) = (r.gen_range(1..=6), r.gen_range(1..=6));
        let a = random_points(&mut r, n, 40.7, -74.0, 0.05);
        let b = random_points(&mut r, m, 40.7, -74.0, 0.05);
        let got = dtw(&a, &b, GroundMetric::Haversine).unwrap();
        assert_eq!(got, dtw_enumerate(&a, &b, GroundMetric::Haversine), "instance {k}");
        assert_eq!(got, dtw_memo(&a, &b, GroundMetric::Haversine), "instance {k}");
    }
}

#[test]
fn exact_wasserstein_matches_flow_oracle() {
    for k in 0..15 {
        let mut r = item_rng(14, k);
        let n = r.gen_range(1..=40);
        let a = random_points(&mut r, n, 0.0, 0.0, 1.0);
        let b = random_points(&mut r, n, 0.3, -0.2, 1.5);
        let cost: Vec<Vec<f64>> =
            a.iter().map(|p| b.iter().map(|q| GroundMetric::Euclidean.distance(p, q)).collect()).collect();
        let want = ssp_matching_cost(&cost) / n as f64;
        let got = wasserstein(&a, &b, WassersteinMethod::ExactSmall, GroundMetric::Euclidean).unwrap();
        assert!((got - want).abs() <= 1e-9 * want.max(1.0), "instance {k}: {got} vs {want}");
    }
}
