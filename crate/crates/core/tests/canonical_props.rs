use proptest::prelude::*;
use trajbench::ingest::{read_canonical, write_canonical};
use trajbench::traj_core::{compute_normalization, normalize};
use trajbench::{GeoPoint, NormVariant, PointAttrs, Trajectory, TrajectoryDataset};

fn point() -> impl Strategy<Value = GeoPoint> {
    (
        -90.0f64..=90.0,
        -180.0f64..=180.0,
        proptest::option::of(0u8..24),
        proptest::option::of(0u8..7),
        proptest::option::of(any::<u32>()),
    )
        .prop_map(|(lat, lon, hour, day, category)| {
            GeoPoint::new(lat, lon).unwrap().with_attrs(PointAttrs { hour, day, category })
        })
}

fn trajectory(i: usize) -> impl Strategy<Value = Trajectory> {
    (
        proptest::collection::vec(point(), 1..20),
        proptest::option::of(-2_000_000_000i64..2_000_000_000),
        "[a-z0-9 ,\"_]{0,6}",
    )
        .prop_map(move |(mut pts, t0, user)| {
            if let Some(t0) = t0 {
                for (k, p) in pts.iter_mut().enumerate() {
                    p.t = Some(t0 + 7 * k as i64);
                }
            }
            Trajectory::new(format!("t{i}"), user, pts).unwrap()
        })
}

fn dataset() -> impl Strategy<Value = TrajectoryDataset> {
    (0usize..6)
        .prop_flat_map(|n| (0..n).map(trajectory).collect::<Vec<_>>())
        .prop_map(TrajectoryDataset::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn round_trip_is_lossless(ds in dataset(), norm in any::<bool>()) {
        let ds = if norm && ds.n_points() > 1 {
            match compute_normalization(&ds, NormVariant::MinMax) {
                Ok(p) => normalize(&ds, &p).unwrap(),
                Err(_) => ds,
            }
        } else {
            ds
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_canonical(&ds, &path).unwrap();
        let (back, report) = read_canonical(&path).unwrap();
        prop_assert!(report.warnings.is_empty());
        prop_assert_eq!(back, ds);
    }
}
