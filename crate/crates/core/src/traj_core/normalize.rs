use super::{BoundingBox, NormVariant, NormalizationParams, TrajectoryDataset};
use crate::{Error, Result};

/// Derives normalization parameters from the coordinate extent of `ds`.
///
/// `PaperVerbatim` evaluates `ref = (max - min) / 2` and `sf = max - ref`
/// literally. It reaches [-1, 1] only when the minimum is zero, and yields a
/// non-positive scaling factor (rejected) when `max + min <= 0`.
pub fn compute_normalization(
    ds: &TrajectoryDataset,
    variant: NormVariant,
) -> Result<NormalizationParams> {
    if ds.normalized {
        return Err(Error::AlreadyNormalized);
    }
    let mut pts = ds.points().peekable();
    let first = *pts.peek().ok_or(Error::EmptyDataset)?;
    let (mut min_lat, mut max_lat, mut min_lon, mut max_lon) =
        (first.lat, first.lat, first.lon, first.lon);
    for p in pts {
        min_lat = min_lat.min(p.lat);
        max_lat = max_lat.max(p.lat);
        min_lon = min_lon.min(p.lon);
        max_lon = max_lon.max(p.lon);
    }
    if min_lon == max_lon {
        return Err(Error::DegenerateExtent { axis: "lon", value: min_lon });
    }
    if min_lat == max_lat {
        return Err(Error::DegenerateExtent { axis: "lat", value: min_lat });
    }
    let params = match variant {
        NormVariant::PaperVerbatim => {
            let ref_lon = (max_lon - min_lon) / 2.0;
            let ref_lat = (max_lat - min_lat) / 2.0;
            NormalizationParams {
                ref_lon,
                ref_lat,
                sf_lon: max_lon - ref_lon,
                sf_lat: max_lat - ref_lat,
                variant,
            }
        }
        NormVariant::MinMax => NormalizationParams {
            ref_lon: (max_lon + min_lon) / 2.0,
            ref_lat: (max_lat + min_lat) / 2.0,
            sf_lon: (max_lon - min_lon) / 2.0,
            sf_lat: (max_lat - min_lat) / 2.0,
            variant,
        },
    };
    params.validate()?;
    Ok(params)
}

/// Applies `params` to every coordinate and to the bounding box.
pub fn normalize(ds: &TrajectoryDataset, params: &NormalizationParams) -> Result<TrajectoryDataset> {
    if ds.normalized {
        return Err(Error::AlreadyNormalized);
    }
    params.validate()?;
    let mut out = ds.clone();
    for t in &mut out.trajectories {
        for p in &mut t.points {
            *p = params.apply(p);
        }
    }
    // sf > 0, so the map is monotone and the corners stay ordered.
    let sw = params.apply(&ds.bbox.south_west());
    let ne = params.apply(&ds.bbox.north_east());
    out.bbox = BoundingBox::new(sw.lat, ne.lat, sw.lon, ne.lon)?;
    out.norm = Some(*params);
    out.normalized = true;
    Ok(out)
}

/// Inverts the normalization recorded in `ds.norm`. The parameters stay
/// attached so the dataset can be renormalized identically.
pub fn denormalize(ds: &TrajectoryDataset) -> Result<TrajectoryDataset> {
    let params = match (&ds.norm, ds.normalized) {
        (Some(p), true) => *p,
        _ => return Err(Error::NotNormalized),
    };
    let mut out = ds.clone();
    for t in &mut out.trajectories {
        for p in &mut t.points {
            *p = params.invert(p);
        }
    }
    let sw = params.invert(&ds.bbox.south_west());
    let ne = params.invert(&ds.bbox.north_east());
    out.bbox = BoundingBox::new(sw.lat, ne.lat, sw.lon, ne.lon)?;
    out.normalized = false;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GeoPoint, Trajectory};
    use proptest::prelude::*;

    fn ds_from(coords: &[(f64, f64)]) -> TrajectoryDataset {
        let pts = coords.iter().map(|&(lat, lon)| GeoPoint::raw(lat, lon)).collect();
        TrajectoryDataset::new(vec![Trajectory::new("t", "u", pts).unwrap()])
    }

    #[test]
    fn verbatim_lon_zero_to_two() {
        let ds = ds_from(&[(10.0, 0.0), (12.0, 2.0)]);
        let p = compute_normalization(&ds, NormVariant::PaperVerbatim).unwrap();
        assert_eq!((p.ref_lon, p.sf_lon), (1.0, 1.0));
        let n = normalize(&ds, &p).unwrap();
        assert_eq!(n.trajectories[0].points[0].lon, -1.0);
        assert_eq!(n.trajectories[0].points[1].lon, 1.0);
    }

    #[test]
    fn minmax_lon_zero_to_two() {
        let ds = ds_from(&[(10.0, 0.0), (12.0, 2.0)]);
        let p = compute_normalization(&ds, NormVariant::MinMax).unwrap();
        assert_eq!((p.ref_lon, p.sf_lon), (1.0, 1.0));
        let n = normalize(&ds, &p).unwrap();
        assert_eq!(n.trajectories[0].points[0].lon, -1.0);
        assert_eq!(n.trajectories[0].points[1].lon, 1.0);
    }

    #[test]
    fn degenerate_axis_rejected() {
        let ds = ds_from(&[(10.0, 5.0), (12.0, 5.0)]);
        assert!(matches!(
            compute_normalization(&ds, NormVariant::MinMax),
            Err(Error::DegenerateExtent { axis: "lon", .. })
        ));
    }

    #[test]
    fn reference_point_maps_to_origin_and_max_to_one() {
        let ds = ds_from(&[(39.8, 116.25), (40.0, 116.5), (39.9, 116.3)]);
        let p = compute_normalization(&ds, NormVariant::PaperVerbatim).unwrap();
        let o = p.apply(&GeoPoint::raw(p.ref_lat, p.ref_lon));
        assert_eq!((o.lat, o.lon), (0.0, 0.0));
        let m = p.apply(&GeoPoint::raw(40.0, 116.5));
        assert_eq!((m.lat, m.lon), (1.0, 1.0));
    }

    #[test]
    fn double_normalization_rejected() {
        let ds = ds_from(&[(1.0, 1.0), (2.0, 2.0)]);
        let p = compute_normalization(&ds, NormVariant::MinMax).unwrap();
        let n = normalize(&ds, &p).unwrap();
        assert!(matches!(normalize(&n, &p), Err(Error::AlreadyNormalized)));
        assert!(matches!(compute_normalization(&n, NormVariant::MinMax), Err(Error::AlreadyNormalized)));
        assert!(matches!(denormalize(&ds), Err(Error::NotNormalized)));
    }

    proptest! {
        #[test]
        fn round_trip(
            coords in prop::collection::vec((-80.0f64..80.0, -170.0f64..170.0), 2..40),
            minmax in any::<bool>(),
        ) {
            let ds = ds_from(&coords);
            let variant = if minmax { NormVariant::MinMax } else { NormVariant::PaperVerbatim };
            let Ok(p) = compute_normalization(&ds, variant) else { return Ok(()) };
            let back = denormalize(&normalize(&ds, &p).unwrap()).unwrap();
            prop_assert!(!back.normalized);
            for (a, b) in ds.points().zip(back.points()) {
                prop_assert!((a.lat - b.lat).abs() <= 1e-9);
                prop_assert!((a.lon - b.lon).abs() <= 1e-9);
            }
            prop_assert!(back.validate().is_ok());
        }
    }
}
