use serde::{Deserialize, Serialize};

use super::{BoundingBox, GeoPoint, Trajectory, TrajectoryDataset};
use crate::{Error, Result};

/// Approximate extent of Beijing's 5th ring road. Chosen for this toolkit;
/// override it for any other study area.
pub const BEIJING_5TH_RING: BoundingBox = BoundingBox {
    min_lat: 39.76,
    max_lat: 40.03,
    min_lon: 116.20,
    max_lon: 116.55,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub bbox: BoundingBox,
    /// Target sampling interval in seconds.
    pub interval_s: i64,
    /// Trajectories are split where consecutive fixes are at least this far apart.
    pub gap_s: i64,
    pub max_len: usize,
    pub min_len: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            bbox: BEIJING_5TH_RING,
            interval_s: 5,
            gap_s: 60,
            max_len: 200,
            min_len: 10,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if self.interval_s <= 0 {
            return Err(Error::param("interval_s", "must be positive"));
        }
        if self.gap_s <= 0 {
            return Err(Error::param("gap_s", "must be positive"));
        }
        if self.max_len == 0 || self.min_len > self.max_len {
            return Err(Error::param(
                "max_len",
                format!("need 1 <= min_len <= max_len, got {} / {}", self.min_len, self.max_len),
            ));
        }
        Ok(())
    }
}

/// Runs the five preprocessing steps in order:
///
/// 1. drop fixes outside `cfg.bbox`;
/// 2. resample to one fix every `interval_s` seconds by linear interpolation
///    in lat/lon (the grid restarts after any gap of `gap_s` or more, so no
///    fix is ever invented inside a gap);
/// 3. split where consecutive fixes are `gap_s` or more apart;
/// 4. keep the first `max_len` fixes of each piece;
/// 5. drop pieces shorter than `min_len`.
///
/// Split pieces are renamed `<id>_<k>`; unsplit trajectories keep their id,
/// so the pipeline is idempotent on compliant input.
pub fn preprocess_geolife(ds: &TrajectoryDataset, cfg: &PreprocessConfig) -> Result<TrajectoryDataset> {
    cfg.validate()?;
    if ds.normalized {
        return Err(Error::AlreadyNormalized);
    }
    if let Some(t) = ds.trajectories.iter().find(|t| !t.is_timed()) {
        return Err(Error::MissingTimestamps(t.id.clone()));
    }

    let mut out = Vec::new();
    for traj in &ds.trajectories {
        let inside: Vec<GeoPoint> = traj
            .points
            .iter()
            .filter(|p| cfg.bbox.contains(p))
            .copied()
            .collect();
        if inside.is_empty() {
            continue;
        }
        let resampled: Vec<GeoPoint> = split_on_gaps(&inside, cfg.gap_s)
            .into_iter()
            .flat_map(|run| resample_run(run, cfg.interval_s))
            .collect();
        let pieces = split_on_gaps(&resampled, cfg.gap_s);
        let n_pieces = pieces.len();
        for (k, piece) in pieces.into_iter().enumerate() {
            let piece = &piece[..piece.len().min(cfg.max_len)];
            if piece.len() < cfg.min_len {
                continue;
            }
            let id = if n_pieces > 1 {
                format!("{}_{}", traj.id, k)
            } else {
                traj.id.clone()
            };
            out.push(Trajectory::new(id, traj.user_id.clone(), piece.to_vec())?);
        }
    }

    Ok(TrajectoryDataset {
        trajectories: out,
        bbox: cfg.bbox,
        norm: None,
        normalized: false,
    })
}

/// Maximal runs whose consecutive time deltas are all below `gap_s`.
fn split_on_gaps(points: &[GeoPoint], gap_s: i64) -> Vec<&[GeoPoint]> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..points.len() {
        if points[i].t.unwrap() - points[i - 1].t.unwrap() >= gap_s {
            runs.push(&points[start..i]);
            start = i;
        }
    }
    if start < points.len() {
        runs.push(&points[start..]);
    }
    runs
}

/// One fix at `t0, t0 + interval, ...` up to the last fix's time. Grid times
/// that coincide with a recorded fix reuse it unchanged.
fn resample_run(run: &[GeoPoint], interval_s: i64) -> Vec<GeoPoint> {
    let t_start = run[0].t.unwrap();
    let t_end = run[run.len() - 1].t.unwrap();
    let mut out = Vec::with_capacity(((t_end - t_start) / interval_s + 1) as usize);
    let mut seg = 0;
    let mut t = t_start;
    while t <= t_end {
        while seg + 1 < run.len() && run[seg + 1].t.unwrap() <= t {
            seg += 1;
        }
        let a = &run[seg];
        let ta = a.t.unwrap();
        if ta == t {
            out.push(*a);
        } else {
            let b = &run[seg + 1];
            let tb = b.t.unwrap();
            let f = (t - ta) as f64 / (tb - ta) as f64;
            out.push(GeoPoint {
                lat: lerp(a.lat, b.lat, f),
                lon: lerp(a.lon, b.lon, f),
                t: Some(t),
                attrs: a.attrs,
            });
        }
        t += interval_s;
    }
    out
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    (a + (b - a) * f).clamp(a.min(b), a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timed(id: &str, fixes: &[(i64, f64, f64)]) -> Trajectory {
        let pts = fixes
            .iter()
            .map(|&(t, lat, lon)| GeoPoint::new(lat, lon).unwrap().at(t))
            .collect();
        Trajectory::new(id, "u", pts).unwrap()
    }

    fn compliant(id: &str, n: usize) -> Trajectory {
        let fixes: Vec<_> = (0..n)
            .map(|i| (1_000 + 5 * i as i64, 39.9 + 1e-4 * i as f64, 116.4 - 1e-4 * i as f64))
            .collect();
        timed(id, &fixes)
    }

    #[test]
    fn outside_bbox_removed() {
        let ds = TrajectoryDataset::new(vec![timed("far", &[(0, 31.2, 121.5), (5, 31.3, 121.5)])]);
        let out = preprocess_geolife(&ds, &PreprocessConfig::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn gap_split_hand_trace() {
        let ds = TrajectoryDataset::new(vec![timed(
            "g",
            &[(0, 39.9, 116.4), (5, 39.91, 116.4), (120, 39.92, 116.4)],
        )]);
        let cfg = PreprocessConfig { min_len: 1, ..Default::default() };
        let out = preprocess_geolife(&ds, &cfg).unwrap();
        let times: Vec<Vec<i64>> = out
            .trajectories
            .iter()
            .map(|t| t.points.iter().map(|p| p.t.unwrap()).collect())
            .collect();
        assert_eq!(times, vec![vec![0, 5], vec![120]]);
        assert_eq!(out.trajectories[0].id, "g_0");

        let cfg = PreprocessConfig { min_len: 2, ..Default::default() };
        let out = preprocess_geolife(&ds, &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.trajectories[0].len(), 2);
    }

    #[test]
    fn truncates_to_first_max_len() {
        let long = compliant("long", 1_000);
        let ds = TrajectoryDataset::new(vec![long.clone()]);
        let out = preprocess_geolife(&ds, &PreprocessConfig::default()).unwrap();
        assert_eq!(out.trajectories[0].points, long.points[..200]);
    }

    #[test]
    fn interpolates_between_fixes() {
        let ds = TrajectoryDataset::new(vec![timed("i", &[(0, 39.9, 116.3), (10, 39.91, 116.32)])]);
        let cfg = PreprocessConfig { min_len: 1, ..Default::default() };
        let out = preprocess_geolife(&ds, &cfg).unwrap();
        let pts = &out.trajectories[0].points;
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1].t, Some(5));
        assert!((pts[1].lat - 39.905).abs() < 1e-12);
        assert!((pts[1].lon - 116.31).abs() < 1e-12);
    }

    #[test]
    fn idempotent_on_compliant_input() {
        let ds = TrajectoryDataset::new(vec![compliant("a", 10), compliant("b", 200), compliant("c", 57)]);
        let cfg = PreprocessConfig::default();
        let once = preprocess_geolife(&ds, &cfg).unwrap();
        assert_eq!(once.trajectories, ds.trajectories);
        let twice = preprocess_geolife(&once, &cfg).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn missing_timestamps_rejected() {
        let t = Trajectory::new("x", "u", vec![GeoPoint::new(39.9, 116.4).unwrap()]).unwrap();
        let ds = TrajectoryDataset::new(vec![t]);
        assert!(matches!(
            preprocess_geolife(&ds, &PreprocessConfig::default()),
            Err(Error::MissingTimestamps(_))
        ));
    }
}
