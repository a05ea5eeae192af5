use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Optional categorical attributes attached to a fix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointAttrs {
    /// Hour of day, 0..=23.
    pub hour: Option<u8>,
    /// Day of week, 0..=6.
    pub day: Option<u8>,
    pub category: Option<u32>,
}

impl PointAttrs {
    pub fn is_empty(&self) -> bool {
        self.hour.is_none() && self.day.is_none() && self.category.is_none()
    }
}

/// A single fix. Coordinates are WGS84 degrees unless the owning dataset is
/// normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    /// UTC epoch seconds.
    pub t: Option<i64>,
    #[serde(default)]
    pub attrs: PointAttrs,
}

impl GeoPoint {
    /// Validated WGS84 point.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !in_wgs84(lat, lon) {
            return Err(Error::InvalidCoordinate { lat, lon });
        }
        Ok(Self::raw(lat, lon))
    }

    /// Unchecked point, for normalized or planar coordinates.
    pub fn raw(lat: f64, lon: f64) -> Self {
        GeoPoint {
            lat,
            lon,
            t: None,
            attrs: PointAttrs::default(),
        }
    }

    pub fn at(mut self, t: i64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_attrs(mut self, attrs: PointAttrs) -> Self {
        self.attrs = attrs;
        self
    }

    pub fn is_wgs84(&self) -> bool {
        in_wgs84(self.lat, self.lon)
    }
}

fn in_wgs84(lat: f64, lon: f64) -> bool {
    (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    pub user_id: String,
    pub points: Vec<GeoPoint>,
}

impl Trajectory {
    /// Builds a trajectory, checking that it is non-empty and that timestamps
    /// are either absent everywhere or present and non-decreasing.
    pub fn new(
        id: impl Into<String>,
        user_id: impl Into<String>,
        points: Vec<GeoPoint>,
    ) -> Result<Self> {
        let traj = Trajectory {
            id: id.into(),
            user_id: user_id.into(),
            points,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidTrajectory {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.points.is_empty() {
            return fail("no points");
        }
        if self.points.iter().any(|p| !p.lat.is_finite() || !p.lon.is_finite()) {
            return fail("non-finite coordinate");
        }
        let timed = self.points.iter().filter(|p| p.t.is_some()).count();
        if timed != 0 && timed != self.points.len() {
            return fail("timestamps present on some points only");
        }
        if timed != 0
            && self
                .points
                .windows(2)
                .any(|w| w[1].t.unwrap() < w[0].t.unwrap())
        {
            return fail("timestamps decrease");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_timed(&self) -> bool {
        self.points.first().is_some_and(|p| p.t.is_some())
    }

    pub fn mean_lat(&self) -> f64 {
        self.points.iter().map(|p| p.lat).sum::<f64>() / self.points.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Whole-globe box, used for datasets with no points.
    pub const WORLD: BoundingBox = BoundingBox {
        min_lat: -90.0,
        max_lat: 90.0,
        min_lon: -180.0,
        max_lon: 180.0,
    };

    /// Padding applied to an axis whose extent collapses to a single value.
    const DEGENERATE_PAD: f64 = 1e-7;

    pub fn new(min_lat: f64, max_lat: f64, min_lon: f64, max_lon: f64) -> Result<Self> {
        let bbox = BoundingBox {
            min_lat,
            max_lat,
            min_lon,
            max_lon,
        };
        bbox.validate()?;
        Ok(bbox)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.min_lat, self.max_lat, self.min_lon, self.max_lon];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBoundingBox("non-finite bound".into()));
        }
        if !(self.min_lat < self.max_lat && self.min_lon < self.max_lon) {
            return Err(Error::InvalidBoundingBox(format!(
                "min must be below max on both axes: {self:?}"
            )));
        }
        Ok(())
    }

    /// Tight box around `points`; a collapsed axis is padded symmetrically.
    /// `None` when there are no points.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BoundingBox {
            min_lat: first.lat,
            max_lat: first.lat,
            min_lon: first.lon,
            max_lon: first.lon,
        };
        for p in it {
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lat = b.max_lat.max(p.lat);
            b.min_lon = b.min_lon.min(p.lon);
            b.max_lon = b.max_lon.max(p.lon);
        }
        if b.min_lat == b.max_lat {
            b.min_lat -= Self::DEGENERATE_PAD;
            b.max_lat += Self::DEGENERATE_PAD;
        }
        if b.min_lon == b.max_lon {
            b.min_lon -= Self::DEGENERATE_PAD;
            b.max_lon += Self::DEGENERATE_PAD;
        }
        Some(b)
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        p.lat >= self.min_lat && p.lat <= self.max_lat && p.lon >= self.min_lon && p.lon <= self.max_lon
    }

    pub fn lat_span(&self) -> f64 {
        self.max_lat - self.min_lat
    }

    pub fn lon_span(&self) -> f64 {
        self.max_lon - self.min_lon
    }

    pub fn south_west(&self) -> GeoPoint {
        GeoPoint::raw(self.min_lat, self.min_lon)
    }

    pub fn north_east(&self) -> GeoPoint {
        GeoPoint::raw(self.max_lat, self.max_lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormVariant {
    /// `ref = (max - min) / 2`, `sf = max - ref`, taken literally.
    #[serde(rename = "paper-verbatim")]
    PaperVerbatim,
    /// `ref = (max + min) / 2`, `sf = (max - min) / 2`; maps onto [-1, 1].
    #[serde(rename = "minmax")]
    MinMax,
}

impl std::fmt::Display for NormVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormVariant::PaperVerbatim => "paper-verbatim",
            NormVariant::MinMax => "minmax",
        })
    }
}

/// Affine map `x -> (x - ref) / sf` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ref_lon: f64,
    pub ref_lat: f64,
    pub sf_lon: f64,
    pub sf_lat: f64,
    pub variant: NormVariant,
}

impl NormalizationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sf_lon", self.sf_lon), ("sf_lat", self.sf_lat)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("scaling factor must be > 0, got {v}")));
            }
        }
        if !(self.ref_lon.is_finite() && self.ref_lat.is_finite()) {
            return Err(Error::param("ref", "reference point must be finite"));
        }
        Ok(())
    }

    pub fn apply(&self, p: &GeoPoint) -> GeoPoint {
        GeoPoint {
            lat: (p.lat - self.ref_lat) / self.sf_lat,
            lon: (p.lon - self.ref_lon) / self.sf_lon,
            ..*p
        }
    }

    pub fn invert(&self, p: &GeoPoint) -> GeoPoint {
        GeoPoint {
            lat: p.lat * self.sf_lat + self.ref_lat,
            lon: p.lon * self.sf_lon + self.ref_lon,
            ..*p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDataset {
    pub trajectories: Vec<Trajectory>,
    pub bbox: BoundingBox,
    pub norm: Option<NormalizationParams>,
    /// True iff `norm` has been applied to the coordinates.
    pub normalized: bool,
}

impl TrajectoryDataset {
    /// Geographic dataset with a tight bounding box.
    pub fn new(trajectories: Vec<Trajectory>) -> Self {
        let bbox = Self::tight_bbox(&trajectories);
        TrajectoryDataset {
            trajectories,
            bbox,
            norm: None,
            normalized: false,
        }
    }

    fn tight_bbox(trajectories: &[Trajectory]) -> BoundingBox {
        BoundingBox::from_points(trajectories.iter().flat_map(|t| &t.points))
            .unwrap_or(BoundingBox::WORLD)
    }

    pub fn recompute_bbox(&mut self) {
        self.bbox = Self::tight_bbox(&self.trajectories);
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = &GeoPoint> {
        self.trajectories.iter().flat_map(|t| t.points.iter())
    }

    pub fn users(&self) -> BTreeSet<&str> {
        self.trajectories.iter().map(|t| t.user_id.as_str()).collect()
    }

    /// Checks every structural invariant: trajectories valid, points inside
    /// the bbox, WGS84 bounds for geographic data, flag/params consistency.
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if self.normalized && self.norm.is_none() {
            return Err(Error::param("normalized", "flag set without parameters"));
        }
        if let Some(norm) = &self.norm {
            norm.validate()?;
        }
        for t in &self.trajectories {
            t.validate()?;
            for p in &t.points {
                if !self.normalized && !p.is_wgs84() {
                    return Err(Error::InvalidCoordinate { lat: p.lat, lon: p.lon });
                }
                if !self.bbox.contains(p) {
                    return Err(Error::InvalidTrajectory {
                        id: t.id.clone(),
                        reason: format!("point ({}, {}) outside bbox", p.lat, p.lon),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(-90.0, 180.0).is_ok());
    }

    #[test]
    fn trajectory_invariants() {
        assert!(Trajectory::new("a", "u", vec![]).is_err());
        let p = GeoPoint::raw(1.0, 1.0);
        assert!(Trajectory::new("a", "u", vec![p.at(0), p]).is_err());
        assert!(Trajectory::new("a", "u", vec![p.at(5), p.at(4)]).is_err());
        assert!(Trajectory::new("a", "u", vec![p.at(4), p.at(4)]).is_ok());
    }

    #[test]
    fn degenerate_bbox_is_padded() {
        let p = GeoPoint::raw(1.0, 2.0);
        let b = BoundingBox::from_points([&p]).unwrap();
        assert!(b.validate().is_ok());
        assert!(b.contains(&p));
    }

    #[test]
    fn empty_dataset_gets_world_box() {
        let ds = TrajectoryDataset::new(vec![]);
        assert_eq!(ds.bbox, BoundingBox::WORLD);
        assert!(ds.validate().is_ok());
    }
}
