use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GroundMetric;
use crate::{rng, BoundingBox, Error, GeoPoint, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeQueryConfig {
    pub n_queries: usize,
    /// Query radius as a fraction of the real data's bbox diagonal.
    pub radius_frac: f64,
    pub seed: u64,
    /// Floor of the relative-error denominator.
    pub smoothing: f64,
    pub metric: GroundMetric,
}

impl Default for RangeQueryConfig {
    fn default() -> Self {
        RangeQueryConfig {
            n_queries: 200,
            radius_frac: 0.05,
            seed: 0,
            smoothing: 1.0,
            metric: GroundMetric::Haversine,
        }
    }
}

/// Mean relative error of circular range counts,
/// `|c_real - c_gen| / max(c_real, smoothing)`, over queries centred
/// uniformly in the bounding box of `real`.
pub fn range_query_error(real: &[GeoPoint], gen: &[GeoPoint], cfg: &RangeQueryConfig) -> Result<f64> {
    if cfg.n_queries == 0 {
        return Err(Error::param("n_queries", "must be positive"));
    }
    if !(cfg.radius_frac > 0.0 && cfg.radius_frac.is_finite()) {
        return Err(Error::param("radius_frac", "must be positive"));
    }
    if cfg.smoothing.is_nan() || cfg.smoothing <= 0.0 {
        return Err(Error::param("smoothing", "must be positive"));
    }
    let bbox = BoundingBox::from_points(real).ok_or(Error::EmptyInput("real point set"))?;
    let radius = cfg.radius_frac * cfg.metric.distance(&bbox.south_west(), &bbox.north_east());
    let count = |c: &GeoPoint, pts: &[GeoPoint]| {
        pts.iter().filter(|p| cfg.metric.distance(c, p) <= radius).count() as f64
    };
    let errors: Vec<f64> = (0..cfg.n_queries as u64)
        .into_par_iter()
        .map(|q| {
            let mut r = rng::item_rng(cfg.seed, q);
            let center = GeoPoint::raw(
                r.gen_range(bbox.min_lat..=bbox.max_lat),
                r.gen_range(bbox.min_lon..=bbox.max_lon),
            );
            let c_real = count(&center, real);
            let c_gen = count(&center, gen);
            (c_real - c_gen).abs() / c_real.max(cfg.smoothing)
        })
        .collect();
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}
