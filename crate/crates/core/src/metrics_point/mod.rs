//! Point-level utility metrics: Hausdorff and Wasserstein distances for point
//! preservation; range queries, hotspots and histogram JSD for point
//! statistics.

mod hausdorff;
mod histogram;
mod pathology;
mod range_query;
mod wasserstein;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::traj_core::{euclidean, haversine};
use crate::{rng, GeoPoint};

pub use hausdorff::{directed_hausdorff, hausdorff_points};
pub use histogram::{
    hotspot_preservation, jsd_histogram, jsd_probabilities, top_k_cells, GridSpec, Histogram2D,
    HotspotScore, DEFAULT_CELL_CAP,
};
pub use pathology::{hd_wd_pathology_demo, PathologyConfig, PathologyReport};
pub use range_query::{range_query_error, RangeQueryConfig};
pub use wasserstein::{assignment, wasserstein, wasserstein_1d, WassersteinMethod};

/// Ground distance between two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundMetric {
    /// Great-circle meters.
    #[default]
    Haversine,
    /// Planar distance on raw `(lat, lon)` values, for normalized or synthetic data.
    Euclidean,
}

impl GroundMetric {
    pub fn distance(&self, a: &GeoPoint, b: &GeoPoint) -> f64 {
        match self {
            GroundMetric::Haversine => haversine(a, b),
            GroundMetric::Euclidean => euclidean(a, b),
        }
    }
}

/// Reduces the larger of two point sets to the size of the smaller by seeded
/// sampling without replacement. Relative order is kept.
pub fn equal_size_subsample(a: &[GeoPoint], b: &[GeoPoint], seed: u64) -> (Vec<GeoPoint>, Vec<GeoPoint>) {
    let n = a.len().min(b.len());
    let shrink = |pts: &[GeoPoint], stream: u64| -> Vec<GeoPoint> {
        if pts.len() == n {
            return pts.to_vec();
        }
        let mut idx = index::sample(&mut rng::item_rng(seed, stream), pts.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pts[i]).collect()
    };
    (shrink(a, 0), shrink(b, 1))
}
