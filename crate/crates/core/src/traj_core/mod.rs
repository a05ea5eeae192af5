//! Domain types, geodesic helpers, normalization and the Geolife-style
//! preprocessing pipeline.

mod geo;
mod normalize;
mod preprocess;
mod types;

pub use geo::{
    euclidean, haversine, meters_per_degree_lat, meters_per_degree_lon, EARTH_RADIUS_M,
};
pub use normalize::{compute_normalization, denormalize, normalize};
pub use preprocess::{preprocess_geolife, PreprocessConfig, BEIJING_5TH_RING};
pub use types::{
    BoundingBox, GeoPoint, NormVariant, NormalizationParams, PointAttrs, Trajectory,
    TrajectoryDataset,
};
