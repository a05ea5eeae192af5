//! Evaluation toolkit for trajectory privacy.
//!
//! The crate ingests trajectory datasets, applies baseline differential-privacy
//! mechanisms, audits privacy claims empirically and scores protected or
//! synthetic datasets with point- and trajectory-level utility metrics.
//!
//! Modules map onto the toolkit's functional areas:
//!
//! * [`traj_core`]: domain types, geodesic math, normalization, preprocessing
//! * [`ingest`]: Geolife PLT, FS-NYC CSV, MNIST-Seq and the canonical CSV format
//! * [`metrics_point`]: Hausdorff, Wasserstein, JSD, range queries, hotspots
//! * [`metrics_traj`]: DTW, trajectory Hausdorff, matching, length distributions
//! * [`mechanisms`]: CNoise, planar Laplace and the noisy-count pair
//! * [`accounting`]: composition, unit-of-privacy conversion, calibration
//! * [`audit`]: neighbouring datasets and Monte Carlo epsilon lower bounds
//! * [`gen_eval`]: TrajLoss and the generated-vs-input convergence report

pub mod accounting;
pub mod audit;
mod error;
pub mod gen_eval;
pub mod ingest;
pub mod mechanisms;
pub mod metrics_point;
pub mod metrics_traj;
pub mod rng;
pub mod traj_core;

pub use error::{Error, Result};
pub use traj_core::{
    haversine, BoundingBox, GeoPoint, NormVariant, NormalizationParams, PointAttrs, Trajectory,
    TrajectoryDataset,
};
