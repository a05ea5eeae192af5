use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{hausdorff_points, wasserstein, GroundMetric, WassersteinMethod};
use crate::{rng, GeoPoint};

/// Two Gaussian clusters on a plane, optionally each with points planted at
/// the centre of the other cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyConfig {
    pub n_per_cluster: usize,
    pub sigma: f64,
    /// Distance between the two cluster centres.
    pub separation: f64,
    pub outliers_per_cluster: usize,
    pub n_proj: usize,
    pub seed: u64,
}

impl Default for PathologyConfig {
    fn default() -> Self {
        PathologyConfig {
            n_per_cluster: 500,
            sigma: 0.3,
            separation: 6.0,
            outliers_per_cluster: 1,
            n_proj: 100,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyReport {
    pub hd_separated: f64,
    pub hd_outlier: f64,
    pub wd_separated: f64,
    pub wd_outlier: f64,
    /// `hd_separated / hd_outlier`.
    pub hd_ratio: f64,
    /// `|wd_outlier - wd_separated| / wd_separated`.
    pub wd_drift: f64,
}

/// Shows Hausdorff distance collapsing under a single planted outlier while
/// the sliced Wasserstein distance barely moves.
pub fn hd_wd_pathology_demo(cfg: &PathologyConfig) -> PathologyReport {
    let centre_a = (0.0, 0.0);
    let centre_b = (cfg.separation, 0.0);
    let cluster = |centre: (f64, f64), stream: u64| -> Vec<GeoPoint> {
        let mut r = rng::item_rng(cfg.seed, stream);
        (0..cfg.n_per_cluster)
            .map(|_| {
                let dx: f64 = r.sample(StandardNormal);
                let dy: f64 = r.sample(StandardNormal);
                GeoPoint::raw(centre.1 + cfg.sigma * dy, centre.0 + cfg.sigma * dx)
            })
            .collect()
    };
    let a = cluster(centre_a, 0);
    let b = cluster(centre_b, 1);

    let plant = |base: &[GeoPoint], at: (f64, f64)| -> Vec<GeoPoint> {
        let mut out = base.to_vec();
        out.extend(std::iter::repeat_n(GeoPoint::raw(at.1, at.0), cfg.outliers_per_cluster));
        out
    };
    let a_out = plant(&a, centre_b);
    let b_out = plant(&b, centre_a);

    let metric = GroundMetric::Euclidean;
    let method = WassersteinMethod::Sliced { n_proj: cfg.n_proj, seed: cfg.seed };
    // Inputs are non-empty by construction whenever n_per_cluster > 0.
    let hd = |x: &[GeoPoint], y: &[GeoPoint]| hausdorff_points(x, y, metric).unwrap_or(f64::NAN);
    let wd = |x: &[GeoPoint], y: &[GeoPoint]| wasserstein(x, y, method, metric).unwrap_or(f64::NAN);

    let hd_separated = hd(&a, &b);
    let hd_outlier = hd(&a_out, &b_out);
    let wd_separated = wd(&a, &b);
    let wd_outlier = wd(&a_out, &b_out);
    PathologyReport {
        hd_separated,
        hd_outlier,
        wd_separated,
        wd_outlier,
        hd_ratio: hd_separated / hd_outlier,
        wd_drift: (wd_outlier - wd_separated).abs() / wd_separated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instance_shows_the_effect() {
        let r = hd_wd_pathology_demo(&PathologyConfig::default());
        assert!(r.hd_ratio >= 4.0, "{r:?}");
        assert!(r.wd_drift <= 0.05, "{r:?}");
    }

    #[test]
    fn no_outliers_no_change() {
        let cfg = PathologyConfig { outliers_per_cluster: 0, ..Default::default() };
        let r = hd_wd_pathology_demo(&cfg);
        assert_eq!(r.hd_outlier, r.hd_separated);
        assert_eq!(r.wd_outlier, r.wd_separated);
    }
}
