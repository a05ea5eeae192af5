//! Baseline location-level mechanisms and the noisy-count pair used to
//! demonstrate the "noise only on observed elements" flaw.
//!
//! All mechanisms are deterministic given their seed. Trajectory mechanisms
//! draw from one stream per trajectory and count mechanisms from one stream
//! per cell, so results do not depend on processing order.

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::accounting::{PrivacyBudget, UnitOfPrivacy};
use crate::accounting::laplace_scale;
use crate::metrics_point::{GridSpec, Histogram2D, DEFAULT_CELL_CAP};
use crate::traj_core::{meters_per_degree_lat, meters_per_degree_lon};
use crate::{rng, Error, Result, TrajectoryDataset};

/// A release together with its privacy bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismOutput<P> {
    pub payload: P,
    pub budget_spent: PrivacyBudget,
    pub uop: UnitOfPrivacy,
    pub seed: u64,
    /// Set by mechanisms whose DP claim is known not to hold.
    pub known_flawed: bool,
}

/// Units in which noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseUnits {
    /// Meters, converted to degrees with a local equirectangular
    /// approximation at each trajectory's mean latitude.
    Meters,
    /// Directly in coordinate units (normalized or planar data).
    Native,
}

impl NoiseUnits {
    /// `Native` for normalized datasets, `Meters` otherwise.
    pub fn for_dataset(ds: &TrajectoryDataset) -> Self {
        if ds.normalized {
            NoiseUnits::Native
        } else {
            NoiseUnits::Meters
        }
    }
}

/// Released counts, one real value per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyHistogram {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// One Laplace(0, scale) draw by inverse CDF.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    // u in (-1/2, 1/2]; u = -1/2 is excluded so the log stays finite.
    let u: f64 = 0.5 - rng.gen::<f64>();
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Per-location coordinate-wise Laplace noise with scale
/// `sensitivity / epsilon` on each axis.
pub fn cnoise(
    ds: &TrajectoryDataset,
    epsilon: f64,
    sensitivity: f64,
    seed: u64,
    units: NoiseUnits,
) -> Result<MechanismOutput<TrajectoryDataset>> {
    let scale = laplace_scale(sensitivity, epsilon)?;
    let payload = perturb(ds, seed, units, |r| (sample_laplace(r, scale), sample_laplace(r, scale)));
    Ok(MechanismOutput {
        payload,
        budget_spent: PrivacyBudget::pure(epsilon)?,
        uop: UnitOfPrivacy::Location,
        seed,
        known_flawed: false,
    })
}

/// Planar Laplace (geo-indistinguishability): a uniform angle and a radius
/// with density proportional to `r exp(-epsilon r)`, sampled by inverting the
/// radial CDF with the lower branch of Lambert W.
pub fn planar_laplace(
    ds: &TrajectoryDataset,
    epsilon_per_unit: f64,
    seed: u64,
    units: NoiseUnits,
) -> Result<MechanismOutput<TrajectoryDataset>> {
    if !(epsilon_per_unit.is_finite() && epsilon_per_unit > 0.0) {
        return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon_per_unit}")));
    }
    let payload = perturb(ds, seed, units, |r| sample_planar_laplace(r, epsilon_per_unit));
    Ok(MechanismOutput {
        payload,
        budget_spent: PrivacyBudget::pure(epsilon_per_unit)?,
        uop: UnitOfPrivacy::Location,
        seed,
        known_flawed: false,
    })
}

/// One planar-Laplace displacement `(dx, dy)`.
pub fn sample_planar_laplace<R: Rng + ?Sized>(rng: &mut R, epsilon: f64) -> (f64, f64) {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = planar_laplace_inverse_cdf(rng.gen::<f64>(), epsilon);
    (r * theta.cos(), r * theta.sin())
}

/// Radial CDF `1 - (1 + epsilon r) exp(-epsilon r)`.
pub fn planar_laplace_cdf(r: f64, epsilon: f64) -> f64 {
    1.0 - (1.0 + epsilon * r) * (-epsilon * r).exp()
}

/// Inverse of [`planar_laplace_cdf`] for `p` in `[0, 1)`.
pub fn planar_laplace_inverse_cdf(p: f64, epsilon: f64) -> f64 {
    -(lambert_w_minus1((p - 1.0) / std::f64::consts::E) + 1.0) / epsilon
}

/// Lower real branch `W_{-1}` of the Lambert W function on `[-1/e, 0)`.
pub fn lambert_w_minus1(x: f64) -> f64 {
    let branch_point = -1.0 / std::f64::consts::E;
    debug_assert!((branch_point..0.0).contains(&x), "W_-1 domain is [-1/e, 0), got {x}");
    if x <= branch_point {
        return -1.0;
    }
    let mut w = if x < -0.25 {
        // series around the branch point
        let p = -(2.0 * (1.0 + std::f64::consts::E * x)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-12 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * w.abs() {
            break;
        }
    }
    w
}

fn perturb<F>(ds: &TrajectoryDataset, seed: u64, units: NoiseUnits, mut draw: F) -> TrajectoryDataset
where
    F: FnMut(&mut rand_chacha::ChaCha8Rng) -> (f64, f64),
{
    let mut out = ds.clone();
    let geographic = !ds.normalized;
    for (ti, traj) in out.trajectories.iter_mut().enumerate() {
        let mut r = rng::item_rng(seed, ti as u64);
        let (kx, ky) = match units {
            NoiseUnits::Native => (1.0, 1.0),
            NoiseUnits::Meters => (meters_per_degree_lon(traj.mean_lat()), meters_per_degree_lat()),
        };
        for p in &mut traj.points {
            let (dx, dy) = draw(&mut r);
            p.lon += dx / kx;
            p.lat += dy / ky;
            if geographic {
                p.lat = p.lat.clamp(-90.0, 90.0);
                if p.lon.abs() > 180.0 {
                    p.lon = (p.lon + 180.0).rem_euclid(360.0) - 180.0;
                }
            }
        }
    }
    out.recompute_bbox();
    out
}

/// Noisy grid counts with Laplace(1/epsilon) added only to occupied cells.
///
/// Empty cells are always released as exactly 0, so the presence of a single
/// location in a previously empty cell is revealed with certainty. The DP
/// claim does not hold; the output is flagged `known_flawed`.
pub fn noisy_count_flawed(
    ds: &TrajectoryDataset,
    grid: &GridSpec,
    epsilon: f64,
    seed: u64,
) -> Result<MechanismOutput<NoisyHistogram>> {
    noisy_counts(ds, grid, epsilon, seed, false, PostProcess::None)
}

/// Post-processing applied to released counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostProcess {
    None,
    /// Negative counts become 0.
    #[default]
    ClampNonneg,
}

/// Noisy grid counts with Laplace(1/epsilon) added to every cell.
pub fn noisy_count_correct(
    ds: &TrajectoryDataset,
    grid: &GridSpec,
    epsilon: f64,
    seed: u64,
    postprocess: PostProcess,
) -> Result<MechanismOutput<NoisyHistogram>> {
    noisy_counts(ds, grid, epsilon, seed, true, postprocess)
}

fn noisy_counts(
    ds: &TrajectoryDataset,
    grid: &GridSpec,
    epsilon: f64,
    seed: u64,
    all_cells: bool,
    postprocess: PostProcess,
) -> Result<MechanismOutput<NoisyHistogram>> {
    grid.validate(DEFAULT_CELL_CAP)?;
    // one location changes one cell by one
    let scale = laplace_scale(1.0, epsilon)?;
    let hist = Histogram2D::from_points(*grid, ds.points());
    let values = hist
        .counts
        .iter()
        .enumerate()
        .map(|(cell, &count)| {
            if !all_cells && count == 0 {
                return 0.0;
            }
            let v = count as f64 + sample_laplace(&mut rng::item_rng(seed, cell as u64), scale);
            match postprocess {
                PostProcess::None => v,
                PostProcess::ClampNonneg => v.max(0.0),
            }
        })
        .collect();
    Ok(MechanismOutput {
        payload: NoisyHistogram { grid: *grid, values },
        budget_spent: PrivacyBudget::pure(epsilon)?,
        uop: UnitOfPrivacy::Location,
        seed,
        known_flawed: !all_cells,
    })
}
