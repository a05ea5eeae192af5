//! Generated-vs-input comparison: TrajLoss evaluated as a metric, and the
//! convergence report pairing generated trajectories with their inputs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::traj_core::{compute_normalization, denormalize, haversine};
use crate::{Error, NormVariant, NormalizationParams, Result, Trajectory, TrajectoryDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajLossWeights {
    /// Adversarial (BCE) term.
    pub alpha: f64,
    /// Spatial MSE term.
    pub beta: f64,
    /// Temporal cross-entropy term.
    pub gamma: f64,
    /// Category cross-entropy term.
    pub c: f64,
}

impl Default for TrajLossWeights {
    fn default() -> Self {
        TrajLossWeights { alpha: 1.0, beta: 1.0, gamma: 1.0, c: 1.0 }
    }
}

impl TrajLossWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.alpha, self.beta, self.gamma, self.c];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("weights", "must be finite and non-negative"));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::param("weights", "at least one weight must be positive"));
        }
        Ok(())
    }
}

/// One time step as seen by a generator: normalized coordinates and
/// probability vectors for each categorical channel. Empty channels are
/// absent from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedStep {
    /// `[lat, lon]`, normalized.
    pub coords: [f64; 2],
    pub hour: Vec<f64>,
    pub day: Vec<f64>,
    pub category: Vec<f64>,
}

pub type EncodedTrajectory = Vec<EncodedStep>;

/// One-hot encodes a trajectory's attributes: 24 hour slots, 7 day slots and
/// `n_categories` category slots. Missing attributes give empty channels.
pub fn encode_trajectory(traj: &Trajectory, n_categories: usize) -> Result<EncodedTrajectory> {
    fn one_hot(v: Option<usize>, width: usize, name: &'static str) -> Result<Vec<f64>> {
        match v {
            None => Ok(Vec::new()),
            Some(i) if i < width => {
                let mut h = vec![0.0; width];
                h[i] = 1.0;
                Ok(h)
            }
            Some(i) => Err(Error::param(name, format!("value {i} outside 0..{width}"))),
        }
    }
    traj.points
        .iter()
        .map(|p| {
            Ok(EncodedStep {
                coords: [p.lat, p.lon],
                hour: one_hot(p.attrs.hour.map(usize::from), 24, "hour")?,
                day: one_hot(p.attrs.day.map(usize::from), 7, "day")?,
                category: one_hot(p.attrs.category.map(|c| c as usize), n_categories, "category")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajLossBreakdown {
    pub total: f64,
    pub l_bce: f64,
    pub l_s: f64,
    pub l_t: f64,
    pub l_c: f64,
}

/// Floor applied to predicted probabilities inside logarithms.
const PROB_FLOOR: f64 = 1e-12;

/// `-sum t_k ln p_k`, skipping zero targets.
fn cross_entropy(target: &[f64], pred: &[f64]) -> f64 {
    target
        .iter()
        .zip(pred)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, p)| -t * p.max(PROB_FLOOR).ln())
        .sum()
}

/// Evaluates `alpha BCE(y_r, y_p) + beta L_s + gamma L_t + c L_c`.
///
/// * `l_bce`: mean binary cross-entropy of discriminator scores `y_p` against labels `y_r`
/// * `l_s`: mean squared error over every coordinate of every aligned step
/// * `l_t`: mean per-step cross-entropy of the hour and day channels, summed
/// * `l_c`: mean per-step cross-entropy of the category channel
pub fn trajloss(
    y_r: &[f64],
    y_p: &[f64],
    t_r: &[EncodedTrajectory],
    t_s: &[EncodedTrajectory],
    w: &TrajLossWeights,
) -> Result<TrajLossBreakdown> {
    w.validate()?;
    if y_r.len() != y_p.len() {
        return Err(Error::LengthMismatch(format!("{} labels vs {} scores", y_r.len(), y_p.len())));
    }
    if let Some(p) = y_p.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::param("y_p", format!("scores must lie in (0, 1), got {p}")));
    }
    if let Some(y) = y_r.iter().find(|y| !(0.0..=1.0).contains(*y)) {
        return Err(Error::param("y_r", format!("labels must lie in [0, 1], got {y}")));
    }
    if t_r.len() != t_s.len() {
        return Err(Error::LengthMismatch(format!("{} real vs {} generated trajectories", t_r.len(), t_s.len())));
    }

    let l_bce = if y_r.is_empty() {
        0.0
    } else {
        y_r.iter()
            .zip(y_p)
            .map(|(&y, &p)| -(y * p.ln() + (1.0 - y) * (1.0 - p).ln()))
            .sum::<f64>()
            / y_r.len() as f64
    };

    let (mut sq, mut temporal, mut categorical, mut steps) = (0.0, 0.0, 0.0, 0usize);
    for (k, (r, s)) in t_r.iter().zip(t_s).enumerate() {
        if r.len() != s.len() {
            return Err(Error::LengthMismatch(format!("pair {k}: {} vs {} steps", r.len(), s.len())));
        }
        for (a, b) in r.iter().zip(s) {
            if a.hour.len() != b.hour.len() || a.day.len() != b.day.len() || a.category.len() != b.category.len() {
                return Err(Error::LengthMismatch(format!("pair {k}: categorical channel widths differ")));
            }
            sq += (a.coords[0] - b.coords[0]).powi(2) + (a.coords[1] - b.coords[1]).powi(2);
            temporal += cross_entropy(&a.hour, &b.hour) + cross_entropy(&a.day, &b.day);
            categorical += cross_entropy(&a.category, &b.category);
            steps += 1;
        }
    }
    let (l_s, l_t, l_c) = if steps == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let n = steps as f64;
        (sq / (2.0 * n), temporal / n, categorical / n)
    };
    Ok(TrajLossBreakdown {
        total: w.alpha * l_bce + w.beta * l_s + w.gamma * l_t + w.c * l_c,
        l_bce,
        l_s,
        l_t,
        l_c,
    })
}

/// Mean distances and attribute mismatch rates between generated
/// trajectories and the inputs they were generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub haversine_mean_m: f64,
    pub euclidean_mean_norm: f64,
    /// Percent of comparable slots whose hour differs; `None` without hours.
    pub pct_hour_diff: Option<f64>,
    pub pct_day_diff: Option<f64>,
    pub pct_category_diff: Option<f64>,
    pub n_pairs: usize,
    pub n_points: usize,
}

/// Pairs each generated trajectory with the input of the same id.
///
/// Normalized datasets are denormalized first. Euclidean distances are taken
/// in normalized space under `norm`, falling back to the inputs' recorded
/// parameters and finally to min-max parameters computed from the inputs
/// (the verbatim variant has a negative scale for western longitudes).
pub fn convergence_report(
    inputs: &TrajectoryDataset,
    generated: &TrajectoryDataset,
    norm: Option<&NormalizationParams>,
) -> Result<ConvergenceReport> {
    let geo = |ds: &TrajectoryDataset| if ds.normalized { denormalize(ds) } else { Ok(ds.clone()) };
    let inputs_geo = geo(inputs)?;
    let generated_geo = geo(generated)?;
    let params = match norm.or(inputs.norm.as_ref()) {
        Some(p) => *p,
        None => compute_normalization(&inputs_geo, NormVariant::MinMax)?,
    };
    params.validate()?;

    let by_id: HashMap<&str, &Trajectory> =
        inputs_geo.trajectories.iter().map(|t| (t.id.as_str(), t)).collect();
    let (mut hav, mut euc, mut n_points) = (0.0, 0.0, 0usize);
    let mut diffs = [(0usize, 0usize); 3];
    for g in &generated_geo.trajectories {
        let r = by_id.get(g.id.as_str()).ok_or_else(|| Error::Unmatched(g.id.clone()))?;
        if r.len() != g.len() {
            return Err(Error::LengthMismatch(format!("`{}`: {} input vs {} generated points", g.id, r.len(), g.len())));
        }
        for (a, b) in r.points.iter().zip(&g.points) {
            hav += haversine(a, b);
            let (na, nb) = (params.apply(a), params.apply(b));
            euc += (na.lat - nb.lat).hypot(na.lon - nb.lon);
            n_points += 1;
            let slots = [
                (a.attrs.hour.map(u32::from), b.attrs.hour.map(u32::from)),
                (a.attrs.day.map(u32::from), b.attrs.day.map(u32::from)),
                (a.attrs.category, b.attrs.category),
            ];
            for (d, slot) in diffs.iter_mut().zip(slots) {
                if let (Some(x), Some(y)) = slot {
                    d.0 += 1;
                    d.1 += (x != y) as usize;
                }
            }
        }
    }
    if n_points == 0 {
        return Err(Error::EmptyDataset);
    }
    let pct = |(total, differ): (usize, usize)| (total > 0).then(|| 100.0 * differ as f64 / total as f64);
    Ok(ConvergenceReport {
        haversine_mean_m: hav / n_points as f64,
        euclidean_mean_norm: euc / n_points as f64,
        pct_hour_diff: pct(diffs[0]),
        pct_day_diff: pct(diffs[1]),
        pct_category_diff: pct(diffs[2]),
        n_pairs: generated_geo.len(),
        n_points,
    })
}
