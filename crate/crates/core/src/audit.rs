//! Empirical privacy auditing.
//!
//! Builds neighbouring datasets for a unit of privacy and lower-bounds the
//! epsilon a mechanism actually provides by Monte Carlo: run the mechanism
//! many times on both neighbours, estimate the probability of an event on
//! each side with Clopper-Pearson intervals, and take the log ratio of the
//! conservative ends.

use rand::seq::IteratorRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use statrs::function::beta::beta_reg;

use crate::accounting::UnitOfPrivacy;
use crate::metrics_point::{GridSpec, Histogram2D};
use crate::{rng, Error, Result, TrajectoryDataset};

/// Which unit to remove when building a neighbour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighbourTarget {
    /// Chosen by the seed among all eligible units.
    Random,
    User(String),
    Trajectory(String),
    /// A location, or the first location of a window, of one trajectory.
    Location { traj_id: String, index: usize },
}

/// Returns `(D1, D2)` where `D2` is `D1` minus one unit of privacy.
///
/// Removing a location or window that empties its trajectory removes the
/// trajectory as well.
pub fn make_neighbours(
    ds: &TrajectoryDataset,
    uop: UnitOfPrivacy,
    target: &NeighbourTarget,
    seed: u64,
) -> Result<(TrajectoryDataset, TrajectoryDataset)> {
    let mut r = rng::rng_from_seed(seed);
    let mut d2 = ds.clone();
    match uop {
        UnitOfPrivacy::User => {
            let user = match target {
                NeighbourTarget::Random => ds
                    .users()
                    .into_iter()
                    .choose(&mut r)
                    .ok_or_else(|| Error::TargetNotFound("dataset has no users".into()))?
                    .to_string(),
                NeighbourTarget::User(u) => u.clone(),
                other => return Err(mismatch(uop, other)),
            };
            d2.trajectories.retain(|t| t.user_id != user);
            if d2.len() == ds.len() {
                return Err(Error::TargetNotFound(format!("user `{user}`")));
            }
        }
        UnitOfPrivacy::Instance => {
            let idx = match target {
                NeighbourTarget::Random => {
                    if ds.is_empty() {
                        return Err(Error::TargetNotFound("dataset has no trajectories".into()));
                    }
                    r.gen_range(0..ds.len())
                }
                NeighbourTarget::Trajectory(id) => ds
                    .trajectories
                    .iter()
                    .position(|t| &t.id == id)
                    .ok_or_else(|| Error::TargetNotFound(format!("trajectory `{id}`")))?,
                other => return Err(mismatch(uop, other)),
            };
            d2.trajectories.remove(idx);
        }
        UnitOfPrivacy::Location | UnitOfPrivacy::MultiEvent { .. } => {
            let w = match uop {
                UnitOfPrivacy::MultiEvent { w } => w,
                _ => 1,
            };
            let (ti, start) = match target {
                NeighbourTarget::Random => {
                    // uniform over all windows that fit
                    let windows: Vec<(usize, usize)> = ds
                        .trajectories
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.len() >= w)
                        .flat_map(|(ti, t)| (0..=t.len() - w).map(move |s| (ti, s)))
                        .collect();
                    *windows
                        .get(r.gen_range(0..windows.len().max(1)))
                        .ok_or_else(|| Error::TargetNotFound(format!("no trajectory with {w} locations")))?
                }
                NeighbourTarget::Location { traj_id, index } => {
                    let ti = ds
                        .trajectories
                        .iter()
                        .position(|t| &t.id == traj_id)
                        .ok_or_else(|| Error::TargetNotFound(format!("trajectory `{traj_id}`")))?;
                    if index + w > ds.trajectories[ti].len() {
                        return Err(Error::TargetNotFound(format!(
                            "window [{index}, {}) of `{traj_id}` (length {})",
                            index + w,
                            ds.trajectories[ti].len()
                        )));
                    }
                    (ti, *index)
                }
                other => return Err(mismatch(uop, other)),
            };
            d2.trajectories[ti].points.drain(start..start + w);
            if d2.trajectories[ti].is_empty() {
                d2.trajectories.remove(ti);
            }
        }
    }
    Ok((ds.clone(), d2))
}

fn mismatch(uop: UnitOfPrivacy, target: &NeighbourTarget) -> Error {
    Error::param("target", format!("{target:?} does not select a {uop} unit"))
}

/// Two-sided exact binomial interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(successes <= trials && trials > 0);
    let alpha = 1.0 - confidence;
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, x, n - x + 1.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, x + 1.0, n - x)
    };
    (lower, upper)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Mechanism runs per dataset, at least 100.
    pub trials: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { trials: 10_000, confidence: 0.95, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ViolatesClaim,
    Consistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditResult {
    /// Lower bound on epsilon. `+inf` when the event was never seen on one
    /// neighbour yet is confidently present on the other; `NaN` (serialized
    /// as `null`) when the event fired on neither.
    #[serde(serialize_with = "ser_extended")]
    pub eps_lb: f64,
    /// Clopper-Pearson lower bound, always finite; holds at `confidence`.
    #[serde(serialize_with = "ser_extended")]
    pub eps_lb_ci: f64,
    pub p1: f64,
    pub p2: f64,
    pub p1_ci: (f64, f64),
    pub p2_ci: (f64, f64),
    pub hits1: u64,
    pub hits2: u64,
    pub trials: usize,
    pub confidence: f64,
}

impl AuditResult {
    pub fn is_unbounded(&self) -> bool {
        self.eps_lb == f64::INFINITY
    }

    pub fn is_inconclusive(&self) -> bool {
        self.eps_lb.is_nan()
    }

    /// Compares the confidence-level bound with a claimed epsilon.
    pub fn verdict(&self, claimed_epsilon: f64) -> Verdict {
        if self.is_inconclusive() {
            Verdict::Inconclusive
        } else if self.eps_lb_ci > claimed_epsilon {
            Verdict::ViolatesClaim
        } else {
            Verdict::Consistent
        }
    }
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_nan() {
        s.serialize_none()
    } else if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "+inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// Monte Carlo lower bound on the epsilon of `mechanism` between `d1` and
/// `d2`, using `event` as the distinguishing set. Both directions of the DP
/// inequality are checked. Trial `k` runs on `d1` with the `2k`-th derived
/// seed and on `d2` with the `2k + 1`-th.
pub fn estimate_epsilon_lb<D, O, M, E>(
    mechanism: M,
    d1: &D,
    d2: &D,
    event: E,
    cfg: &AuditConfig,
) -> Result<AuditResult>
where
    D: Sync,
    M: Fn(&D, u64) -> Result<O> + Sync,
    E: Fn(&O) -> bool + Sync,
{
    if cfg.trials < 100 {
        return Err(Error::param("trials", format!("need at least 100, got {}", cfg.trials)));
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::param("confidence", "must lie in (0, 1)"));
    }
    let (hits1, hits2) = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| -> Result<(u64, u64)> {
            let o1 = mechanism(d1, rng::derive_seed(cfg.seed, 2 * k))?;
            let o2 = mechanism(d2, rng::derive_seed(cfg.seed, 2 * k + 1))?;
            Ok((event(&o1) as u64, event(&o2) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;

    let n = cfg.trials as u64;
    let p1_ci = clopper_pearson(hits1, n, cfg.confidence);
    let p2_ci = clopper_pearson(hits2, n, cfg.confidence);
    let ratio = |lo: f64, up: f64| if lo > 0.0 { (lo / up).ln() } else { f64::NEG_INFINITY };
    let eps_lb_ci = ratio(p1_ci.0, p2_ci.1).max(ratio(p2_ci.0, p1_ci.1)).max(0.0);
    let eps_lb = if hits1 == 0 && hits2 == 0 {
        f64::NAN
    } else if (hits2 == 0 && p1_ci.0 > 0.0) || (hits1 == 0 && p2_ci.0 > 0.0) {
        f64::INFINITY
    } else {
        eps_lb_ci
    };
    Ok(AuditResult {
        eps_lb,
        eps_lb_ci,
        p1: hits1 as f64 / n as f64,
        p2: hits2 as f64 / n as f64,
        p1_ci,
        p2_ci,
        hits1,
        hits2,
        trials: cfg.trials,
        confidence: cfg.confidence,
    })
}

/// Binary randomized response: reports the true bit with probability
/// `e^eps / (1 + e^eps)`. A reference mechanism with known epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponse {
    pub epsilon: f64,
}

impl RandomizedResponse {
    pub fn release(&self, bit: &bool, seed: u64) -> Result<bool> {
        let keep = self.epsilon.exp() / (1.0 + self.epsilon.exp());
        Ok(if rng::rng_from_seed(seed).gen_bool(keep) { *bit } else { !*bit })
    }
}

/// Canned events over mechanism outputs.
pub mod events {
    use crate::mechanisms::NoisyHistogram;
    use crate::TrajectoryDataset;

    /// Released value of `cell` differs from zero.
    pub fn cell_nonzero(cell: usize) -> impl Fn(&NoisyHistogram) -> bool + Sync {
        move |h| h.values[cell] != 0.0
    }

    /// Released value of `cell` exceeds `threshold`.
    pub fn cell_above(cell: usize, threshold: f64) -> impl Fn(&NoisyHistogram) -> bool + Sync {
        move |h| h.values[cell] > threshold
    }

    /// Some released location satisfies `normal . (lat, lon) >= offset`.
    pub fn any_in_halfspace(normal: (f64, f64), offset: f64) -> impl Fn(&TrajectoryDataset) -> bool + Sync {
        move |ds| ds.points().any(|p| normal.0 * p.lat + normal.1 * p.lon >= offset)
    }
}

/// A cell occupied in exactly one of the two datasets, preferring the lowest
/// index. The natural target for a cell-nonzero event.
pub fn distinguishing_cell(d1: &TrajectoryDataset, d2: &TrajectoryDataset, grid: &GridSpec) -> Option<usize> {
    let h1 = Histogram2D::from_points(*grid, d1.points());
    let h2 = Histogram2D::from_points(*grid, d2.points());
    h1.counts
        .iter()
        .zip(&h2.counts)
        .position(|(&a, &b)| (a == 0) != (b == 0))
}
