//! Trajectory-level metrics: DTW and trajectory Hausdorff for preservation,
//! closest-original matching for generators without a 1:1 mapping, and
//! travelled-distance / segment-length distributions for statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics_point::{hausdorff_points, jsd_probabilities, wasserstein_1d, GroundMetric};
use crate::traj_core::haversine;
use crate::{Error, GeoPoint, Result, Trajectory, TrajectoryDataset};

/// Dynamic time warping with additive cost, full table and no window.
/// Both sequences are aligned at their first and last points.
pub fn dtw(t1: &[GeoPoint], t2: &[GeoPoint], ground: GroundMetric) -> Result<f64> {
    if t1.is_empty() || t2.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let (n, m) = (t1.len(), t2.len());
    let w = m + 1;
    let mut table = vec![f64::INFINITY; (n + 1) * w];
    table[0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let best = table[(i - 1) * w + j - 1]
                .min(table[(i - 1) * w + j])
                .min(table[i * w + j - 1]);
            table[i * w + j] = ground.distance(&t1[i - 1], &t2[j - 1]) + best;
        }
    }
    Ok(table[n * w + m])
}

/// Hausdorff distance between the point sets of two trajectories.
pub fn hausdorff_traj(t1: &[GeoPoint], t2: &[GeoPoint], ground: GroundMetric) -> Result<f64> {
    hausdorff_points(t1, t2, ground)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajDistance {
    Dtw,
    Hausdorff,
}

impl TrajDistance {
    pub fn between(&self, a: &Trajectory, b: &Trajectory, ground: GroundMetric) -> Result<f64> {
        match self {
            TrajDistance::Dtw => dtw(&a.points, &b.points, ground),
            TrajDistance::Hausdorff => hausdorff_traj(&a.points, &b.points, ground),
        }
    }
}

/// Many-to-one assignment of generated trajectories to their nearest real one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// `(gen_index, real_index)`, one entry per generated trajectory, in order.
    pub pairs: Vec<(usize, usize)>,
    /// Distance of each pair.
    pub distances: Vec<f64>,
    /// Real trajectories no generated trajectory was matched to.
    pub unmatched_real: Vec<usize>,
}

impl Matching {
    pub fn mean_distance(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }
}

/// Matches every generated trajectory to its closest real trajectory under
/// `distance`. Ties go to the lower real index.
pub fn match_closest(
    gen: &TrajectoryDataset,
    real: &TrajectoryDataset,
    distance: TrajDistance,
    ground: GroundMetric,
) -> Result<Matching> {
    if gen.is_empty() || real.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let best: Vec<(usize, f64)> = gen
        .trajectories
        .par_iter()
        .map(|g| {
            let mut best = (0, f64::INFINITY);
            for (ri, r) in real.trajectories.iter().enumerate() {
                let d = distance.between(g, r, ground)?;
                if d < best.1 {
                    best = (ri, d);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut hit = vec![false; real.len()];
    for &(ri, _) in &best {
        hit[ri] = true;
    }
    Ok(Matching {
        pairs: best.iter().enumerate().map(|(gi, &(ri, _))| (gi, ri)).collect(),
        distances: best.iter().map(|&(_, d)| d).collect(),
        unmatched_real: hit.iter().enumerate().filter(|(_, &h)| !h).map(|(i, _)| i).collect(),
    })
}

/// Total great-circle length of each trajectory, in meters.
pub fn travelled_distance_distribution(ds: &TrajectoryDataset) -> Vec<f64> {
    ds.trajectories
        .iter()
        .map(|t| t.points.windows(2).map(|w| haversine(&w[0], &w[1])).sum())
        .collect()
}

/// Every consecutive-fix distance in the dataset, pooled, in meters.
pub fn segment_length_distribution(ds: &TrajectoryDataset) -> Vec<f64> {
    ds.trajectories
        .iter()
        .flat_map(|t| t.points.windows(2).map(|w| haversine(&w[0], &w[1])))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMethod {
    /// Exact 1-D Wasserstein distance.
    Wd1,
    /// JSD over `bins` equal-width bins spanning both samples.
    Jsd { bins: usize },
}

pub const DEFAULT_JSD_BINS: usize = 50;

/// Distance between two scalar samples.
pub fn distribution_distance(d1: &[f64], d2: &[f64], method: DistributionMethod) -> Result<f64> {
    if d1.is_empty() || d2.is_empty() {
        return Err(Error::EmptyInput("distribution sample"));
    }
    match method {
        DistributionMethod::Wd1 => Ok(wasserstein_1d(&mut d1.to_vec(), &mut d2.to_vec())),
        DistributionMethod::Jsd { bins } => {
            if bins == 0 {
                return Err(Error::param("bins", "must be positive"));
            }
            let lo = d1.iter().chain(d2).copied().fold(f64::INFINITY, f64::min);
            let hi = d1.iter().chain(d2).copied().fold(f64::NEG_INFINITY, f64::max);
            let histogram = |xs: &[f64]| {
                let mut h = vec![0.0; bins];
                for &x in xs {
                    let b = if hi > lo {
                        (((x - lo) / (hi - lo)) * bins as f64) as usize
                    } else {
                        0
                    };
                    h[b.min(bins - 1)] += 1.0;
                }
                let n = xs.len() as f64;
                h.iter_mut().for_each(|v| *v /= n);
                h
            };
            jsd_probabilities(&histogram(d1), &histogram(d2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn line(id: &str, pts: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(id, "u", pts.iter().map(|&(a, b)| GeoPoint::raw(a, b)).collect()).unwrap()
    }

    /// Exhaustive enumeration of monotone alignments, accumulating from the
    /// start of the path.
    fn dtw_paths(a: &[GeoPoint], b: &[GeoPoint], g: GroundMetric) -> f64 {
        fn walk(a: &[GeoPoint], b: &[GeoPoint], g: GroundMetric, i: usize, j: usize, acc: f64) -> f64 {
            let acc = g.distance(&a[i], &b[j]) + acc;
            if i + 1 == a.len() && j + 1 == b.len() {
                return acc;
            }
            let mut best = f64::INFINITY;
            if i + 1 < a.len() && j + 1 < b.len() {
                best = best.min(walk(a, b, g, i + 1, j + 1, acc));
            }
            if i + 1 < a.len() {
                best = best.min(walk(a, b, g, i + 1, j, acc));
            }
            if j + 1 < b.len() {
                best = best.min(walk(a, b, g, i, j + 1, acc));
            }
            best
        }
        walk(a, b, g, 0, 0, 0.0)
    }

    #[test]
    fn dtw_identity_and_errors() {
        let t = line("a", &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]);
        assert_eq!(dtw(&t.points, &t.points, GroundMetric::Euclidean).unwrap(), 0.0);
        assert!(dtw(&[], &t.points, GroundMetric::Euclidean).is_err());
    }

    #[test]
    fn dtw_single_point_collapses_to_sum() {
        let p = [GeoPoint::raw(0.0, 0.0)];
        let t = line("b", &[(3.0, 4.0), (0.0, 1.0), (6.0, 8.0)]);
        assert_eq!(dtw(&p, &t.points, GroundMetric::Euclidean).unwrap(), 5.0 + 1.0 + 10.0);
    }

    #[test]
    fn dtw_matches_path_enumeration() {
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            let mk = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<GeoPoint> {
                (0..k).map(|_| GeoPoint::raw(rng.gen_range(39.0..40.0), rng.gen_range(116.0..117.0))).collect()
            };
            let a = mk(n, &mut rng);
            let b = mk(m, &mut rng);
            for g in [GroundMetric::Euclidean, GroundMetric::Haversine] {
                let v = dtw(&a, &b, g).unwrap();
                assert_eq!(v.to_bits(), dtw_paths(&a, &b, g).to_bits());
                assert_eq!(v, dtw(&b, &a, g).unwrap());
            }
        }
    }

    #[test]
    fn hausdorff_traj_is_order_free() {
        let t = line("a", &[(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)]);
        let mut rev = t.points.clone();
        rev.reverse();
        assert_eq!(hausdorff_traj(&t.points, &rev, GroundMetric::Euclidean).unwrap(), 0.0);
        let u = line("b", &[(0.0, 1.0), (5.0, 2.0)]);
        // directed t->u: max(1, sqrt(1+9)... ) computed by hand below
        let d = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        let tu = [(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)]
            .iter()
            .map(|&p| d(p, (0.0, 1.0)).min(d(p, (5.0, 2.0))))
            .fold(0.0, f64::max);
        let ut = [(0.0, 1.0), (5.0, 2.0)]
            .iter()
            .map(|&p| [(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)].iter().map(|&q| d(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(hausdorff_traj(&t.points, &u.points, GroundMetric::Euclidean).unwrap(), tu.max(ut));
    }

    #[test]
    fn matching_rules() {
        let real = TrajectoryDataset::new(vec![
            line("r0", &[(0.0, 0.0), (0.0, 1.0)]),
            line("r1", &[(5.0, 5.0), (5.0, 6.0)]),
        ]);
        let m = match_closest(&real, &real, TrajDistance::Dtw, GroundMetric::Euclidean).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.distances, vec![0.0, 0.0]);
        assert!(m.unmatched_real.is_empty());

        // DTW 3 to the first, 7 to the second
        let real = TrajectoryDataset::new(vec![line("a", &[(3.0, 0.0)]), line("b", &[(7.0, 0.0)])]);
        let gen = TrajectoryDataset::new(vec![line("g", &[(0.0, 0.0)])]);
        let m = match_closest(&gen, &real, TrajDistance::Dtw, GroundMetric::Euclidean).unwrap();
        assert_eq!(m.pairs, vec![(0, 0)]);
        assert_eq!(m.distances, vec![3.0]);
        assert_eq!(m.unmatched_real, vec![1]);

        // tie
        let real = TrajectoryDataset::new(vec![line("a", &[(2.0, 0.0)]), line("b", &[(-2.0, 0.0)])]);
        let m = match_closest(&gen, &real, TrajDistance::Hausdorff, GroundMetric::Euclidean).unwrap();
        assert_eq!(m.pairs, vec![(0, 0)]);
    }

    #[test]
    fn travelled_and_segments() {
        let still = line("s", &[(39.9, 116.4), (39.9, 116.4)]);
        // three points 100 m apart along a meridian
        let step = 100.0 / crate::traj_core::meters_per_degree_lat();
        let walk = line("w", &[(39.9, 116.4), (39.9 + step, 116.4), (39.9 + 2.0 * step, 116.4)]);
        let single = line("p", &[(39.9, 116.4)]);
        let ds = TrajectoryDataset::new(vec![still, walk, single]);
        let td = travelled_distance_distribution(&ds);
        assert_eq!(td.len(), 3);
        assert_eq!(td[0], 0.0);
        assert!((td[1] - 200.0).abs() < 1e-6, "{}", td[1]);
        assert_eq!(td[2], 0.0);
        let seg = segment_length_distribution(&ds);
        assert_eq!(seg.len(), 1 + 2);
        assert_eq!(seg[0], 0.0);
        assert!((seg[1] - 100.0).abs() < 1e-6 && (seg[2] - 100.0).abs() < 1e-6);
    }

    #[test]
    fn distribution_cases() {
        let d = [1.0, 4.0, 2.0];
        assert_eq!(distribution_distance(&d, &d, DistributionMethod::Wd1).unwrap(), 0.0);
        assert_eq!(distribution_distance(&d, &d, DistributionMethod::Jsd { bins: 50 }).unwrap(), 0.0);
        assert_eq!(distribution_distance(&[0.0], &[5.0], DistributionMethod::Wd1).unwrap(), 5.0);
        assert_eq!(distribution_distance(&[0.0, 1.0], &[0.0, 3.0], DistributionMethod::Wd1).unwrap(), 1.0);
        assert_eq!(distribution_distance(&[0.0], &[5.0], DistributionMethod::Jsd { bins: 10 }).unwrap(), 1.0);
        assert!(distribution_distance(&[], &d, DistributionMethod::Wd1).is_err());
    }
}
