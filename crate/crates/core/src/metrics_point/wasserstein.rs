use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GroundMetric;
use crate::traj_core::{meters_per_degree_lat, meters_per_degree_lon};
use crate::{rng, Error, GeoPoint, Result};

/// Largest set size accepted by [`WassersteinMethod::ExactSmall`].
pub const EXACT_SMALL_MAX: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinMethod {
    /// Mean 1-D Wasserstein distance over `n_proj` random directions.
    Sliced { n_proj: usize, seed: u64 },
    /// Optimal assignment between equal-size sets of at most 2 000 points.
    ExactSmall,
}

impl Default for WassersteinMethod {
    fn default() -> Self {
        WassersteinMethod::Sliced { n_proj: 100, seed: 0 }
    }
}

/// Order-1 Wasserstein distance between the uniform empirical measures on
/// `a` and `b`.
///
/// Sliced mode projects planar coordinates: raw `(lon, lat)` under
/// [`GroundMetric::Euclidean`], local equirectangular meters around the joint
/// centroid under [`GroundMetric::Haversine`]. Exact mode uses the metric's
/// own distance as transport cost.
pub fn wasserstein(
    a: &[GeoPoint],
    b: &[GeoPoint],
    method: WassersteinMethod,
    metric: GroundMetric,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    match method {
        WassersteinMethod::Sliced { n_proj, seed } => sliced(a, b, n_proj, seed, metric),
        WassersteinMethod::ExactSmall => {
            if a.len() != b.len() || a.len() > EXACT_SMALL_MAX {
                return Err(Error::param(
                    "method",
                    format!(
                        "exact_small needs equal sizes <= {EXACT_SMALL_MAX}, got {} and {}",
                        a.len(),
                        b.len()
                    ),
                ));
            }
            let cost: Vec<Vec<f64>> = a
                .iter()
                .map(|p| b.iter().map(|q| metric.distance(p, q)).collect())
                .collect();
            let perm = assignment(&cost);
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            Ok(total / a.len() as f64)
        }
    }
}

type Projector = Box<dyn Fn(&GeoPoint) -> (f64, f64) + Sync>;

fn sliced(a: &[GeoPoint], b: &[GeoPoint], n_proj: usize, seed: u64, metric: GroundMetric) -> Result<f64> {
    if n_proj == 0 {
        return Err(Error::param("n_proj", "must be positive"));
    }
    let planar: Projector = match metric {
        GroundMetric::Euclidean => Box::new(|p: &GeoPoint| (p.lon, p.lat)),
        GroundMetric::Haversine => {
            let n = (a.len() + b.len()) as f64;
            let lat0 = a.iter().chain(b).map(|p| p.lat).sum::<f64>() / n;
            let lon0 = a.iter().chain(b).map(|p| p.lon).sum::<f64>() / n;
            let (kx, ky) = (meters_per_degree_lon(lat0), meters_per_degree_lat());
            Box::new(move |p: &GeoPoint| ((p.lon - lon0) * kx, (p.lat - lat0) * ky))
        }
    };
    let pa: Vec<(f64, f64)> = a.iter().map(&planar).collect();
    let pb: Vec<(f64, f64)> = b.iter().map(&planar).collect();

    let per_projection: Vec<f64> = (0..n_proj as u64)
        .into_par_iter()
        .map(|k| {
            let theta = rng::item_rng(seed, k).gen_range(0.0..std::f64::consts::TAU);
            let (c, s) = (theta.cos(), theta.sin());
            let mut u: Vec<f64> = pa.iter().map(|&(x, y)| x * c + y * s).collect();
            let mut v: Vec<f64> = pb.iter().map(|&(x, y)| x * c + y * s).collect();
            wasserstein_1d(&mut u, &mut v)
        })
        .collect();
    Ok(per_projection.iter().sum::<f64>() / n_proj as f64)
}

/// Exact 1-D order-1 Wasserstein distance between two empirical samples,
/// via the area between quantile functions. Sorts both slices in place.
/// Equal-size samples reduce to the mean absolute difference of sorted values.
pub fn wasserstein_1d(u: &mut [f64], v: &mut [f64]) -> f64 {
    assert!(!u.is_empty() && !v.is_empty(), "wasserstein_1d on empty sample");
    u.sort_by(f64::total_cmp);
    v.sort_by(f64::total_cmp);
    let (n, m) = (u.len(), v.len());
    if n == m {
        return u.iter().zip(v.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
    }
    // Quantile breakpoints in units of 1 / (n m).
    let (n64, m64) = (n as u64, m as u64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = 0u64;
    let mut total = 0.0;
    while i < n && j < m {
        let next_u = (i as u64 + 1) * m64;
        let next_v = (j as u64 + 1) * n64;
        let next = next_u.min(next_v);
        total += (next - prev) as f64 * (u[i] - v[j]).abs();
        prev = next;
        if next_u <= next_v {
            i += 1;
        }
        if next_v <= next_u {
            j += 1;
        }
    }
    total / (n64 * m64) as f64
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)). Returns `perm` with row `i` assigned to column
/// `perm[i]`.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");
    // 1-based potentials; column 0 is a virtual sink.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[owner[j] - 1] = j - 1;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn planar(pts: &[(f64, f64)]) -> Vec<GeoPoint> {
        pts.iter().map(|&(x, y)| GeoPoint::raw(y, x)).collect()
    }

    /// Minimum over all permutations.
    fn brute_assignment(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == cost.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost[row][j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn identical_sets_zero() {
        let a = planar(&[(0.0, 0.0), (1.0, 2.0), (3.0, -1.0)]);
        assert_eq!(wasserstein(&a, &a, WassersteinMethod::ExactSmall, GroundMetric::Euclidean).unwrap(), 0.0);
        let s = WassersteinMethod::Sliced { n_proj: 50, seed: 3 };
        assert_eq!(wasserstein(&a, &a, s, GroundMetric::Euclidean).unwrap(), 0.0);
        assert_eq!(wasserstein(&a, &a, s, GroundMetric::Haversine).unwrap(), 0.0);
    }

    #[test]
    fn point_masses() {
        let a = planar(&[(0.0, 0.0)]);
        let b = planar(&[(3.0, 4.0)]);
        assert_eq!(wasserstein(&a, &b, WassersteinMethod::ExactSmall, GroundMetric::Euclidean).unwrap(), 5.0);
    }

    #[test]
    fn exact_small_guards() {
        let a = planar(&[(0.0, 0.0), (1.0, 1.0)]);
        let b = planar(&[(0.0, 0.0)]);
        assert!(wasserstein(&a, &b, WassersteinMethod::ExactSmall, GroundMetric::Euclidean).is_err());
        assert!(wasserstein(&a, &[], WassersteinMethod::default(), GroundMetric::Euclidean).is_err());
        let big = vec![GeoPoint::raw(0.0, 0.0); EXACT_SMALL_MAX + 1];
        assert!(wasserstein(&big, &big, WassersteinMethod::ExactSmall, GroundMetric::Euclidean).is_err());
    }

    #[test]
    fn assignment_matches_permutation_search() {
        let mut rng = rng_from_seed(5);
        for n in 1..=7 {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
                let perm = assignment(&cost);
                let mut seen = perm.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                assert!((got - brute_assignment(&cost)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_d_hand_cases() {
        assert_eq!(wasserstein_1d(&mut [0.0], &mut [5.0]), 5.0);
        assert_eq!(wasserstein_1d(&mut [0.0, 1.0], &mut [0.0, 3.0]), 1.0);
        // {0} vs {0, 2}: half the mass moves by 2
        assert_eq!(wasserstein_1d(&mut [0.0], &mut [0.0, 2.0]), 1.0);
        // {0, 1, 2} vs {0, 3}
        // quantiles: [0,1/3) 0-0, [1/3,1/2) 1-0, [1/2,2/3) 1-3, [2/3,1] 2-3
        let want = (1.0 / 6.0) * 1.0 + (1.0 / 6.0) * 2.0 + (1.0 / 3.0) * 1.0;
        assert!((wasserstein_1d(&mut [2.0, 0.0, 1.0], &mut [3.0, 0.0]) - want).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn sliced_translation_invariant(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..30),
            shift in (-3.0f64..3.0, -3.0f64..3.0),
            seed in any::<u64>(),
        ) {
            let (a, b) = pts.split_at(pts.len() / 2);
            let m = WassersteinMethod::Sliced { n_proj: 16, seed };
            let base = wasserstein(&planar(a), &planar(b), m, GroundMetric::Euclidean).unwrap();
            let moved = |s: &[(f64, f64)]| planar(&s.iter().map(|&(x, y)| (x + shift.0, y + shift.1)).collect::<Vec<_>>());
            let shifted = wasserstein(&moved(a), &moved(b), m, GroundMetric::Euclidean).unwrap();
            prop_assert!((base - shifted).abs() <= 1e-9);
        }

        #[test]
        fn one_d_symmetric_nonnegative(
            u in prop::collection::vec(-10.0f64..10.0, 1..20),
            v in prop::collection::vec(-10.0f64..10.0, 1..20),
        ) {
            let uv = wasserstein_1d(&mut u.clone(), &mut v.clone());
            let vu = wasserstein_1d(&mut v.clone(), &mut u.clone());
            prop_assert!(uv >= 0.0);
            prop_assert!((uv - vu).abs() < 1e-12);
        }
    }
}
