//! Independent reference implementations and input generators shared by the
//! integration tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use trajbench::metrics_point::GroundMetric;
use trajbench::traj_core::{PreprocessConfig, BEIJING_5TH_RING};
use trajbench::{GeoPoint, Trajectory, TrajectoryDataset};

/// max over both directions of the nearest-neighbour distance, by brute force.
pub fn brute_hausdorff(a: &[GeoPoint], b: &[GeoPoint], m: GroundMetric) -> f64 {
    let directed = |x: &[GeoPoint], y: &[GeoPoint]| {
        x.iter()
            .map(|p| y.iter().map(|q| m.distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Minimum over every monotone warping path, enumerated explicitly. The path
/// cost is accumulated as `d(step) + cost so far`.
pub fn dtw_enumerate(a: &[GeoPoint], b: &[GeoPoint], m: GroundMetric) -> f64 {
    fn walk(a: &[GeoPoint], b: &[GeoPoint], m: GroundMetric, i: usize, j: usize, acc: f64, best: &mut f64) {
        if i == a.len() - 1 && j == b.len() - 1 {
            *best = best.min(acc);
            return;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if ni < a.len() && nj < b.len() {
                walk(a, b, m, ni, nj, m.distance(&a[ni], &b[nj]) + acc, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, m, 0, 0, m.distance(&a[0], &b[0]), &mut best);
    best
}

/// Top-down memoized form of the warping recursion.
pub fn dtw_memo(a: &[GeoPoint], b: &[GeoPoint], m: GroundMetric) -> f64 {
    fn go(a: &[GeoPoint], b: &[GeoPoint], m: GroundMetric, i: usize, j: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if let Some(v) = memo.get(&(i, j)) {
            return *v;
        }
        let d = m.distance(&a[i], &b[j]);
        let v = if i == 0 && j == 0 {
            d
        } else {
            let mut best = f64::INFINITY;
            if i > 0 {
                best = best.min(go(a, b, m, i - 1, j, memo));
            }
            if j > 0 {
                best = best.min(go(a, b, m, i, j - 1, memo));
            }
            if i > 0 && j > 0 {
                best = best.min(go(a, b, m, i - 1, j - 1, memo));
            }
            d + best
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, m, a.len() - 1, b.len() - 1, &mut HashMap::new())
}

/// Minimum-cost perfect matching cost by successive shortest paths on the
/// bipartite flow network (queue-based Bellman-Ford on the residual graph).
pub fn ssp_matching_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let (s, t) = (2 * n, 2 * n + 1);
    // edge: (to, cap, cost, rev)
    let mut g: Vec<Vec<(usize, i32, f64, usize)>> = vec![Vec::new(); 2 * n + 2];
    let add = |g: &mut Vec<Vec<(usize, i32, f64, usize)>>, u: usize, v: usize, c: f64| {
        let (ru, rv) = (g[v].len(), g[u].len());
        g[u].push((v, 1, c, ru));
        g[v].push((u, 0, -c, rv));
    };
    for (i, row) in cost.iter().enumerate() {
        add(&mut g, s, i, 0.0);
        add(&mut g, n + i, t, 0.0);
        for (j, &c) in row.iter().enumerate() {
            add(&mut g, i, n + j, c);
        }
    }
    let mut total = 0.0;
    for _ in 0..n {
        let mut dist = vec![f64::INFINITY; 2 * n + 2];
        let mut prev = vec![(usize::MAX, usize::MAX); 2 * n + 2];
        let mut queued = vec![false; 2 * n + 2];
        let mut q = VecDeque::from([s]);
        dist[s] = 0.0;
        while let Some(u) = q.pop_front() {
            queued[u] = false;
            for (k, &(v, cap, c, _)) in g[u].iter().enumerate() {
                if cap > 0 && dist[u] + c < dist[v] - 1e-15 {
                    dist[v] = dist[u] + c;
                    prev[v] = (u, k);
                    if !queued[v] {
                        queued[v] = true;
                        q.push_back(v);
                    }
                }
            }
        }
        let mut v = t;
        while v != s {
            let (u, k) = prev[v];
            let rev = g[u][k].3;
            g[u][k].1 -= 1;
            g[v][rev].1 += 1;
            total += g[u][k].2;
            v = u;
        }
    }
    total
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, lat0: f64, lon0: f64, spread: f64) -> Vec<GeoPoint> {
    (0..n)
        .map(|_| GeoPoint::raw(lat0 + rng.gen_range(-spread..spread), lon0 + rng.gen_range(-spread..spread)))
        .collect()
}

/// Raw GPS-like trajectories around Beijing: irregular sampling, duplicate
/// timestamps, long gaps and excursions outside the 5th ring.
pub fn raw_geolife<R: Rng>(rng: &mut R, n_traj: usize) -> TrajectoryDataset {
    let b = BEIJING_5TH_RING;
    let trajectories = (0..n_traj)
        .map(|i| {
            let n = rng.gen_range(1..=450);
            let mut t = 1_224_730_384 + rng.gen_range(0..100_000i64);
            let mut lat = rng.gen_range(b.min_lat - 0.05..b.max_lat + 0.05);
            let mut lon = rng.gen_range(b.min_lon - 0.05..b.max_lon + 0.05);
            let points = (0..n)
                .map(|_| {
                    let p = GeoPoint::new(lat, lon).unwrap().at(t);
                    t += match rng.gen_range(0..100) {
                        0..=2 => rng.gen_range(60..3_000),
                        3..=5 => 0,
                        _ => rng.gen_range(1..=20),
                    };
                    lat = (lat + rng.gen_range(-0.002..0.002)).clamp(-89.0, 89.0);
                    lon = (lon + rng.gen_range(-0.002..0.002)).clamp(-179.0, 179.0);
                    p
                })
                .collect();
            Trajectory::new(format!("r{i}"), format!("u{}", i % 5), points).unwrap()
        })
        .collect();
    TrajectoryDataset::new(trajectories)
}

/// Containment, exact spacing and length bounds of preprocessed output.
pub fn check_preprocessed(ds: &TrajectoryDataset, cfg: &PreprocessConfig) -> Result<(), String> {
    ds.validate().map_err(|e| e.to_string())?;
    for t in &ds.trajectories {
        if t.len() < cfg.min_len || t.len() > cfg.max_len {
            return Err(format!("{}: length {}", t.id, t.len()));
        }
        if let Some(p) = t.points.iter().find(|p| !cfg.bbox.contains(p)) {
            return Err(format!("{}: ({}, {}) outside bbox", t.id, p.lat, p.lon));
        }
        for w in t.points.windows(2) {
            let dt = w[1].t.unwrap() - w[0].t.unwrap();
            if dt != cfg.interval_s {
                return Err(format!("{}: spacing {dt}", t.id));
            }
        }
    }
    Ok(())
}
