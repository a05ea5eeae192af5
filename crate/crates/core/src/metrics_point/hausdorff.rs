use super::GroundMetric;
use crate::traj_core::EARTH_RADIUS_M;
use crate::{Error, GeoPoint, Result};

/// Symmetric Hausdorff distance `max(h(A, B), h(B, A))`.
///
/// Nearest-neighbour lookups go through a spatial index, and a query stops
/// early once it cannot raise the running maximum. The result is bit-equal to
/// the brute-force double loop because every reported minimum is a fully
/// resolved minimum over exact `metric.distance` values.
pub fn hausdorff_points(a: &[GeoPoint], b: &[GeoPoint], metric: GroundMetric) -> Result<f64> {
    Ok(directed_hausdorff(a, b, metric)?.max(directed_hausdorff(b, a, metric)?))
}

/// Directed Hausdorff distance `max_{p in from} min_{q in to} d(p, q)`.
pub fn directed_hausdorff(from: &[GeoPoint], to: &[GeoPoint], metric: GroundMetric) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    let index = NearestIndex::build(to, metric);
    let mut cmax = 0.0f64;
    for p in from {
        if let Some(d) = index.nearest_above(p, cmax) {
            cmax = d;
        }
    }
    Ok(cmax)
}

/// Relative slack on index lower bounds, far above float rounding.
const SLACK: f64 = 1e-9;

enum NearestIndex<'a> {
    Grid(Grid<'a>),
    LatSweep(LatSweep<'a>),
}

impl<'a> NearestIndex<'a> {
    fn build(points: &'a [GeoPoint], metric: GroundMetric) -> Self {
        match metric {
            GroundMetric::Euclidean => NearestIndex::Grid(Grid::build(points)),
            GroundMetric::Haversine => NearestIndex::LatSweep(LatSweep::build(points)),
        }
    }

    /// Exact nearest distance from `p` if it exceeds `floor`, else `None`.
    fn nearest_above(&self, p: &GeoPoint, floor: f64) -> Option<f64> {
        match self {
            NearestIndex::Grid(g) => g.nearest_above(p, floor),
            NearestIndex::LatSweep(s) => s.nearest_above(p, floor),
        }
    }
}

/// Uniform grid over `(lat, lon)` for the planar metric.
struct Grid<'a> {
    points: &'a [GeoPoint],
    min_lat: f64,
    min_lon: f64,
    cell: f64,
    nx: i64,
    ny: i64,
    /// Point indices bucketed by cell, CSR layout.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> Grid<'a> {
    fn build(points: &'a [GeoPoint]) -> Self {
        let (mut min_lat, mut max_lat, mut min_lon, mut max_lon) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_lat = min_lat.min(p.lat);
            max_lat = max_lat.max(p.lat);
            min_lon = min_lon.min(p.lon);
            max_lon = max_lon.max(p.lon);
        }
        let span = (max_lat - min_lat).max(max_lon - min_lon);
        let side = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = if span > 0.0 { span / side } else { 1.0 };
        let nx = (((max_lon - min_lon) / cell).floor() as i64 + 1).max(1);
        let ny = (((max_lat - min_lat) / cell).floor() as i64 + 1).max(1);
        let mut grid = Grid {
            points,
            min_lat,
            min_lon,
            cell,
            nx,
            ny,
            starts: vec![0; (nx * ny) as usize + 1],
            order: vec![0; points.len()],
        };
        let cell_ids: Vec<usize> = points
            .iter()
            .map(|p| {
                let (ix, iy) = grid.cell_coords(p);
                (iy.clamp(0, ny - 1) * nx + ix.clamp(0, nx - 1)) as usize
            })
            .collect();
        for &c in &cell_ids {
            grid.starts[c + 1] += 1;
        }
        for c in 0..(nx * ny) as usize {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cell_ids.iter().enumerate() {
            grid.order[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    fn cell_coords(&self, p: &GeoPoint) -> (i64, i64) {
        const LIMIT: f64 = 1e12;
        let ix = ((p.lon - self.min_lon) / self.cell).floor().clamp(-LIMIT, LIMIT);
        let iy = ((p.lat - self.min_lat) / self.cell).floor().clamp(-LIMIT, LIMIT);
        (ix as i64, iy as i64)
    }

    fn scan_cell(&self, ix: i64, iy: i64, p: &GeoPoint, best: &mut f64) {
        let c = (iy * self.nx + ix) as usize;
        for &i in &self.order[self.starts[c]..self.starts[c + 1]] {
            let d = GroundMetric::Euclidean.distance(p, &self.points[i]);
            if d < *best {
                *best = d;
            }
        }
    }

    fn nearest_above(&self, p: &GeoPoint, floor: f64) -> Option<f64> {
        let (cx, cy) = self.cell_coords(p);
        let gap = |c: i64, n: i64| if c < 0 { -c } else if c >= n { c - n + 1 } else { 0 };
        let r0 = gap(cx, self.nx).max(gap(cy, self.ny));
        let r_max = [cx, self.nx - 1 - cx, cy, self.ny - 1 - cy]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap();
        let mut best = f64::INFINITY;
        for r in r0..=r_max {
            let y_lo = (cy - r).max(0);
            let y_hi = (cy + r).min(self.ny - 1);
            for iy in y_lo..=y_hi {
                if iy == cy - r || iy == cy + r {
                    for ix in (cx - r).max(0)..=(cx + r).min(self.nx - 1) {
                        self.scan_cell(ix, iy, p, &mut best);
                    }
                } else {
                    for ix in [cx - r, cx + r] {
                        if (0..self.nx).contains(&ix) {
                            self.scan_cell(ix, iy, p, &mut best);
                        }
                    }
                }
            }
            if best <= floor {
                return None;
            }
            // Unvisited points lie at ring >= r + 1; one ring of margin
            // absorbs cell-assignment rounding at borders.
            let lower = (r as f64 - 1.0) * self.cell * (1.0 - SLACK);
            if lower > best {
                break;
            }
        }
        Some(best)
    }
}

/// Latitude-sorted sweep for great-circle distance, using
/// `haversine(p, q) >= R * |lat_p - lat_q|` as the pruning bound.
struct LatSweep<'a> {
    points: &'a [GeoPoint],
    by_lat: Vec<usize>,
}

impl<'a> LatSweep<'a> {
    fn build(points: &'a [GeoPoint]) -> Self {
        let mut by_lat: Vec<usize> = (0..points.len()).collect();
        by_lat.sort_by(|&i, &j| points[i].lat.total_cmp(&points[j].lat));
        LatSweep { points, by_lat }
    }

    fn bound(p: &GeoPoint, q: &GeoPoint) -> f64 {
        EARTH_RADIUS_M * (p.lat - q.lat).abs().to_radians() * (1.0 - SLACK)
    }

    fn nearest_above(&self, p: &GeoPoint, floor: f64) -> Option<f64> {
        let pts = self.points;
        let split = self.by_lat.partition_point(|&i| pts[i].lat < p.lat);
        let mut best = f64::INFINITY;
        let (mut up, mut down) = (split, split);
        let (mut up_open, mut down_open) = (true, true);
        while up_open || down_open {
            if up_open {
                if up < self.by_lat.len() {
                    let q = &pts[self.by_lat[up]];
                    if Self::bound(p, q) > best {
                        up_open = false;
                    } else {
                        best = best.min(GroundMetric::Haversine.distance(p, q));
                        up += 1;
                    }
                } else {
                    up_open = false;
                }
            }
            if down_open {
                if down > 0 {
                    let q = &pts[self.by_lat[down - 1]];
                    if Self::bound(p, q) > best {
                        down_open = false;
                    } else {
                        best = best.min(GroundMetric::Haversine.distance(p, q));
                        down -= 1;
                    }
                } else {
                    down_open = false;
                }
            }
            if best <= floor {
                return None;
            }
        }
        Some(best)
    }
}
