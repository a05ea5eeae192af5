use serde::{Deserialize, Serialize};

use crate::{BoundingBox, Error, GeoPoint, Result};

/// Default upper bound on `nx * ny`.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// Regular grid over a bounding box. Cells are indexed row-major with rows
/// along latitude: `index = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bbox: BoundingBox,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(bbox: BoundingBox, nx: usize, ny: usize) -> Result<Self> {
        let grid = GridSpec { bbox, nx, ny };
        grid.validate(DEFAULT_CELL_CAP)?;
        Ok(grid)
    }

    pub fn validate(&self, cell_cap: usize) -> Result<()> {
        self.bbox.validate()?;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::param("grid", "nx and ny must be positive"));
        }
        match self.nx.checked_mul(self.ny) {
            Some(c) if c <= cell_cap => Ok(()),
            _ => Err(Error::param(
                "grid",
                format!("{} x {} cells exceeds cap {cell_cap}", self.nx, self.ny),
            )),
        }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell containing `p`; points on the max edge fall into the last cell,
    /// points outside the box have none.
    pub fn cell_of(&self, p: &GeoPoint) -> Option<usize> {
        if !self.bbox.contains(p) {
            return None;
        }
        let fx = (p.lon - self.bbox.min_lon) / self.bbox.lon_span();
        let fy = (p.lat - self.bbox.min_lat) / self.bbox.lat_span();
        let ix = ((fx * self.nx as f64) as usize).min(self.nx - 1);
        let iy = ((fy * self.ny as f64) as usize).min(self.ny - 1);
        Some(iy * self.nx + ix)
    }

    /// Centre of a cell as `(lat, lon)`.
    pub fn cell_center(&self, cell: usize) -> GeoPoint {
        let (ix, iy) = (cell % self.nx, cell / self.nx);
        GeoPoint::raw(
            self.bbox.min_lat + (iy as f64 + 0.5) * self.bbox.lat_span() / self.ny as f64,
            self.bbox.min_lon + (ix as f64 + 0.5) * self.bbox.lon_span() / self.nx as f64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub grid: GridSpec,
    pub counts: Vec<u64>,
    /// Sum of `counts`. Points outside the grid are not counted.
    pub total: u64,
}

impl Histogram2D {
    pub fn from_points<'a>(grid: GridSpec, points: impl IntoIterator<Item = &'a GeoPoint>) -> Self {
        let mut counts = vec![0u64; grid.cells()];
        let mut total = 0;
        for cell in points.into_iter().filter_map(|p| grid.cell_of(p)) {
            counts[cell] += 1;
            total += 1;
        }
        Histogram2D { grid, counts, total }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Indices of the `k` most populated cells, ordered by count descending and
/// then by cell index ascending.
pub fn top_k_cells(hist: &Histogram2D, k: usize) -> Vec<usize> {
    let mut cells: Vec<usize> = (0..hist.counts.len()).collect();
    cells.sort_by(|&a, &b| hist.counts[b].cmp(&hist.counts[a]).then(a.cmp(&b)));
    cells.truncate(k);
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotspotScore {
    pub recall_at_k: f64,
    pub jaccard: f64,
}

/// Overlap of the top-`k` cells of `real` and `gen`.
pub fn hotspot_preservation(
    real: &[GeoPoint],
    gen: &[GeoPoint],
    grid: &GridSpec,
    k: usize,
) -> Result<HotspotScore> {
    if real.is_empty() {
        return Err(Error::EmptyInput("real point set"));
    }
    if k == 0 || k > grid.cells() {
        return Err(Error::param("k", format!("need 1 <= k <= {}, got {k}", grid.cells())));
    }
    let top_real = top_k_cells(&Histogram2D::from_points(*grid, real), k);
    let top_gen = top_k_cells(&Histogram2D::from_points(*grid, gen), k);
    let inter = top_real.iter().filter(|c| top_gen.contains(c)).count();
    let union = top_real.len() + top_gen.len() - inter;
    Ok(HotspotScore {
        recall_at_k: inter as f64 / k as f64,
        jaccard: inter as f64 / union as f64,
    })
}

/// Jensen-Shannon divergence in bits between two probability vectors.
pub fn jsd_probabilities(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} bins", p.len(), q.len())));
    }
    let kl_to_mid = |x: &[f64]| -> f64 {
        x.iter()
            .zip(p.iter().zip(q))
            .filter(|(&xi, _)| xi > 0.0)
            .map(|(&xi, (&pi, &qi))| xi * (xi / (0.5 * (pi + qi))).log2())
            .sum()
    };
    let jsd = 0.5 * kl_to_mid(p) + 0.5 * kl_to_mid(q);
    Ok(jsd.clamp(0.0, 1.0))
}

/// JSD between the normalized occupancy histograms of two point sets.
pub fn jsd_histogram(a: &[GeoPoint], b: &[GeoPoint], grid: &GridSpec) -> Result<f64> {
    let ha = Histogram2D::from_points(*grid, a);
    let hb = Histogram2D::from_points(*grid, b);
    if ha.total == 0 || hb.total == 0 {
        return Err(Error::EmptyInput("point set (no points inside the grid)"));
    }
    jsd_probabilities(&ha.probabilities(), &hb.probabilities())
}
