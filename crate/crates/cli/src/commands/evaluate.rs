use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use trajbench::gen_eval::convergence_report;
use trajbench::metrics_point::{
    hausdorff_points, hotspot_preservation, jsd_histogram, range_query_error, wasserstein, GridSpec,
    GroundMetric, Histogram2D, RangeQueryConfig, WassersteinMethod,
};
use trajbench::metrics_traj::{
    distribution_distance, match_closest, segment_length_distribution, travelled_distance_distribution,
    DistributionMethod, TrajDistance,
};
use trajbench::traj_core::denormalize;
use trajbench::{BoundingBox, GeoPoint, TrajectoryDataset};

use super::{emit, header, load_canonical, Outcome};
use crate::args::{Grid, MetricList, Thresholds, ALL_METRICS};
use crate::config::Settings;
use crate::{plot, EvaluateArgs};

struct Ctx<'a> {
    real: &'a TrajectoryDataset,
    gen: &'a TrajectoryDataset,
    real_pts: Vec<GeoPoint>,
    gen_pts: Vec<GeoPoint>,
    grid: GridSpec,
    seed: u64,
    k: usize,
    n_proj: usize,
    queries: usize,
    radius_frac: f64,
}

/// Headline value, unit and details of one metric.
type Scored = (f64, &'static str, Value);

fn matched(c: &Ctx, d: TrajDistance) -> trajbench::Result<Scored> {
    let m = match_closest(c.gen, c.real, d, GroundMetric::Haversine)?;
    Ok((m.mean_distance(), "m", json!({ "n_gen": m.pairs.len(), "unmatched_real": m.unmatched_real.len() })))
}

/// Every generated id exists in `real` with the same length.
fn ids_align(real: &TrajectoryDataset, gen: &TrajectoryDataset) -> bool {
    let lens: HashMap<&str, usize> = real.trajectories.iter().map(|t| (t.id.as_str(), t.len())).collect();
    !gen.is_empty() && gen.trajectories.iter().all(|t| lens.get(t.id.as_str()) == Some(&t.len()))
}

fn score(name: &str, c: &Ctx) -> trajbench::Result<Option<Scored>> {
    Ok(Some(match name {
        "hd_points" => (hausdorff_points(&c.real_pts, &c.gen_pts, GroundMetric::Haversine)?, "m", Value::Null),
        "wd_sliced" => {
            let method = WassersteinMethod::Sliced { n_proj: c.n_proj, seed: c.seed };
            (wasserstein(&c.real_pts, &c.gen_pts, method, GroundMetric::Haversine)?, "m", json!({ "n_proj": c.n_proj }))
        }
        "jsd" => (jsd_histogram(&c.real_pts, &c.gen_pts, &c.grid)?, "bits", Value::Null),
        "range_query" => {
            let cfg = RangeQueryConfig {
                n_queries: c.queries,
                radius_frac: c.radius_frac,
                seed: c.seed,
                ..Default::default()
            };
            (range_query_error(&c.real_pts, &c.gen_pts, &cfg)?, "relative", json!({ "n_queries": c.queries, "radius_frac": c.radius_frac }))
        }
        "hotspot" => {
            let h = hotspot_preservation(&c.real_pts, &c.gen_pts, &c.grid, c.k)?;
            (h.recall_at_k, "ratio", json!({ "k": c.k, "recall_at_k": h.recall_at_k, "jaccard": h.jaccard }))
        }
        "dtw_matched" => matched(c, TrajDistance::Dtw)?,
        "hd_traj_matched" => matched(c, TrajDistance::Hausdorff)?,
        "travelled_wd" => {
            let (a, b) = (travelled_distance_distribution(c.real), travelled_distance_distribution(c.gen));
            (distribution_distance(&a, &b, DistributionMethod::Wd1)?, "m", Value::Null)
        }
        "segment_wd" => {
            let (a, b) = (segment_length_distribution(c.real), segment_length_distribution(c.gen));
            (distribution_distance(&a, &b, DistributionMethod::Wd1)?, "m", Value::Null)
        }
        "convergence" => {
            if !ids_align(c.real, c.gen) {
                return Ok(None);
            }
            let r = convergence_report(c.real, c.gen, c.real.norm.as_ref())?;
            (r.haversine_mean_m, "m", serde_json::to_value(&r).expect("plain struct"))
        }
        other => unreachable!("metric list validated: {other}"),
    }))
}

fn geographic(ds: TrajectoryDataset) -> Result<TrajectoryDataset> {
    Ok(if ds.normalized { denormalize(&ds)? } else { ds })
}

fn union(a: &BoundingBox, b: &BoundingBox) -> BoundingBox {
    BoundingBox {
        min_lat: a.min_lat.min(b.min_lat),
        max_lat: a.max_lat.max(b.max_lat),
        min_lon: a.min_lon.min(b.min_lon),
        max_lon: a.max_lon.max(b.max_lon),
    }
}

/// Hotspot recall is a score to keep high; every other metric is a distance.
fn violates(metric: &str, value: f64, limit: f64) -> bool {
    if metric == "hotspot" {
        value < limit
    } else {
        value > limit
    }
}

pub fn run(a: EvaluateArgs, s: &mut Settings, strict: bool) -> Result<Outcome> {
    let real_path: PathBuf = s.require("real", a.real.map(|p| p.display().to_string()))?.into();
    let gen_path: PathBuf = s.require("gen", a.gen.map(|p| p.display().to_string()))?.into();
    let metrics: MetricList = s.get("metrics", a.metrics, "all".parse().expect("valid"))?;
    let g: Grid = s.get("grid", a.grid, Grid { nx: 50, ny: 50 })?;
    let seed: u64 = s.get("seed", a.seed, 0)?;
    let k: usize = s.get("k", a.k, 10)?;
    let n_proj: usize = s.get("n-proj", a.n_proj, 100)?;
    let queries: usize = s.get("queries", a.queries, 200)?;
    let radius_frac: f64 = s.get("radius-frac", a.radius_frac, 0.05)?;
    let report_path: Option<String> = s.get_opt("report", a.report.map(|p| p.display().to_string()))?;
    let plots: Option<String> = s.get_opt("plots", a.plots.map(|p| p.display().to_string()))?;
    let flag_thresholds = (!a.thresholds.is_empty()).then_some(Thresholds(a.thresholds));
    let thresholds: Thresholds = s.get("threshold", flag_thresholds, Thresholds::default())?;

    let real = geographic(load_canonical(&real_path)?)?;
    let gen = geographic(load_canonical(&gen_path)?)?;
    let real_pts: Vec<GeoPoint> = real.points().copied().collect();
    let gen_pts: Vec<GeoPoint> = gen.points().copied().collect();
    let bbox = match BoundingBox::from_points(real_pts.iter().chain(&gen_pts)) {
        Some(b) => b,
        None => union(&real.bbox, &gen.bbox),
    };
    let grid = GridSpec::new(bbox, g.nx, g.ny)?;
    let ctx = Ctx { real: &real, gen: &gen, real_pts, gen_pts, grid, seed, k, n_proj, queries, radius_frac };

    let mut entries = Map::new();
    let mut failures = Vec::new();
    for name in ALL_METRICS.iter().filter(|m| metrics.0.iter().any(|x| x == *m)) {
        let entry = match score(name, &ctx) {
            Ok(Some((value, unit, details))) => {
                for t in thresholds.0.iter().filter(|t| t.metric == *name) {
                    if violates(name, value, t.max) {
                        failures.push(json!({ "metric": name, "value": value, "limit": t.max }));
                    }
                }
                let mut e = json!({ "value": value, "unit": unit });
                if !details.is_null() {
                    e["details"] = details;
                }
                e
            }
            Ok(None) => json!({ "value": null, "skipped": "generated ids do not align one-to-one with real ids" }),
            Err(e) => json!({ "value": null, "error": e.to_string() }),
        };
        entries.insert(name.to_string(), entry);
    }

    if let Some(dir) = &plots {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        plot::scatter(&ctx.real_pts, &ctx.gen_pts, &bbox, &dir.join("scatter.svg"))?;
        let hr = Histogram2D::from_points(grid, &ctx.real_pts);
        let hg = Histogram2D::from_points(grid, &ctx.gen_pts);
        plot::density(&hr, &hg, &dir.join("density.svg"))?;
    }

    let mut report = header("evaluate", s);
    report.insert(
        "datasets".into(),
        json!({
            "real": { "path": real_path, "trajectories": real.len(), "points": real.n_points() },
            "gen": { "path": gen_path, "trajectories": gen.len(), "points": gen.n_points() },
            "grid_bbox": bbox,
        }),
    );
    report.insert("metrics".into(), Value::Object(entries));
    let failed = !failures.is_empty();
    report.insert("failures".into(), Value::Array(failures));
    emit(&report.into(), report_path.as_deref().map(std::path::Path::new))?;
    Ok(if strict && failed { Outcome::StrictFailure } else { Outcome::Pass })
}
