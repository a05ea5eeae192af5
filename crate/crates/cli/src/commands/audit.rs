use std::collections::HashMap;

use anyhow::{bail, Result};
use serde_json::{json, Value};
use trajbench::audit::{
    distinguishing_cell, estimate_epsilon_lb, events, make_neighbours, AuditConfig, AuditResult, NeighbourTarget,
    RandomizedResponse,
};
use trajbench::mechanisms::{
    cnoise, noisy_count_correct, noisy_count_flawed, planar_laplace, NoisyHistogram, PostProcess, UnitOfPrivacy,
};
use trajbench::metrics_point::{GridSpec, GroundMetric, Histogram2D};
use trajbench::{rng, GeoPoint, TrajectoryDataset};

use super::{emit, header, load_canonical, Outcome};
use crate::args::{Event, Grid, Mechanism, PostProcessArg, Target, Units, Uop};
use crate::config::Settings;
use crate::AuditArgs;

/// Random neighbour draws tried when looking for one that empties a cell.
const NEIGHBOUR_ATTEMPTS: u64 = 256;

/// First cell whose count differs between the neighbours.
fn differing_cell(d1: &TrajectoryDataset, d2: &TrajectoryDataset, grid: &GridSpec) -> Option<usize> {
    let h1 = Histogram2D::from_points(*grid, d1.points());
    let h2 = Histogram2D::from_points(*grid, d2.points());
    h1.counts.iter().zip(&h2.counts).position(|(a, b)| a != b)
}

/// First point of `d1` with no counterpart in `d2`.
fn removed_point(d1: &TrajectoryDataset, d2: &TrajectoryDataset) -> Option<GeoPoint> {
    let key = |p: &GeoPoint| (p.lat.to_bits(), p.lon.to_bits());
    let mut left: HashMap<(u64, u64), usize> = HashMap::new();
    for p in d2.points() {
        *left.entry(key(p)).or_default() += 1;
    }
    d1.points().copied().find(|p| match left.get_mut(&key(p)) {
        Some(n) if *n > 0 => {
            *n -= 1;
            false
        }
        _ => true,
    })
}

pub fn run(a: AuditArgs, s: &mut Settings, strict: bool) -> Result<Outcome> {
    let mechanism: Mechanism = s.require("mechanism", a.mechanism)?;
    let epsilon: f64 = s.require("epsilon", a.epsilon)?;
    let claimed: f64 = s.get("claimed-epsilon", a.claimed_epsilon, epsilon)?;
    let cfg = AuditConfig {
        trials: s.get("trials", a.trials, 10_000)?,
        confidence: s.get("confidence", a.confidence, 0.95)?,
        seed: s.get("seed", a.seed, 0)?,
    };
    let event_arg: Event = s.get("event", a.event, Event::Auto)?;
    let report_path: Option<String> = s.get_opt("report", a.report.map(|p| p.display().to_string()))?;

    let (result, event, known_flawed, uop): (AuditResult, Value, bool, Option<UnitOfPrivacy>) =
        if mechanism == Mechanism::RandomizedResponse {
            if !matches!(event_arg, Event::Auto | Event::ReportTrue) {
                bail!("randomized-response supports only the report-true event");
            }
            let rr = RandomizedResponse { epsilon };
            let r = estimate_epsilon_lb(|b: &bool, seed| rr.release(b, seed), &true, &false, |o: &bool| *o, &cfg)?;
            (r, json!({ "name": "report-true" }), false, None)
        } else {
            let input: String = s.require("input", a.input.map(|p| p.display().to_string()))?;
            let uop: Uop = s.get("uop", a.uop, Uop(UnitOfPrivacy::Location))?;
            let target: Target = s.get("target", a.target, Target(NeighbourTarget::Random))?;
            let ds = load_canonical(input.as_ref())?;

            if mechanism.is_count() {
                let g: Grid = s.get("grid", a.grid, Grid { nx: 50, ny: 50 })?;
                let grid = GridSpec::new(ds.bbox, g.nx, g.ny)?;
                let nonzero = matches!(event_arg, Event::Auto | Event::CellNonzero);
                // A random neighbour is redrawn until removing it empties a cell,
                // which is where a cell-occupancy event has power.
                let attempts = if nonzero && target.0 == NeighbourTarget::Random { NEIGHBOUR_ATTEMPTS } else { 1 };
                let mut pair = None;
                for i in 0..attempts {
                    let seed = if i == 0 { cfg.seed } else { rng::derive_seed(cfg.seed, u64::MAX - i) };
                    let (d1, d2) = make_neighbours(&ds, uop.0, &target.0, seed)?;
                    let found = nonzero.then(|| distinguishing_cell(&d1, &d2, &grid)).flatten();
                    if found.is_some() || pair.is_none() {
                        let cell = found.or_else(|| differing_cell(&d1, &d2, &grid));
                        pair = Some((d1, d2, cell));
                    }
                    if found.is_some() {
                        break;
                    }
                }
                let (d1, d2, cell) = pair.expect("at least one attempt");
                let Some(cell) = cell else { bail!("the neighbours have identical grid counts; refine --grid") };

                let pp: PostProcess = s.get("postprocess", a.postprocess, PostProcessArg::ClampNonneg)?.into();
                let flawed = mechanism == Mechanism::NoisyCountFlawed;
                let mech = |d: &TrajectoryDataset, seed: u64| -> trajbench::Result<NoisyHistogram> {
                    Ok(if flawed {
                        noisy_count_flawed(d, &grid, epsilon, seed)?.payload
                    } else {
                        noisy_count_correct(d, &grid, epsilon, seed, pp)?.payload
                    })
                };
                let (r, ev) = match event_arg {
                    Event::Auto | Event::CellNonzero => (
                        estimate_epsilon_lb(mech, &d1, &d2, events::cell_nonzero(cell), &cfg)?,
                        json!({ "name": "cell-nonzero", "cell": cell }),
                    ),
                    Event::CellAbove => {
                        let thr: f64 = s.get("cell-threshold", a.cell_threshold, 0.5)?;
                        let r = estimate_epsilon_lb(mech, &d1, &d2, events::cell_above(cell, thr), &cfg)?;
                        (r, json!({ "name": "cell-above", "cell": cell, "threshold": thr }))
                    }
                    other => bail!("event `{other}` does not apply to count mechanisms"),
                };
                (r, ev, flawed, Some(uop.0))
            } else {
                let (d1, d2) = make_neighbours(&ds, uop.0, &target.0, cfg.seed)?;
                let units = s.get("units", a.units, Units::Auto)?.resolve(&ds);
                let sens: f64 = s.get("sensitivity", a.sensitivity, 1.0)?;
                let run_cnoise = mechanism == Mechanism::Cnoise;
                let mech = |d: &TrajectoryDataset, seed: u64| -> trajbench::Result<TrajectoryDataset> {
                    Ok(if run_cnoise {
                        cnoise(d, epsilon, sens, seed, units)?.payload
                    } else {
                        planar_laplace(d, epsilon, seed, units)?.payload
                    })
                };
                match event_arg {
                    Event::Halfspace => {
                        let Some(hs) = s.get_opt("halfspace", a.halfspace)? else {
                            bail!("the halfspace event needs --halfspace A,B,C");
                        };
                        let r = estimate_epsilon_lb(mech, &d1, &d2, events::any_in_halfspace(hs.normal, hs.offset), &cfg)?;
                        (r, json!({ "name": "halfspace", "halfspace": hs }), false, Some(uop.0))
                    }
                    Event::Auto | Event::Near => {
                        let metric = if ds.normalized { GroundMetric::Euclidean } else { GroundMetric::Haversine };
                        let center = removed_point(&d1, &d2).expect("neighbours differ by at least one point");
                        let gap = d2.points().map(|p| metric.distance(p, &center)).fold(f64::INFINITY, f64::min);
                        let default_radius = if gap.is_finite() && gap > 0.0 { 0.5 * gap } else { 1.0 };
                        let radius: f64 = s.get("radius", a.radius, default_radius)?;
                        let near = move |o: &TrajectoryDataset| o.points().any(|p| metric.distance(p, &center) <= radius);
                        let r = estimate_epsilon_lb(mech, &d1, &d2, near, &cfg)?;
                        let ev = json!({ "name": "near", "center": { "lat": center.lat, "lon": center.lon }, "radius": radius });
                        (r, ev, false, Some(uop.0))
                    }
                    other => bail!("event `{other}` does not apply to location mechanisms"),
                }
            }
        };

    let verdict = result.verdict(claimed);
    let r = serde_json::to_value(&result)?;
    let mut report = header("audit", s);
    report.insert("mechanism".into(), json!(mechanism));
    report.insert("uop".into(), json!(uop.map(|u| u.to_string())));
    report.insert("known_flawed".into(), json!(known_flawed));
    report.insert("claimed_epsilon".into(), json!(claimed));
    report.insert("event".into(), event);
    report.insert("eps_lb".into(), r["eps_lb"].clone());
    report.insert("eps_lb_ci".into(), r["eps_lb_ci"].clone());
    report.insert("p1".into(), r["p1"].clone());
    report.insert("p2".into(), r["p2"].clone());
    report.insert("intervals".into(), json!({ "p1": r["p1_ci"], "p2": r["p2_ci"], "confidence": result.confidence }));
    report.insert("hits".into(), json!({ "d1": result.hits1, "d2": result.hits2, "trials": result.trials }));
    report.insert("verdict".into(), serde_json::to_value(verdict)?);
    emit(&report.into(), report_path.as_deref().map(std::path::Path::new))?;
    let failed = verdict == trajbench::audit::Verdict::ViolatesClaim;
    Ok(if strict && failed { Outcome::StrictFailure } else { Outcome::Pass })
}
