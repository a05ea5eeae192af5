use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use trajbench::ingest::{sidecar_path, write_canonical_with};
use trajbench::mechanisms::{cnoise, noisy_count_correct, noisy_count_flawed, planar_laplace, MechanismOutput};
use trajbench::metrics_point::GridSpec;

use super::{emit, header, inherited_extra, load_canonical, summary, Outcome};
use crate::args::{Grid, Mechanism, PostProcessArg, Units};
use crate::config::Settings;
use crate::ProtectArgs;

fn record<P>(name: Mechanism, out: &MechanismOutput<P>, params: Value) -> Value {
    json!({
        "name": name,
        "budget_spent": out.budget_spent,
        "uop": out.uop.to_string(),
        "seed": out.seed,
        "known_flawed": out.known_flawed,
        "params": params,
    })
}

pub fn run(a: ProtectArgs, s: &mut Settings) -> Result<Outcome> {
    let input: String = s.require("input", a.input.map(|p| p.display().to_string()))?;
    let output: String = s.require("output", a.output.map(|p| p.display().to_string()))?;
    let mechanism: Mechanism = s.require("mechanism", a.mechanism)?;
    let epsilon: f64 = s.require("epsilon", a.epsilon)?;
    let seed: u64 = s.get("seed", a.seed, 0)?;
    let ds = load_canonical(input.as_ref())?;

    let mut report = header("protect", s);
    match mechanism {
        Mechanism::Cnoise | Mechanism::PlanarLaplace => {
            let units = s.get("units", a.units, Units::Auto)?.resolve(&ds);
            let out = if mechanism == Mechanism::Cnoise {
                let sensitivity: f64 = s.get("sensitivity", a.sensitivity, 1.0)?;
                cnoise(&ds, epsilon, sensitivity, seed, units)?
            } else {
                planar_laplace(&ds, epsilon, seed, units)?
            };
            let rec = record(mechanism, &out, json!({ "units": units, "config": s.resolved() }));
            let mut extra = inherited_extra(input.as_ref())?;
            extra.insert("mechanism".into(), rec.clone());
            write_canonical_with(&out.payload, &output, extra).with_context(|| format!("writing {output}"))?;
            report.insert("mechanism".into(), rec);
            report.insert("summary".into(), summary(&out.payload));
        }
        Mechanism::NoisyCountFlawed | Mechanism::NoisyCountCorrect => {
            let g: Grid = s.get("grid", a.grid, Grid { nx: 50, ny: 50 })?;
            let grid = GridSpec::new(ds.bbox, g.nx, g.ny)?;
            let out = if mechanism == Mechanism::NoisyCountFlawed {
                noisy_count_flawed(&ds, &grid, epsilon, seed)?
            } else {
                let pp: PostProcessArg = s.get("postprocess", a.postprocess, PostProcessArg::ClampNonneg)?;
                noisy_count_correct(&ds, &grid, epsilon, seed, pp.into())?
            };
            let rec = record(mechanism, &out, json!({ "config": s.resolved() }));
            let mut body = header("protect", s);
            body.insert("mechanism".into(), rec.clone());
            body.insert("histogram".into(), serde_json::to_value(&out.payload)?);
            let text = serde_json::to_string(&Value::Object(body))?;
            std::fs::write(&output, text).with_context(|| format!("writing {output}"))?;
            let meta = sidecar_path(&output);
            std::fs::write(&meta, serde_json::to_string_pretty(&json!({ "mechanism": rec }))?)
                .with_context(|| format!("writing {}", meta.display()))?;
            report.insert("mechanism".into(), rec);
            report.insert("cells".into(), json!(grid.cells()));
        }
        Mechanism::RandomizedResponse => bail!("randomized-response is only available to `audit`"),
    }
    report.insert("config".into(), s.resolved());
    emit(&report.into(), None)?;
    Ok(Outcome::Pass)
}
