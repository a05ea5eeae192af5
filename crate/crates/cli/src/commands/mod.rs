mod audit;
mod evaluate;
mod ingest;
mod preprocess;
mod protect;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use trajbench::ingest::{read_canonical, read_sidecar};
use trajbench::TrajectoryDataset;

use crate::config::Settings;
use crate::{Cli, Command};

pub enum Outcome {
    Pass,
    StrictFailure,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest::run(a, &mut settings),
        Command::Preprocess(a) => preprocess::run(a, &mut settings),
        Command::Protect(a) => protect::run(a, &mut settings),
        Command::Evaluate(a) => evaluate::run(a, &mut settings, cli.strict),
        Command::Audit(a) => audit::run(a, &mut settings, cli.strict),
    }
}

/// Fields every report starts with.
fn header(command: &str, settings: &Settings) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("trajbench"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("config".into(), settings.resolved());
    m
}

/// Pretty JSON to standard output and, if given, to `path`.
fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    if let Some(p) = path {
        std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.context("writing to standard output"),
    }
}

fn load_canonical(path: &Path) -> Result<TrajectoryDataset> {
    let (ds, _) = read_canonical(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ds)
}

/// Sidecar entries beyond the structural ones, to carry provenance forward.
fn inherited_extra(path: &Path) -> Result<BTreeMap<String, Value>> {
    Ok(read_sidecar(path)?.map(|s| s.extra).unwrap_or_default())
}

fn summary(ds: &TrajectoryDataset) -> Value {
    json!({
        "trajectories": ds.len(),
        "users": ds.users().len(),
        "points": ds.n_points(),
        "bbox": ds.bbox,
        "normalized": ds.normalized,
    })
}
