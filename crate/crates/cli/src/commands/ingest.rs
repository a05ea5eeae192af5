use anyhow::{Context, Result};
use serde_json::json;
use trajbench::ingest::{load_fs, load_geolife, read_canonical, write_canonical_with};

use super::{emit, header, inherited_extra, summary, Outcome};
use crate::args::InputFormat;
use crate::config::Settings;
use crate::IngestArgs;

pub fn run(a: IngestArgs, s: &mut Settings) -> Result<Outcome> {
    let format: InputFormat = s.require("format", a.format)?;
    let input: String = s.require("input", a.input.map(|p| p.display().to_string()))?;
    let output: String = s.require("output", a.output.map(|p| p.display().to_string()))?;

    let (ds, report) = match format {
        InputFormat::Geolife => load_geolife(&input),
        InputFormat::Fs => load_fs(&input),
        InputFormat::Canonical => read_canonical(&input),
    }
    .with_context(|| format!("loading {input}"))?;

    let mut extra = if format == InputFormat::Canonical { inherited_extra(input.as_ref())? } else { Default::default() };
    extra.insert(
        "provenance".into(),
        json!({ "source_format": format, "source": input, "version": env!("CARGO_PKG_VERSION") }),
    );
    write_canonical_with(&ds, &output, extra).with_context(|| format!("writing {output}"))?;

    let mut out = header("ingest", s);
    out.insert("summary".into(), summary(&ds));
    out.insert("load".into(), serde_json::to_value(&report)?);
    emit(&out.into(), None)?;
    Ok(Outcome::Pass)
}
