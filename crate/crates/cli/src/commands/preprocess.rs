use anyhow::{Context, Result};
use serde_json::json;
use trajbench::ingest::write_canonical_with;
use trajbench::traj_core::{compute_normalization, normalize, preprocess_geolife, PreprocessConfig};

use super::{emit, header, inherited_extra, load_canonical, summary, Outcome};
use crate::args::{Bbox, Normalize};
use crate::config::Settings;
use crate::PreprocessArgs;

pub fn run(a: PreprocessArgs, s: &mut Settings) -> Result<Outcome> {
    let d = PreprocessConfig::default();
    let input: String = s.require("input", a.input.map(|p| p.display().to_string()))?;
    let output: String = s.require("output", a.output.map(|p| p.display().to_string()))?;
    let cfg = PreprocessConfig {
        bbox: s.get("bbox", a.bbox, Bbox(d.bbox))?.0,
        interval_s: s.get("interval", a.interval, d.interval_s)?,
        gap_s: s.get("gap", a.gap, d.gap_s)?,
        max_len: s.get("max-len", a.max_len, d.max_len)?,
        min_len: s.get("min-len", a.min_len, d.min_len)?,
    };
    let norm: Normalize = s.get("normalize", a.normalize, Normalize::None)?;

    let ds = load_canonical(input.as_ref())?;
    let mut out_ds = preprocess_geolife(&ds, &cfg).context("preprocessing")?;
    if let Some(variant) = norm.variant() {
        let params = compute_normalization(&out_ds, variant).context("computing normalization")?;
        out_ds = normalize(&out_ds, &params)?;
    }

    let mut extra = inherited_extra(input.as_ref())?;
    extra.insert("preprocess".into(), json!({ "config": s.resolved(), "input": input }));
    write_canonical_with(&out_ds, &output, extra).with_context(|| format!("writing {output}"))?;

    let mut out = header("preprocess", s);
    out.insert("input".into(), summary(&ds));
    out.insert("summary".into(), summary(&out_ds));
    emit(&out.into(), None)?;
    Ok(Outcome::Pass)
}
