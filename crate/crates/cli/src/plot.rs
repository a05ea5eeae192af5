//! Minimal SVG figures: a real-vs-generated scatter and side-by-side density
//! heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use trajbench::metrics_point::Histogram2D;
use trajbench::{BoundingBox, GeoPoint};

const SIZE: f64 = 480.0;
const PAD: f64 = 30.0;
/// Points drawn per cloud; larger clouds are strided.
const MAX_POINTS: usize = 5_000;

fn write(path: &Path, body: &str, width: f64, height: f64) -> Result<()> {
    let svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    );
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

pub fn scatter(real: &[GeoPoint], gen: &[GeoPoint], bbox: &BoundingBox, path: &Path) -> Result<()> {
    let (w, h) = (SIZE + 2.0 * PAD, SIZE + 2.0 * PAD);
    let x = |lon: f64| PAD + (lon - bbox.min_lon) / bbox.lon_span() * SIZE;
    let y = |lat: f64| PAD + (bbox.max_lat - lat) / bbox.lat_span() * SIZE;
    let mut body = String::new();
    for (pts, colour, label, ly) in [(real, "#1f77b4", "real", 18.0), (gen, "#ff7f0e", "generated", 34.0)] {
        let step = pts.len().div_ceil(MAX_POINTS).max(1);
        let _ = writeln!(body, "<g fill=\"{colour}\" fill-opacity=\"0.5\">");
        for p in pts.iter().step_by(step) {
            let _ = writeln!(body, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\"/>", x(p.lon), y(p.lat));
        }
        let _ = writeln!(body, "</g>");
        let _ = writeln!(body, "<text x=\"{}\" y=\"{ly}\" font-size=\"12\" fill=\"{colour}\">{label} ({})</text>", w - 150.0, pts.len());
    }
    let _ = writeln!(
        body,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"#444\"/>"
    );
    write(path, &body, w, h)
}

pub fn density(real: &Histogram2D, gen: &Histogram2D, path: &Path) -> Result<()> {
    let grid = real.grid;
    let (cw, ch) = (SIZE / grid.nx as f64, SIZE / grid.ny as f64);
    let mut body = String::new();
    for (panel, (hist, label)) in [(real, "real"), (gen, "generated")].into_iter().enumerate() {
        let x0 = PAD + panel as f64 * (SIZE + PAD);
        let probs = hist.probabilities();
        let max = probs.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(body, "<text x=\"{x0}\" y=\"{}\" font-size=\"12\">{label}</text>", PAD - 8.0);
        for (cell, p) in probs.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let (ix, iy) = (cell % grid.nx, cell / grid.nx);
            let shade = 255.0 * (1.0 - (p / max).sqrt());
            let _ = writeln!(
                body,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" fill=\"rgb({s},{s},255)\"/>",
                x0 + ix as f64 * cw,
                PAD + (grid.ny - 1 - iy) as f64 * ch,
                s = shade.round() as u8,
            );
        }
        let _ = writeln!(body, "<rect x=\"{x0}\" y=\"{PAD}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"#444\"/>");
    }
    write(path, &body, 2.0 * SIZE + 3.0 * PAD, SIZE + 2.0 * PAD)
}
