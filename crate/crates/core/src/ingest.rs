//! Dataset loaders (Geolife PLT, Foursquare check-in CSV, MNIST IDX) and the
//! canonical CSV + JSON sidecar interchange format.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::{
    BoundingBox, Error, GeoPoint, NormalizationParams, PointAttrs, Result, Trajectory,
    TrajectoryDataset,
};

/// Non-fatal problems met while loading.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub files_read: usize,
    pub skipped_lines: usize,
    pub file_errors: Vec<(PathBuf, String)>,
    pub warnings: Vec<String>,
}

impl LoadReport {
    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

// ---------------------------------------------------------------------------
// Geolife

const PLT_HEADER_LINES: usize = 6;

/// UTC epoch seconds from Geolife's `YYYY-MM-DD` and `HH:MM:SS` fields.
pub fn plt_timestamp(date: &str, time: &str) -> Option<i64> {
    let d = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").ok()?;
    let t = NaiveTime::parse_from_str(time.trim(), "%H:%M:%S").ok()?;
    Some(d.and_time(t).and_utc().timestamp())
}

/// Parses one `lat,lon,0,altitude,days,date,time` row.
fn parse_plt_row(line: &str) -> Option<GeoPoint> {
    let f: Vec<&str> = line.trim().split(',').collect();
    if f.len() < 7 {
        return None;
    }
    let lat: f64 = f[0].trim().parse().ok()?;
    let lon: f64 = f[1].trim().parse().ok()?;
    let t = plt_timestamp(f[5], f[6])?;
    GeoPoint::new(lat, lon).ok().map(|p| p.at(t))
}

/// Geolife keeps files under `<user>/Trajectory/<name>.plt`; fall back to the
/// parent directory name otherwise.
fn plt_user(path: &Path) -> String {
    let parent = path.parent();
    let dir = match parent.and_then(|p| p.file_name()) {
        Some(n) if n.eq_ignore_ascii_case("trajectory") => parent.and_then(Path::parent),
        _ => parent,
    };
    dir.and_then(|d| d.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into())
}

struct PltFile {
    traj: Option<Trajectory>,
    skipped: usize,
}

fn read_plt(path: &Path) -> Result<PltFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    let mut skipped = 0;
    for line in BufReader::new(file).lines().skip(PLT_HEADER_LINES) {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_plt_row(&line) {
            Some(p) => points.push(p),
            None => skipped += 1,
        }
    }
    // Recorders occasionally emit out-of-order fixes.
    points.sort_by_key(|p: &GeoPoint| p.t);
    let user = plt_user(path);
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let traj = if points.is_empty() {
        None
    } else {
        Some(Trajectory::new(format!("{user}/{stem}"), user, points)?)
    };
    Ok(PltFile { traj, skipped })
}

/// Loads every `*.plt` file below `root`, one trajectory per file, in path
/// order. Unreadable files are reported and skipped.
pub fn load_geolife(root: impl AsRef<Path>) -> Result<(TrajectoryDataset, LoadReport)> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut files: Vec<PathBuf> = WalkDir::new(root)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("plt")))
        .collect();
    files.sort();

    let parsed: Vec<(PathBuf, Result<PltFile>)> =
        files.into_par_iter().map(|p| { let r = read_plt(&p); (p, r) }).collect();

    let mut report = LoadReport::default();
    let mut trajectories = Vec::new();
    for (path, res) in parsed {
        match res {
            Ok(f) => {
                report.files_read += 1;
                report.skipped_lines += f.skipped;
                match f.traj {
                    Some(t) => trajectories.push(t),
                    None => report.warn(format!("{}: no valid rows", path.display())),
                }
            }
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                report.file_errors.push((path, e.to_string()));
            }
        }
    }
    if trajectories.is_empty() {
        return Err(Error::NothingLoaded(root.to_path_buf()));
    }
    Ok((TrajectoryDataset::new(trajectories), report))
}

// ---------------------------------------------------------------------------
// Foursquare check-ins

pub const FS_COLUMNS: [&str; 7] = ["tid", "label", "lat", "lon", "day", "hour", "category"];

/// Accepts `3` as well as `3.0`.
fn parse_small_int(s: &str) -> Option<u64> {
    let s = s.trim();
    s.parse::<u64>().ok().or_else(|| {
        let v: f64 = s.parse().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64).then_some(v as u64)
    })
}

/// Loads a check-in CSV (or every `*.csv` in a directory, in name order).
/// Rows are grouped into trajectories by `tid`, in order of first
/// appearance; `label` becomes the user id. Check-ins carry no timestamps.
pub fn load_fs(path: impl AsRef<Path>) -> Result<(TrajectoryDataset, LoadReport)> {
    let path = path.as_ref();
    let files = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };

    let mut report = LoadReport::default();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (String, Vec<GeoPoint>)> = HashMap::new();
    for file in &files {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(file)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(file, io),
                k => Error::Format { path: file.clone(), reason: format!("{k:?}") },
            })?;
        let headers = rdr.headers()?.clone();
        let mut idx = [0usize; 7];
        for (slot, name) in idx.iter_mut().zip(FS_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        }
        report.files_read += 1;
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(idx[i]).unwrap_or("").trim();
            let parsed = (|| {
                let lat: f64 = field(2).parse().ok()?;
                let lon: f64 = field(3).parse().ok()?;
                let day = parse_small_int(field(4)).filter(|d| *d < 7)? as u8;
                let hour = parse_small_int(field(5)).filter(|h| *h < 24)? as u8;
                let category = parse_small_int(field(6))? as u32;
                let p = GeoPoint::new(lat, lon).ok()?;
                Some(p.with_attrs(PointAttrs { hour: Some(hour), day: Some(day), category: Some(category) }))
            })();
            let tid = field(0);
            let Some(p) = parsed.filter(|_| !tid.is_empty()) else {
                report.skipped_lines += 1;
                continue;
            };
            let label = field(1).to_string();
            let entry = groups.entry(tid.to_string()).or_insert_with(|| {
                order.push(tid.to_string());
                (label.clone(), Vec::new())
            });
            if entry.0 != label {
                report.warn(format!("trajectory {tid}: label changes from {} to {label}; keeping the first", entry.0));
            }
            entry.1.push(p);
        }
    }

    let mut trajectories = Vec::with_capacity(order.len());
    for tid in order {
        let (user, points) = groups.remove(&tid).expect("grouped above");
        trajectories.push(Trajectory::new(tid, user, points)?);
    }
    Ok((TrajectoryDataset::new(trajectories), report))
}

// ---------------------------------------------------------------------------
// Canonical format

pub const CANONICAL_HEADER: [&str; 9] =
    ["traj_id", "user_id", "seq", "lat", "lon", "t", "hour", "day", "category"];

/// Minimum fractional digits written for coordinates.
const COORD_DIGITS: usize = 7;

/// JSON stored next to a canonical CSV as `<path>.meta.json`. Keys other than
/// the three structural ones (provenance, mechanism details, ...) are kept in
/// `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub bbox: BoundingBox,
    pub norm: Option<NormalizationParams>,
    pub normalized: bool,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Sidecar {
    pub fn for_dataset(ds: &TrajectoryDataset) -> Self {
        Sidecar { bbox: ds.bbox, norm: ds.norm, normalized: ds.normalized, extra: BTreeMap::new() }
    }
}

pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Shortest round-trip decimal, padded to at least seven fractional digits.
pub fn format_coord(v: f64) -> String {
    let mut s = format!("{v}");
    let frac = match s.find('.') {
        Some(i) => s.len() - i - 1,
        None => {
            s.push('.');
            0
        }
    };
    for _ in frac..COORD_DIGITS {
        s.push('0');
    }
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_canonical(ds: &TrajectoryDataset, path: impl AsRef<Path>) -> Result<()> {
    write_canonical_with(ds, path, BTreeMap::new())
}

/// Writes the CSV and its sidecar; `extra` entries are added to the sidecar.
pub fn write_canonical_with(
    ds: &TrajectoryDataset,
    path: impl AsRef<Path>,
    extra: BTreeMap<String, serde_json::Value>,
) -> Result<()> {
    let path = path.as_ref();
    ds.validate()?;
    if let Some(bad) = ds.points().find(|p| !(p.lat.is_finite() && p.lon.is_finite())) {
        return Err(Error::InvalidCoordinate { lat: bad.lat, lon: bad.lon });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CANONICAL_HEADER)?;
    for t in &ds.trajectories {
        for (seq, p) in t.points.iter().enumerate() {
            w.write_record([
                t.id.as_str(),
                t.user_id.as_str(),
                &seq.to_string(),
                &format_coord(p.lat),
                &format_coord(p.lon),
                &opt(p.t),
                &opt(p.attrs.hour),
                &opt(p.attrs.day),
                &opt(p.attrs.category),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let mut meta = Sidecar::for_dataset(ds);
    meta.extra = extra;
    let meta_path = sidecar_path(path);
    let mut f = BufWriter::new(File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n").and_then(|_| f.flush()).map_err(|e| Error::io(&meta_path, e))?;
    Ok(())
}

/// Reads the sidecar of a canonical CSV; `None` when it does not exist.
pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Option<Sidecar>> {
    let meta_path = sidecar_path(path);
    match File::open(&meta_path) {
        Ok(f) => Ok(Some(serde_json::from_reader(BufReader::new(f))?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(meta_path, e)),
    }
}

fn parse_opt<T: std::str::FromStr>(s: &str, col: &str, path: &Path, line: u64) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Format {
        path: path.to_path_buf(),
        reason: format!("line {line}: bad {col} value `{s}`"),
    })
}

/// Reads a canonical CSV and its sidecar. Without a sidecar the dataset is
/// treated as geographic with a recomputed bbox, and a warning is emitted.
pub fn read_canonical(path: impl AsRef<Path>) -> Result<(TrajectoryDataset, LoadReport)> {
    let path = path.as_ref();
    let mut report = LoadReport::default();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let meta = read_sidecar(path)?;
    if meta.is_none() {
        report.warn(format!(
            "{}: sidecar not found; assuming geographic coordinates and recomputing the bbox",
            path.display()
        ));
    }
    let normalized = meta.as_ref().is_some_and(|m| m.normalized);

    let mut rdr = csv::Reader::from_reader(BufReader::new(file));
    let headers = rdr.headers()?;
    if headers.iter().ne(CANONICAL_HEADER) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("header must be `{}`", CANONICAL_HEADER.join(",")),
        });
    }
    report.files_read = 1;

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (String, Vec<GeoPoint>)> = HashMap::new();
    let fmt = |line: u64, reason: String| Error::Format { path: path.to_path_buf(), reason: format!("line {line}: {reason}") };
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let (tid, uid) = (&rec[0], &rec[1]);
        let seq: usize = rec[2].parse().map_err(|_| fmt(line, format!("bad seq `{}`", &rec[2])))?;
        let lat: f64 = rec[3].parse().map_err(|_| fmt(line, format!("bad lat `{}`", &rec[3])))?;
        let lon: f64 = rec[4].parse().map_err(|_| fmt(line, format!("bad lon `{}`", &rec[4])))?;
        let mut p = if normalized { GeoPoint::raw(lat, lon) } else { GeoPoint::new(lat, lon)? };
        p.t = parse_opt(&rec[5], "t", path, line)?;
        p.attrs = PointAttrs {
            hour: parse_opt(&rec[6], "hour", path, line)?,
            day: parse_opt(&rec[7], "day", path, line)?,
            category: parse_opt(&rec[8], "category", path, line)?,
        };
        let entry = groups.entry(tid.to_string()).or_insert_with(|| {
            order.push(tid.to_string());
            (uid.to_string(), Vec::new())
        });
        if entry.0 != uid {
            return Err(fmt(line, format!("trajectory `{tid}` changes user from `{}` to `{uid}`", entry.0)));
        }
        if seq != entry.1.len() {
            return Err(fmt(line, format!("trajectory `{tid}`: expected seq {}, found {seq}", entry.1.len())));
        }
        entry.1.push(p);
    }

    let mut trajectories = Vec::with_capacity(order.len());
    for tid in order {
        let (uid, points) = groups.remove(&tid).expect("grouped above");
        trajectories.push(Trajectory::new(tid, uid, points)?);
    }
    let mut ds = TrajectoryDataset::new(trajectories);
    if let Some(m) = meta {
        ds.bbox = m.bbox;
        ds.norm = m.norm;
        ds.normalized = m.normalized;
    }
    ds.validate().map_err(|e| Error::Format { path: path.to_path_buf(), reason: format!("data disagrees with sidecar: {e}") })?;
    Ok((ds, report))
}

// ---------------------------------------------------------------------------
// MNIST as sequences

/// Fixed-shape sequences: `n` items of `steps` rows by `width` values in
/// [0, 1]. MNIST images become 28 steps of 28 values, one row per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    pub steps: usize,
    pub width: usize,
    pixels: Vec<u8>,
    pub labels: Option<Vec<u8>>,
}

impl SequenceDataset {
    pub fn len(&self) -> usize {
        self.pixels.len() / (self.steps * self.width)
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Row `t` of item `i`, scaled to [0, 1].
    pub fn step(&self, i: usize, t: usize) -> Vec<f64> {
        let off = (i * self.steps + t) * self.width;
        self.pixels[off..off + self.width].iter().map(|&v| f64::from(v) / 255.0).collect()
    }

    /// Item `i` as `steps` rows.
    pub fn sequence(&self, i: usize) -> Vec<Vec<f64>> {
        (0..self.steps).map(|t| self.step(i, t)).collect()
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_idx(path: &Path, magic: u32, ndims: usize) -> Result<(Vec<usize>, Vec<u8>)> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format { path: path.to_path_buf(), reason };
    if buf.starts_with(&[0x1f, 0x8b]) {
        return Err(bad("gzip-compressed; decompress the IDX file first".into()));
    }
    let header_len = 4 + 4 * ndims;
    if buf.len() < header_len {
        return Err(bad("truncated IDX header".into()));
    }
    let word = |i: usize| u32::from_be_bytes(buf[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    if word(0) != magic {
        return Err(bad(format!("magic {:#010x}, expected {magic:#010x}", word(0))));
    }
    let dims: Vec<usize> = (1..=ndims).map(|i| word(i) as usize).collect();
    let expected: usize = dims.iter().product();
    if buf.len() - header_len != expected {
        return Err(bad(format!("payload is {} bytes, header implies {expected}", buf.len() - header_len)));
    }
    buf.drain(..header_len);
    Ok((dims, buf))
}

/// Loads MNIST images (and optionally labels) from uncompressed IDX files.
pub fn load_mnist_sequences(images: impl AsRef<Path>, labels: Option<&Path>) -> Result<SequenceDataset> {
    let (dims, pixels) = read_idx(images.as_ref(), IDX_IMAGES_MAGIC, 3)?;
    let labels = match labels {
        Some(p) => {
            let (ldims, l) = read_idx(p, IDX_LABELS_MAGIC, 1)?;
            if ldims[0] != dims[0] {
                return Err(Error::LengthMismatch(format!("{} images vs {} labels", dims[0], ldims[0])));
            }
            Some(l)
        }
        None => None,
    };
    Ok(SequenceDataset { steps: dims[1], width: dims[2], pixels, labels })
}
