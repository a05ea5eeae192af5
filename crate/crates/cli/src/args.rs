//! Option value types. Each parses from and prints as its flag spelling, so
//! resolved configurations echo exactly what a user would type.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use trajbench::mechanisms::{NoiseUnits, PostProcess, UnitOfPrivacy};
use trajbench::{BoundingBox, NormVariant};

macro_rules! serialize_as_display {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    )*};
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $kw:literal),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),* }

        impl $name {
            pub const KEYWORDS: &'static [&'static str] = &[$($kw),*];
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($kw => Ok($name::$variant),)*
                    _ => Err(format!("expected one of {}, got `{s}`", Self::KEYWORDS.join("|"))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $kw),* })
            }
        }

        serialize_as_display!($name);
    };
}

keyword_enum!(InputFormat { Geolife => "geolife", Fs => "fs", Canonical => "canonical" });

keyword_enum!(Normalize { Paper => "paper", MinMax => "minmax", None => "none" });

impl Normalize {
    pub fn variant(self) -> Option<NormVariant> {
        match self {
            Normalize::Paper => Some(NormVariant::PaperVerbatim),
            Normalize::MinMax => Some(NormVariant::MinMax),
            Normalize::None => None,
        }
    }
}

keyword_enum!(Mechanism {
    Cnoise => "cnoise",
    PlanarLaplace => "planar-laplace",
    NoisyCountFlawed => "noisy-count-flawed",
    NoisyCountCorrect => "noisy-count-correct",
    RandomizedResponse => "randomized-response",
});

impl Mechanism {
    pub fn is_count(self) -> bool {
        matches!(self, Mechanism::NoisyCountFlawed | Mechanism::NoisyCountCorrect)
    }
}

keyword_enum!(Units { Auto => "auto", Meters => "meters", Native => "native" });

impl Units {
    pub fn resolve(self, ds: &trajbench::TrajectoryDataset) -> NoiseUnits {
        match self {
            Units::Auto => NoiseUnits::for_dataset(ds),
            Units::Meters => NoiseUnits::Meters,
            Units::Native => NoiseUnits::Native,
        }
    }
}

keyword_enum!(PostProcessArg { None => "none", ClampNonneg => "clamp-nonneg" });

impl From<PostProcessArg> for PostProcess {
    fn from(p: PostProcessArg) -> Self {
        match p {
            PostProcessArg::None => PostProcess::None,
            PostProcessArg::ClampNonneg => PostProcess::ClampNonneg,
        }
    }
}

keyword_enum!(Event {
    Auto => "auto",
    CellNonzero => "cell-nonzero",
    CellAbove => "cell-above",
    Halfspace => "halfspace",
    Near => "near",
    ReportTrue => "report-true",
});

/// `NX,NY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected NX,NY with positive integers, got `{s}`");
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let nx: usize = a.trim().parse().map_err(|_| bad())?;
        let ny: usize = b.trim().parse().map_err(|_| bad())?;
        if nx == 0 || ny == 0 {
            return Err(bad());
        }
        Ok(Grid { nx, ny })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.nx, self.ny)
    }
}

/// `MIN_LAT,MAX_LAT,MIN_LON,MAX_LON`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox(pub BoundingBox);

impl FromStr for Bbox {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("expected MIN_LAT,MAX_LAT,MIN_LON,MAX_LON, got `{s}`"))?;
        if v.len() != 4 {
            return Err(format!("expected 4 comma-separated numbers, got {}", v.len()));
        }
        BoundingBox::new(v[0], v[1], v[2], v[3]).map(Bbox).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Bbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.0;
        write!(f, "{},{},{},{}", b.min_lat, b.max_lat, b.min_lon, b.max_lon)
    }
}

/// A unit of privacy, spelled `user|instance|location|multi:W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Uop(pub UnitOfPrivacy);

impl FromStr for Uop {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(Uop).map_err(|e: trajbench::Error| e.to_string())
    }
}

impl fmt::Display for Uop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which unit an audit removes: `random`, `user:ID`, `traj:ID` or
/// `loc:TRAJ_ID:INDEX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target(pub trajbench::audit::NeighbourTarget);

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        use trajbench::audit::NeighbourTarget as T;
        if s == "random" {
            return Ok(Target(T::Random));
        }
        if let Some(u) = s.strip_prefix("user:") {
            return Ok(Target(T::User(u.to_string())));
        }
        if let Some(t) = s.strip_prefix("traj:") {
            return Ok(Target(T::Trajectory(t.to_string())));
        }
        if let Some((t, i)) = s.strip_prefix("loc:").and_then(|r| r.rsplit_once(':')) {
            let index = i.parse().map_err(|_| format!("bad location index in `{s}`"))?;
            return Ok(Target(T::Location { traj_id: t.to_string(), index }));
        }
        Err(format!("expected random|user:ID|traj:ID|loc:TRAJ_ID:INDEX, got `{s}`"))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use trajbench::audit::NeighbourTarget as T;
        match &self.0 {
            T::Random => f.write_str("random"),
            T::User(u) => write!(f, "user:{u}"),
            T::Trajectory(t) => write!(f, "traj:{t}"),
            T::Location { traj_id, index } => write!(f, "loc:{traj_id}:{index}"),
        }
    }
}

/// `A,B,C`: the half-plane `A * lat + B * lon >= C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub normal: (f64, f64),
    pub offset: f64,
}

impl FromStr for Halfspace {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("expected A,B,C, got `{s}`"))?;
        match v[..] {
            [a, b, c] if (a != 0.0 || b != 0.0) && v.iter().all(|x| x.is_finite()) => {
                Ok(Halfspace { normal: (a, b), offset: c })
            }
            _ => Err(format!("expected A,B,C with a non-zero normal, got `{s}`")),
        }
    }
}

impl fmt::Display for Halfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.normal.0, self.normal.1, self.offset)
    }
}

/// Comma-separated metric names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricList(pub Vec<String>);

pub const ALL_METRICS: &[&str] = &[
    "hd_points",
    "wd_sliced",
    "jsd",
    "range_query",
    "hotspot",
    "dtw_matched",
    "hd_traj_matched",
    "travelled_wd",
    "segment_wd",
    "convergence",
];

impl FromStr for MetricList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "all" {
            return Ok(MetricList(ALL_METRICS.iter().map(|m| m.to_string()).collect()));
        }
        let mut out: Vec<String> = Vec::new();
        for m in s.split(',').map(str::trim).filter(|m| !m.is_empty()) {
            if !ALL_METRICS.contains(&m) {
                return Err(format!("unknown metric `{m}`; known: all,{}", ALL_METRICS.join(",")));
            }
            if !out.iter().any(|x| x == m) {
                out.push(m.to_string());
            }
        }
        if out.is_empty() {
            return Err("empty metric list".into());
        }
        Ok(MetricList(out))
    }
}

impl fmt::Display for MetricList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

/// `NAME=VALUE` upper limit on a metric's headline value.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub metric: String,
    pub max: f64,
}

impl FromStr for Threshold {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (m, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
        let m = m.trim();
        if !ALL_METRICS.contains(&m) {
            return Err(format!("unknown metric `{m}`"));
        }
        let max = v.trim().parse().map_err(|_| format!("bad threshold value in `{s}`"))?;
        Ok(Threshold { metric: m.to_string(), max })
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.metric, self.max)
    }
}

/// Comma-separated thresholds, as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Thresholds(pub Vec<Threshold>);

impl FromStr for Thresholds {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').filter(|x| !x.trim().is_empty()).map(str::parse).collect::<Result<_, _>>().map(Thresholds)
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

serialize_as_display!(Grid, Bbox, Uop, Target, Halfspace, MetricList, Threshold);

impl Serialize for Thresholds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(&self.0)
    }
}
