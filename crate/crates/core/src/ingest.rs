//! Tracked-play dataset format: parsing, validation and orientation.
//!
//! A dataset document has two top-level keys:
//!
//! ```text
//! {
//!   "config": { ...model config... } | "relative/path.json" | "preset:rugby-6v6",
//!   "plays": [
//!     {
//!       "events": [["hand_no_contact", 3.2, 4.1]],
//!       "frames": [[0, 0, [[10, 5], [14, 4], [16, 3]]], ...],
//!       "id": "p1",
//!       "meta": {"scenario": "tight"},
//!       "result": "Try"
//!     }
//!   ]
//! }
//! ```
//!
//! A frame is `[t, carrier, [[x, y], ...]]` with one position per attacker, an
//! event is `[leaf_id, t_start, t_end]`. Unknown keys are rejected.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::canon;
use crate::model::{ModelConfig, ValidationReport, ViolationKind};

pub use crate::model::Point;

/// One snapshot of the attacking team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    pub t: f64,
    pub carrier: usize,
    pub positions: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr(f64, usize, Vec<Point>);

impl From<FrameRepr> for Frame {
    fn from(FrameRepr(t, carrier, positions): FrameRepr) -> Self {
        Frame {
            t,
            carrier,
            positions,
        }
    }
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> Self {
        FrameRepr(f.t, f.carrier, f.positions)
    }
}

/// A thematic event; `t_start == t_end` marks an instantaneous event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EventRepr", into = "EventRepr")]
pub struct EventRecord {
    pub leaf: String,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Serialize, Deserialize)]
struct EventRepr(String, f64, f64);

impl From<EventRepr> for EventRecord {
    fn from(EventRepr(leaf, t_start, t_end): EventRepr) -> Self {
        EventRecord {
            leaf,
            t_start,
            t_end,
        }
    }
}

impl From<EventRecord> for EventRepr {
    fn from(e: EventRecord) -> Self {
        EventRepr(e.leaf, e.t_start, e.t_end)
    }
}

impl EventRecord {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayRecord {
    pub id: String,
    pub result: String,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    pub frames: Vec<Frame>,
    #[serde(default)]
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: ModelConfig,
    pub plays: Vec<PlayRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetDoc {
    config: Value,
    plays: Vec<PlayRecord>,
}

#[derive(Serialize)]
struct DatasetOut<'a> {
    config: &'a ModelConfig,
    plays: &'a [PlayRecord],
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("invalid play {play_id}: {rule}")]
    Invariant { play_id: String, rule: String },
    #[error("invalid config: {0}")]
    Config(ValidationReport),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ParseError {
    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::Schema { .. } => "schema",
            ParseError::Invariant { .. } => "invariant",
            ParseError::Config(_) => "config",
            ParseError::Io { .. } => "io",
        }
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Syntax | Category::Eof | Category::Io => ParseError::Syntax {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
            Category::Data => ParseError::Schema {
                location: format!("line {}, column {}", err.line(), err.column()),
                message: err.to_string(),
            },
        }
    }
}

/// Parses and fully validates a dataset. A string `config` is either
/// `preset:<name>` or a path resolved against `base_dir`.
pub fn parse_dataset(bytes: &[u8], base_dir: Option<&Path>) -> Result<Dataset, ParseError> {
    let ds = parse_dataset_unchecked(bytes, base_dir)?;
    ds.check()?;
    Ok(ds)
}

/// Parses structure and config only; play-level rules are left to
/// [`Dataset::validate`].
pub fn parse_dataset_unchecked(
    bytes: &[u8],
    base_dir: Option<&Path>,
) -> Result<Dataset, ParseError> {
    let doc: DatasetDoc = serde_json::from_slice(bytes).map_err(ParseError::from_json)?;
    let config = resolve_config(doc.config, base_dir)?;
    Ok(Dataset {
        config,
        plays: doc.plays,
    })
}

pub(crate) fn resolve_config(v: Value, base_dir: Option<&Path>) -> Result<ModelConfig, ParseError> {
    let cfg = match v {
        Value::String(s) => {
            if let Some(name) = s.strip_prefix("preset:") {
                ModelConfig::preset(name).ok_or_else(|| ParseError::Schema {
                    location: "config".into(),
                    message: format!("unknown preset `{name}`"),
                })?
            } else {
                let path = match base_dir {
                    Some(dir) => dir.join(&s),
                    None => Path::new(&s).to_path_buf(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| ParseError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                serde_json::from_str(&text).map_err(|e| match ParseError::from_json(e) {
                    ParseError::Schema { location, message } => ParseError::Schema {
                        location: format!("{} {location}", path.display()),
                        message,
                    },
                    other => other,
                })?
            }
        }
        other => serde_json::from_value(other).map_err(|e| ParseError::Schema {
            location: "config".into(),
            message: e.to_string(),
        })?,
    };
    let report = cfg.validate();
    if !report.is_empty() {
        return Err(ParseError::Config(report));
    }
    Ok(cfg)
}

impl Dataset {
    pub fn new(config: ModelConfig) -> Self {
        Self {
            config,
            plays: Vec::new(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ParseError> {
        parse_dataset(text.as_bytes(), None)
    }

    /// Reads a dataset file, resolving config paths next to it.
    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let bytes = std::fs::read(path).map_err(|e| ParseError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        parse_dataset(&bytes, path.parent())
    }

    /// Canonical text with the config inlined.
    pub fn to_canonical(&self) -> String {
        canon::to_string(&DatasetOut {
            config: &self.config,
            plays: &self.plays,
        })
    }

    /// First problem in the dataset as a single primary error.
    pub fn check(&self) -> Result<(), ParseError> {
        let report = self.config.validate();
        if !report.is_empty() {
            return Err(ParseError::Config(report));
        }
        let mut ids = HashSet::new();
        for play in &self.plays {
            if !ids.insert(play.id.as_str()) {
                return Err(ParseError::Invariant {
                    play_id: play.id.clone(),
                    rule: "duplicate play id".into(),
                });
            }
            let report = validate_play(play, &self.config);
            let primary = report
                .iter()
                .find(|v| v.kind == ViolationKind::Schema)
                .or_else(|| report.iter().next());
            if let Some(v) = primary {
                return Err(match v.kind {
                    ViolationKind::Schema => ParseError::Schema {
                        location: format!("play {}: {}", play.id, v.detail),
                        message: v.rule.to_string(),
                    },
                    ViolationKind::Invariant => ParseError::Invariant {
                        play_id: play.id.clone(),
                        rule: v.to_string(),
                    },
                });
            }
        }
        Ok(())
    }

    /// Validation report per play, keyed by play id, for plays with problems.
    pub fn validate(&self) -> Vec<(String, ValidationReport)> {
        self.plays
            .iter()
            .map(|p| (p.id.clone(), validate_play(p, &self.config)))
            .filter(|(_, r)| !r.is_empty())
            .collect()
    }

    /// Rewrites every play into the attacking frame and marks the config as
    /// such. Applying it twice is the same as applying it once.
    pub fn normalized(&self) -> Dataset {
        let mut config = self.config.clone();
        let plays = self
            .plays
            .iter()
            .map(|p| normalize_orientation(p, &self.config))
            .collect();
        config.field.attack_axis_positive = true;
        Dataset { config, plays }
    }
}

/// Reflects a play so the attack progresses toward increasing `y`. Positions
/// are half-turned about the field centre, which keeps the carrier's left and
/// right. Identity when the config already attacks toward `+y`.
pub fn normalize_orientation(play: &PlayRecord, cfg: &ModelConfig) -> PlayRecord {
    if cfg.field.attack_axis_positive {
        return play.clone();
    }
    let mut out = play.clone();
    for frame in &mut out.frames {
        for p in &mut frame.positions {
            *p = cfg.field.to_attack_frame(*p);
        }
    }
    out
}

/// Checks a play against every record invariant and the config vocabulary.
pub fn validate_play(play: &PlayRecord, cfg: &ModelConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    if cfg.results.index_of(&play.result).is_none() {
        report.schema("unknown result", format!("result `{}`", play.result));
    }
    if play.frames.is_empty() {
        report.invariant("play has no frames", "");
    }

    for (i, f) in play.frames.iter().enumerate() {
        if !(f.t.is_finite() && f.t >= 0.0) {
            report.invariant("negative or non-finite time", format!("frame {i}"));
        }
        if f.positions.len() != cfg.n_players {
            report.schema(
                "wrong number of positions",
                format!(
                    "frame {i}: {} for {} players",
                    f.positions.len(),
                    cfg.n_players
                ),
            );
        }
        if f.carrier >= cfg.n_players {
            report.invariant(
                "carrier index out of range",
                format!("frame {i}: {}", f.carrier),
            );
        }
        if let Some(j) = f.positions.iter().position(|p| !cfg.field.contains(p)) {
            report.invariant("position outside field", format!("frame {i}, player {j}"));
        }
    }
    if let Some(i) = play.frames.windows(2).position(|w| !(w[0].t < w[1].t)) {
        report.invariant("frames not strictly increasing", format!("frame {}", i + 1));
    }

    let span = match (play.frames.first(), play.frames.last()) {
        (Some(a), Some(b)) => Some((a.t, b.t)),
        _ => None,
    };
    for (i, e) in play.events.iter().enumerate() {
        if !cfg.taxonomy.contains(&e.leaf) {
            report.schema(
                "unknown thematic leaf",
                format!("events[{i}]: `{}`", e.leaf),
            );
        }
        if !(e.t_start <= e.t_end) {
            report.invariant("event ends before it starts", format!("events[{i}]"));
        }
        if let Some((first, last)) = span {
            if !(e.t_start >= first && e.t_end <= last) {
                report.invariant("event outside play time span", format!("events[{i}]"));
            }
        }
    }
    if let Some(i) = play
        .events
        .windows(2)
        .position(|w| !(w[1].t_start >= w[0].t_end))
    {
        report.invariant(
            "events overlap or out of order",
            format!("events[{}]", i + 1),
        );
    }

    for (i, w) in play.frames.windows(2).enumerate() {
        if w[0].carrier != w[1].carrier {
            let covered = play
                .events
                .iter()
                .any(|e| e.t_start <= w[1].t && e.t_end >= w[0].t);
            if !covered {
                report.invariant(
                    "carrier change without event",
                    format!("between frames {} and {}", i, i + 1),
                );
            }
        }
    }
    report
}
