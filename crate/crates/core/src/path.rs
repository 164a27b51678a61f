//! Labeled paths: an attacking play as timed skeleton vertices joined by
//! labeled arcs and ending on a result vertex.
//!
//! Construction scans the frames in order. Outside thematic events, any change
//! of the classified state at frame `t` closes the current vertex at `t` and
//! opens the next one, the arc carrying the spatial relation. An event
//! `[t_start, t_end]` closes the current vertex at `t_start`; state changes
//! observed in `[t_start, t_end)` are ignored and the event produces a single
//! arc labeled with its leaf plus the relation between the pre-event state and
//! the state at the first frame at or after `t_end`, which opens at `t_end`.
//! The last vertex closes at the last frame and an unlabeled arc leads to the
//! result vertex.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::ingest::{resolve_config, validate_play, Dataset, Frame, ParseError, PlayRecord};
use crate::model::{
    spatial_relation, ClassifyError, ModelConfig, SpatialLabel, SpatialState, ValidationReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PathVertex {
    pub state: SpatialState,
    /// Validity interval `[t_start, t_end)`.
    pub t_start: f64,
    pub t_end: f64,
}

impl PathVertex {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathArc {
    pub spatial: SpatialLabel,
    pub thematic: Vec<String>,
    /// Set on the terminal arc only.
    pub to_result: Option<String>,
}

impl PathArc {
    pub fn is_terminal(&self) -> bool {
        self.to_result.is_some()
    }

    pub fn is_self_loop(&self) -> bool {
        !self.is_terminal() && self.spatial.is_empty()
    }

    /// `rel, th_4` style label; empty for the terminal arc.
    pub fn label(&self) -> String {
        let mut parts: Vec<&str> = self.spatial.names();
        parts.extend(self.thematic.iter().map(String::as_str));
        parts.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPath {
    pub play_id: String,
    pub meta: BTreeMap<String, String>,
    pub vertices: Vec<PathVertex>,
    /// One arc per vertex; the last one targets the result vertex.
    pub arcs: Vec<PathArc>,
    pub result: String,
}

impl LabeledPath {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Time between the end of vertex `k` and the start of vertex `k + 1`.
    pub fn gap_after(&self, k: usize) -> Option<f64> {
        let next = self.vertices.get(k + 1)?;
        Some(next.t_start - self.vertices[k].t_end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("play has no frames")]
    EmptyPlay,
    #[error("event {index} ends after the last frame")]
    UncoveredEventTime { index: usize },
    #[error("frame {frame}: {source}")]
    Classify { frame: usize, source: ClassifyError },
    #[error("invalid play: {0}")]
    Invalid(ValidationReport),
}

/// Classified state of one frame.
pub fn state_at(frame: &Frame, cfg: &ModelConfig) -> Result<SpatialState, ClassifyError> {
    cfg.classify_state(frame.carrier, &frame.positions)
}

struct Scan<'a> {
    frames: &'a [Frame],
    cfg: &'a ModelConfig,
    vertices: Vec<PathVertex>,
    arcs: Vec<PathArc>,
    current: SpatialState,
    opened: f64,
    next: usize,
}

impl Scan<'_> {
    fn classify(&self, i: usize) -> Result<SpatialState, BuildError> {
        state_at(&self.frames[i], self.cfg)
            .map_err(|source| BuildError::Classify { frame: i, source })
    }

    fn close(&mut self, arc: PathArc, into: SpatialState, closed: f64, reopened: f64) {
        self.arcs.push(arc);
        self.vertices.push(PathVertex {
            state: std::mem::replace(&mut self.current, into),
            t_start: self.opened,
            t_end: closed,
        });
        self.opened = reopened;
    }

    /// Consumes frames strictly before `limit`, emitting spatial arcs.
    fn advance_until(&mut self, limit: f64) -> Result<(), BuildError> {
        while self.next < self.frames.len() && self.frames[self.next].t < limit {
            let state = self.classify(self.next)?;
            if state != self.current {
                let t = self.frames[self.next].t;
                let arc = PathArc {
                    spatial: spatial_relation(&self.current, &state),
                    thematic: Vec::new(),
                    to_result: None,
                };
                self.close(arc, state, t, t);
            }
            self.next += 1;
        }
        Ok(())
    }
}

/// Encodes a validated play as a labeled path.
pub fn build_path(play: &PlayRecord, cfg: &ModelConfig) -> Result<LabeledPath, BuildError> {
    let frames = &play.frames;
    let last = frames.last().ok_or(BuildError::EmptyPlay)?;
    let mut scan = Scan {
        frames,
        cfg,
        vertices: Vec::new(),
        arcs: Vec::new(),
        current: SpatialState::new(Vec::new(), 0),
        opened: frames[0].t,
        next: 1,
    };
    scan.current = scan.classify(0)?;

    for (index, event) in play.events.iter().enumerate() {
        scan.advance_until(event.t_start)?;
        let landing = frames.partition_point(|f| f.t < event.t_end);
        if landing == frames.len() {
            return Err(BuildError::UncoveredEventTime { index });
        }
        let after = scan.classify(landing)?;
        let arc = PathArc {
            spatial: spatial_relation(&scan.current, &after),
            thematic: vec![event.leaf.clone()],
            to_result: None,
        };
        scan.close(arc, after, event.t_start, event.t_end);
        scan.next = scan.next.max(landing + 1);
    }
    scan.advance_until(f64::INFINITY)?;

    let Scan {
        mut vertices,
        mut arcs,
        current,
        opened,
        ..
    } = scan;
    vertices.push(PathVertex {
        state: current,
        t_start: opened,
        t_end: last.t,
    });
    arcs.push(PathArc {
        spatial: SpatialLabel::NONE,
        thematic: Vec::new(),
        to_result: Some(play.result.clone()),
    });

    Ok(LabeledPath {
        play_id: play.id.clone(),
        meta: play.meta.clone(),
        vertices,
        arcs,
        result: play.result.clone(),
    })
}

fn build_checked(play: &PlayRecord, cfg: &ModelConfig) -> Result<LabeledPath, BuildError> {
    let report = validate_play(play, cfg);
    if !report.is_empty() {
        return Err(BuildError::Invalid(report));
    }
    build_path(play, cfg)
}

/// Per-play failures collected by [`build_all`].
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} play(s) failed to build: {}", failures.len(), failures.iter().map(|(id, e)| format!("{id}: {e}")).collect::<Vec<_>>().join("; "))]
pub struct BuildFailures {
    pub failures: Vec<(String, BuildError)>,
}

fn run_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn build_each(ds: &Dataset, workers: usize) -> Vec<Result<LabeledPath, BuildError>> {
    run_pool(workers, || {
        if workers <= 1 {
            ds.plays
                .iter()
                .map(|p| build_checked(p, &ds.config))
                .collect()
        } else {
            ds.plays
                .par_iter()
                .map(|p| build_checked(p, &ds.config))
                .collect()
        }
    })
}

/// One path per play, in dataset order, using up to `workers` threads.
pub fn build_all(ds: &Dataset, workers: usize) -> Result<Vec<LabeledPath>, BuildFailures> {
    let (paths, failures) = build_all_lenient(ds, workers);
    if failures.is_empty() {
        Ok(paths)
    } else {
        Err(BuildFailures { failures })
    }
}

/// Like [`build_all`] but keeps the paths of plays that built.
pub fn build_all_lenient(
    ds: &Dataset,
    workers: usize,
) -> (Vec<LabeledPath>, Vec<(String, BuildError)>) {
    let mut paths = Vec::with_capacity(ds.plays.len());
    let mut failures = Vec::new();
    for (play, res) in ds.plays.iter().zip(build_each(ds, workers)) {
        match res {
            Ok(p) => paths.push(p),
            Err(e) => failures.push((play.id.clone(), e)),
        }
    }
    (paths, failures)
}

/// Structural invariants every built path satisfies.
pub fn check_path(path: &LabeledPath) -> Result<(), String> {
    if path.vertices.is_empty() {
        return Err("no vertices".into());
    }
    if path.arcs.len() != path.vertices.len() {
        return Err(format!(
            "{} arcs for {} vertices",
            path.arcs.len(),
            path.vertices.len()
        ));
    }
    let (terminal, inner) = path.arcs.split_last().expect("non-empty");
    if terminal.to_result.as_deref() != Some(path.result.as_str())
        || !terminal.spatial.is_empty()
        || !terminal.thematic.is_empty()
    {
        return Err("terminal arc must be unlabeled and target the result".into());
    }
    for v in &path.vertices {
        if !(v.t_start <= v.t_end) {
            return Err(format!("interval [{}, {}) reversed", v.t_start, v.t_end));
        }
    }
    for (k, arc) in inner.iter().enumerate() {
        let (a, b) = (&path.vertices[k], &path.vertices[k + 1]);
        if arc.is_terminal() {
            return Err(format!("arc {k} targets a result before the end"));
        }
        if arc.spatial != spatial_relation(&a.state, &b.state) {
            return Err(format!(
                "arc {k} spatial label disagrees with its endpoints"
            ));
        }
        if arc.spatial.is_empty() && arc.thematic.is_empty() {
            return Err(format!("arc {k} has an empty label"));
        }
        if (a.state == b.state) != (arc.spatial.is_empty() && !arc.thematic.is_empty()) {
            return Err(format!("arc {k} self-loop rule broken"));
        }
        let gap = b.t_start - a.t_end;
        if gap < 0.0 {
            return Err(format!("intervals {k} and {} overlap", k + 1));
        }
        if gap > 0.0 && arc.thematic.is_empty() {
            return Err(format!("gap after vertex {k} without an event"));
        }
    }
    Ok(())
}

/// A set of paths together with the config they were built on. This is the
/// interchange document consumed by features, aggregation and export.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub config: ModelConfig,
    pub paths: Vec<LabeledPath>,
}

#[derive(Serialize, Deserialize)]
struct VertexRepr(Vec<u32>, String, f64, f64);

#[derive(Serialize, Deserialize)]
struct ArcRepr(Vec<String>, Vec<String>);

/// On disk the terminal arc is implied by `result`; `arcs` lists the
/// `|vertices| - 1` inner arcs as `[spatial-labels, thematic-labels]`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDoc {
    id: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    vertices: Vec<VertexRepr>,
    arcs: Vec<ArcRepr>,
    result: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSetDoc {
    config: serde_json::Value,
    paths: Vec<PathDoc>,
}

#[derive(Serialize)]
struct PathSetOut<'a> {
    config: &'a ModelConfig,
    paths: Vec<PathDoc>,
}

impl PathSet {
    pub fn new(config: ModelConfig, paths: Vec<LabeledPath>) -> Self {
        Self { config, paths }
    }

    pub fn to_canonical(&self) -> String {
        let paths = self.paths.iter().map(|p| self.to_doc(p)).collect();
        canon::to_string(&PathSetOut {
            config: &self.config,
            paths,
        })
    }

    fn to_doc(&self, p: &LabeledPath) -> PathDoc {
        let zones = &self.config.absolute.zone_names;
        PathDoc {
            id: p.play_id.clone(),
            meta: p.meta.clone(),
            vertices: p
                .vertices
                .iter()
                .map(|v| {
                    VertexRepr(
                        v.state.rel.clone(),
                        zones[v.state.abs].clone(),
                        v.t_start,
                        v.t_end,
                    )
                })
                .collect(),
            arcs: p.arcs[..p.arcs.len().saturating_sub(1)]
                .iter()
                .map(|a| {
                    ArcRepr(
                        a.spatial.names().into_iter().map(String::from).collect(),
                        a.thematic.clone(),
                    )
                })
                .collect(),
            result: p.result.clone(),
        }
    }

    pub fn parse(bytes: &[u8], base_dir: Option<&Path>) -> Result<Self, ParseError> {
        let doc: PathSetDoc = serde_json::from_slice(bytes).map_err(ParseError::from_json)?;
        let config = resolve_config(doc.config, base_dir)?;
        let paths = doc
            .paths
            .into_iter()
            .map(|d| from_doc(d, &config))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { config, paths })
    }

    pub fn from_json_str(text: &str) -> Result<Self, ParseError> {
        Self::parse(text.as_bytes(), None)
    }

    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let bytes = std::fs::read(path).map_err(|e| ParseError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&bytes, path.parent())
    }
}

fn from_doc(d: PathDoc, cfg: &ModelConfig) -> Result<LabeledPath, ParseError> {
    let schema = |message: String| ParseError::Schema {
        location: format!("path {}", d.id),
        message,
    };
    if d.vertices.is_empty() || d.arcs.len() + 1 != d.vertices.len() {
        return Err(schema(format!(
            "{} arcs for {} vertices",
            d.arcs.len(),
            d.vertices.len()
        )));
    }
    if cfg.results.index_of(&d.result).is_none() {
        return Err(schema(format!("unknown result `{}`", d.result)));
    }
    let mut vertices = Vec::with_capacity(d.vertices.len());
    for VertexRepr(rel, zone, t_start, t_end) in &d.vertices {
        let abs = cfg
            .zone_index(zone)
            .ok_or_else(|| schema(format!("unknown zone `{zone}`")))?;
        if rel.len() != cfg.rel_zone_count()
            || rel.iter().sum::<u32>() as usize + 1 != cfg.n_players
        {
            return Err(schema(format!(
                "relative tuple {rel:?} does not fit the config"
            )));
        }
        vertices.push(PathVertex {
            state: SpatialState::new(rel.clone(), abs),
            t_start: *t_start,
            t_end: *t_end,
        });
    }
    let mut arcs = Vec::with_capacity(vertices.len());
    for ArcRepr(spatial, thematic) in &d.arcs {
        let mut label = SpatialLabel::NONE;
        for s in spatial {
            match s.as_str() {
                "rel" => label.rel = true,
                "abs" => label.abs = true,
                other => return Err(schema(format!("unknown spatial label `{other}`"))),
            }
        }
        if let Some(leaf) = thematic.iter().find(|l| !cfg.taxonomy.contains(l)) {
            return Err(schema(format!("unknown thematic leaf `{leaf}`")));
        }
        arcs.push(PathArc {
            spatial: label,
            thematic: thematic.clone(),
            to_result: None,
        });
    }
    arcs.push(PathArc {
        spatial: SpatialLabel::NONE,
        thematic: Vec::new(),
        to_result: Some(d.result.clone()),
    });
    let path = LabeledPath {
        play_id: d.id,
        meta: d.meta,
        vertices,
        arcs,
        result: d.result,
    };
    check_path(&path).map_err(|rule| ParseError::Invariant {
        play_id: path.play_id.clone(),
        rule,
    })?;
    Ok(path)
}
