//! Weighted unions of path sets.
//!
//! Arc weights count how often the ordered vertex pair is traversed (labels
//! collapsed, result arcs included). Vertex time sums the validity intervals
//! spent on each spatial vertex; durations are accumulated in whole
//! microseconds so merging partial aggregates is exact and order-free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::features::arc_pairs;
use crate::ingest::{resolve_config, Dataset, ParseError};
use crate::model::{ModelConfig, SkeletonGraph, SpatialState, VertexId};
use crate::path::LabeledPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateOptions {
    /// Skip the initial vertex of each path when summing time spent.
    pub exclude_initial_time: bool,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            exclude_initial_time: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("no tag `{0}` on any play")]
    UnknownTag(String),
    #[error("malformed filter `{0}`, expected tag=value")]
    BadFilter(String),
    #[error("empty path set")]
    EmptySet,
    #[error("aggregates built on different configs or options")]
    Incompatible,
}

fn micros(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateGraph {
    pub config: ModelConfig,
    pub skeleton: SkeletonGraph,
    pub options: AggregateOptions,
    pub play_count: usize,
    arc_weights: BTreeMap<(VertexId, VertexId), u64>,
    label_weights: BTreeMap<(VertexId, VertexId, String), u64>,
    vertex_time_us: BTreeMap<VertexId, i64>,
}

impl AggregateGraph {
    pub fn empty(config: &ModelConfig, options: AggregateOptions) -> Self {
        Self {
            config: config.clone(),
            skeleton: SkeletonGraph::build(config),
            options,
            play_count: 0,
            arc_weights: BTreeMap::new(),
            label_weights: BTreeMap::new(),
            vertex_time_us: BTreeMap::new(),
        }
    }

    pub fn add_path(&mut self, path: &LabeledPath) {
        let pairs = arc_pairs(path, &self.skeleton);
        for (pair, arc) in pairs.iter().zip(&path.arcs) {
            *self.arc_weights.entry(*pair).or_default() += 1;
            *self
                .label_weights
                .entry((pair.0, pair.1, arc.label()))
                .or_default() += 1;
        }
        let skip = usize::from(self.options.exclude_initial_time);
        for v in path.vertices.iter().skip(skip) {
            let id = self
                .skeleton
                .spatial_id(&v.state)
                .expect("path state belongs to the skeleton");
            *self.vertex_time_us.entry(id).or_default() += micros(v.t_end) - micros(v.t_start);
        }
        self.play_count += 1;
    }

    /// Elementwise sum of two aggregates over the same config and options.
    pub fn merge(&mut self, other: &AggregateGraph) -> Result<(), AggregateError> {
        if self.config != other.config || self.options != other.options {
            return Err(AggregateError::Incompatible);
        }
        for (k, w) in &other.arc_weights {
            *self.arc_weights.entry(*k).or_default() += w;
        }
        for (k, w) in &other.label_weights {
            *self.label_weights.entry(k.clone()).or_default() += w;
        }
        for (k, t) in &other.vertex_time_us {
            *self.vertex_time_us.entry(*k).or_default() += t;
        }
        self.play_count += other.play_count;
        Ok(())
    }

    pub fn arc_weight(&self, src: VertexId, dst: VertexId) -> u64 {
        self.arc_weights.get(&(src, dst)).copied().unwrap_or(0)
    }

    pub fn arc_weights(&self) -> impl Iterator<Item = ((VertexId, VertexId), u64)> + '_ {
        self.arc_weights.iter().map(|(k, w)| (*k, *w))
    }

    /// Per-label breakdown of the arc weights.
    pub fn label_weights(&self) -> impl Iterator<Item = (&(VertexId, VertexId, String), u64)> + '_ {
        self.label_weights.iter().map(|(k, w)| (k, *w))
    }

    pub fn total_weight(&self) -> u64 {
        self.arc_weights.values().sum()
    }

    pub fn max_weight(&self) -> u64 {
        self.arc_weights.values().copied().max().unwrap_or(0)
    }

    /// Number of distinct traversed pairs.
    pub fn support_size(&self) -> usize {
        self.arc_weights.len()
    }

    pub fn density(&self) -> f64 {
        self.support_size() as f64 / self.skeleton.arc_universe_size() as f64
    }

    /// Seconds spent on a spatial vertex, `None` if never visited.
    pub fn vertex_time(&self, id: VertexId) -> Option<f64> {
        self.vertex_time_us.get(&id).map(|&us| us as f64 / 1e6)
    }

    pub fn vertex_times(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.vertex_time_us
            .iter()
            .map(|(&id, &us)| (id, us as f64 / 1e6))
    }

    pub fn vertex_time_of(&self, state: &SpatialState) -> Option<f64> {
        self.vertex_time(self.skeleton.spatial_id(state)?)
    }

    pub fn max_vertex_time(&self) -> f64 {
        self.vertex_time_us.values().copied().max().unwrap_or(0) as f64 / 1e6
    }

    pub fn total_time(&self) -> f64 {
        self.vertex_time_us.values().sum::<i64>() as f64 / 1e6
    }

    fn vertex_ref(&self, id: VertexId) -> VertexRef {
        match self.skeleton.state(id) {
            Some(s) => VertexRef::Spatial(s.rel, self.skeleton.zone_names()[s.abs].clone()),
            None => VertexRef::Result(
                self.skeleton.result_names()[id - self.skeleton.spatial_count()].clone(),
            ),
        }
    }

    fn resolve(&self, v: &VertexRef) -> Option<VertexId> {
        match v {
            VertexRef::Spatial(rel, zone) => self.skeleton.spatial_id(&SpatialState::new(
                rel.clone(),
                self.config.zone_index(zone)?,
            )),
            VertexRef::Result(name) => self.skeleton.result_id(name),
        }
    }

    pub fn to_canonical(&self) -> String {
        let doc = AggregateDoc {
            config: serde_json::to_value(&self.config).expect("config serializes"),
            options: self.options,
            play_count: self.play_count,
            density: self.density(),
            arcs: self
                .arc_weights
                .iter()
                .map(|(&(s, d), &w)| (self.vertex_ref(s), self.vertex_ref(d), w))
                .collect(),
            labels: self
                .label_weights
                .iter()
                .map(|((s, d, l), &w)| (self.vertex_ref(*s), self.vertex_ref(*d), l.clone(), w))
                .collect(),
            vertex_time: self
                .vertex_time_us
                .iter()
                .map(|(&id, &us)| {
                    let VertexRef::Spatial(rel, zone) = self.vertex_ref(id) else {
                        unreachable!("time is kept for spatial vertices only")
                    };
                    (rel, zone, us as f64 / 1e6)
                })
                .collect(),
        };
        canon::to_string(&doc)
    }

    pub fn parse(bytes: &[u8], base_dir: Option<&Path>) -> Result<Self, ParseError> {
        let doc: AggregateDoc = serde_json::from_slice(bytes).map_err(ParseError::from_json)?;
        let config = resolve_config(doc.config, base_dir)?;
        let mut agg = AggregateGraph::empty(&config, doc.options);
        agg.play_count = doc.play_count;
        let unknown = |what: String| ParseError::Schema {
            location: "aggregate".into(),
            message: format!("unknown vertex {what}"),
        };
        for (s, d, w) in &doc.arcs {
            let key = (
                agg.resolve(s).ok_or_else(|| unknown(format!("{s:?}")))?,
                agg.resolve(d).ok_or_else(|| unknown(format!("{d:?}")))?,
            );
            agg.arc_weights.insert(key, *w);
        }
        for (s, d, l, w) in &doc.labels {
            let key = (
                agg.resolve(s).ok_or_else(|| unknown(format!("{s:?}")))?,
                agg.resolve(d).ok_or_else(|| unknown(format!("{d:?}")))?,
                l.clone(),
            );
            agg.label_weights.insert(key, *w);
        }
        for (rel, zone, secs) in &doc.vertex_time {
            let v = VertexRef::Spatial(rel.clone(), zone.clone());
            let id = agg.resolve(&v).ok_or_else(|| unknown(format!("{v:?}")))?;
            agg.vertex_time_us.insert(id, micros(*secs));
        }
        Ok(agg)
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum VertexRef {
    Spatial(Vec<u32>, String),
    Result(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AggregateDoc {
    config: serde_json::Value,
    options: AggregateOptions,
    play_count: usize,
    /// Informational; recomputed from `arcs` on load.
    density: f64,
    arcs: Vec<(VertexRef, VertexRef, u64)>,
    labels: Vec<(VertexRef, VertexRef, String, u64)>,
    vertex_time: Vec<(Vec<u32>, String, f64)>,
}

/// Weighted union of `paths` built on `cfg`.
pub fn union_weighted(
    paths: &[LabeledPath],
    cfg: &ModelConfig,
    options: AggregateOptions,
) -> AggregateGraph {
    let mut agg = AggregateGraph::empty(cfg, options);
    for p in paths {
        agg.add_path(p);
    }
    agg
}

/// Arithmetic mean of the path lengths (terminal arcs included).
pub fn average_path_length(paths: &[LabeledPath]) -> Result<f64, AggregateError> {
    if paths.is_empty() {
        return Err(AggregateError::EmptySet);
    }
    let total: usize = paths.iter().map(LabeledPath::len).sum();
    Ok(total as f64 / paths.len() as f64)
}

/// Conjunction of `tag=value` conditions over play metadata. The empty
/// filter accepts everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagFilter {
    pub conditions: Vec<(String, String)>,
}

impl TagFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: &str, value: &str) -> Self {
        self.conditions.push((tag.to_string(), value.to_string()));
        self
    }

    pub fn matches(&self, meta: &BTreeMap<String, String>) -> bool {
        self.conditions
            .iter()
            .all(|(t, v)| meta.get(t).is_some_and(|m| m == v))
    }

    fn check_tags<'a>(
        &self,
        metas: impl Iterator<Item = &'a BTreeMap<String, String>>,
    ) -> Result<(), AggregateError> {
        let known: BTreeSet<&String> = metas.flat_map(|m| m.keys()).collect();
        match self.conditions.iter().find(|(t, _)| !known.contains(t)) {
            Some((t, _)) => Err(AggregateError::UnknownTag(t.clone())),
            None => Ok(()),
        }
    }
}

impl FromStr for TagFilter {
    type Err = AggregateError;

    /// `tag=value` pairs separated by commas.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = TagFilter::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (t, v) = part
                .split_once('=')
                .ok_or_else(|| AggregateError::BadFilter(part.to_string()))?;
            f = f.with(t.trim(), v.trim());
        }
        Ok(f)
    }
}

impl fmt::Display for TagFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .conditions
            .iter()
            .map(|(t, v)| format!("{t}={v}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Plays whose tags satisfy `filter`, order preserved.
pub fn filter_plays(ds: &Dataset, filter: &TagFilter) -> Result<Dataset, AggregateError> {
    filter.check_tags(ds.plays.iter().map(|p| &p.meta))?;
    Ok(Dataset {
        config: ds.config.clone(),
        plays: ds
            .plays
            .iter()
            .filter(|p| filter.matches(&p.meta))
            .cloned()
            .collect(),
    })
}

pub fn filter_paths(
    paths: &[LabeledPath],
    filter: &TagFilter,
) -> Result<Vec<LabeledPath>, AggregateError> {
    filter.check_tags(paths.iter().map(|p| &p.meta))?;
    Ok(paths
        .iter()
        .filter(|p| filter.matches(&p.meta))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{build_all, build_path};

    const FIG3: &str = include_str!("../data/fixtures/fig3_example.json");

    fn fig3() -> (ModelConfig, LabeledPath) {
        let ds = Dataset::from_json_str(FIG3).unwrap();
        let p = build_path(&ds.plays[0], &ds.config).unwrap();
        (ds.config, p)
    }

    #[test]
    fn single_fig3_path() {
        let (cfg, p) = fig3();
        let agg = union_weighted(
            std::slice::from_ref(&p),
            &cfg,
            AggregateOptions {
                exclude_initial_time: false,
            },
        );
        assert_eq!(agg.support_size(), 3);
        assert!(agg.arc_weights().all(|(_, w)| w == 1));
        let s = |rel: [u32; 2], abs| SpatialState::new(rel.to_vec(), abs);
        assert_eq!(agg.vertex_time_of(&s([0, 2], 0)), Some(1.0));
        assert_eq!(agg.vertex_time_of(&s([0, 2], 1)), Some(2.2));
        assert_eq!(agg.vertex_time_of(&s([1, 1], 1)), Some(0.9));

        let excl = union_weighted(std::slice::from_ref(&p), &cfg, AggregateOptions::default());
        assert_eq!(excl.vertex_time_of(&s([0, 2], 0)), None);
        assert_eq!(excl.vertex_time_of(&s([0, 2], 1)), Some(2.2));
    }

    #[test]
    fn duplicates_double_weights_not_density() {
        let (cfg, p) = fig3();
        let one = union_weighted(std::slice::from_ref(&p), &cfg, AggregateOptions::default());
        let two = union_weighted(&[p.clone(), p], &cfg, AggregateOptions::default());
        assert!(one
            .arc_weights()
            .all(|(k, w)| two.arc_weight(k.0, k.1) == 2 * w));
        assert_eq!(one.density(), two.density());
        assert_eq!(two.total_weight(), 6);
    }

    #[test]
    fn merge_matches_union() {
        let (cfg, p) = fig3();
        let mut q = p.clone();
        q.vertices.truncate(1);
        q.arcs = vec![p.arcs[2].clone()];
        let mut a = union_weighted(std::slice::from_ref(&p), &cfg, AggregateOptions::default());
        let b = union_weighted(std::slice::from_ref(&q), &cfg, AggregateOptions::default());
        a.merge(&b).unwrap();
        assert_eq!(
            a,
            union_weighted(&[p, q], &cfg, AggregateOptions::default())
        );
    }

    #[test]
    fn structured_round_trip() {
        let (cfg, p) = fig3();
        let agg = union_weighted(&[p.clone(), p], &cfg, AggregateOptions::default());
        let text = agg.to_canonical();
        let back = AggregateGraph::from_json_str(&text).unwrap();
        assert_eq!(back, agg);
        assert_eq!(back.to_canonical(), text);
    }

    fn tagged(ds: &mut Dataset, tags: &[(&str, &str, &str)]) {
        let base = ds.plays[0].clone();
        ds.plays = tags
            .iter()
            .enumerate()
            .map(|(i, (id, ped, scen))| {
                let mut p = base.clone();
                p.id = format!("{id}{i}");
                p.meta = [("pedagogy", *ped), ("scenario", *scen)]
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                p
            })
            .collect();
    }

    #[test]
    fn filters() {
        let mut ds = Dataset::from_json_str(FIG3).unwrap();
        tagged(
            &mut ds,
            &[
                ("a", "NL", "tight"),
                ("b", "L", "tight"),
                ("c", "NL", "open"),
            ],
        );
        let nl = filter_plays(&ds, &"pedagogy=NL".parse().unwrap()).unwrap();
        assert_eq!(nl.plays.len(), 2);
        assert_eq!(filter_plays(&ds, &TagFilter::new()).unwrap(), ds);
        let both = TagFilter::new()
            .with("scenario", "tight")
            .with("pedagogy", "NL");
        let hit = filter_plays(&ds, &both).unwrap();
        assert_eq!(hit.plays.len(), 1);
        assert_eq!(hit.plays[0].id, "a0");
        assert_eq!(
            filter_plays(&ds, &"phase=pre".parse().unwrap()).unwrap_err(),
            AggregateError::UnknownTag("phase".into())
        );
        let paths = build_all(&ds, 1).unwrap();
        assert_eq!(filter_paths(&paths, &both).unwrap().len(), 1);
    }

    #[test]
    fn average_length() {
        let (_, p) = fig3();
        let mut q = p.clone();
        q.arcs.extend(p.arcs.iter().take(2).cloned());
        assert_eq!(average_path_length(&[p.clone(), q]).unwrap(), 4.0);
        assert_eq!(average_path_length(std::slice::from_ref(&p)).unwrap(), 3.0);
        assert_eq!(
            average_path_length(&[]).unwrap_err(),
            AggregateError::EmptySet
        );
    }
}
