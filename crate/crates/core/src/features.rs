//! Local (per path) and global (per set) coordination features.
//!
//! Prefix features look at the first `k` vertices of a path; thematic counts
//! attribute each arc to the vertex it leaves, so `k` vertices bound at most
//! `k` arcs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{ModelConfig, SkeletonGraph, VertexId};
use crate::path::LabeledPath;

pub const DEFAULT_K: usize = 5;

/// Rank of the first vertex in the target zone, or censored when it is not
/// reached within the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingRank {
    Reached(usize),
    Censored(usize),
}

impl CrossingRank {
    /// Numeric value for rank-based tests: a censored value sorts above every
    /// rank that was reached (`k + 1`).
    pub fn ordinal(&self) -> f64 {
        match *self {
            CrossingRank::Reached(r) => r as f64,
            CrossingRank::Censored(k) => (k + 1) as f64,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, CrossingRank::Censored(_))
    }
}

impl fmt::Display for CrossingRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossingRank::Reached(r) => write!(f, "{r}"),
            CrossingRank::Censored(k) => write!(f, ">={k}"),
        }
    }
}

impl FromStr for CrossingRank {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix(">=") {
            k.parse()
                .map(CrossingRank::Censored)
                .map_err(|e| format!("{s}: {e}"))
        } else {
            s.parse()
                .map(CrossingRank::Reached)
                .map_err(|e| format!("{s}: {e}"))
        }
    }
}

fn prefix_len(path: &LabeledPath, k: usize) -> usize {
    k.min(path.vertices.len())
}

/// Largest `(n - 1) - r_i` over the first `k` vertices, where `r_i` counts
/// teammates in the last relative zone (to the carrier's right).
pub fn max_shift_right(path: &LabeledPath, k: usize) -> u32 {
    path.vertices[..prefix_len(path, k)]
        .iter()
        .map(|v| v.state.teammates() - v.state.last_rel())
        .max()
        .unwrap_or(0)
}

/// 1-based rank of the first of the first `k` vertices lying in `zone`.
pub fn crossing_rank(path: &LabeledPath, k: usize, zone: usize) -> CrossingRank {
    path.vertices[..prefix_len(path, k)]
        .iter()
        .position(|v| v.state.abs == zone)
        .map_or(CrossingRank::Censored(k), |i| CrossingRank::Reached(i + 1))
}

/// Arcs leaving the first `k` vertices whose thematic label meets `leaves`.
pub fn count_thematic(path: &LabeledPath, k: usize, leaves: &BTreeSet<String>) -> usize {
    path.arcs[..prefix_len(path, k).min(path.arcs.len())]
        .iter()
        .filter(|a| a.thematic.iter().any(|t| leaves.contains(t)))
        .count()
}

/// Number of arcs, the terminal arc included.
pub fn path_length(path: &LabeledPath) -> usize {
    path.arcs.len()
}

/// Ordered `(source, target)` vertex pairs of every arc of the path, labels
/// collapsed. Panics if the path does not fit the skeleton.
pub fn arc_pairs(path: &LabeledPath, skel: &SkeletonGraph) -> Vec<(VertexId, VertexId)> {
    let ids: Vec<VertexId> = path
        .vertices
        .iter()
        .map(|v| {
            skel.spatial_id(&v.state)
                .expect("path state belongs to the skeleton")
        })
        .collect();
    let mut pairs: Vec<(VertexId, VertexId)> = ids.windows(2).map(|w| (w[0], w[1])).collect();
    if let (Some(&last), Some(res)) = (ids.last(), skel.result_id(&path.result)) {
        pairs.push((last, res));
    }
    pairs
}

/// Distinct traversed ordered pairs over the size of the arc universe.
pub fn subgraph_density(paths: &[LabeledPath], skel: &SkeletonGraph) -> f64 {
    let support: HashSet<(VertexId, VertexId)> =
        paths.iter().flat_map(|p| arc_pairs(p, skel)).collect();
    support.len() as f64 / skel.arc_universe_size() as f64
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("prefix length k must be at least 1")]
    ZeroK,
    #[error("unknown thematic leaf `{0}`")]
    UnknownLeaf(String),
    #[error("unknown absolute zone `{0}`")]
    UnknownZone(String),
    #[error("malformed feature table: {0}")]
    Table(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
}

/// Settings shared by the prefix features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureParams {
    pub k: usize,
    pub kick_leaves: BTreeSet<String>,
    pub crossing_zone: String,
}

impl FeatureParams {
    /// Checks leaves and zone against the config.
    pub fn new<I, S>(
        cfg: &ModelConfig,
        k: usize,
        kick_leaves: I,
        crossing_zone: &str,
    ) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if k == 0 {
            return Err(FeatureError::ZeroK);
        }
        let kick_leaves: BTreeSet<String> = kick_leaves.into_iter().map(Into::into).collect();
        if let Some(bad) = kick_leaves.iter().find(|l| !cfg.taxonomy.contains(l)) {
            return Err(FeatureError::UnknownLeaf(bad.clone()));
        }
        if cfg.zone_index(crossing_zone).is_none() {
            return Err(FeatureError::UnknownZone(crossing_zone.to_string()));
        }
        Ok(Self {
            k,
            kick_leaves,
            crossing_zone: crossing_zone.to_string(),
        })
    }

    /// `k = 5`, every leaf under `kick`, and `Middle` (or the second band).
    pub fn defaults(cfg: &ModelConfig) -> Self {
        let zones = &cfg.absolute.zone_names;
        let zone = if zones.iter().any(|z| z == "Middle") {
            "Middle".to_string()
        } else {
            zones[1.min(zones.len().saturating_sub(1))].clone()
        };
        Self {
            k: DEFAULT_K,
            kick_leaves: cfg
                .taxonomy
                .leaves_under(&["kick"])
                .into_iter()
                .map(String::from)
                .collect(),
            crossing_zone: zone,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub play_id: String,
    pub meta: BTreeMap<String, String>,
    pub max_shift_right: u32,
    pub crossing_rank: CrossingRank,
    pub kick_pass_count: usize,
    pub path_length: usize,
}

pub const FEATURE_NAMES: [&str; 5] = [
    "max_shift_right",
    "crossing_rank",
    "kick_pass_count",
    "kick_presence",
    "path_length",
];

impl FeatureRow {
    pub fn compute(path: &LabeledPath, params: &FeatureParams, zone: usize) -> Self {
        Self {
            play_id: path.play_id.clone(),
            meta: path.meta.clone(),
            max_shift_right: max_shift_right(path, params.k),
            crossing_rank: crossing_rank(path, params.k, zone),
            kick_pass_count: count_thematic(path, params.k, &params.kick_leaves),
            path_length: path_length(path),
        }
    }

    /// Numeric value of a named feature. `kick_presence` is 1 when at least one
    /// kick pass occurs in the prefix.
    pub fn value(&self, feature: &str) -> Result<f64, FeatureError> {
        Ok(match feature {
            "max_shift_right" => self.max_shift_right as f64,
            "crossing_rank" => self.crossing_rank.ordinal(),
            "kick_pass_count" => self.kick_pass_count as f64,
            "kick_presence" => f64::from(u8::from(self.kick_pass_count > 0)),
            "path_length" => self.path_length as f64,
            other => return Err(FeatureError::UnknownFeature(other.to_string())),
        })
    }

    /// Value as written in the exported table (`>=k` for censored ranks).
    pub fn display_value(&self, feature: &str) -> Result<String, FeatureError> {
        match feature {
            "crossing_rank" => Ok(self.crossing_rank.to_string()),
            other => self.value(other).map(|v| format!("{v}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub params: FeatureParams,
    /// Union of metadata keys, sorted; one column each.
    pub tag_columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

/// One row per path, in path order.
pub fn feature_table(
    paths: &[LabeledPath],
    cfg: &ModelConfig,
    params: &FeatureParams,
    workers: usize,
) -> Result<FeatureTable, FeatureError> {
    let zone = cfg
        .zone_index(&params.crossing_zone)
        .ok_or_else(|| FeatureError::UnknownZone(params.crossing_zone.clone()))?;
    let compute = || -> Vec<FeatureRow> {
        if workers <= 1 {
            paths
                .iter()
                .map(|p| FeatureRow::compute(p, params, zone))
                .collect()
        } else {
            paths
                .par_iter()
                .map(|p| FeatureRow::compute(p, params, zone))
                .collect()
        }
    };
    let rows = if workers <= 1 {
        compute()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(compute),
            Err(_) => compute(),
        }
    };
    let tag_columns: BTreeSet<&String> = rows.iter().flat_map(|r| r.meta.keys()).collect();
    Ok(FeatureTable {
        params: params.clone(),
        tag_columns: tag_columns.into_iter().cloned().collect(),
        rows,
    })
}

const VALUE_COLUMNS: [&str; 4] = [
    "max_shift_right",
    "crossing_rank",
    "kick_pass_count",
    "path_length",
];

impl FeatureTable {
    /// Delimited text: a `#` comment line with the parameters, a header, then
    /// one row per path.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# k={}; kick_leaves={}; crossing_zone={}\n",
            self.params.k,
            self.params
                .kick_leaves
                .iter()
                .cloned()
                .collect::<Vec<_>>()
                .join("|"),
            self.params.crossing_zone
        );
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["play_id".to_string()];
        header.extend(self.tag_columns.iter().cloned());
        header.extend(VALUE_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.play_id.clone()];
            rec.extend(
                self.tag_columns
                    .iter()
                    .map(|t| r.meta.get(t).cloned().unwrap_or_default()),
            );
            rec.push(r.max_shift_right.to_string());
            rec.push(r.crossing_rank.to_string());
            rec.push(r.kick_pass_count.to_string());
            rec.push(r.path_length.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("utf-8 input"));
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, FeatureError> {
        let bad = |m: String| FeatureError::Table(m);
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let comment = first
            .strip_prefix('#')
            .ok_or_else(|| bad("missing parameter comment line".into()))?;
        let mut k = None;
        let mut leaves = BTreeSet::new();
        let mut zone = None;
        for part in comment.split(';') {
            let (key, value) = part
                .trim()
                .split_once('=')
                .ok_or_else(|| bad(format!("bad parameter `{part}`")))?;
            match key {
                "k" => k = Some(value.parse().map_err(|_| bad(format!("bad k `{value}`")))?),
                "kick_leaves" => {
                    leaves = value
                        .split('|')
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                }
                "crossing_zone" => zone = Some(value.to_string()),
                other => return Err(bad(format!("unknown parameter `{other}`"))),
            }
        }
        let params = FeatureParams {
            k: k.ok_or_else(|| bad("missing k".into()))?,
            kick_leaves: leaves,
            crossing_zone: zone.ok_or_else(|| bad("missing crossing_zone".into()))?,
        };

        let mut reader = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let n = header.len();
        if n < 5 || header[0] != "play_id" || header[n - 4..] != VALUE_COLUMNS {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let tag_columns = header[1..n - 4].to_vec();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num = |i: usize| -> Result<usize, FeatureError> {
                rec[i]
                    .parse()
                    .map_err(|_| bad(format!("row {}: bad number `{}`", rows.len() + 1, &rec[i])))
            };
            let meta = tag_columns
                .iter()
                .enumerate()
                .filter(|(i, _)| !rec[i + 1].is_empty())
                .map(|(i, t)| (t.clone(), rec[i + 1].to_string()))
                .collect();
            rows.push(FeatureRow {
                play_id: rec[0].to_string(),
                meta,
                max_shift_right: num(n - 4)? as u32,
                crossing_rank: rec[n - 3].parse().map_err(bad)?,
                kick_pass_count: num(n - 2)?,
                path_length: num(n - 1)?,
            });
        }
        Ok(Self {
            params,
            tag_columns,
            rows,
        })
    }

    /// Groups a feature's values by a metadata tag, groups in first-seen
    /// order. Rows without the tag are skipped.
    pub fn grouped(
        &self,
        feature: &str,
        tag: &str,
    ) -> Result<Vec<(String, Vec<f64>)>, FeatureError> {
        if !self.tag_columns.iter().any(|t| t == tag) {
            return Err(FeatureError::UnknownTag(tag.to_string()));
        }
        let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
        for row in &self.rows {
            let Some(label) = row.meta.get(tag) else {
                continue;
            };
            let v = row.value(feature)?;
            match groups.iter_mut().find(|(l, _)| l == label) {
                Some((_, vals)) => vals.push(v),
                None => groups.push((label.clone(), vec![v])),
            }
        }
        Ok(groups)
    }
}
