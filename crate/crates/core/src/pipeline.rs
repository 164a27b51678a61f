//! File-level commands behind the `playgraph` binary.
//!
//! Each command reads its inputs, computes a result in memory and hands back
//! the text to write; [`write_atomic`] then replaces the output file in one
//! rename so a failed run never leaves a partial file behind.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};
use thiserror::Error;

use crate::aggregate::{
    filter_paths, union_weighted, AggregateError, AggregateGraph, AggregateOptions, TagFilter,
};
use crate::canon;
use crate::export::{
    aggregate_dot, aggregate_table, paths_dot, paths_table, skeleton_dot, DotStyle,
};
use crate::features::{feature_table, FeatureError, FeatureParams, FeatureTable};
use crate::ingest::{parse_dataset, parse_dataset_unchecked, Dataset, ParseError};
use crate::model::{ModelConfig, SkeletonGraph};
use crate::path::{build_all, BuildFailures, PathSet};
use crate::stats::{
    chi_square_independence, dunn_pairwise, kruskal_wallis, ContingencyTable, GroupedSamples,
    StatsError, TestReport,
};
use crate::synth::{generate, ScenarioParams, SynthError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0} play(s) failed validation")]
    Invalid(usize),
    #[error(transparent)]
    Build(#[from] BuildFailures),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl PipelineError {
    /// Short machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Parse(e) => e.category(),
            PipelineError::Invalid(_) => "validation",
            PipelineError::Build(_) => "build",
            PipelineError::Feature(_) => "features",
            PipelineError::Aggregate(_) => "aggregate",
            PipelineError::Stats(_) => "stats",
            PipelineError::Synth(_) => "synth",
            PipelineError::Usage(_) => "usage",
            PipelineError::Io { .. } => "io",
        }
    }

    /// 2 for data that parsed but breaks a rule, 3 for unreadable input,
    /// 4 for bad invocations.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(ParseError::Invariant { .. } | ParseError::Config(_)) => 2,
            PipelineError::Parse(_) | PipelineError::Io { .. } => 3,
            PipelineError::Usage(_) => 4,
            PipelineError::Synth(SynthError::UnknownPreset(_) | SynthError::Invalid(_)) => 4,
            PipelineError::Feature(
                FeatureError::ZeroK
                | FeatureError::UnknownLeaf(_)
                | FeatureError::UnknownZone(_)
                | FeatureError::UnknownFeature(_)
                | FeatureError::UnknownTag(_),
            ) => 4,
            PipelineError::Feature(FeatureError::Table(_)) => 3,
            PipelineError::Aggregate(
                AggregateError::UnknownTag(_) | AggregateError::BadFilter(_),
            ) => 4,
            _ => 2,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| PipelineError::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

/// Outcome of validating a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub plays: usize,
    /// `(play id, rule and detail)` per violation, in dataset order.
    pub problems: Vec<(String, String)>,
}

impl ValidationSummary {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn render(&self) -> String {
        if self.is_clean() {
            return format!("ok: {} plays\n", self.plays);
        }
        let mut out = String::new();
        for (id, msg) in &self.problems {
            out.push_str(&format!("{id}: {msg}\n"));
        }
        let bad: HashSet<&String> = self.problems.iter().map(|(id, _)| id).collect();
        out.push_str(&format!(
            "{} of {} plays invalid, {} violation(s)\n",
            bad.len(),
            self.plays,
            self.problems.len()
        ));
        out
    }
}

pub fn validate_dataset(ds: &Dataset) -> ValidationSummary {
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for p in &ds.plays {
        if !seen.insert(p.id.as_str()) {
            problems.push((p.id.clone(), "duplicate play id".to_string()));
        }
    }
    for (id, report) in ds.validate() {
        for v in report.iter() {
            problems.push((id.clone(), v.to_string()));
        }
    }
    ValidationSummary {
        plays: ds.plays.len(),
        problems,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|e| io_err(path, e))
}

pub fn validate_file(path: &Path) -> Result<ValidationSummary, PipelineError> {
    let ds = parse_dataset_unchecked(&read_bytes(path)?, path.parent())?;
    Ok(validate_dataset(&ds))
}

pub fn load_dataset(path: &Path, normalize: bool) -> Result<Dataset, PipelineError> {
    let ds = parse_dataset(&read_bytes(path)?, path.parent())?;
    Ok(if normalize { ds.normalized() } else { ds })
}

pub fn build(ds: &Dataset, workers: usize) -> Result<PathSet, PipelineError> {
    Ok(PathSet::new(ds.config.clone(), build_all(ds, workers)?))
}

pub fn features(
    set: &PathSet,
    params: &FeatureParams,
    workers: usize,
) -> Result<FeatureTable, PipelineError> {
    Ok(feature_table(&set.paths, &set.config, params, workers)?)
}

pub fn aggregate(
    set: &PathSet,
    filter: &TagFilter,
    options: AggregateOptions,
) -> Result<AggregateGraph, PipelineError> {
    let kept = filter_paths(&set.paths, filter)?;
    Ok(union_weighted(&kept, &set.config, options))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Kruskal,
    Chi2,
}

impl FromStr for TestKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kruskal" => Ok(TestKind::Kruskal),
            "chi2" => Ok(TestKind::Chi2),
            other => Err(PipelineError::Usage(format!("unknown test `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub feature: String,
    pub group_by: String,
    pub test: TestKind,
    /// Dunn-Holm after a significant Kruskal-Wallis result.
    pub pairwise: bool,
    pub alpha: f64,
    /// Chi-square on zero / non-zero instead of distinct values.
    pub presence: bool,
}

impl CompareOptions {
    pub fn new(feature: &str, group_by: &str, test: TestKind) -> Self {
        Self {
            feature: feature.into(),
            group_by: group_by.into(),
            test,
            pairwise: false,
            alpha: 0.05,
            presence: false,
        }
    }
}

/// Compares a feature across the groups defined by a tag. With
/// `pairwise`, Dunn-Holm runs only when the omnibus p is below `alpha`.
pub fn compare(table: &FeatureTable, opts: &CompareOptions) -> Result<TestReport, PipelineError> {
    if opts.pairwise && opts.test == TestKind::Chi2 {
        return Err(PipelineError::Usage(
            "pairwise comparisons require --test kruskal".into(),
        ));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(PipelineError::Usage("alpha must lie in (0, 1)".into()));
    }
    let mut groups = table.grouped(&opts.feature, &opts.group_by)?;
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    match opts.test {
        TestKind::Kruskal => {
            let g = GroupedSamples::new(groups);
            let mut report = kruskal_wallis(&g)?;
            if opts.pairwise && report.p_value < opts.alpha {
                report.pairwise = Some(dunn_pairwise(&g)?);
            }
            Ok(report)
        }
        TestKind::Chi2 => {
            let mut pairs = Vec::new();
            for row in &table.rows {
                let Some(label) = row.meta.get(&opts.group_by) else {
                    continue;
                };
                let cat = if opts.presence {
                    if row.value(&opts.feature)? > 0.0 {
                        "present"
                    } else {
                        "absent"
                    }
                    .to_string()
                } else {
                    row.display_value(&opts.feature)?
                };
                pairs.push((label.clone(), cat));
            }
            Ok(chi_square_independence(&ContingencyTable::from_pairs(
                pairs,
            ))?)
        }
    }
}

pub fn synth(cfg: &ModelConfig, sp: &ScenarioParams) -> Result<Dataset, PipelineError> {
    Ok(generate(cfg, sp)?)
}

/// Resolves `preset:<name>` or a JSON config file.
pub fn load_config(spec: &str) -> Result<ModelConfig, PipelineError> {
    let cfg = if let Some(name) = spec.strip_prefix("preset:") {
        ModelConfig::preset(name)
            .ok_or_else(|| PipelineError::Usage(format!("unknown preset `{name}`")))?
    } else {
        let path = Path::new(spec);
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        ModelConfig::from_json(&text).map_err(ParseError::from_json)?
    };
    let report = cfg.validate();
    if !report.is_empty() {
        return Err(ParseError::Config(report).into());
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Structured,
    Table,
}

impl FromStr for ExportFormat {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "structured" => Ok(ExportFormat::Structured),
            "table" => Ok(ExportFormat::Table),
            other => Err(PipelineError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

/// Any file the pipeline produces or consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Config(ModelConfig),
    Dataset(Dataset),
    Paths(PathSet),
    Aggregate(AggregateGraph),
    Features(FeatureTable),
    Report(TestReport),
}

impl Document {
    /// Detects the document kind from its content.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let bytes = read_bytes(path)?;
        let base = path.parent();
        if bytes.first() == Some(&b'#') {
            let text = String::from_utf8_lossy(&bytes);
            return Ok(Document::Features(FeatureTable::parse_csv(&text)?));
        }
        let v: Value = serde_json::from_slice(&bytes).map_err(ParseError::from_json)?;
        let has = |k: &str| v.get(k).is_some();
        Ok(if has("plays") {
            Document::Dataset(parse_dataset(&bytes, base)?)
        } else if has("paths") {
            Document::Paths(PathSet::parse(&bytes, base)?)
        } else if has("vertex_time") {
            Document::Aggregate(AggregateGraph::parse(&bytes, base)?)
        } else if has("test") {
            Document::Report(serde_json::from_value(v).map_err(ParseError::from_json)?)
        } else if has("n_players") {
            let cfg: ModelConfig = serde_json::from_value(v).map_err(ParseError::from_json)?;
            let report = cfg.validate();
            if !report.is_empty() {
                return Err(ParseError::Config(report).into());
            }
            Document::Config(cfg)
        } else {
            return Err(ParseError::Schema {
                location: path.display().to_string(),
                message: "unrecognised document".into(),
            }
            .into());
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Config(_) => "config",
            Document::Dataset(_) => "dataset",
            Document::Paths(_) => "paths",
            Document::Aggregate(_) => "aggregate",
            Document::Features(_) => "features",
            Document::Report(_) => "report",
        }
    }

    pub fn export(&self, format: ExportFormat, style: &DotStyle) -> Result<String, PipelineError> {
        use ExportFormat::*;
        let unsupported = || {
            Err(PipelineError::Usage(format!(
                "{} documents have no {} export",
                self.kind(),
                match format {
                    Dot => "dot",
                    Structured => "structured",
                    Table => "table",
                }
            )))
        };
        Ok(match (self, format) {
            (Document::Config(c), Dot) => skeleton_dot(&SkeletonGraph::build(c), style),
            (Document::Config(c), Structured) => canon::to_string(c),
            (Document::Config(c), Table) => skeleton_table(&SkeletonGraph::build(c)),
            (Document::Dataset(d), Dot) => skeleton_dot(&SkeletonGraph::build(&d.config), style),
            (Document::Dataset(d), Structured) => d.to_canonical(),
            (Document::Dataset(d), Table) => frames_table(d),
            (Document::Paths(p), Dot) => {
                paths_dot(&SkeletonGraph::build(&p.config), &p.paths, style)
            }
            (Document::Paths(p), Structured) => p.to_canonical(),
            (Document::Paths(p), Table) => paths_table(p),
            (Document::Aggregate(a), Dot) => aggregate_dot(a, style),
            (Document::Aggregate(a), Structured) => a.to_canonical(),
            (Document::Aggregate(a), Table) => aggregate_table(a),
            (Document::Features(f), Structured) => features_structured(f),
            (Document::Features(f), Table) => f.to_csv(),
            (Document::Report(r), Structured) => canon::to_string(r),
            (Document::Report(r), Table) => r.to_table(),
            (Document::Features(_) | Document::Report(_), Dot) => return unsupported(),
        })
    }
}

/// `id,label,row,column` per skeleton vertex; results leave the grid
/// columns empty.
pub fn skeleton_table(skel: &SkeletonGraph) -> String {
    let mut out = String::from("id,label,row,column\n");
    for id in 0..skel.vertex_count() {
        let (row, col) = skel
            .layout(id)
            .map_or((String::new(), String::new()), |(r, c)| {
                (r.to_string(), c.to_string())
            });
        out.push_str(&format!("{id},\"{}\",{row},{col}\n", skel.label(id)));
    }
    out
}

/// `play_id,t,carrier,player,x,y`, one row per player per frame.
pub fn frames_table(ds: &Dataset) -> String {
    let mut out = String::from("play_id,t,carrier,player,x,y\n");
    for p in &ds.plays {
        for f in &p.frames {
            for (j, pos) in f.positions.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{j},{},{}\n",
                    p.id,
                    canon::format_number(f.t),
                    f.carrier,
                    canon::format_number(pos.x),
                    canon::format_number(pos.y)
                ));
            }
        }
    }
    out
}

fn features_structured(t: &FeatureTable) -> String {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| {
            json!({
                "play_id": r.play_id,
                "meta": r.meta,
                "max_shift_right": r.max_shift_right,
                "crossing_rank": r.crossing_rank.to_string(),
                "kick_pass_count": r.kick_pass_count,
                "path_length": r.path_length,
            })
        })
        .collect();
    let params: BTreeMap<&str, Value> = [
        ("k", json!(t.params.k)),
        ("kick_leaves", json!(t.params.kick_leaves)),
        ("crossing_zone", json!(t.params.crossing_zone)),
    ]
    .into_iter()
    .collect();
    canon::to_string(&json!({ "params": params, "rows": rows }))
}
