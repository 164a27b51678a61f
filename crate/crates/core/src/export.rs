//! Graphviz DOT and delimited-table renderings.
//!
//! Spatial vertices are pinned on a grid: the column is the rank of the
//! relative tuple (most teammates on the right leftmost) and the row is the
//! absolute zone, own end at the bottom. Result vertices flank the grid, even
//! indices on the right and odd indices on the left. Render with
//! `neato -n` or `fdp` so the `pos` pins are honoured.

use std::fmt::Write as _;

use crate::aggregate::AggregateGraph;
use crate::canon::format_number;
use crate::features::arc_pairs;
use crate::model::{SkeletonGraph, VertexId};
use crate::path::{LabeledPath, PathSet};

#[derive(Debug, Clone, PartialEq)]
pub struct DotStyle {
    /// Distance between grid cells, in points.
    pub spacing: f64,
    /// Width of an unweighted vertex, in inches.
    pub base_width: f64,
    /// The vertex with the most time grows by `time_scale / 10` inches; the
    /// others proportionally.
    pub time_scale: f64,
    /// Pen width of the heaviest arc; lighter arcs scale linearly from 1.
    pub max_penwidth: f64,
    pub base_color: String,
    pub highlight_color: String,
}

impl Default for DotStyle {
    fn default() -> Self {
        Self {
            spacing: 120.0,
            base_width: 0.6,
            time_scale: 30.0,
            max_penwidth: 8.0,
            base_color: "gray70".into(),
            highlight_color: "firebrick".into(),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_name(id: VertexId) -> String {
    format!("v{id}")
}

/// Pinned position of vertex `id`, in points.
pub fn vertex_position(skel: &SkeletonGraph, id: VertexId, spacing: f64) -> (f64, f64) {
    if let Some((row, col)) = skel.layout(id) {
        return (col as f64 * spacing, row as f64 * spacing);
    }
    let r = id - skel.spatial_count();
    let slot = (r / 2) as f64;
    let mid = (skel.rows().max(1) - 1) as f64 * spacing / 2.0;
    let x = if r.is_multiple_of(2) {
        (skel.columns() as f64 + slot) * spacing
    } else {
        -(1.0 + slot) * spacing
    };
    (x, mid)
}

struct Writer<'a> {
    skel: &'a SkeletonGraph,
    style: &'a DotStyle,
    out: String,
}

impl<'a> Writer<'a> {
    fn new(skel: &'a SkeletonGraph, style: &'a DotStyle, name: &str) -> Self {
        let mut out = String::new();
        writeln!(out, "digraph {} {{", quote(name)).unwrap();
        out.push_str("  graph [splines=true, overlap=true];\n");
        out.push_str("  node [fontsize=10];\n");
        Self { skel, style, out }
    }

    fn nodes(&mut self, time: impl Fn(VertexId) -> Option<f64>, max_time: f64) {
        for id in 0..self.skel.vertex_count() {
            let (x, y) = vertex_position(self.skel, id, self.style.spacing);
            let shape = if self.skel.is_spatial(id) {
                "ellipse"
            } else {
                "box"
            };
            let mut attrs = vec![
                format!("label={}", quote(&self.skel.label(id))),
                format!("shape={shape}"),
                format!("pos=\"{},{}!\"", format_number(x), format_number(y)),
            ];
            if let Some(t) = time(id) {
                let grow = if max_time > 0.0 {
                    self.style.time_scale * t / max_time / 10.0
                } else {
                    0.0
                };
                attrs.push(format!("time={}", quote(&format_number(t))));
                attrs.push(format!(
                    "width={}",
                    format_number(self.style.base_width + grow)
                ));
                attrs.push("fixedsize=true".into());
            }
            writeln!(self.out, "  {} [{}];", node_name(id), attrs.join(", ")).unwrap();
        }
    }

    fn arc(&mut self, src: VertexId, dst: VertexId, attrs: &[String]) {
        writeln!(
            self.out,
            "  {} -> {} [{}];",
            node_name(src),
            node_name(dst),
            attrs.join(", ")
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("}\n");
        self.out
    }
}

/// The full skeleton: every vertex and every arc of the universe in the base
/// colour.
pub fn skeleton_dot(skel: &SkeletonGraph, style: &DotStyle) -> String {
    let mut w = Writer::new(skel, style, "skeleton");
    w.nodes(|_| None, 0.0);
    let attrs = [
        format!("color={}", quote(&style.base_color)),
        "arrowsize=0.5".into(),
    ];
    for src in 0..skel.spatial_count() {
        for dst in 0..skel.vertex_count() {
            w.arc(src, dst, &attrs);
        }
    }
    w.finish()
}

/// Skeleton vertices with the arcs of `paths` drawn in the highlight colour
/// and labeled; one DOT edge per path arc.
pub fn paths_dot(skel: &SkeletonGraph, paths: &[LabeledPath], style: &DotStyle) -> String {
    let name = match paths {
        [one] => one.play_id.as_str(),
        _ => "paths",
    };
    let mut w = Writer::new(skel, style, name);
    w.nodes(|_| None, 0.0);
    for p in paths {
        for ((src, dst), arc) in arc_pairs(p, skel).into_iter().zip(&p.arcs) {
            w.arc(
                src,
                dst,
                &[
                    format!("label={}", quote(&arc.label())),
                    format!("color={}", quote(&style.highlight_color)),
                    "penwidth=2".into(),
                ],
            );
        }
    }
    w.finish()
}

/// Aggregate rendering: one edge per traversed pair with pen width scaled to
/// its weight, vertex width scaled to time spent. An empty aggregate renders
/// every vertex at the base width and no edges.
pub fn aggregate_dot(agg: &AggregateGraph, style: &DotStyle) -> String {
    let mut w = Writer::new(&agg.skeleton, style, "aggregate");
    let max_t = agg.max_vertex_time();
    w.nodes(|id| agg.vertex_time(id), max_t);
    let max_w = agg.max_weight().max(1) as f64;
    for ((src, dst), weight) in agg.arc_weights() {
        let pen = 1.0 + (style.max_penwidth - 1.0) * weight as f64 / max_w;
        w.arc(
            src,
            dst,
            &[
                format!("weight={weight}"),
                format!("label={}", quote(&weight.to_string())),
                format!("penwidth={}", format_number(pen)),
                format!("color={}", quote(&style.highlight_color)),
            ],
        );
    }
    w.finish()
}

fn csv_line(fields: &[String]) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record(fields).expect("in-memory write");
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn rel_field(rel: &[u32]) -> String {
    let parts: Vec<String> = rel.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

/// `kind,src_rel,src_abs,dst,value`: one `arc` row per traversed pair, then
/// one `time` row per vertex with accumulated time.
pub fn aggregate_table(agg: &AggregateGraph) -> String {
    let skel = &agg.skeleton;
    let mut out = String::from("kind,src_rel,src_abs,dst,value\n");
    for ((src, dst), w) in agg.arc_weights() {
        let s = skel.state(src).expect("arc sources are spatial");
        out.push_str(&csv_line(&[
            "arc".into(),
            rel_field(&s.rel),
            skel.zone_names()[s.abs].clone(),
            skel.label(dst),
            w.to_string(),
        ]));
    }
    for (id, t) in agg.vertex_times() {
        let s = skel.state(id).expect("time is kept for spatial vertices");
        out.push_str(&csv_line(&[
            "time".into(),
            rel_field(&s.rel),
            skel.zone_names()[s.abs].clone(),
            String::new(),
            format_number(t),
        ]));
    }
    out
}

/// One row per path vertex:
/// `play_id,index,rel,abs,t_start,t_end,arc_label,target`. The arc columns
/// describe the arc leaving the vertex.
pub fn paths_table(set: &PathSet) -> String {
    let mut out = String::from("play_id,index,rel,abs,t_start,t_end,arc_label,target\n");
    for p in &set.paths {
        for (i, (v, a)) in p.vertices.iter().zip(&p.arcs).enumerate() {
            let target = match (&a.to_result, p.vertices.get(i + 1)) {
                (Some(r), _) => r.clone(),
                (None, Some(next)) => format!(
                    "{} {}",
                    rel_field(&next.state.rel),
                    set.config.absolute.zone_names[next.state.abs]
                ),
                (None, None) => String::new(),
            };
            out.push_str(&csv_line(&[
                p.play_id.clone(),
                i.to_string(),
                rel_field(&v.state.rel),
                set.config.absolute.zone_names[v.state.abs].clone(),
                format_number(v.t_start),
                format_number(v.t_end),
                a.label(),
                target,
            ]));
        }
    }
    out
}
