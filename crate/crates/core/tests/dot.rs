mod common;

use common::dot::check;
use common::FIG3;
use playgraph::aggregate::{union_weighted, AggregateOptions};
use playgraph::export::{aggregate_dot, paths_dot, skeleton_dot, DotStyle};
use playgraph::path::build_all;
use playgraph::{Dataset, ModelConfig, SkeletonGraph};

fn attr<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

#[test]
fn rugby_skeleton_parses_with_exact_counts() {
    let skel = SkeletonGraph::build(&ModelConfig::rugby_6v6());
    let s = check(&skeleton_dot(&skel, &DotStyle::default())).unwrap();
    assert_eq!(s.nodes.len(), 20);
    assert_eq!(s.edges.len(), 360);
    let mut xs = std::collections::BTreeSet::new();
    let mut ys = std::collections::BTreeSet::new();
    for (_, attrs) in &s.node_attrs[..18] {
        let pos = attr(attrs, "pos").unwrap().trim_end_matches('!');
        let (x, y) = pos.split_once(',').unwrap();
        xs.insert(x.to_string());
        ys.insert(y.to_string());
    }
    assert_eq!((xs.len(), ys.len()), (6, 3));
}

#[test]
fn overlay_and_aggregate_counts_match_sources() {
    let ds = common::synthetic(21, 10);
    let paths = build_all(&ds, 1).unwrap();
    let skel = SkeletonGraph::build(&ds.config);
    let style = DotStyle::default();
    let overlay = check(&paths_dot(&skel, &paths, &style)).unwrap();
    assert_eq!(overlay.nodes.len(), skel.vertex_count());
    assert_eq!(
        overlay.edges.len(),
        paths.iter().map(|p| p.len()).sum::<usize>()
    );

    let agg = union_weighted(&paths, &ds.config, AggregateOptions::default());
    let s = check(&aggregate_dot(&agg, &style)).unwrap();
    assert_eq!(s.edges.len(), agg.support_size());
    let total: u64 = s
        .edges
        .iter()
        .map(|(_, _, a)| attr(a, "weight").unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, agg.total_weight());
    let timed = s
        .node_attrs
        .iter()
        .filter(|(_, a)| attr(a, "time").is_some())
        .count();
    assert_eq!(timed, agg.vertex_times().count());
}

#[test]
fn fig3_overlay_labels() {
    let ds = Dataset::from_json_str(FIG3).unwrap();
    let paths = build_all(&ds, 1).unwrap();
    let skel = SkeletonGraph::build(&ds.config);
    let s = check(&paths_dot(&skel, &paths, &DotStyle::default())).unwrap();
    let labels: Vec<&str> = s
        .edges
        .iter()
        .map(|(_, _, a)| attr(a, "label").unwrap())
        .collect();
    assert_eq!(labels, ["abs", "rel, th_4", ""]);
}

#[test]
fn empty_aggregate_is_baseline() {
    let cfg = ModelConfig::rugby_6v6();
    let agg = union_weighted(&[], &cfg, AggregateOptions::default());
    let s = check(&aggregate_dot(&agg, &DotStyle::default())).unwrap();
    assert_eq!((s.nodes.len(), s.edges.len()), (20, 0));
}

#[test]
fn checker_rejects_malformed_input() {
    assert!(check("digraph g { a -> b; }").is_err());
    assert!(check("digraph g { a; a; }").is_err());
    assert!(check("digraph g { a [label=\"x]; }").is_err());
    assert!(check("graph g { }").is_err());
    assert!(check("digraph g { a;").is_err());
}
