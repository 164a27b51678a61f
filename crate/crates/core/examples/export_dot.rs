//! Writes skeleton, path overlay and aggregate DOT files to a directory
//! (default: the system temp dir). Render with `neato -n2 -Tsvg`.

use std::path::PathBuf;

use playgraph::aggregate::union_weighted;
use playgraph::export::{aggregate_dot, paths_dot, skeleton_dot, DotStyle};
use playgraph::path::build_all;
use playgraph::synth::{generate, ScenarioParams};
use playgraph::{AggregateOptions, ModelConfig, SkeletonGraph};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let cfg = ModelConfig::rugby_6v6();
    let skel = SkeletonGraph::build(&cfg);
    let ds = generate(&cfg, &ScenarioParams::preset("kick-like", 4, 25).unwrap()).unwrap();
    let paths = build_all(&ds, 2).unwrap();
    let agg = union_weighted(&paths, &cfg, AggregateOptions::default());
    let style = DotStyle::default();
    for (name, text) in [
        ("skeleton.dot", skeleton_dot(&skel, &style)),
        ("overlay.dot", paths_dot(&skel, &paths[..3], &style)),
        ("aggregate.dot", aggregate_dot(&agg, &style)),
    ] {
        let target = dir.join(name);
        std::fs::write(&target, text)?;
        println!("wrote {}", target.display());
    }
    Ok(())
}
