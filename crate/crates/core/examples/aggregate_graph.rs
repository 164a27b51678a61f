//! Aggregates synthetic paths, then filters by tag and compares densities.

use playgraph::aggregate::{filter_paths, union_weighted};
use playgraph::features::subgraph_density;
use playgraph::path::build_all;
use playgraph::synth::{generate, ScenarioParams};
use playgraph::{AggregateOptions, ModelConfig, SkeletonGraph, TagFilter};

fn main() {
    let cfg = ModelConfig::rugby_6v6();
    let ds = generate(&cfg, &ScenarioParams::preset("tight-like", 11, 40).unwrap()).unwrap();
    let paths = build_all(&ds, 4).unwrap();
    let skel = SkeletonGraph::build(&cfg);

    let all = union_weighted(&paths, &cfg, AggregateOptions::default());
    println!(
        "all: {} plays, {} distinct arcs, density {:.4}, max weight {}",
        all.play_count,
        all.support_size(),
        all.density(),
        all.max_weight()
    );
    for phase in ["pre", "post"] {
        let filter: TagFilter = format!("phase={phase}").parse().unwrap();
        let kept = filter_paths(&paths, &filter).unwrap();
        println!(
            "{filter}: {} plays, density {:.4}",
            kept.len(),
            subgraph_density(&kept, &skel)
        );
    }
    let mut longest: Vec<_> = all.vertex_times().collect();
    longest.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (id, secs) in longest.iter().take(3) {
        println!("{:>8.2} s at {}", secs, skel.label(*id));
    }
}
