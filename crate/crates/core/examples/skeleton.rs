//! Prints the rugby 6v6 skeleton graph: vertex counts, the arc universe and
//! the vertex layout.

use playgraph::pipeline::skeleton_table;
use playgraph::{ModelConfig, SkeletonGraph};

fn main() {
    let skel = SkeletonGraph::build(&ModelConfig::rugby_6v6());
    println!(
        "{} spatial + {} result vertices, {} possible arcs",
        skel.spatial_count(),
        skel.result_count(),
        skel.arc_universe_size()
    );
    print!("{}", skeleton_table(&skel));
}
