//! Classifies one snapshot of six attackers into a spatial state.

use playgraph::{ModelConfig, Point, SkeletonGraph};

fn main() {
    let cfg = ModelConfig::rugby_6v6();
    let positions = [
        Point { x: 15.0, y: 12.0 },
        Point { x: 8.0, y: 9.0 },
        Point { x: 11.0, y: 10.0 },
        Point { x: 20.0, y: 10.5 },
        Point { x: 24.0, y: 9.0 },
        Point { x: 28.0, y: 8.0 },
    ];
    let state = cfg
        .classify_state(0, &positions)
        .expect("positions inside the field");
    let skel = SkeletonGraph::build(&cfg);
    let id = skel.spatial_id(&state).expect("state is in the skeleton");
    println!(
        "rel={:?} abs={} -> vertex {id} ({})",
        state.rel,
        cfg.absolute.zone_names[state.abs],
        skel.label(id)
    );
}
