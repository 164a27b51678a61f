//! Computes the feature table for a small synthetic dataset.

use playgraph::pipeline::{build, features};
use playgraph::synth::{generate, ScenarioParams};
use playgraph::{FeatureParams, ModelConfig};

fn main() {
    let cfg = ModelConfig::rugby_6v6();
    let sp = ScenarioParams::preset("open-like", 3, 8).expect("known preset");
    let ds = generate(&cfg, &sp).expect("valid parameters");
    let set = build(&ds, 2).expect("synthetic plays build");
    let params =
        FeatureParams::new(&cfg, 4, ["kick_diagonal"], "Middle").expect("known leaf and zone");
    let table = features(&set, &params, 2).expect("features compute");
    print!("{}", table.to_csv());
}
