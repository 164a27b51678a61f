//! Compares a feature across three synthetic scenarios with Kruskal-Wallis,
//! Dunn-Holm follow-ups and a chi-square test on kick presence.

use playgraph::pipeline::{build, compare, features, CompareOptions, TestKind};
use playgraph::synth::{generate, ScenarioParams, PRESETS};
use playgraph::{Dataset, FeatureParams, ModelConfig};

fn main() {
    let cfg = ModelConfig::rugby_6v6();
    let mut ds = Dataset::new(cfg.clone());
    for (i, name) in PRESETS.iter().enumerate() {
        let sp = ScenarioParams::preset(name, 100 + i as u64, 60).unwrap();
        ds.plays.extend(generate(&cfg, &sp).unwrap().plays);
    }
    let set = build(&ds, 4).unwrap();
    let table = features(&set, &FeatureParams::defaults(&cfg), 4).unwrap();

    let mut opts = CompareOptions::new("max_shift_right", "scenario", TestKind::Kruskal);
    opts.pairwise = true;
    print!("{}", compare(&table, &opts).unwrap().to_table());

    let mut opts = CompareOptions::new("kick_presence", "scenario", TestKind::Chi2);
    opts.presence = true;
    print!("{}", compare(&table, &opts).unwrap().to_table());
}
