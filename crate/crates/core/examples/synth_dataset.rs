//! Generates a seeded dataset for each preset and summarises it.

use playgraph::synth::{generate, ScenarioParams, SplitMix64, PRESETS};
use playgraph::ModelConfig;

fn main() {
    let mut rng = SplitMix64::new(0);
    println!(
        "splitmix64(0): {:#018x} {:#018x}",
        rng.next_u64(),
        rng.next_u64()
    );
    let cfg = ModelConfig::rugby_6v6();
    for name in PRESETS {
        let ds = generate(&cfg, &ScenarioParams::preset(name, 7, 50).unwrap()).unwrap();
        let frames: usize = ds.plays.iter().map(|p| p.frames.len()).sum();
        let events: usize = ds.plays.iter().map(|p| p.events.len()).sum();
        println!(
            "{name:>10}: {} plays, {frames} frames, {events} events",
            ds.plays.len()
        );
    }
}
