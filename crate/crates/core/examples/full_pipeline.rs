//! End-to-end run through the file-level commands: synth, validate, build,
//! features, aggregate, compare and export, writing into a temp directory.

use playgraph::export::DotStyle;
use playgraph::pipeline::{
    aggregate, build, compare, features, load_dataset, synth, validate_file, write_atomic,
    CompareOptions, Document, ExportFormat, TestKind,
};
use playgraph::synth::ScenarioParams;
use playgraph::{AggregateOptions, FeatureParams, ModelConfig, TagFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("playgraph-pipeline");
    std::fs::create_dir_all(&dir)?;
    let cfg = ModelConfig::rugby_6v6();

    let ds = synth(&cfg, &ScenarioParams::preset("open-like", 42, 120)?)?;
    let data = dir.join("plays.json");
    write_atomic(&data, &ds.to_canonical())?;
    print!("{}", validate_file(&data)?.render());

    let set = build(&load_dataset(&data, true)?, 4)?;
    write_atomic(&dir.join("paths.json"), &set.to_canonical())?;

    let table = features(&set, &FeatureParams::defaults(&cfg), 4)?;
    write_atomic(&dir.join("features.csv"), &table.to_csv())?;

    let agg = aggregate(&set, &TagFilter::default(), AggregateOptions::default())?;
    let doc = Document::Aggregate(agg);
    write_atomic(
        &dir.join("aggregate.dot"),
        &doc.export(ExportFormat::Dot, &DotStyle::default())?,
    )?;

    let report = compare(
        &table,
        &CompareOptions::new("path_length", "phase", TestKind::Kruskal),
    )?;
    print!("{}", report.to_table());
    println!("outputs in {}", dir.display());
    Ok(())
}
