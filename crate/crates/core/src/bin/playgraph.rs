use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use playgraph::aggregate::{AggregateOptions, TagFilter};
use playgraph::export::DotStyle;
use playgraph::features::{FeatureParams, DEFAULT_K};
use playgraph::pipeline::{self, CompareOptions, Document, ExportFormat, PipelineError, TestKind};
use playgraph::synth::ScenarioParams;
use playgraph::PathSet;

/// Graph encoding and analysis of tracked attacking plays.
#[derive(Parser)]
#[command(name = "playgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset; exits 2 if any play breaks a rule.
    Validate { dataset: PathBuf },
    /// Encode every play as a labeled path.
    Build {
        dataset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Rotate plays into the attacking frame first.
        #[arg(long)]
        normalize: bool,
    },
    /// Per-path feature table.
    Features {
        paths: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        /// Comma-separated leaves counted as kick passes (default: every leaf under `kick`).
        #[arg(long, value_delimiter = ',')]
        kick_leaves: Option<Vec<String>>,
        /// Zone whose first visit defines the crossing rank.
        #[arg(long)]
        crossing_zone: Option<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Weighted union of a path set.
    Aggregate {
        paths: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// `tag=value`; repeat for a conjunction.
        #[arg(long)]
        filter: Vec<String>,
        #[arg(long)]
        include_initial_time: bool,
    },
    /// Compare a feature across groups of plays.
    Compare {
        table: PathBuf,
        #[arg(long)]
        feature: String,
        #[arg(long)]
        group_by: String,
        #[arg(long, value_parser = ["kruskal", "chi2"])]
        test: String,
        #[arg(long, value_parser = ["dunn-holm"])]
        pairwise: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Chi-square on zero versus non-zero values.
        #[arg(long)]
        presence: bool,
        #[arg(long, default_value = "table", value_parser = ["table", "structured"])]
        format: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render any pipeline document.
    Export {
        input: PathBuf,
        #[arg(long, value_parser = ["dot", "structured", "table"])]
        format: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Vertex growth factor for time spent in DOT output.
        #[arg(long, default_value_t = 30.0)]
        time_scale: f64,
    },
    /// Generate a synthetic dataset.
    Synth {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        plays: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// `preset:<name>` or a config file.
        #[arg(long, default_value = "preset:rugby-6v6")]
        config: String,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        event_rate: Option<f64>,
    },
}

fn run(cmd: Command) -> Result<ExitCode, PipelineError> {
    match cmd {
        Command::Validate { dataset } => {
            let summary = pipeline::validate_file(&dataset)?;
            print!("{}", summary.render());
            return Ok(if summary.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            });
        }
        Command::Build {
            dataset,
            output,
            workers,
            normalize,
        } => {
            let ds = pipeline::load_dataset(&dataset, normalize)?;
            let set = pipeline::build(&ds, workers)?;
            pipeline::write_atomic(&output, &set.to_canonical())?;
        }
        Command::Features {
            paths,
            output,
            k,
            kick_leaves,
            crossing_zone,
            workers,
        } => {
            let set = PathSet::read(&paths)?;
            let defaults = FeatureParams::defaults(&set.config);
            let params = FeatureParams::new(
                &set.config,
                k,
                kick_leaves.unwrap_or_else(|| defaults.kick_leaves.into_iter().collect()),
                crossing_zone.as_deref().unwrap_or(&defaults.crossing_zone),
            )?;
            let table = pipeline::features(&set, &params, workers)?;
            pipeline::write_atomic(&output, &table.to_csv())?;
        }
        Command::Aggregate {
            paths,
            output,
            filter,
            include_initial_time,
        } => {
            let set = PathSet::read(&paths)?;
            let mut f = TagFilter::new();
            for item in &filter {
                f.conditions.extend(item.parse::<TagFilter>()?.conditions);
            }
            let options = AggregateOptions {
                exclude_initial_time: !include_initial_time,
            };
            let agg = pipeline::aggregate(&set, &f, options)?;
            pipeline::write_atomic(&output, &agg.to_canonical())?;
        }
        Command::Compare {
            table,
            feature,
            group_by,
            test,
            pairwise,
            alpha,
            presence,
            format,
            output,
        } => {
            let Document::Features(t) = Document::load(&table)? else {
                return Err(PipelineError::Usage(
                    "compare expects a feature table".into(),
                ));
            };
            let mut opts = CompareOptions::new(&feature, &group_by, test.parse::<TestKind>()?);
            opts.pairwise = pairwise.is_some();
            opts.alpha = alpha;
            opts.presence = presence;
            let report = pipeline::compare(&t, &opts)?;
            let doc = Document::Report(report);
            let text = doc.export(format.parse()?, &DotStyle::default())?;
            match output {
                Some(path) => pipeline::write_atomic(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Export {
            input,
            format,
            output,
            time_scale,
        } => {
            let doc = Document::load(&input)?;
            let style = DotStyle {
                time_scale,
                ..DotStyle::default()
            };
            let text = doc.export(format.parse::<ExportFormat>()?, &style)?;
            pipeline::write_atomic(&output, &text)?;
        }
        Command::Synth {
            preset,
            seed,
            plays,
            output,
            config,
            frames,
            event_rate,
        } => {
            let cfg = pipeline::load_config(&config)?;
            let mut sp = ScenarioParams::preset(&preset, seed, plays)?;
            if let Some(n) = frames {
                sp.frames = (n, n);
            }
            if let Some(r) = event_rate {
                sp.event_rate = r;
            }
            let ds = pipeline::synth(&cfg, &sp)?;
            pipeline::write_atomic(&output, &ds.to_canonical())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
