use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use tagmotif::MotifPattern;
use tagmotif_cli::{
    cmd_matrices, cmd_mine, cmd_report, cmd_synth, combined_stream, detect_batch, detect_watch,
    load_registry_file, load_templates, RunConfig,
};

#[derive(Parser)]
#[command(name = "tagmotif", version, about = "Mines temporal motifs and activities from sound-tag event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineArgs {
    /// Event-log file(s); one file per recorded environment
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Taxonomy file declaring the tags (one /-separated path per line)
    #[arg(long)]
    registry: PathBuf,
    /// Co-occurrence window in seconds
    #[arg(long, default_value_t = 60.0)]
    dt: f64,
    /// Following window in seconds
    #[arg(long, default_value_t = 60.0)]
    delta: f64,
    /// Run-segmentation gap in seconds (defaults to dt)
    #[arg(long)]
    gap: Option<f64>,
    /// Significance level for flagging after FDR correction
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Longest episode chain to mine
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// Minimal-occurrence support threshold for mining
    #[arg(long, default_value_t = 10)]
    min_support: u64,
    /// Label permutations for empirical p-values
    #[arg(long, default_value_t = 99)]
    permutations: u32,
    /// Seed for every randomized step
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How many mined chains get a permutation p-value
    #[arg(long, default_value_t = 20)]
    significance_top: usize,
    /// Directory the artifacts are written to
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl PipelineArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            inputs: self.input,
            registry: self.registry,
            dt: self.dt,
            delta: self.delta,
            gap: self.gap,
            alpha: self.alpha,
            max_len: self.max_len,
            min_support: self.min_support,
            permutations: self.permutations,
            seed: self.seed,
            significance_top: self.significance_top,
            out_dir: self.out_dir,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Count and score the co-occurrence and following matrices
    Matrices(PipelineArgs),
    /// Mine frequent episode chains and export the motif graph
    Mine {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Motif shapes to enumerate (edge, two-path, loop-2, loop-3, fan-out-N)
        #[arg(long = "motif")]
        motifs: Vec<String>,
    },
    /// Match activity templates and emit detections as JSON lines
    Detect {
        /// Event-log file, or - for standard input
        #[arg(long)]
        input: PathBuf,
        /// Taxonomy file declaring the tags
        #[arg(long)]
        registry: PathBuf,
        /// JSON file with the episode templates to match
        #[arg(long)]
        templates: PathBuf,
        /// Read the input incrementally and emit each detection as soon as
        /// its outcome is final
        #[arg(long)]
        watch: bool,
        /// Write detections here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic stream with ground truth from a JSON config
    Synth {
        /// Generator configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Event-log output path
        #[arg(long)]
        out_events: PathBuf,
        /// Ground-truth JSON output path
        #[arg(long)]
        out_truth: PathBuf,
        /// Matching taxonomy output path
        #[arg(long)]
        out_registry: Option<PathBuf>,
    },
    /// Write a human-readable report.md
    Report {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Tag whose runs are tested for boundary association
        #[arg(long, requires = "trigger_tag")]
        run_tag: Option<String>,
        /// Tag whose events act as the boundary trigger
        #[arg(long, requires = "run_tag")]
        trigger_tag: Option<String>,
    },
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Matrices(args) => {
            let config = args.into_config();
            let registry = load_registry_file(&config.registry)?;
            cmd_matrices(&config, &registry)?;
        }
        Command::Mine { pipeline, motifs } => {
            let config = pipeline.into_config();
            let registry = load_registry_file(&config.registry)?;
            let patterns = motifs
                .iter()
                .map(|m| m.parse::<MotifPattern>().map_err(anyhow::Error::from))
                .collect::<Result<Vec<_>>>()?;
            cmd_mine(&config, &registry, &patterns)?;
        }
        Command::Detect {
            input,
            registry,
            templates,
            watch,
            out,
        } => {
            let registry = load_registry_file(&registry)?;
            let templates = load_templates(&templates, &registry)?;
            let stdout = io::stdout();
            let mut sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(
                    fs::File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?,
                ),
                None => Box::new(stdout.lock()),
            };
            if watch {
                let reader: Box<dyn BufRead> = if input == PathBuf::from("-") {
                    Box::new(BufReader::new(io::stdin()))
                } else {
                    Box::new(BufReader::new(fs::File::open(&input).with_context(
                        || format!("opening {}", input.display()),
                    )?))
                };
                detect_watch(reader, &registry, &templates, &mut sink)?;
            } else {
                let config = RunConfig {
                    inputs: vec![input],
                    registry: PathBuf::new(),
                    dt: 60.0,
                    delta: 60.0,
                    gap: None,
                    alpha: 0.01,
                    max_len: 4,
                    min_support: 10,
                    permutations: 99,
                    seed: 0,
                    significance_top: 0,
                    out_dir: PathBuf::new(),
                };
                let stream = combined_stream(&config, &registry)?;
                detect_batch(&stream, &templates, &mut sink)?;
            }
            sink.flush()?;
        }
        Command::Synth {
            config,
            out_events,
            out_truth,
            out_registry,
        } => {
            cmd_synth(&config, &out_events, &out_truth, out_registry.as_deref())?;
        }
        Command::Report {
            pipeline,
            run_tag,
            trigger_tag,
        } => {
            let config = pipeline.into_config();
            let registry = load_registry_file(&config.registry)?;
            let boundary = match (&run_tag, &trigger_tag) {
                (Some(r), Some(t)) => Some((r.as_str(), t.as_str())),
                _ => None,
            };
            cmd_report(&config, &registry, boundary)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
