//! `partbench` — drive the part generation/segmentation/reassembly pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stage failure.

use clap::{Parser, Subcommand};
use partbench_core::completer::CompleterId;
use partbench_core::pipeline::{Pipeline, PipelineConfig, SegmentMode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "partbench", version, about = "Part-based 3D asset benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Parser)]
struct CommonArgs {
    /// Pipeline configuration file (JSON). Defaults to built-in settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the dataset seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the completer {oracle, passthrough, symmetry}.
    #[arg(long)]
    completer: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the procedural dataset and manifest.
    Gen(CommonArgs),
    /// Render multi-view grids, depths, masks and segmentation maps.
    Render(CommonArgs),
    /// Sample, rank and store segmentation proposals.
    Segment {
        #[command(flatten)]
        common: CommonArgs,
        /// Proposal mode: automatic or seeded by per-part query points.
        #[arg(long, default_value = "auto")]
        mode: String,
    },
    /// Evaluate stored proposals: mAP and recall reports.
    Eval(CommonArgs),
    /// Run the configured completer over stored proposals.
    Complete(CommonArgs),
    /// Carve completed parts (and the unstructured object) into fields.
    Carve(CommonArgs),
    /// Composite part fields and report reassembly parity.
    Compose(CommonArgs),
    /// Run every stage and write summary.json.
    All {
        #[command(flatten)]
        common: CommonArgs,
        /// Segmentation mode used inside the full run.
        #[arg(long, default_value = "seeded")]
        mode: String,
    },
    /// Print the default configuration as JSON.
    DefaultConfig,
}

fn load_config(common: &CommonArgs) -> Result<PipelineConfig, String> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| e.to_string())?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.dataset.seed = seed;
    }
    if let Some(completer) = &common.completer {
        config.completer = completer
            .parse::<CompleterId>()
            .map_err(|e| e.to_string())?;
    }
    if let Some(out_dir) = &common.out_dir {
        config.out_dir = out_dir.display().to_string();
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

enum RunError {
    Config(String),
    Stage(String),
}

fn pipeline_for(common: &CommonArgs) -> Result<Pipeline, RunError> {
    let config = load_config(common).map_err(RunError::Config)?;
    Pipeline::new(config).map_err(|e| RunError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), RunError> {
    let stage = |e: partbench_core::Error| RunError::Stage(e.to_string());
    match cli.command {
        Command::Gen(common) => {
            let p = pipeline_for(&common)?;
            let manifest = p.cmd_gen().map_err(stage)?;
            println!(
                "generated {} assets under {}",
                manifest.assets.len(),
                p.root().display()
            );
        }
        Command::Render(common) => {
            let p = pipeline_for(&common)?;
            p.cmd_render().map_err(stage)?;
            println!("rendered view bundles under {}", p.root().display());
        }
        Command::Segment { common, mode } => {
            let p = pipeline_for(&common)?;
            let mode: SegmentMode = mode
                .parse()
                .map_err(|e: partbench_core::Error| RunError::Config(e.to_string()))?;
            p.cmd_segment(mode).map_err(stage)?;
            println!("wrote proposals under {}", p.root().display());
        }
        Command::Eval(common) => {
            let p = pipeline_for(&common)?;
            let report = p.cmd_eval().map_err(stage)?;
            for (tau, v) in &report.map {
                println!("mAP@{tau} = {v:.4}");
            }
            if let Some(seeded) = &report.seeded_map {
                for (tau, v) in seeded {
                    println!("seeded mAP@{tau} = {v:.4}");
                }
            }
        }
        Command::Complete(common) => {
            let p = pipeline_for(&common)?;
            p.cmd_complete().map_err(stage)?;
            println!("wrote completions under {}", p.root().display());
        }
        Command::Carve(common) => {
            let p = pipeline_for(&common)?;
            p.cmd_carve().map_err(stage)?;
            println!("wrote part fields under {}", p.root().display());
        }
        Command::Compose(common) => {
            let p = pipeline_for(&common)?;
            let report = p.cmd_compose().map_err(stage)?;
            println!(
                "reassembly: compositional {:.2} dB vs unstructured {:.2} dB (mean |delta| {:.3})",
                report.mean_compositional, report.mean_unstructured, report.mean_abs_delta
            );
        }
        Command::All { common, mode } => {
            let p = pipeline_for(&common)?;
            let mode: SegmentMode = mode
                .parse()
                .map_err(|e: partbench_core::Error| RunError::Config(e.to_string()))?;
            let summary = p.cmd_all(mode).map_err(stage)?;
            println!(
                "summary written to {}",
                p.root().join("summary.json").display()
            );
            for (tau, v) in &summary.segmentation.map {
                println!("mAP@{tau} = {v:.4}");
            }
            println!(
                "completion ({}) mean masked PSNR = {:.2} dB",
                summary.completion.completer, summary.completion.mean_masked_psnr
            );
            println!(
                "reassembly |delta| = {:.3} dB",
                summary.reassembly.mean_abs_delta
            );
        }
        Command::DefaultConfig => {
            let config = PipelineConfig::default();
            println!("{}", serde_json::to_string_pretty(&config).unwrap());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Stage(msg)) => {
            eprintln!("stage failure: {msg}");
            ExitCode::from(3)
        }
    }
}
