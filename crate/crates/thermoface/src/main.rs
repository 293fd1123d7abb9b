use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thermoface::config::PipelineConfig;
use thermoface::pipeline::{self, Report};
use thermoface::Result;
use thermoface_core::quality::ModelKind;

/// Thermal face refinement, quality scoring and 3D reconstruction.
#[derive(Parser)]
#[command(name = "thermoface", version)]
struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `threads`; THERMOFACE_THREADS wins over both)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Niqe,
    Brisque,
}

#[derive(Subcommand)]
enum Command {
    /// Refine an image or every image in a directory
    Enhance {
        input: PathBuf,
        /// Also write input | output comparison strips
        #[arg(long)]
        strips: bool,
    },
    /// Score original/processed pairs and write quality.csv
    Quality {
        original: PathBuf,
        processed: PathBuf,
        #[arg(long)]
        niqe_model: Option<PathBuf>,
        #[arg(long)]
        brisque_model: Option<PathBuf>,
    },
    /// Mesh, pose renders and depth map from one face image
    Reconstruct {
        image: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Weight mask PGM with raw byte weights
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Comma-separated yaw angles in degrees
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        poses: Option<Vec<f64>>,
    },
    /// Train the desk-scale network on synthetic faces
    Train {
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Every refinement stage plus a reconstruction, with a checksum manifest
    Demo {
        input: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Fit a pristine quality model on a directory of clean images
    FitModel {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Model file to write
        #[arg(long)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Report> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    match cli.command {
        Command::Enhance { input, strips } => {
            cfg.strips |= strips;
            cfg.validate()?;
            pipeline::cmd_enhance(&input, &cfg)
        }
        Command::Quality {
            original,
            processed,
            niqe_model,
            brisque_model,
        } => {
            cfg.quality.niqe_model = niqe_model.or(cfg.quality.niqe_model);
            cfg.quality.brisque_model = brisque_model.or(cfg.quality.brisque_model);
            cfg.validate()?;
            pipeline::cmd_quality(&original, &processed, &cfg)
        }
        Command::Reconstruct {
            image,
            checkpoint,
            mask,
            poses,
        } => {
            cfg.reconstruct.checkpoint = checkpoint.or(cfg.reconstruct.checkpoint);
            if let Some(p) = poses {
                cfg.reconstruct.poses = p;
            }
            cfg.validate()?;
            pipeline::cmd_reconstruct(&image, mask.as_deref(), &cfg)
        }
        Command::Train { iterations, seed } => {
            let t = &mut cfg.train.train;
            t.iterations = iterations.unwrap_or(t.iterations);
            t.seed = seed.unwrap_or(t.seed);
            cfg.validate()?;
            pipeline::cmd_train(&cfg)
        }
        Command::Demo { input, checkpoint } => {
            cfg.reconstruct.checkpoint = checkpoint.or(cfg.reconstruct.checkpoint);
            cfg.validate()?;
            pipeline::cmd_demo(&input, &cfg)
        }
        Command::FitModel {
            input,
            kind,
            output,
        } => {
            cfg.validate()?;
            let kind = match kind {
                Kind::Niqe => ModelKind::Niqe,
                Kind::Brisque => ModelKind::BrisqueDistance,
            };
            let niqe = cfg.quality.niqe;
            pipeline::cmd_fit_model(&input, kind, &output, &niqe, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.failures {
                eprintln!("failed: {f}");
            }
            print!("{}", report.summary);
            if !report.summary.ends_with('\n') {
                println!();
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
