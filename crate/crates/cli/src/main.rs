//! `bahop` — cohort generation, preprocessing search, and run forensics.
//!
//! Exit codes: 0 success, 2 configuration error (clap uses the same code
//! for usage errors), 3 verification failure, 4 I/O or lookup failure.

mod commands;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{GenerateArgs, OptimizeArgs};

#[derive(Parser)]
#[command(name = "bahop", version, about = "Similarity-gated preprocessing search over synthetic slide cohorts")]
struct Cli {
    /// Output root for all artifacts (env BAHOP_OUT, default ./bahop-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic cohort to disk: slide pixmaps, manifest, labels.
    Generate {
        /// TOML run configuration; its [cohort] section seeds the settings.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Master seed for the deterministic cohort.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of slides.
        #[arg(long)]
        slides: Option<u32>,
        /// Slide edge length in pixels (multiple of 64).
        #[arg(long)]
        slide_px: Option<u32>,
        /// Patch edge length in pixels (multiple of 64 dividing slide-px).
        #[arg(long)]
        patch_px: Option<u32>,
        /// Archetype portfolio: mixed or pale-lesion.
        #[arg(long)]
        profile: Option<String>,
        /// Replace existing content that does not match this configuration.
        #[arg(long)]
        force: bool,
    },
    /// Run one search strategy and write its run directory.
    Optimize {
        /// TOML run configuration; flags below override single fields.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Strategy name; `bahop --help` lists none, the registry does:
        /// bahop, bahop-nogate, bahop-walk, grid, random, anneal, bayes.
        #[arg(long)]
        strategy: Option<String>,
        /// Search seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Iteration budget, or `full` for one pass over the whole space.
        #[arg(long)]
        budget: Option<String>,
        /// Patch scorer name.
        #[arg(long)]
        scorer: Option<String>,
    },
    /// Tabulate finished runs side by side, sorted by strategy name.
    Compare {
        /// Run ids under <out>/runs.
        #[arg(required = true)]
        runs: Vec<String>,
    },
    /// Export per-configuration (PSNR, objective) pairs from an exhaustive run.
    Landscape {
        /// Run id of a full grid sweep.
        run: String,
        /// Reference configuration key `a:b:c:d:e:f`; defaults to the run's best.
        #[arg(long, value_name = "KEY")]
        reference: Option<String>,
        /// Write the table here instead of stdout.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Re-run a ledger from its header and demand a byte-identical reproduction.
    Verify {
        /// Run id under <out>/runs.
        run: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = store::resolve_out(cli.out);
    let result = match cli.command {
        Command::Generate { config, seed, slides, slide_px, patch_px, profile, force } => {
            commands::generate(
                &out,
                GenerateArgs { config, seed, slides, slide_px, patch_px, profile, force },
            )
        }
        Command::Optimize { config, strategy, seed, budget, scorer } => {
            commands::optimize(&out, OptimizeArgs { config, strategy, seed, budget, scorer })
        }
        Command::Compare { runs } => commands::compare(&out, &runs),
        Command::Landscape { run, reference, output } => {
            commands::landscape(&out, &run, reference, output)
        }
        Command::Verify { run } => commands::verify(&out, &run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.is::<store::PipeClosed>() => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", render_chain(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Joins the cause chain, skipping causes a wrapper already spelled out
/// (the crate's I/O wrapper embeds its source in its own message).
fn render_chain(err: &anyhow::Error) -> String {
    let mut rendered = err.to_string();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !rendered.contains(&text) {
            rendered.push_str(": ");
            rendered.push_str(&text);
        }
    }
    rendered
}

/// Maps an error chain onto the documented exit codes.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(failure) = cause.downcast_ref::<store::Failure>() {
            return failure.code;
        }
        if let Some(core) = cause.downcast_ref::<bahop_core::Error>() {
            return match core {
                bahop_core::Error::Config(_) | bahop_core::Error::InvalidParameter(_) => 2,
                bahop_core::Error::Verification(_) | bahop_core::Error::Malformed(_) => 3,
                bahop_core::Error::Io(_) => 4,
                bahop_core::Error::Degenerate(_) => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    1
}
