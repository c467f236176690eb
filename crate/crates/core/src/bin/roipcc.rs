use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use roipcc::app::{self, RunConfig, WORKERS_ENV};
use roipcc::synth::SceneParams;

#[derive(Parser)]
#[command(name = "roipcc", version, about = "RoI-aware point-cloud geometry compression")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        objects: Option<usize>,
        #[arg(long)]
        ground_points: Option<usize>,
        #[arg(long)]
        object_points: Option<usize>,
    },
    /// Compute per-frame RoI masks.
    Roi {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Encode a sequence; uniform at --q-b when --masks is omitted.
    Encode {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        masks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        q_r: Option<i32>,
        /// Defaults to the first entry of the configured q_b list.
        #[arg(long)]
        q_b: Option<i32>,
    },
    /// Decode a bitstream into per-frame cloud files.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "bin")]
        format: String,
    },
    /// Sweep q_b for RoI and uniform coding and report the averaged advantage.
    Eval {
        #[arg(long = "manifest", required = true)]
        manifests: Vec<PathBuf>,
        /// One mask directory per manifest; computed when omitted.
        #[arg(long = "masks")]
        masks: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time indexed against brute-force points-in-boxes.
    BenchPib {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        points: usize,
        #[arg(long, default_value_t = 100)]
        boxes: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

fn run(cli: Cli) -> roipcc::Result<()> {
    app::init_workers(cli.workers)?;
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let report = match cli.command {
        Command::Synth { out, seed, frames, objects, ground_points, object_points } => {
            let d = SceneParams::default();
            let params = SceneParams {
                frames: frames.unwrap_or(d.frames),
                objects: objects.unwrap_or(d.objects),
                ground_points: ground_points.unwrap_or(d.ground_points),
                object_points: object_points.unwrap_or(d.object_points),
                ..d
            };
            serde_json::json!({ "manifest": app::cmd_synth(&out, seed, &params)? })
        }
        Command::Roi { manifest, out, stride } => {
            cfg.stride = stride.unwrap_or(cfg.stride);
            cfg.validate()?;
            serde_json::to_value(app::cmd_roi(&manifest, &cfg, &out)?)?
        }
        Command::Encode { manifest, masks, out, q_r, q_b } => {
            cfg.q_r = q_r.unwrap_or(cfg.q_r);
            cfg.validate()?;
            let q_b = q_b.unwrap_or(cfg.q_b[0]);
            serde_json::to_value(app::cmd_encode(&manifest, masks.as_deref(), &cfg, q_b, &out)?)?
        }
        Command::Decode { input, out, format } => {
            serde_json::json!({ "frames": app::cmd_decode(&input, &out, &format)? })
        }
        Command::Eval { manifests, masks, out } => serde_json::to_value(app::cmd_eval(&manifests, &masks, &cfg, &out)?)?,
        Command::BenchPib { seed, points, boxes, repeats } => {
            serde_json::to_value(app::cmd_bench_pib(seed, points, boxes, repeats)?)?
        }
    };
    // A closed stdout is not an error of the command.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::from(app::EXIT_OK as u8),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(app::exit_code(&e) as u8)
        }
        Err(_) => ExitCode::from(app::EXIT_INTERNAL as u8),
    }
}
