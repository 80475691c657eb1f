//! `plate-shape`: forward boundary spectral data of a convex plate and
//! reconstruction of the plate's shape from it.

mod commands;
mod config;
mod render;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "plate-shape",
    about = "Clamped-plate boundary spectral data and convex shape reconstruction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the clamped plate on a body and emit its s-functions.
    Forward(ForwardArgs),
    /// Reconstruct a body from an s-function file.
    Invert(InvertArgs),
    /// Forward, invert, and verify the reconstruction against the input.
    Roundtrip(RoundtripArgs),
    /// Check the Minkowski additivity and symmetry identities on a battery
    /// of bodies.
    LemmaCheck(LemmaArgs),
    /// Render bodies and s-functions as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
pub struct ForwardArgs {
    /// Body description file (JSON).
    #[arg(long)]
    pub body: Option<PathBuf>,
    /// Inline body description (JSON string).
    #[arg(long, conflicts_with = "body")]
    pub body_json: Option<String>,
    /// Target mesh edge length.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    /// Number of modes.
    #[arg(long, default_value_t = 3)]
    pub modes: usize,
    /// Output s-function file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV export of the s-functions.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Dump the generated mesh as diagnostic JSON.
    #[arg(long)]
    pub dump_mesh: Option<PathBuf>,
    /// Optional report file (also printed to stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Fourier truncation for ellipse bodies.
    #[arg(long, default_value_t = 16)]
    pub harmonics: usize,
    /// Uniform grid size of the emitted s-functions.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Trace smoothing degree.
    #[arg(long, default_value_t = 12)]
    pub smoothing: usize,
    /// Disable trace smoothing (fit at full degree).
    #[arg(long)]
    pub no_smoothing: bool,
    /// Residual tolerance deciding the exit code.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Args)]
pub struct InvertArgs {
    /// Input s-function file.
    #[arg(long)]
    pub sfuncs: PathBuf,
    /// Reconstruction basis harmonics N (basis size 2N + 1).
    #[arg(long, default_value_t = 6)]
    pub harmonics: usize,
    /// Translation gauge: steiner | free.
    #[arg(long, default_value = "steiner")]
    pub gauge: String,
    /// Output solutions file.
    #[arg(long)]
    pub out: PathBuf,
    /// Multi-start count.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    /// Acceptance threshold on the residual norm (default: automatic).
    #[arg(long)]
    pub tol_accept: Option<f64>,
    /// Seed of the start list.
    #[arg(long, default_value_t = 0x504C_4154_45)]
    pub seed: u64,
    /// Select the reconstruction by forward consistency.
    #[arg(long)]
    pub refine: bool,
    /// Mesh size of the consistency-refinement forward solves.
    #[arg(long, default_value_t = 0.1)]
    pub refine_h: f64,
    /// Inner body of the admissible class (JSON file).
    #[arg(long)]
    pub bound_inner: Option<PathBuf>,
    /// Outer body of the admissible class (JSON file).
    #[arg(long)]
    pub bound_outer: Option<PathBuf>,
    /// Fix the reconstruction's area.
    #[arg(long)]
    pub fixed_area: Option<f64>,
    /// Fix the reconstruction's perimeter.
    #[arg(long)]
    pub fixed_perimeter: Option<f64>,
}

#[derive(Args)]
pub struct RoundtripArgs {
    /// Ground-truth body description file (JSON).
    #[arg(long)]
    pub body: Option<PathBuf>,
    /// Inline ground-truth body description (JSON string).
    #[arg(long, conflicts_with = "body")]
    pub body_json: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value_t = 3)]
    pub modes: usize,
    /// Reconstruction basis harmonics.
    #[arg(long, default_value_t = 4)]
    pub harmonics: usize,
    /// Fourier truncation for ellipse ground-truth bodies.
    #[arg(long, default_value_t = 16)]
    pub body_harmonics: usize,
    /// Report file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the forward s-functions.
    #[arg(long)]
    pub out_sfuncs: Option<PathBuf>,
    /// Also write the solution list.
    #[arg(long)]
    pub out_solutions: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 12)]
    pub smoothing: usize,
    /// Forward residual tolerance (report only).
    #[arg(long, default_value_t = 0.05)]
    pub forward_tol: f64,
    /// Support sup-error tolerance relative to the mean radius.
    #[arg(long, default_value_t = 0.05)]
    pub sup_tol: f64,
    /// Per-mode s-function reproduction tolerance.
    #[arg(long, default_value_t = 0.10)]
    pub sfunc_tol: f64,
    /// Skip the consistency refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Mesh size of the consistency-refinement forward solves.
    #[arg(long, default_value_t = 0.1)]
    pub refine_h: f64,
    #[arg(long, default_value_t = 0x504C_4154_45)]
    pub seed: u64,
}

#[derive(Args)]
pub struct LemmaArgs {
    /// Additional body description files to include in the battery.
    #[arg(long)]
    pub body: Vec<PathBuf>,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Optional report file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    /// Solutions file to draw reconstructions from.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Ground-truth body file.
    #[arg(long)]
    pub body: Option<PathBuf>,
    /// Inline ground-truth body (JSON string).
    #[arg(long, conflicts_with = "body")]
    pub body_json: Option<String>,
    /// s-function file for the polar plot.
    #[arg(long)]
    pub sfuncs: Option<PathBuf>,
    /// Output SVG file.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Forward(args) => commands::cmd_forward(args),
        Command::Invert(args) => commands::cmd_invert(args),
        Command::Roundtrip(args) => commands::cmd_roundtrip(args),
        Command::LemmaCheck(args) => commands::cmd_lemma_check(args),
        Command::Render(args) => render::cmd_render(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            config::diag("error", e.to_string());
            ExitCode::from(2)
        }
    }
}
