//! Command-line arguments. Every struct serializes into the metadata header
//! of the files it produces, so a run can be repeated from its output alone.
//! Output locations are left out so reruns elsewhere give identical files.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "sbf", version, about = "Slender-body Stokes symbols, boundary integrals and filament evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Tabulate the straight-cylinder multipliers and their boundary-integral compositions.
    Multipliers(MultipliersArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Force per cross section from a θ-independent surface velocity.
    Dtn(SolveArgs),
    /// Surface velocity from a force per cross section.
    Ntd(SolveArgs),
    /// Evolve a closed filament with the main-part scheme.
    Evolve(EvolveArgs),
    /// Refinement studies.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MultipliersArgs {
    /// Radius-to-length ratio.
    #[arg(long)]
    pub eps: f64,
    /// Largest mode |k|.
    #[arg(long)]
    pub kmax: usize,
    /// Output CSV (stdout when absent).
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bessel,
    Symbols,
    Quadrature,
    Identities,
    Geometry,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Bessel => "bessel",
            Suite::Symbols => "symbols",
            Suite::Quadrature => "quadrature",
            Suite::Identities => "identities",
            Suite::Geometry => "geometry",
            Suite::All => "all",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Output JSON (stdout when absent).
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("geometry").required(true).args(["curve", "tube"])))]
pub struct SolveArgs {
    /// Centerline JSON; its `eps` sets the radius.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Use the straight periodic tube of this radius instead of a curve.
    #[arg(long)]
    pub tube: Option<f64>,
    /// Centerline field JSON; its sample count sets Ns.
    #[arg(long)]
    pub field: PathBuf,
    /// Angular grid points.
    #[arg(long, default_value_t = 8)]
    pub nth: usize,
    /// Periodic images of the tube on each side.
    #[arg(long, default_value_t = 8)]
    pub images: usize,
    /// Skip the radius admissibility heuristic.
    #[arg(long)]
    pub unchecked: bool,
    /// Single-layer regularization relative to its mean diagonal.
    #[arg(long, default_value_t = 1.0)]
    pub eta_rel: f64,
    /// Output CSV (stdout when absent).
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Solver report JSON (stderr when absent).
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    FrameSpectral,
    Cartesian,
}

#[derive(Args, Debug, Serialize)]
pub struct EvolveArgs {
    /// Initial centerline JSON.
    #[arg(long)]
    pub curve: PathBuf,
    /// Rescale to unit length and reparameterize by arclength first.
    #[arg(long)]
    pub reparameterize: bool,
    /// Time step; defaults to the largest step with semigroup argument ≤ `cfl`.
    #[arg(long)]
    pub dt: Option<f64>,
    /// For the lowest mode this is the relative change of the curve per step.
    #[arg(long, default_value_t = 0.1)]
    pub cfl: f64,
    #[arg(long)]
    pub steps: usize,
    /// Fourier modes kept (defaults to those of the input curve).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, value_enum, default_value = "frame-spectral")]
    pub variant: VariantArg,
    /// Recompute the curved correction every M steps; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub correction_every: usize,
    /// Centerline samples used per step.
    #[arg(long)]
    pub ns: Option<usize>,
    /// Angular points for the correction solve.
    #[arg(long, default_value_t = 8)]
    pub nth: usize,
    /// Abort when the chord–arc constant drops below this.
    #[arg(long, default_value_t = 1e-3)]
    pub min_star: f64,
    /// Write a snapshot every K steps; 0 writes only the final state.
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Quadrature,
    Decomposition,
    Dt,
}

#[derive(Args, Debug, Serialize)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub study: Study,
    /// Base axial grid (quadrature, decomposition).
    #[arg(long)]
    pub ns: Option<usize>,
    /// Base angular grid (quadrature, decomposition).
    #[arg(long)]
    pub nth: Option<usize>,
    /// Radius ratios for the decomposition study.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Refinement levels (quadrature, dt).
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Output CSV (stdout when absent).
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}
