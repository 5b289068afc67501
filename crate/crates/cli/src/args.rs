use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Edge-localized stationary states of the cubic NLS equation on metric graphs.
#[derive(Debug, Parser)]
#[command(name = "qgnls", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for sweeps and per-edge work; 0 uses all cores.
    #[arg(long, global = true, env = "QGNLS_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Exit with status 4 when a validation report contains failures.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Print progress notes to standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, check and normalize graph-spec files.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Dirichlet-to-Neumann maps and the single-edge boundary manifold.
    #[command(subcommand)]
    Dtn(DtnCommand),
    /// Large-mass predictions for edge-localized states.
    Predict(PredictArgs),
    /// Order the edges of a graph by predicted energy at fixed large mass.
    Rank(RankArgs),
    /// Solve for one stationary state at fixed Lambda.
    Solve(SolveArgs),
    /// Follow a branch of stationary states in Lambda.
    Continue(ContinueArgs),
    /// Compare two branches at equal mass.
    Compare(CompareArgs),
    /// Recompute the dumbbell, tadpole and periodic case studies.
    #[command(subcommand)]
    Reproduce(ReproduceCommand),
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Check a graph spec and print its edge classification as JSON.
    Validate(GraphFile),
    /// Merge edges through interior degree-2 vertices and print the canonical spec.
    Absorb(GraphFile),
}

#[derive(Debug, Args)]
pub struct GraphFile {
    /// Graph-spec file.
    pub graph: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DtnCommand {
    /// DtN matrix of the linear problem by the direct edge solve.
    Linear(DtnArgs),
    /// DtN matrix of the linear problem through the scattering matrix.
    Scattering(DtnArgs),
    /// Boundary data (p, q) of solutions started at rest, on a grid of amplitudes.
    Manifold(ManifoldArgs),
}

#[derive(Debug, Args)]
pub struct DtnArgs {
    /// Graph-spec file with a `boundary` line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Decay rate mu > 0 (Lambda = -mu^2).
    #[arg(long)]
    pub mu: f64,
    /// Report the map of -Laplacian + mu^2 on the unscaled graph instead of the scaled one.
    #[arg(long)]
    pub graph_convention: bool,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    /// Scaled half-length L of the edge.
    #[arg(long = "L", id = "half_length")]
    pub half_length: f64,
    /// Amplitude grid as start:end:count.
    #[arg(long, default_value = "0:1.2:121")]
    pub grid: String,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Graph-spec file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Decay rate mu > 0.
    #[arg(long)]
    pub mu: f64,
    /// Restrict to one edge id.
    #[arg(long)]
    pub edge: Option<String>,
    /// Also solve the exact boundary matching for the modulus and offset.
    #[arg(long)]
    pub refine: bool,
    /// Output JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Graph-spec file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Decay rate mu > 0 at which predictions are attached.
    #[arg(long)]
    pub mu: f64,
    /// Relative tolerance below which two candidates tie.
    #[arg(long, default_value_t = 1e-9)]
    pub tie_tolerance: f64,
    /// Output JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Graph-spec file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Lambda < 0.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Initial guess: prediction:<edge>, constant, or file:<state.csv>.
    #[arg(long)]
    pub seed: String,
    /// Grid points per decay length 1/mu.
    #[arg(long, default_value_t = 30.0)]
    pub ppw: f64,
    #[command(flatten)]
    pub perturb: PerturbArgs,
    /// Dump the state as edge,x,phi CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContinueArgs {
    /// Graph-spec file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Natural continuation over start:end:count (start is solved first).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "arclength")]
    pub lambda_range: Option<String>,
    /// Pseudo-arclength continuation from --lambda.
    #[arg(long, requires = "lambda")]
    pub arclength: bool,
    /// Starting Lambda for --arclength.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Lower Lambda bound for --arclength; defaults to 4 times --lambda.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    /// Upper Lambda bound for --arclength; defaults to a quarter of --lambda.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    /// Initial arclength step.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Largest arclength step.
    #[arg(long, default_value_t = 0.5)]
    pub max_step: f64,
    /// Maximum number of branch points for --arclength.
    #[arg(long, default_value_t = 500)]
    pub max_points: usize,
    /// Start --arclength towards decreasing Lambda.
    #[arg(long)]
    pub decreasing: bool,
    /// Initial guess: prediction:<edge>, constant, or file:<state.csv>.
    #[arg(long)]
    pub seed: String,
    /// Grid points per decay length 1/mu at the largest mu.
    #[arg(long, default_value_t = 30.0)]
    pub ppw: f64,
    #[command(flatten)]
    pub perturb: PerturbArgs,
    /// Branch CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Relative amplitude of a uniform random perturbation applied to the seed.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// Seed of the perturbation generator.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Branch CSV written by `continue`.
    #[arg(long)]
    pub first: PathBuf,
    /// Branch CSV written by `continue`.
    #[arg(long)]
    pub second: PathBuf,
    /// Mass at which to compare; the three largest common masses when omitted.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Output JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Smallest mu of the sweep.
    #[arg(long)]
    pub mu_min: Option<f64>,
    /// Largest mu of the sweep.
    #[arg(long)]
    pub mu_max: Option<f64>,
    /// Number of mu values.
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid points per decay length 1/mu at the largest mu.
    #[arg(long)]
    pub ppw: Option<f64>,
    /// Directory for the branch CSVs.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReproduceCommand {
    /// Two loops joined by K parallel internal edges.
    Dumbbell(DumbbellArgs),
    /// One loop with K half-lines at its vertex.
    Tadpole(TadpoleArgs),
    /// Ring of cells, each a pair of parallel edges followed by a connecting edge.
    Periodic(PeriodicArgs),
}

#[derive(Debug, Args)]
pub struct DumbbellArgs {
    /// Number of internal edges.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Loop length.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    pub loop_length: f64,
    /// Internal edge length pi, swept over mu in [2, 4].
    #[arg(long, conflicts_with_all = ["long_edges", "internal_length"])]
    pub short_edges: bool,
    /// Internal edge length 4 pi, swept over mu in [0.8, 1.8].
    #[arg(long, conflicts_with = "internal_length")]
    pub long_edges: bool,
    /// Internal edge length (default pi).
    #[arg(long)]
    pub internal_length: Option<f64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct TadpoleArgs {
    /// Number of half-lines at the loop vertex.
    #[arg(long, default_value_t = 1)]
    pub halflines: usize,
    /// Loop length.
    #[arg(long, default_value_t = 2.0)]
    pub loop_length: f64,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct PeriodicArgs {
    /// Number of cells in the ring.
    #[arg(long, default_value_t = 3)]
    pub cells: usize,
    /// Half-length of the connecting edges.
    #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
    pub l0: f64,
    /// Half-length of the parallel edges.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub lstar: f64,
    #[command(flatten)]
    pub sweep: SweepArgs,
}
