use std::path::PathBuf;

use admg_learn::{GraphClass, Hyperparams, PenaltyConfig, PenaltyMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "admg-learn",
    version,
    about = "Learn acyclic directed mixed graphs from linear Gaussian data",
    after_help = "Set RAYON_NUM_THREADS to control the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random SEM parameters on a graph and sample a dataset
    Simulate(SimulateArgs),
    /// Learn a graph from a dataset
    Discover(DiscoverArgs),
    /// Report class membership and penalty values of a graph
    Check(CheckArgs),
    /// Score parameters (or a fitted graph) on a dataset
    Score(ScoreArgs),
    /// Compare a learned graph against a reference graph
    Evaluate(EvaluateArgs),
    /// Project a graph to its maximal ancestral graph
    Project(ProjectArgs),
    /// Run a simulation experiment and write a CSV report
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClassArg {
    Ancestral,
    Arid,
    Bowfree,
}

impl From<ClassArg> for GraphClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Ancestral => GraphClass::Ancestral,
            ClassArg::Arid => GraphClass::Arid,
            ClassArg::Bowfree => GraphClass::BowFree,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Power,
    Exp,
}

#[derive(Debug, Clone, Args)]
pub struct PenaltyArgs {
    /// Form of the matrix functions in the constraints
    #[arg(long, value_enum, default_value_t = ModeArg::Power)]
    pub penalty_mode: ModeArg,
    /// Constant c in (I + cD)^d for directed parts
    #[arg(long, default_value_t = 1.0)]
    pub c_directed: f64,
    /// Constant c in (I + cB)^d for bidirected parts
    #[arg(long, default_value_t = 2.0)]
    pub c_bidirected: f64,
    /// Sharpness of the soft fixing mask (default ln 5000)
    #[arg(long, default_value_t = 5000f64.ln())]
    pub tanh_scale: f64,
    /// Terms kept in the truncated exponential series
    #[arg(long, default_value_t = 20)]
    pub exp_series_terms: usize,
}

impl PenaltyArgs {
    pub fn config(&self) -> PenaltyConfig {
        PenaltyConfig {
            mode: match self.penalty_mode {
                ModeArg::Power => PenaltyMode::MatrixPower,
                ModeArg::Exp => PenaltyMode::MatrixExponential,
            },
            c_directed: self.c_directed,
            c_bidirected: self.c_bidirected,
            tanh_scale: self.tanh_scale,
            exp_series_terms: self.exp_series_terms,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    /// Regularization strength
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    /// Edge threshold on |coefficient|
    #[arg(long, default_value_t = 0.05)]
    pub omega: f64,
    /// Number of initializations
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    /// Seed for all random draws
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance on the constraint value
    #[arg(long, default_value_t = 1e-8)]
    pub h_tol: f64,
    /// RICF step tolerance
    #[arg(long, default_value_t = 1e-4)]
    pub ricf_tol: f64,
    /// Maximum number of dual ascent iterations
    #[arg(long, default_value_t = 100)]
    pub max_dual_iterations: usize,
    /// Growth of the RICF iteration budget per dual step
    #[arg(long, default_value_t = 1)]
    pub ricf_increment: usize,
    /// Cap on the RICF iteration budget
    #[arg(long, default_value_t = 500)]
    pub max_ricf_budget: usize,
    /// Required constraint reduction factor per dual step
    #[arg(long, default_value_t = 0.25)]
    pub progress_rate: f64,
    /// Initial penalty weight
    #[arg(long, default_value_t = 1.0)]
    pub rho_init: f64,
    /// Penalty weight growth factor
    #[arg(long, default_value_t = 10.0)]
    pub rho_factor: f64,
    /// Largest penalty weight
    #[arg(long, default_value_t = 1e16)]
    pub rho_max: f64,
    /// Sharpness of the tanh sparsity penalty (default ln n)
    #[arg(long)]
    pub c_sharpness: Option<f64>,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
}

impl HyperArgs {
    pub fn hyperparams(&self, class: GraphClass) -> Hyperparams {
        Hyperparams {
            lambda: self.lambda,
            omega: self.omega,
            h_tol: self.h_tol,
            ricf_tol: self.ricf_tol,
            max_dual_iterations: self.max_dual_iterations,
            ricf_increment: self.ricf_increment,
            max_ricf_budget: self.max_ricf_budget,
            progress_rate: self.progress_rate,
            rho_init: self.rho_init,
            rho_factor: self.rho_factor,
            rho_max: self.rho_max,
            restarts: self.restarts,
            class,
            penalty: self.penalty.config(),
            c_sharpness: self.c_sharpness,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Graph file (JSON or edge list)
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of samples
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Seed for parameters and samples
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use these parameters instead of drawing random ones
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Output dataset CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the generating parameters as JSON
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Dataset CSV (header row with variable names)
    #[arg(long)]
    pub data: PathBuf,
    /// Hypothesis class
    #[arg(long, value_enum, default_value_t = ClassArg::Bowfree)]
    pub class: ClassArg,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output graph JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Dual-iteration trace CSV of the selected restart
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Estimated parameters as JSON
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Graph file (JSON or edge list)
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Dataset CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Parameter JSON to score
    #[arg(long, conflicts_with = "graph")]
    pub params: Option<PathBuf>,
    /// Graph whose maximum-likelihood fit is scored (requires --fit)
    #[arg(long, requires = "fit")]
    pub graph: Option<PathBuf>,
    /// Fit the graph by RICF before scoring
    #[arg(long)]
    pub fit: bool,
    /// Regularization strength of the ABIC
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    /// Sharpness of the tanh penalty (default ln n)
    #[arg(long)]
    pub c_sharpness: Option<f64>,
    /// Magnitude below which a parameter counts as zero
    #[arg(long, default_value_t = 0.05)]
    pub zero_tol: f64,
    /// Write the fitted parameters as JSON (with --fit)
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Learned graph
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference graph
    #[arg(long = "true")]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Graph file (JSON or edge list)
    #[arg(long)]
    pub graph: PathBuf,
    /// Output graph JSON (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Recovery of graphs with Verma constraints
    Verma(BenchVermaArgs),
    /// Skeleton and endpoint accuracy on random graphs
    Random(BenchRandomArgs),
}

#[derive(Debug, Args)]
pub struct BenchVermaArgs {
    #[arg(long, value_enum, default_value_t = ClassArg::Bowfree)]
    pub class: ClassArg,
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',', default_value = "500,1000,1500,2000")]
    pub n: Vec<usize>,
    /// Datasets per sample size
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output report CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchRandomArgs {
    #[arg(long, value_enum, default_value_t = ClassArg::Bowfree)]
    pub class: ClassArg,
    /// Number of vertices
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Number of random graphs
    #[arg(long, default_value_t = 100)]
    pub graphs: usize,
    /// Samples per dataset
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output report CSV
    #[arg(long)]
    pub out: PathBuf,
}
