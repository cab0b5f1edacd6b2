use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "einstein", version, about = "Einstein metrics for algebraic curvature tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the scalar curvature over unit-determinant metrics.
    Solve(SolveArgs),
    /// Check the Einstein condition for a given metric.
    Verify(VerifyArgs),
    /// Estimate the minimal sectional curvature and the coercivity box.
    Bounds(BoundsArgs),
    /// Write a deterministic fixture tensor.
    Generate(GenerateArgs),
    /// Compare analytic gradient and Hessian with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Tensor file (JSON).
    pub tensor: PathBuf,
    /// Project the input onto curvature-type tensors instead of rejecting asymmetry.
    #[arg(long)]
    pub symmetrize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Starting metric file; the identity when omitted.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Gradient-norm stopping tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of starting metrics: the initial one plus random ones.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    /// Newton acceleration near the minimum.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub newton: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Metric file (JSON).
    pub metric: PathBuf,
    /// Residual tolerance relative to max(1, |λ|).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of random planes sampled.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Projected-gradient steps per refined candidate.
    #[arg(long, default_value_t = 300)]
    pub refine_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Constant,
    Pullback,
    Perturbed,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Relative perturbation size for `perturbed`.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random base points.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}
