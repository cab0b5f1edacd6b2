use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use einstein_core::bounds::{BoundsReport, SamplingOptions};
use einstein_core::{SolveReport, SolveStatus, UpperMetric};
use nalgebra::DMatrix;
use serde::Serialize;

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Debug, Serialize)]
pub struct SolveOptionsOut {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub starts: usize,
    pub newton: bool,
    pub symmetrize: bool,
    pub init: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct MultistartOut {
    pub max_distance: f64,
    /// Indices of starts that did not converge (0 is the initial metric).
    pub failed: Vec<usize>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveOut {
    pub version: &'static str,
    pub command: &'static str,
    pub input: PathBuf,
    pub options: SolveOptionsOut,
    pub n: usize,
    pub minimizer: Vec<Vec<f64>>,
    pub lambda: f64,
    pub grad_norm: f64,
    pub einstein_residual: f64,
    pub residual_bound_factor: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub r_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multistart: Option<MultistartOut>,
}

impl SolveOut {
    pub fn new(input: &Path, options: SolveOptionsOut, rep: &SolveReport, multistart: Option<MultistartOut>) -> Self {
        Self {
            version: einstein_core::VERSION,
            command: "solve",
            input: input.to_path_buf(),
            options,
            n: rep.minimizer.dim(),
            minimizer: rows(rep.minimizer.upper()),
            lambda: rep.lambda,
            grad_norm: rep.grad_norm,
            einstein_residual: rep.einstein_residual,
            residual_bound_factor: rep.residual_bound_factor,
            iterations: rep.iterations,
            newton_steps: rep.newton_steps,
            converged: rep.converged,
            status: rep.status,
            r_trace: rep.r_trace.clone(),
            multistart,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyOptionsOut {
    pub tol: f64,
    pub symmetrize: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyOut {
    pub version: &'static str,
    pub command: &'static str,
    pub tensor: PathBuf,
    pub metric: PathBuf,
    pub options: VerifyOptionsOut,
    /// Factor applied to the metric file to reach unit determinant.
    pub metric_scale: f64,
    pub lambda: f64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundsOut {
    pub version: &'static str,
    pub command: &'static str,
    pub input: PathBuf,
    pub symmetrize: bool,
    pub options: SamplingOptions,
    #[serde(flatten)]
    pub report: BoundsReport,
}

#[derive(Debug, Serialize)]
pub struct GradcheckPoint {
    pub metric: Vec<Vec<f64>>,
    pub gradient_analytic: f64,
    pub gradient_fd: f64,
    pub gradient_rel_error: f64,
    pub hessian_analytic: f64,
    pub hessian_fd: f64,
    pub hessian_rel_error: f64,
}

#[derive(Debug, Serialize)]
pub struct GradcheckOut {
    pub version: &'static str,
    pub command: &'static str,
    pub input: PathBuf,
    pub seed: u64,
    pub symmetrize: bool,
    pub gradient_step: f64,
    pub hessian_step: f64,
    pub gradient_tol: f64,
    pub hessian_tol: f64,
    pub points: Vec<GradcheckPoint>,
    pub worst_gradient_rel_error: f64,
    pub worst_hessian_rel_error: f64,
    pub passed: bool,
}

pub fn metric_rows(g: &UpperMetric) -> Vec<Vec<f64>> {
    rows(g.upper())
}

/// Serializes `value` as pretty JSON to `path` (atomically, through a
/// temporary file in the same directory and a rename) or to stdout.
pub fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing report")?;
    text.push('\n');
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")?;
            out.flush().context("writing to stdout")?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(text.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            tmp.persist(path)
                .with_context(|| format!("renaming into {}", path.display()))?;
        }
    }
    Ok(())
}
