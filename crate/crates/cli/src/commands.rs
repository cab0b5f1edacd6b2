use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use einstein_core::bounds::{coercivity_region, PositivityVerdict, SamplingOptions};
use einstein_core::io::{LoadedMetric, MetricFile, TensorFile};
use einstein_core::oracle::{
    self, finite_diff_directional, finite_diff_second, random_metric, random_unit_tangent, FixtureKind, FixtureSpec,
    MULTISTART_SCALE,
};
use einstein_core::solver::{hessian_quadratic_form, riemannian_gradient};
use einstein_core::spd::inner_product;
use einstein_core::{geodesic_distance, solve_einstein, verify_einstein, CurvatureTensor, SolveOptions, UpperMetric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

use crate::args::{BoundsArgs, GenerateArgs, GradcheckArgs, InputArgs, Kind, SolveArgs, VerifyArgs};
use crate::exit;
use crate::report::{
    emit, metric_rows, BoundsOut, GradcheckOut, GradcheckPoint, MultistartOut, SolveOptionsOut, SolveOut,
    VerifyOptionsOut, VerifyOut,
};

/// Step sizes and tolerances of the derivative check.
const GRADIENT_STEP: f64 = 1e-5;
const HESSIAN_STEP: f64 = 1e-4;
const GRADIENT_TOL: f64 = 1e-6;
const HESSIAN_TOL: f64 = 1e-5;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_tensor(input: &InputArgs) -> Result<CurvatureTensor> {
    let file: TensorFile = read_json(&input.tensor)?;
    file.load(input.symmetrize)
        .with_context(|| format!("loading tensor {}", input.tensor.display()))
}

fn load_metric(path: &Path, n: usize) -> Result<LoadedMetric> {
    let file: MetricFile = read_json(path)?;
    let loaded = file.load().with_context(|| format!("loading metric {}", path.display()))?;
    if loaded.metric.dim() != n {
        bail!(
            "dimension mismatch: tensor has n = {n}, metric {} has n = {}",
            path.display(),
            loaded.metric.dim()
        );
    }
    Ok(loaded)
}

pub fn solve(a: &SolveArgs) -> Result<u8> {
    if a.starts == 0 {
        bail!("--starts must be at least 1");
    }
    let t = load_tensor(&a.input)?;
    let n = t.dim();
    let g0 = match &a.init {
        Some(path) => load_metric(path, n)?.metric,
        None => UpperMetric::identity(n)?,
    };
    let opts = SolveOptions {
        tol_grad: a.tol,
        max_iter: a.max_iter,
        use_newton: a.newton,
        seed: a.seed,
        ..SolveOptions::default()
    };
    opts.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut starts = vec![g0];
    for _ in 1..a.starts {
        starts.push(random_metric(n, MULTISTART_SCALE, &mut rng)?);
    }
    let reports = starts
        .iter()
        .map(|g| solve_einstein(&t, g, &opts))
        .collect::<einstein_core::Result<Vec<_>>>()?;

    let converged: Vec<_> = reports.iter().filter(|r| r.converged).collect();
    let best = converged
        .iter()
        .copied()
        .min_by(|x, y| x.lambda.total_cmp(&y.lambda))
        .or_else(|| reports.iter().min_by(|x, y| x.grad_norm.total_cmp(&y.grad_norm)))
        .expect("at least one start");
    let multistart = if reports.len() > 1 {
        let mut max_distance = 0.0_f64;
        for i in 0..converged.len() {
            for j in (i + 1)..converged.len() {
                max_distance = max_distance.max(geodesic_distance(&converged[i].minimizer, &converged[j].minimizer)?);
            }
        }
        Some(MultistartOut {
            max_distance,
            failed: reports.iter().enumerate().filter(|(_, r)| !r.converged).map(|(i, _)| i).collect(),
            lambdas: reports.iter().map(|r| r.lambda).collect(),
        })
    } else {
        None
    };

    let options = SolveOptionsOut {
        tol: a.tol,
        max_iter: a.max_iter,
        seed: a.seed,
        starts: a.starts,
        newton: a.newton,
        symmetrize: a.input.symmetrize,
        init: a.init.clone(),
    };
    emit(&SolveOut::new(&a.input.tensor, options, best, multistart), a.output.output.as_deref())?;
    eprintln!(
        "solve: {:?} after {} iterations, lambda = {}, grad_norm = {:e}",
        best.status, best.iterations, best.lambda, best.grad_norm
    );
    Ok(if best.converged { exit::OK } else { exit::NOT_CONVERGED })
}

pub fn verify(a: &VerifyArgs) -> Result<u8> {
    if a.tol.is_nan() || a.tol < 0.0 {
        bail!("--tol must be >= 0");
    }
    let t = load_tensor(&a.input)?;
    let loaded = load_metric(&a.metric, t.dim())?;
    let check = verify_einstein(&t, &loaded.metric, a.tol)?;
    emit(
        &VerifyOut {
            version: einstein_core::VERSION,
            command: "verify",
            tensor: a.input.tensor.clone(),
            metric: a.metric.clone(),
            options: VerifyOptionsOut {
                tol: a.tol,
                symmetrize: a.input.symmetrize,
            },
            metric_scale: loaded.applied_scale,
            lambda: check.lambda,
            residual: check.residual,
            passed: check.passed,
        },
        a.output.output.as_deref(),
    )?;
    let verdict = if check.passed { "passed" } else { "failed" };
    eprintln!("verify: {verdict}, lambda = {}, residual = {:e}", check.lambda, check.residual);
    Ok(if check.passed { exit::OK } else { exit::VERIFY_FAILED })
}

pub fn bounds(a: &BoundsArgs) -> Result<u8> {
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let t = load_tensor(&a.input)?;
    let options = SamplingOptions {
        n_samples: a.samples,
        refine_steps: a.refine_steps,
        seed: a.seed,
    };
    let report = coercivity_region(&t, &options)?;
    let code = match &report.positivity.verdict {
        PositivityVerdict::StrictlyPositiveSampled => {
            let b = report.region.expect("region for positive tensors");
            eprintln!(
                "bounds: strictly positive (sampled), R_s <= {}, box [{}, {}]",
                report.r_s, b.lam_min_floor, b.lam_max_ceiling
            );
            exit::OK
        }
        PositivityVerdict::NonnegativeSampled => {
            eprintln!("warning: minimal sampled sectional numerator {} is zero within tolerance; no box", report.r_s);
            exit::OK
        }
        PositivityVerdict::Violated { numerator, .. } => {
            eprintln!("bounds: positivity violated, numerator {numerator} on the reported plane");
            exit::POSITIVITY_VIOLATED
        }
    };
    emit(
        &BoundsOut {
            version: einstein_core::VERSION,
            command: "bounds",
            input: a.input.tensor.clone(),
            symmetrize: a.input.symmetrize,
            options,
            report,
        },
        a.output.output.as_deref(),
    )?;
    Ok(code)
}

pub fn generate(a: &GenerateArgs) -> Result<u8> {
    let kind = match a.kind {
        Kind::Constant => FixtureKind::Constant { kappa: a.kappa },
        Kind::Pullback => FixtureKind::Pullback { kappa: a.kappa },
        Kind::Perturbed => FixtureKind::Perturbed {
            kappa: a.kappa,
            eps: a.eps,
        },
    };
    if !a.kappa.is_finite() || !a.eps.is_finite() {
        bail!("--kappa and --eps must be finite");
    }
    let fixture = oracle::generate(&FixtureSpec {
        n: a.n,
        kind,
        seed: a.seed,
    })?;
    emit(&TensorFile::dense(&fixture.tensor), a.output.output.as_deref())?;
    if let Some(eps) = fixture.eps_used {
        eprintln!("generate: perturbation eps = {eps}");
    }
    Ok(exit::OK)
}

pub fn gradcheck(a: &GradcheckArgs) -> Result<u8> {
    if a.points == 0 {
        bail!("--points must be at least 1");
    }
    let t = load_tensor(&a.input)?;
    let n = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let scale = t.scale();
    let rel = |err: f64, reference: f64| {
        let denom = reference.abs().max(scale);
        if denom > 0.0 { err / denom } else { err }
    };
    let mut points = Vec::with_capacity(a.points);
    for _ in 0..a.points {
        let g = random_metric(n, 1.0, &mut rng)?;
        let d = random_unit_tangent(&g, &mut rng)?;
        let grad = riemannian_gradient(&t, &g)?;
        let gradient_analytic = inner_product(&g, &grad, &d)?;
        let gradient_fd = finite_diff_directional(&t, &g, &d, GRADIENT_STEP)?;
        let hessian_analytic = hessian_quadratic_form(&t, &g, &d)?;
        let hessian_fd = finite_diff_second(&t, &g, &d, HESSIAN_STEP)?;
        points.push(GradcheckPoint {
            metric: metric_rows(&g),
            gradient_analytic,
            gradient_fd,
            gradient_rel_error: rel((gradient_fd - gradient_analytic).abs(), gradient_analytic),
            hessian_analytic,
            hessian_fd,
            hessian_rel_error: rel((hessian_fd - hessian_analytic).abs(), hessian_analytic),
        });
    }
    let worst_g = points.iter().map(|p| p.gradient_rel_error).fold(0.0, f64::max);
    let worst_h = points.iter().map(|p| p.hessian_rel_error).fold(0.0, f64::max);
    let passed = worst_g <= GRADIENT_TOL && worst_h <= HESSIAN_TOL;
    emit(
        &GradcheckOut {
            version: einstein_core::VERSION,
            command: "gradcheck",
            input: a.input.tensor.clone(),
            seed: a.seed,
            symmetrize: a.input.symmetrize,
            gradient_step: GRADIENT_STEP,
            hessian_step: HESSIAN_STEP,
            gradient_tol: GRADIENT_TOL,
            hessian_tol: HESSIAN_TOL,
            points,
            worst_gradient_rel_error: worst_g,
            worst_hessian_rel_error: worst_h,
            passed,
        },
        a.output.output.as_deref(),
    )?;
    eprintln!("gradcheck: worst relative error gradient {worst_g:e}, hessian {worst_h:e}");
    Ok(if passed { exit::OK } else { exit::VERIFY_FAILED })
}
