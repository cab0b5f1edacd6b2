//! Browser bindings for three interactive views of the solver:
//!
//! - [`solve_trace`]: the descent of `R` from the identity to the Einstein metric;
//! - [`sectional_map`]: sectional curvature of every plane of ℝ³ (indexed by its
//!   unit normal) under the identity and under the Einstein metric;
//! - [`geodesic_profile`]: `R` along a geodesic through the Einstein metric.
//!
//! Each exported function returns a JSON string; the `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively.

use einstein_core::oracle::{self, random_unit_tangent, FixtureKind, FixtureSpec};
use einstein_core::{geodesic, solve_einstein, CurvatureTensor, Plane, SolveOptions, UpperMetric};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest dimension offered by the page; keeps each call interactive.
pub const MAX_N: usize = 6;
/// Largest sphere-map resolution per axis.
pub const MAX_RESOLUTION: usize = 256;

fn fixture(kind: &str, n: usize, kappa: f64, eps: f64, seed: u64) -> Result<CurvatureTensor, String> {
    if n > MAX_N {
        return Err(format!("n must be at most {MAX_N}, got {n}"));
    }
    let kind = match kind {
        "constant" => FixtureKind::Constant { kappa },
        "pullback" => FixtureKind::Pullback { kappa },
        "perturbed" => FixtureKind::Perturbed { kappa, eps },
        other => return Err(format!("unknown fixture kind '{other}'")),
    };
    oracle::generate_fixture(&FixtureSpec { n, kind, seed }).map_err(|e| e.to_string())
}

fn einstein_metric(t: &CurvatureTensor, use_newton: bool) -> Result<einstein_core::SolveReport, String> {
    let opts = SolveOptions {
        use_newton,
        max_iter: 2000,
        ..SolveOptions::default()
    };
    let id = UpperMetric::identity(t.dim()).map_err(|e| e.to_string())?;
    solve_einstein(t, &id, &opts).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct TraceOut {
    pub r_trace: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub minimizer: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

pub fn solve_trace_json(kind: &str, n: usize, kappa: f64, eps: f64, seed: u64, use_newton: bool) -> Result<String, String> {
    let t = fixture(kind, n, kappa, eps, seed)?;
    let rep = einstein_metric(&t, use_newton)?;
    let m = rep.minimizer.upper();
    let out = TraceOut {
        r_trace: rep.r_trace.clone(),
        lambda: rep.lambda,
        iterations: rep.iterations,
        newton_steps: rep.newton_steps,
        converged: rep.converged,
        grad_norm: rep.grad_norm,
        minimizer: (0..n).map(|i| m.row(i).iter().copied().collect()).collect(),
        eigenvalues: rep.minimizer.eigenvalues(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct MapOut {
    /// Rows of polar angle θ ∈ [0, π/2], columns of azimuth φ ∈ [0, 2π).
    pub resolution: usize,
    pub identity: Vec<f64>,
    pub einstein: Vec<f64>,
    /// Sign disagreements between the two maps (ignoring near-zero values).
    pub sign_changes: usize,
}

/// Two unit vectors spanning the plane orthogonal to `u`.
fn plane_with_normal(u: [f64; 3]) -> Result<Plane, String> {
    let helper = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let v = cross(u, helper);
    let q = cross(u, v);
    Plane::new(DVector::from_row_slice(&v), DVector::from_row_slice(&q)).map_err(|e| e.to_string())
}

pub fn sectional_map_json(kind: &str, kappa: f64, eps: f64, seed: u64, resolution: usize) -> Result<String, String> {
    if !(2..=MAX_RESOLUTION).contains(&resolution) {
        return Err(format!("resolution must lie in 2..={MAX_RESOLUTION}"));
    }
    let t = fixture(kind, 3, kappa, eps, seed)?;
    let id = UpperMetric::identity(3).map_err(|e| e.to_string())?;
    let g = einstein_metric(&t, true)?.minimizer;
    let mut identity = Vec::with_capacity(resolution * resolution);
    let mut einstein = Vec::with_capacity(resolution * resolution);
    let mut sign_changes = 0;
    let floor = 1e-12 * t.scale().max(1.0);
    for i in 0..resolution {
        let theta = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / resolution as f64;
        for j in 0..resolution {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
            let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let plane = plane_with_normal(u)?;
            let a = t.sectional_curvature(&id, &plane).map_err(|e| e.to_string())?;
            let b = t.sectional_curvature(&g, &plane).map_err(|e| e.to_string())?;
            if a.abs() > floor && b.abs() > floor && a.signum() != b.signum() {
                sign_changes += 1;
            }
            identity.push(a);
            einstein.push(b);
        }
    }
    serde_json::to_string(&MapOut {
        resolution,
        identity,
        einstein,
        sign_changes,
    })
    .map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct ProfileOut {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub r_min: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn geodesic_profile_json(
    kind: &str,
    n: usize,
    kappa: f64,
    eps: f64,
    seed: u64,
    direction_seed: u64,
    t_max: f64,
    samples: usize,
) -> Result<String, String> {
    if !(t_max > 0.0 && t_max <= 10.0) {
        return Err("t_max must lie in (0, 10]".into());
    }
    if !(3..=2001).contains(&samples) {
        return Err("samples must lie in 3..=2001".into());
    }
    let t = fixture(kind, n, kappa, eps, seed)?;
    let rep = einstein_metric(&t, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(direction_seed);
    let d = random_unit_tangent(&rep.minimizer, &mut rng).map_err(|e| e.to_string())?;
    let mut ts = Vec::with_capacity(samples);
    let mut rs = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = -t_max + 2.0 * t_max * k as f64 / (samples - 1) as f64;
        let g = geodesic(&rep.minimizer, &d, s).map_err(|e| e.to_string())?;
        ts.push(s);
        rs.push(t.scalar_curvature(&g).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&ProfileOut {
        t: ts,
        r: rs,
        r_min: rep.lambda * n as f64,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve_trace(kind: &str, n: usize, kappa: f64, eps: f64, seed: u32, use_newton: bool) -> Result<String, JsError> {
    solve_trace_json(kind, n, kappa, eps, seed.into(), use_newton).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sectional_map(kind: &str, kappa: f64, eps: f64, seed: u32, resolution: usize) -> Result<String, JsError> {
    sectional_map_json(kind, kappa, eps, seed.into(), resolution).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn geodesic_profile(
    kind: &str,
    n: usize,
    kappa: f64,
    eps: f64,
    seed: u32,
    direction_seed: u32,
    t_max: f64,
    samples: usize,
) -> Result<String, JsError> {
    geodesic_profile_json(kind, n, kappa, eps, seed.into(), direction_seed.into(), t_max, samples)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn version() -> String {
    einstein_core::VERSION.to_string()
}
