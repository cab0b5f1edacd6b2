//! Quantitative estimates around the minimum of the scalar curvature.
//!
//! `R_s` is the smallest sectional curvature under the identity metric. With
//! `ratio = R(δ)/(2·R_s)`, metrics whose spectrum leaves the box
//! `[ratio^{-(n-1)/2}, ratio^{(n-1)/n}]` are claimed to have `R(g) > R(δ)`.
//!
//! `R_s` is itself a nonconvex minimization over the Grassmannian of 2-planes.
//! It is estimated by sampling orthonormal 2-frames and refining the best ones
//! with projected gradient descent, so the returned value is an upper
//! estimate of the true minimum.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::UpperMetric;
use crate::tensor::{CurvatureTensor, Plane};

/// Slack allowed on every inequality check.
pub const BOUND_SLACK: f64 = 1e-9;
/// Strict positivity requires the sampled minimum to exceed this times the tensor scale.
pub const STRICTNESS_REL_TOL: f64 = 1e-10;
/// Number of best samples handed to local refinement.
pub const REFINED_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub n_samples: usize,
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            refine_steps: 300,
            seed: 0,
        }
    }
}

/// Smallest sectional curvature found and the plane attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionalMinimum {
    pub r_s: f64,
    pub argmin: Plane,
}

fn orthonormalize(v: &DVector<f64>, q: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let nv = v.norm();
    if !(nv > 0.0) {
        return None;
    }
    let v = v / nv;
    let q = q - &v * v.dot(q);
    let nq = q.norm();
    if !(nq > 1e-12) {
        return None;
    }
    Some((v, q / nq))
}

fn random_frame(n: usize, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>) {
    loop {
        let v = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let q = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        if let Some(frame) = orthonormalize(&v, &q) {
            return frame;
        }
    }
}

/// Projected gradient descent on an orthonormal frame, minimizing the
/// numerator (which equals the sectional curvature for orthonormal frames).
fn refine(
    t: &CurvatureTensor,
    mut v: DVector<f64>,
    mut q: DVector<f64>,
    steps: usize,
) -> (DVector<f64>, DVector<f64>, f64) {
    let scale = t.scale();
    let mut f = t.quartic(&v, &q);
    if scale == 0.0 {
        return (v, q, f);
    }
    let mut step = 0.1 / scale;
    for _ in 0..steps {
        let proj = |w: DVector<f64>, v: &DVector<f64>, q: &DVector<f64>| {
            let along = v * v.dot(&w) + q * q.dot(&w);
            w - along
        };
        let gv = proj(t.numerator_grad_v(&v, &q) * 2.0, &v, &q);
        let gq = proj(t.numerator_grad_v(&q, &v) * 2.0, &v, &q);
        let gnorm = (gv.norm_squared() + gq.norm_squared()).sqrt();
        if gnorm <= 1e-14 * scale {
            break;
        }
        let mut improved = false;
        for _ in 0..60 {
            if let Some((nv, nq)) = orthonormalize(&(&v - &gv * step), &(&q - &gq * step)) {
                let nf = t.quartic(&nv, &nq);
                if nf < f {
                    v = nv;
                    q = nq;
                    f = nf;
                    improved = true;
                    step *= 2.0;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (v, q, f)
}

/// Estimates `R_s` under the identity metric.
///
/// Coordinate planes are evaluated first, then `n_samples` random orthonormal
/// frames; the best [`REFINED_CANDIDATES`] are refined for `refine_steps`
/// steps. Deterministic given `seed`. Ties keep the earliest candidate.
pub fn min_sectional_estimate(
    t: &CurvatureTensor,
    n_samples: usize,
    refine_steps: usize,
    seed: u64,
) -> Result<SectionalMinimum> {
    if n_samples < 1 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    let n = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = DVector::zeros(n);
            let mut q = DVector::zeros(n);
            v[i] = 1.0;
            q[j] = 1.0;
            candidates.push((t.quartic(&v, &q), v, q));
        }
    }
    for _ in 0..n_samples {
        let (v, q) = random_frame(n, &mut rng);
        candidates.push((t.quartic(&v, &q), v, q));
    }
    // Values within rounding noise of the minimum count as ties, and the
    // stable sort then keeps the earliest (coordinate) candidate first.
    let noise = 4.0 * f64::EPSILON * t.scale();
    let lowest = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let key = |x: f64| if x <= lowest + noise { lowest } else { x };
    candidates.sort_by(|a, b| key(a.0).total_cmp(&key(b.0)));
    let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
    for (f0, v, q) in candidates.into_iter().take(REFINED_CANDIDATES) {
        let (rv, rq, rf) = refine(t, v.clone(), q.clone(), refine_steps);
        // Refinement only counts when it beats rounding noise.
        let cand = if rf < f0 - noise { (rf, rv, rq) } else { (f0, v, q) };
        if best.as_ref().is_none_or(|b| cand.0 < b.0 - noise) {
            best = Some(cand);
        }
    }
    let (r_s, v, q) = best.expect("at least one candidate");
    Ok(SectionalMinimum {
        r_s,
        argmin: Plane::new(v, q)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRsCheck {
    pub r_delta: f64,
    pub r_s: f64,
    /// `R(δ) − 2·R_s`.
    pub margin: f64,
    pub pass: bool,
}

/// Checks `2·R_s ≤ R(δ)` with the sampled `R_s`.
pub fn check_two_rs_bound(t: &CurvatureTensor, opts: &SamplingOptions) -> Result<TwoRsCheck> {
    let r_delta = t.scalar_curvature(&UpperMetric::identity(t.dim())?)?;
    let r_s = min_sectional_estimate(t, opts.n_samples, opts.refine_steps, opts.seed)?.r_s;
    let margin = r_delta - 2.0 * r_s;
    Ok(TwoRsCheck {
        r_delta,
        r_s,
        margin,
        pass: margin >= -BOUND_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarBoundCheck {
    pub bound: f64,
    pub actual: f64,
    pub pass: bool,
}

/// Checks `R(g) ≥ 2·λ1·λ2·R_s` with `λ1 ≥ λ2` the two largest eigenvalues of `g^ab`.
pub fn scalar_lower_bound(t: &CurvatureTensor, g: &UpperMetric, r_s: f64) -> Result<ScalarBoundCheck> {
    if !(r_s >= 0.0) {
        return Err(Error::InvalidArgument(format!("r_s must be >= 0, got {r_s}")));
    }
    let eig = g.eigenvalues();
    let bound = 2.0 * eig[0] * eig[1] * r_s;
    let actual = t.scalar_curvature(g)?;
    Ok(ScalarBoundCheck {
        bound,
        actual,
        pass: actual >= bound - BOUND_SLACK,
    })
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(())
}

/// `λ1^{n/(n−1)}`, the claimed lower bound on the product of the two largest
/// eigenvalues of a det-1 SPD matrix with largest eigenvalue `λ1`.
///
/// The tight value of that product is `λ1^{(n−2)/(n−1)}`, so this exceeds the
/// true minimum whenever `λ1 > 1`.
pub fn product_bound_from_max(lam1: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(lam1 >= 1.0) || !lam1.is_finite() {
        return Err(Error::InvalidArgument(format!("largest eigenvalue must be >= 1, got {lam1}")));
    }
    Ok(lam1.powf(n as f64 / (n as f64 - 1.0)))
}

/// `λ_min^{−2/(n−1)}`: lower bound on the product of the two largest
/// eigenvalues of a det-1 SPD matrix with smallest eigenvalue `λ_min`.
pub fn product_bound_from_min(lam2: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(lam2 > 0.0 && lam2 <= 1.0) {
        return Err(Error::InvalidArgument(format!("smallest eigenvalue must lie in (0, 1], got {lam2}")));
    }
    Ok(lam2.powf(-2.0 / (n as f64 - 1.0)))
}

/// Metric-free sign verdict from sampled planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositivityVerdict {
    StrictlyPositiveSampled,
    NonnegativeSampled,
    /// A plane on which the numerator is negative; reproducible certificate.
    Violated { v: Vec<f64>, q: Vec<f64>, numerator: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub verdict: PositivityVerdict,
    /// Smallest numerator found on an orthonormal frame.
    pub min_numerator: f64,
    pub tolerance: f64,
}

fn verdict_from(t: &CurvatureTensor, est: &SectionalMinimum) -> PositivityReport {
    let tolerance = STRICTNESS_REL_TOL * t.scale();
    let verdict = if est.r_s > tolerance {
        PositivityVerdict::StrictlyPositiveSampled
    } else if est.r_s >= -tolerance {
        PositivityVerdict::NonnegativeSampled
    } else {
        PositivityVerdict::Violated {
            v: est.argmin.v().iter().copied().collect(),
            q: est.argmin.q().iter().copied().collect(),
            numerator: est.r_s,
        }
    };
    PositivityReport {
        verdict,
        min_numerator: est.r_s,
        tolerance,
    }
}

/// Samples the numerator `R_abcd v^a q^b v^c q^d` on orthonormal frames.
pub fn positivity_check(t: &CurvatureTensor, n_samples: usize, seed: u64) -> Result<PositivityReport> {
    let est = min_sectional_estimate(t, n_samples, SamplingOptions::default().refine_steps, seed)?;
    Ok(verdict_from(t, &est))
}

/// Eigenvalue box outside of which `R(g) > R(δ)` is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBox {
    /// `R(δ)/(2·R_s)`.
    pub ratio: f64,
    /// `ratio^{-(n-1)/2}`.
    pub lam_min_floor: f64,
    /// `ratio^{(n-1)/n}`.
    pub lam_max_ceiling: f64,
}

impl EigenBox {
    pub fn new(r_delta: f64, r_s: f64, n: usize) -> Result<Self> {
        check_n(n)?;
        if !(r_s > 0.0) {
            return Err(Error::InvalidArgument(format!("r_s must be > 0, got {r_s}")));
        }
        let ratio = r_delta / (2.0 * r_s);
        let nf = n as f64;
        Ok(Self {
            ratio,
            lam_min_floor: ratio.powf(-(nf - 1.0) / 2.0),
            lam_max_ceiling: ratio.powf((nf - 1.0) / nf),
        })
    }

    /// Whether a spectrum lies inside the closed box.
    pub fn contains(&self, g: &UpperMetric) -> bool {
        let eig = g.eigenvalues();
        eig[eig.len() - 1] >= self.lam_min_floor && eig[0] <= self.lam_max_ceiling
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub r_delta: f64,
    /// Sampled estimate; the true minimum can only be lower.
    pub r_s: f64,
    pub r_s_is_upper_estimate: bool,
    /// Present only when the sampled `R_s` is strictly positive.
    pub region: Option<EigenBox>,
    pub applicable: bool,
    pub positivity: PositivityReport,
    pub sampling: SamplingOptions,
}

/// Fills a [`BoundsReport`]; the region is omitted when `R_s ≤` tolerance.
pub fn coercivity_region(t: &CurvatureTensor, opts: &SamplingOptions) -> Result<BoundsReport> {
    let n = t.dim();
    let r_delta = t.scalar_curvature(&UpperMetric::identity(n)?)?;
    let est = min_sectional_estimate(t, opts.n_samples, opts.refine_steps, opts.seed)?;
    let positivity = verdict_from(t, &est);
    let applicable = matches!(positivity.verdict, PositivityVerdict::StrictlyPositiveSampled);
    let region = if applicable {
        Some(EigenBox::new(r_delta, est.r_s, n)?)
    } else {
        None
    };
    Ok(BoundsReport {
        n,
        r_delta,
        r_s: est.r_s,
        r_s_is_upper_estimate: true,
        region,
        applicable,
        positivity,
        sampling: *opts,
    })
}
