//! Independent verification machinery.
//!
//! Fixture generators with known answers, a derivative-free brute-force
//! minimizer over an unconstrained parameterization, finite-difference
//! derivative oracles and a multistart uniqueness harness. The brute-force
//! path shares no code with the solver: it parameterizes the slice as
//! `exp(S)` for traceless symmetric `S` (so `det = e^{tr S} = 1`) and runs a
//! Nelder-Mead simplex on `R(exp S)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{positivity_check, EigenBox, PositivityVerdict};
use crate::error::{Error, Result};
use crate::linalg;
use crate::solver::{solve_einstein, SolveOptions, SolveReport};
use crate::spd::{self, TangentPerturbation, UpperMetric};
use crate::tensor::{CurvatureTensor, Tensor4};

/// Largest condition number of the random frames used by pullback fixtures.
pub const MAX_FIXTURE_CONDITION: f64 = 10.0;
/// Positivity sampling used to admit perturbed fixtures.
const FIXTURE_POSITIVITY_SAMPLES: usize = 500;
const MAX_EPS_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureKind {
    /// Space form with curvature `kappa`.
    Constant { kappa: f64 },
    /// Space form pulled back by a random frame of condition number ≤ 10.
    Pullback { kappa: f64 },
    /// Space form plus `eps` times a random curvature-type tensor of unit max-norm.
    Perturbed { kappa: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub n: usize,
    pub kind: FixtureKind,
    pub seed: u64,
}

/// A generated tensor together with what is known about it in closed form.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub tensor: CurvatureTensor,
    /// The frame `A` of a pullback fixture.
    pub transform: Option<DMatrix<f64>>,
    /// Perturbation size actually used after any halving.
    pub eps_used: Option<f64>,
}

impl Fixture {
    /// Closed-form Einstein metric, known for constant and pullback fixtures.
    pub fn known_minimizer(&self) -> Option<UpperMetric> {
        match self.spec.kind {
            FixtureKind::Constant { .. } => UpperMetric::identity(self.spec.n).ok(),
            FixtureKind::Pullback { .. } => closed_form_minimizer(self.transform.as_ref()?).ok(),
            FixtureKind::Perturbed { .. } => None,
        }
    }
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let z = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the distribution is Haar.
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random `A = U·diag(s)·Vᵀ` with singular values log-uniform in `[1, 10]`.
pub fn random_transform(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let u = random_orthogonal(n, rng);
    let v = random_orthogonal(n, rng);
    let s = DVector::from_fn(n, |_, _| MAX_FIXTURE_CONDITION.powf(rng.random::<f64>()));
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// `normalize_det((AᵀA)⁻¹)`, the Einstein metric of a pulled-back space form.
pub fn closed_form_minimizer(a: &DMatrix<f64>) -> Result<UpperMetric> {
    let h = a.transpose() * a;
    spd::normalize_det(&linalg::spd_inverse(&h)?)
}

fn random_curvature_direction(n: usize, rng: &mut ChaCha8Rng) -> Result<CurvatureTensor> {
    let raw = Tensor4::from_fn(n, |_, _, _, _| StandardNormal.sample(rng));
    let p = CurvatureTensor::project(&raw)?;
    let s = p.scale();
    if !(s > 0.0) {
        return Err(Error::Fixture("degenerate random perturbation".into()));
    }
    Ok(p.scaled(1.0 / s))
}

/// Deterministic fixture generation; positive fixtures are checked with
/// [`positivity_check`] and perturbed ones shrink `eps` until they pass.
pub fn generate(spec: &FixtureSpec) -> Result<Fixture> {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        FixtureKind::Constant { kappa } => Ok(Fixture {
            spec: *spec,
            tensor: CurvatureTensor::constant_curvature(n, kappa)?,
            transform: None,
            eps_used: None,
        }),
        FixtureKind::Pullback { kappa } => {
            let a = random_transform(n, &mut rng);
            let tensor = CurvatureTensor::constant_curvature(n, kappa)?.pullback(&a)?;
            Ok(Fixture {
                spec: *spec,
                tensor,
                transform: Some(a),
                eps_used: None,
            })
        }
        FixtureKind::Perturbed { kappa, eps } => {
            if !(kappa > 0.0) || !(eps >= 0.0) {
                return Err(Error::Fixture(format!(
                    "perturbed fixtures need kappa > 0 and eps >= 0 (got {kappa}, {eps})"
                )));
            }
            let base = CurvatureTensor::constant_curvature(n, kappa)?;
            let direction = random_curvature_direction(n, &mut rng)?;
            let mut eps = eps;
            for _ in 0..=MAX_EPS_HALVINGS {
                let tensor = base.add_scaled(&direction, eps * kappa)?;
                let check = positivity_check(&tensor, FIXTURE_POSITIVITY_SAMPLES, spec.seed)?;
                if check.verdict == PositivityVerdict::StrictlyPositiveSampled {
                    return Ok(Fixture {
                        spec: *spec,
                        tensor,
                        transform: None,
                        eps_used: Some(eps),
                    });
                }
                eps *= 0.5;
            }
            Err(Error::Fixture(format!(
                "no positive perturbation after {MAX_EPS_HALVINGS} halvings"
            )))
        }
    }
}

/// The tensor of [`generate`].
pub fn generate_fixture(spec: &FixtureSpec) -> Result<CurvatureTensor> {
    Ok(generate(spec)?.tensor)
}

/// `exp(S)` for traceless symmetric `S` of Frobenius norm drawn uniformly from `(0, max_scale]`.
pub fn random_metric(n: usize, max_scale: f64, rng: &mut impl Rng) -> Result<UpperMetric> {
    let basis = linalg::traceless_symmetric_basis(n);
    let coords: Vec<f64> = basis.iter().map(|_| StandardNormal.sample(rng)).collect();
    let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let radius = max_scale * (1.0 - rng.random::<f64>());
    let mut s = DMatrix::zeros(n, n);
    for (e, c) in basis.iter().zip(&coords) {
        s += e * (c * radius / norm);
    }
    spd::normalize_det(&linalg::sym_exp(&s))
}

/// A Gaussian tangent vector at `g`, scaled to unit norm.
pub fn random_unit_tangent(g: &UpperMetric, rng: &mut impl Rng) -> Result<TangentPerturbation> {
    let basis = spd::tangent_basis(g)?;
    let n = g.dim();
    let mut d = DMatrix::zeros(n, n);
    for e in &basis {
        let c: f64 = StandardNormal.sample(rng);
        d += e.matrix() * c;
    }
    let d = spd::project_tangent(g, &linalg::symmetrize(&d))?;
    let nrm = spd::norm(g, &d)?;
    Ok(d.scaled(1.0 / nrm))
}

/// A unit-determinant metric whose spectrum lies just outside `region`:
/// with probability ½ the largest eigenvalue is `margin·lam_max_ceiling`,
/// otherwise the smallest is `lam_min_floor/margin`. The remaining eigenvalues
/// are random with the complementary determinant, and the eigenbasis is a
/// random rotation.
pub fn metric_outside_box(n: usize, region: &EigenBox, margin: f64, rng: &mut ChaCha8Rng) -> Result<UpperMetric> {
    if !(margin > 1.0) {
        return Err(Error::InvalidArgument(format!("margin must be > 1, got {margin}")));
    }
    let above = rng.random::<bool>();
    let pinned = if above {
        (region.lam_max_ceiling * margin).ln()
    } else {
        (region.lam_min_floor / margin).ln()
    };
    // Other log-eigenvalues sum to −pinned and stay on the correct side of it.
    let rest = loop {
        let mut x: Vec<f64> = (0..n - 1)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                0.5 * pinned.abs() * z
            })
            .collect();
        let shift = (-pinned - x.iter().sum::<f64>()) / (n - 1) as f64;
        x.iter_mut().for_each(|v| *v += shift);
        let ok = if above {
            x.iter().all(|&v| v <= pinned)
        } else {
            x.iter().all(|&v| v >= pinned)
        };
        if ok {
            break x;
        }
    };
    let mut lam = vec![pinned.exp()];
    lam.extend(rest.iter().map(|v| v.exp()));
    let q = random_orthogonal(n, rng);
    let m = &q * DMatrix::from_diagonal(&DVector::from_vec(lam)) * q.transpose();
    spd::normalize_det(&linalg::symmetrize(&m))
}

/// Central difference `(R(γ(h)) − R(γ(−h)))/(2h)` along the geodesic `γ` through `g` with velocity `d`.
pub fn finite_diff_directional(
    t: &CurvatureTensor,
    g: &UpperMetric,
    d: &TangentPerturbation,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let plus = t.scalar_curvature(&spd::geodesic(g, d, h)?)?;
    let minus = t.scalar_curvature(&spd::geodesic(g, d, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Second central difference `(R(γ(h)) − 2R(g) + R(γ(−h)))/h²`.
pub fn finite_diff_second(
    t: &CurvatureTensor,
    g: &UpperMetric,
    d: &TangentPerturbation,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    let plus = t.scalar_curvature(&spd::geodesic(g, d, h)?)?;
    let mid = t.scalar_curvature(g)?;
    let minus = t.scalar_curvature(&spd::geodesic(g, d, -h)?)?;
    Ok((plus - 2.0 * mid + minus) / (h * h))
}

/// Outcome of [`brute_force_minimize`].
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub g: UpperMetric,
    pub r: f64,
    /// False when no restart reached the simplex tolerance within budget.
    pub converged: bool,
    pub evaluations: usize,
}

const BRUTE_FORCE_RESTARTS: usize = 5;
const NELDER_MEAD_BUDGET: usize = 40_000;

struct Simplex {
    best_x: DVector<f64>,
    best_f: f64,
    converged: bool,
    evaluations: usize,
}

/// Plain Nelder-Mead with standard coefficients.
fn nelder_mead(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x0: &DVector<f64>,
    size: f64,
    tol: f64,
    budget: usize,
) -> Simplex {
    let m = x0.len();
    let mut pts: Vec<DVector<f64>> = vec![x0.clone()];
    for i in 0..m {
        let mut p = x0.clone();
        p[i] += size;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(f).collect();
    let mut evals = vals.len();
    let mut converged = false;
    while evals < budget {
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diameter = pts.iter().skip(1).map(|p| (p - &pts[0]).amax()).fold(0.0, f64::max);
        // Near the minimum the values differ only by rounding, so the
        // simplex size is the only meaningful stopping signal.
        if diameter <= tol {
            converged = true;
            break;
        }

        let centroid = pts[..m].iter().fold(DVector::zeros(m), |acc, p| acc + p) / m as f64;
        let worst = pts[m].clone();
        let reflect = &centroid + (&centroid - &worst);
        let fr = f(&reflect);
        evals += 1;
        if fr < vals[0] {
            let expand = &centroid + (&reflect - &centroid) * 2.0;
            let fe = f(&expand);
            evals += 1;
            if fe < fr {
                pts[m] = expand;
                vals[m] = fe;
            } else {
                pts[m] = reflect;
                vals[m] = fr;
            }
        } else if fr < vals[m - 1] {
            pts[m] = reflect;
            vals[m] = fr;
        } else {
            let (contract, fc) = if fr < vals[m] {
                let c = &centroid + (&reflect - &centroid) * 0.5;
                let fc = f(&c);
                (c, fc)
            } else {
                let c = &centroid + (&worst - &centroid) * 0.5;
                let fc = f(&c);
                (c, fc)
            };
            evals += 1;
            if fc < vals[m].min(fr) {
                pts[m] = contract;
                vals[m] = fc;
            } else {
                let best = pts[0].clone();
                for i in 1..=m {
                    pts[i] = &best + (&pts[i] - &best) * 0.5;
                    vals[i] = f(&pts[i]);
                }
                evals += m;
            }
        }
    }
    let (bi, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty simplex");
    Simplex {
        best_x: pts[bi].clone(),
        best_f: vals[bi],
        converged,
        evaluations: evals,
    }
}

/// Minimizes `R(exp S)` over traceless symmetric `S` with Nelder-Mead from
/// [`BRUTE_FORCE_RESTARTS`] seeded starts, restarting each run from its best
/// point until a fresh simplex no longer improves. `tol` bounds the final
/// simplex diameter in the coordinates of `S`.
pub fn brute_force_minimize(t: &CurvatureTensor, seed: u64, tol: f64) -> Result<BruteForceResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let n = t.dim();
    let basis = linalg::traceless_symmetric_basis(n);
    let to_metric = |x: &DVector<f64>| {
        let mut s = DMatrix::zeros(n, n);
        for (e, c) in basis.iter().zip(x.iter()) {
            s += e * *c;
        }
        linalg::sym_exp(&s)
    };
    let objective = |x: &DVector<f64>| -> f64 {
        let g = to_metric(x);
        t.scalar_curvature_of(&g).unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(DVector<f64>, f64, bool)> = None;
    let mut evaluations = 0;
    for _ in 0..BRUTE_FORCE_RESTARTS {
        let mut x = DVector::from_fn(basis.len(), |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            0.5 * z
        });
        let mut fx = objective(&x);
        let mut converged = false;
        let mut size = 0.5;
        for _ in 0..12 {
            let run = nelder_mead(&objective, &x, size, tol, NELDER_MEAD_BUDGET);
            evaluations += run.evaluations;
            let improved = run.best_f < fx;
            let moved = (&run.best_x - &x).amax();
            if improved {
                x = run.best_x;
                fx = run.best_f;
            }
            converged = run.converged;
            if run.converged && moved <= tol {
                break;
            }
            size = (moved * 2.0).clamp(tol * 10.0, 0.5);
        }
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx, converged));
        }
    }
    let (x, r, converged) = best.expect("at least one restart");
    let g = spd::normalize_det(&to_metric(&x))?;
    Ok(BruteForceResult {
        g,
        r,
        converged,
        evaluations,
    })
}

/// Result of running the solver from several random starts.
#[derive(Debug, Clone)]
pub struct MultistartReport {
    /// Largest pairwise geodesic distance between converged minimizers.
    pub max_distance: f64,
    pub reports: Vec<SolveReport>,
    /// Indices of runs that did not converge; excluded from the distance.
    pub failed: Vec<usize>,
}

impl MultistartReport {
    /// The converged run with the smallest final `R`.
    pub fn best(&self) -> Option<&SolveReport> {
        self.reports
            .iter()
            .filter(|r| r.converged)
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
    }
}

/// Maximum scale of the random starting metrics, `exp(S)` with `‖S‖_F ≤ 1.5`.
pub const MULTISTART_SCALE: f64 = 1.5;

/// Solves from `k` random starting metrics (reduced in seed order).
pub fn multistart_uniqueness(
    t: &CurvatureTensor,
    k: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<MultistartReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 starts, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Result<Vec<UpperMetric>> = (0..k)
        .map(|_| random_metric(t.dim(), MULTISTART_SCALE, &mut rng))
        .collect();
    let reports: Result<Vec<SolveReport>> = starts?.iter().map(|g0| solve_einstein(t, g0, opts)).collect();
    let reports = reports?;
    let failed: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.converged)
        .map(|(i, _)| i)
        .collect();
    let good: Vec<&SolveReport> = reports.iter().filter(|r| r.converged).collect();
    let mut max_distance = 0.0_f64;
    for i in 0..good.len() {
        for j in (i + 1)..good.len() {
            max_distance = max_distance.max(spd::geodesic_distance(&good[i].minimizer, &good[j].minimizer)?);
        }
    }
    Ok(MultistartReport {
        max_distance,
        reports,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn fixtures_are_deterministic() {
        for kind in [
            FixtureKind::Constant { kappa: 1.0 },
            FixtureKind::Pullback { kappa: 1.0 },
            FixtureKind::Perturbed { kappa: 1.0, eps: 0.05 },
        ] {
            let spec = FixtureSpec { n: 3, kind, seed: 7 };
            let a = generate_fixture(&spec).unwrap();
            let b = generate_fixture(&spec).unwrap();
            assert_eq!(a.as_raw().as_slice(), b.as_raw().as_slice());
        }
    }

    #[test]
    fn pullback_transform_is_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..6 {
            let a = random_transform(n, &mut rng);
            let sv = a.singular_values();
            let cond = sv.max() / sv.min();
            assert!(cond <= MAX_FIXTURE_CONDITION * (1.0 + 1e-12), "cond {cond}");
        }
    }

    #[test]
    fn perturbed_fixture_is_positive() {
        let spec = FixtureSpec {
            n: 3,
            kind: FixtureKind::Perturbed { kappa: 1.0, eps: 0.05 },
            seed: 3,
        };
        let fx = generate(&spec).unwrap();
        assert_eq!(fx.eps_used, Some(0.05));
        let check = positivity_check(&fx.tensor, 1000, 11).unwrap();
        assert_eq!(check.verdict, PositivityVerdict::StrictlyPositiveSampled);
    }

    #[test]
    fn oversized_perturbation_is_shrunk() {
        let spec = FixtureSpec {
            n: 3,
            kind: FixtureKind::Perturbed { kappa: 1.0, eps: 50.0 },
            seed: 1,
        };
        let fx = generate(&spec).unwrap();
        assert!(fx.eps_used.unwrap() < 50.0);
    }

    #[test]
    fn finite_differences_at_critical_point() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let d = TangentPerturbation::new(&id, diag(&[1.0, -1.0, 0.0])).unwrap();
        assert!(finite_diff_directional(&t, &id, &d, 1e-5).unwrap().abs() < 1e-9);
        assert!((finite_diff_second(&t, &id, &d, 1e-4).unwrap() - 4.0).abs() < 1e-5);
        let zero = TangentPerturbation::zero(&id);
        assert_eq!(finite_diff_second(&t, &id, &zero, 1e-3).unwrap(), 0.0);
        assert!(finite_diff_directional(&t, &id, &d, 0.0).is_err());
    }

    #[test]
    fn directional_derivative_of_pullback_fixture() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap().pullback(&diag(&[2.0, 1.0, 1.0])).unwrap();
        let d = TangentPerturbation::new(&id, diag(&[2.0, -1.0, -1.0]) / 6f64.sqrt()).unwrap();
        // 2·Σ T_ab d^ab with T = diag(2,−1,−1): 2·6/√6 = 2√6.
        let expected = 2.0 * 6f64.sqrt();
        let fd = finite_diff_directional(&t, &id, &d, 1e-5).unwrap();
        assert!((fd - expected).abs() < 1e-6 * expected);
        let e1 = (finite_diff_directional(&t, &id, &d, 1e-2).unwrap() - expected).abs();
        let e2 = (finite_diff_directional(&t, &id, &d, 5e-3).unwrap() - expected).abs();
        // Central differences are at least second order; the odd third
        // derivative may vanish here, making the observed order higher.
        assert!(e1 / e2 > 3.8, "ratio {}", e1 / e2);
    }

    #[test]
    fn brute_force_space_form() {
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let res = brute_force_minimize(&t, 0, 1e-9).unwrap();
        assert!(res.converged);
        assert!((res.r - 6.0).abs() < 1e-12);
        let id = UpperMetric::identity(3).unwrap();
        assert!(spd::geodesic_distance(&res.g, &id).unwrap() < 1e-6);
    }

    #[test]
    fn brute_force_pullback_closed_form() {
        let a = diag(&[2.0, 1.0, 1.0]);
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap().pullback(&a).unwrap();
        let res = brute_force_minimize(&t, 1, 1e-9).unwrap();
        let expected = closed_form_minimizer(&a).unwrap();
        let c = 4f64.powf(1.0 / 3.0);
        assert!((expected.upper() - diag(&[1.0 / (c * c), c, c])).abs().max() < 1e-14);
        assert!(spd::geodesic_distance(&res.g, &expected).unwrap() < 1e-6);
        assert!((res.r - t.scalar_curvature(&expected).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn multistart_space_form() {
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let rep = multistart_uniqueness(&t, 10, 5, &SolveOptions::default()).unwrap();
        assert!(rep.failed.is_empty());
        assert!(rep.max_distance <= 1e-8, "{}", rep.max_distance);
        assert!(multistart_uniqueness(&t, 1, 5, &SolveOptions::default()).is_err());
    }

    #[test]
    fn random_metric_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in 3..7 {
            let g = random_metric(n, MULTISTART_SCALE, &mut rng).unwrap();
            assert!((g.upper().determinant() - 1.0).abs() < 1e-12);
            assert!(spd::geodesic_distance(&g, &UpperMetric::identity(n).unwrap()).unwrap() <= MULTISTART_SCALE + 1e-9);
        }
    }
}
