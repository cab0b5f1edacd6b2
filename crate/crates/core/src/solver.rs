//! Minimization of the scalar curvature `R(g) = R_abcd g^ac g^bd` over the
//! unit-determinant slice.
//!
//! Critical points of `R` on the slice are exactly the metrics under which the
//! tensor is Einstein. The solver runs geodesic steepest descent with Armijo
//! backtracking and switches to Newton steps in an orthonormal tangent basis
//! once the gradient is small and the assembled Hessian is positive definite.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::spd::{self, TangentPerturbation, UpperMetric};
use crate::tensor::CurvatureTensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub sufficient_decrease: f64,
    pub backtrack: f64,
    pub initial_step: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            sufficient_decrease: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop once the Riemannian gradient norm is at or below this.
    pub tol_grad: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
    pub use_newton: bool,
    /// Gradient norm below which Newton steps are attempted.
    pub newton_threshold: f64,
    /// Seed for randomized starts (multistart); a single solve is deterministic.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-10,
            max_iter: 500,
            line_search: LineSearch::default(),
            use_newton: true,
            newton_threshold: 1e-3,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_grad > 0.0) {
            return Err(Error::InvalidArgument(format!("tol_grad must be > 0, got {}", self.tol_grad)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        let ls = &self.line_search;
        if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0)
            || !(ls.backtrack > 0.0 && ls.backtrack < 1.0)
            || !(ls.initial_step > 0.0)
        {
            return Err(Error::InvalidArgument(format!("invalid line search parameters {ls:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The step fell below [`MIN_STEP`] without an acceptable point.
    LineSearchFailed,
}

/// Backtracking gives up below this step length.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Best iterate; the Einstein metric when `converged`.
    pub minimizer: UpperMetric,
    /// `R(minimizer)/n`.
    pub lambda: f64,
    pub grad_norm: f64,
    /// `‖Ric − λ·g_lower‖_F`.
    pub einstein_residual: f64,
    /// `C = 1/(2·λ_min(G))`, so that `einstein_residual ≤ C·grad_norm`.
    pub residual_bound_factor: f64,
    pub iterations: usize,
    /// `R` at the start and after every accepted step.
    pub r_trace: Vec<f64>,
    /// Number of accepted Newton steps.
    pub newton_steps: usize,
    pub converged: bool,
    pub status: SolveStatus,
}

/// The Riemannian gradient `2·G·T·G`, with `T` the traceless Ricci tensor.
pub fn riemannian_gradient(t: &CurvatureTensor, g: &UpperMetric) -> Result<TangentPerturbation> {
    let tl = t.traceless_ricci(g)?;
    let d = g.upper() * tl * g.upper() * 2.0;
    Ok(TangentPerturbation::from_parts(g, d))
}

/// Symmetric bilinear form whose diagonal is the second derivative of `R`
/// along geodesics: `2·(Ric·sym(D1 G⁻¹ D2) + Σ R_abcd D1^ac D2^bd)`.
pub fn hessian_bilinear(
    t: &CurvatureTensor,
    g: &UpperMetric,
    d1: &TangentPerturbation,
    d2: &TangentPerturbation,
) -> Result<f64> {
    d1.check_base(g)?;
    d2.check_base(g)?;
    let ric = t.ricci(g)?;
    let mixed = d1.matrix() * g.lower() * d2.matrix();
    let q = t.double_contract(d1.matrix(), d2.matrix())?;
    Ok(2.0 * (linalg::contract(&ric, &mixed) + q))
}

/// `2·(R_ab g_cd + R_abcd) d^ac d^bd`.
pub fn hessian_quadratic_form(
    t: &CurvatureTensor,
    g: &UpperMetric,
    d: &TangentPerturbation,
) -> Result<f64> {
    hessian_bilinear(t, g, d, d)
}

/// The Hessian assembled in an orthonormal basis of the tangent space.
#[derive(Debug, Clone)]
pub struct HessianOperator {
    base: UpperMetric,
    basis: Vec<TangentPerturbation>,
    matrix: DMatrix<f64>,
}

impl HessianOperator {
    /// Symmetric matrix of size `n(n+1)/2 − 1`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn basis(&self) -> &[TangentPerturbation] {
        &self.basis
    }

    /// Coordinates `⟨d, E_k⟩_g` of a tangent vector.
    pub fn coordinates(&self, d: &TangentPerturbation) -> Result<DVector<f64>> {
        let coords: Result<Vec<f64>> = self
            .basis
            .iter()
            .map(|e| spd::inner_product(&self.base, d, e))
            .collect();
        Ok(DVector::from_vec(coords?))
    }

    pub fn from_coordinates(&self, x: &DVector<f64>) -> TangentPerturbation {
        let n = self.base.dim();
        let mut d = DMatrix::zeros(n, n);
        for (e, &c) in self.basis.iter().zip(x.iter()) {
            d += e.matrix() * c;
        }
        TangentPerturbation::from_parts(&self.base, d)
    }

    /// The operator applied to `d`, as a tangent vector.
    pub fn apply(&self, d: &TangentPerturbation) -> Result<TangentPerturbation> {
        let x = self.coordinates(d)?;
        Ok(self.from_coordinates(&(&self.matrix * x)))
    }

    pub fn quadratic(&self, d: &TangentPerturbation) -> Result<f64> {
        let x = self.coordinates(d)?;
        Ok(x.dot(&(&self.matrix * &x)))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn hessian_operator(t: &CurvatureTensor, g: &UpperMetric) -> Result<HessianOperator> {
    let basis = spd::tangent_basis(g)?;
    let ric = t.ricci(g)?;
    let partials: Result<Vec<DMatrix<f64>>> = basis.iter().map(|e| t.partial_trace(e.matrix())).collect();
    let partials = partials?;
    let m = basis.len();
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        let left = basis[i].matrix() * g.lower();
        for j in i..m {
            let mixed = &left * basis[j].matrix();
            let value = 2.0 * (linalg::contract(&ric, &mixed) + linalg::contract(&partials[i], basis[j].matrix()));
            matrix[(i, j)] = value;
            matrix[(j, i)] = value;
        }
    }
    Ok(HessianOperator {
        base: g.clone(),
        basis,
        matrix,
    })
}

/// Result of checking `Ric = λ·g_lower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinCheck {
    pub lambda: f64,
    pub residual: f64,
    pub passed: bool,
}

/// `λ = R(g)/n`, residual `‖Ric − λ·G⁻¹‖_F`, passing when
/// `residual ≤ tol·max(1, |λ|)`.
pub fn verify_einstein(t: &CurvatureTensor, g: &UpperMetric, tol: f64) -> Result<EinsteinCheck> {
    let ric = t.ricci(g)?;
    let lambda = linalg::contract(&ric, g.upper()) / g.dim() as f64;
    let residual = linalg::frobenius(&(ric - g.lower() * lambda));
    Ok(EinsteinCheck {
        lambda,
        residual,
        passed: residual <= tol * lambda.abs().max(1.0),
    })
}

struct Iterate {
    g: UpperMetric,
    r: f64,
    grad: TangentPerturbation,
    grad_norm: f64,
}

impl Iterate {
    fn at(t: &CurvatureTensor, g: UpperMetric) -> Result<Self> {
        let r = t.scalar_curvature(&g)?;
        let grad = riemannian_gradient(t, &g)?;
        let grad_norm = spd::norm(&g, &grad)?;
        if !r.is_finite() || !grad_norm.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        Ok(Self { g, r, grad, grad_norm })
    }
}

/// Newton direction and its slope `⟨grad, dir⟩`, when the Hessian is usable.
fn newton_direction(t: &CurvatureTensor, it: &Iterate) -> Result<Option<(TangentPerturbation, f64)>> {
    let hess = hessian_operator(t, &it.g)?;
    let eig = hess.eigenvalues();
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if !(lo > 1e-12 * hi.abs()) || !(hi > 0.0) {
        return Ok(None);
    }
    let b = hess.coordinates(&it.grad)?;
    let Some(chol) = nalgebra::Cholesky::new(hess.matrix().clone()) else {
        return Ok(None);
    };
    let x = -chol.solve(&b);
    let slope = b.dot(&x);
    if !(slope < 0.0) {
        return Ok(None);
    }
    Ok(Some((hess.from_coordinates(&x), slope)))
}

/// Relative size below which differences in `R` are rounding noise.
const NOISE_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Minimizes `R` over the slice starting from `g0`.
///
/// Non-finite values abort with an error; running out of iterations or a
/// failed line search return the best iterate with `converged = false`.
pub fn solve_einstein(t: &CurvatureTensor, g0: &UpperMetric, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    if g0.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            actual: g0.dim(),
        });
    }
    let ls = opts.line_search;
    let mut it = Iterate::at(t, g0.clone())?;
    let mut r_trace = vec![it.r];
    let mut iterations = 0;
    let mut newton_steps = 0;
    let mut status = SolveStatus::MaxIterations;

    loop {
        if it.grad_norm <= opts.tol_grad {
            status = SolveStatus::Converged;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let newton = if opts.use_newton && it.grad_norm < opts.newton_threshold {
            newton_direction(t, &it)?
        } else {
            None
        };
        let is_newton = newton.is_some();
        let (direction, slope, mut step) = match newton {
            Some((dir, slope)) => (dir, slope, 1.0),
            None => (it.grad.scaled(-1.0 / it.grad_norm), -it.grad_norm, ls.initial_step),
        };

        let noise = NOISE_FLOOR * it.r.abs().max(t.scale());
        let mut accepted = None;
        while step >= MIN_STEP {
            let candidate = spd::geodesic(&it.g, &direction, step)?;
            let r_new = t.scalar_curvature(&candidate)?;
            if !r_new.is_finite() {
                return Err(Error::NonFinite("objective"));
            }
            let predicted = ls.sufficient_decrease * step * slope;
            // Once the predicted decrease is at the rounding level of R the
            // Armijo test only sees noise; require a smaller gradient instead.
            if predicted.abs() <= noise {
                if r_new <= it.r + noise {
                    let next = Iterate::at(t, candidate)?;
                    if next.grad_norm < it.grad_norm {
                        accepted = Some(next);
                        break;
                    }
                }
            } else if r_new <= it.r + predicted {
                accepted = Some(Iterate::at(t, candidate)?);
                break;
            }
            step *= ls.backtrack;
        }
        match accepted {
            Some(next) => {
                it = next;
                r_trace.push(it.r);
                iterations += 1;
                if is_newton {
                    newton_steps += 1;
                }
            }
            None => {
                status = SolveStatus::LineSearchFailed;
                break;
            }
        }
    }

    let check = verify_einstein(t, &it.g, 0.0)?;
    let lam_min = *it.g.eigenvalues().last().expect("nonempty spectrum");
    Ok(SolveReport {
        lambda: it.r / t.dim() as f64,
        grad_norm: it.grad_norm,
        einstein_residual: check.residual,
        residual_bound_factor: 1.0 / (2.0 * lam_min),
        iterations,
        r_trace,
        newton_steps,
        converged: status == SolveStatus::Converged,
        status,
        minimizer: it.g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::project_tangent;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn pullback_fixture() -> CurvatureTensor {
        CurvatureTensor::constant_curvature(3, 1.0)
            .unwrap()
            .pullback(&diag(&[2.0, 1.0, 1.0]))
            .unwrap()
    }

    #[test]
    fn gradient_vanishes_on_space_form() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.7).unwrap();
        assert!(riemannian_gradient(&t, &id).unwrap().matrix().abs().max() < 1e-15);
    }

    #[test]
    fn gradient_of_pullback_fixture() {
        let id = UpperMetric::identity(3).unwrap();
        let grad = riemannian_gradient(&pullback_fixture(), &id).unwrap();
        assert_eq!(grad.matrix(), &diag(&[4.0, -2.0, -2.0]));
    }

    #[test]
    fn hessian_closed_form_value() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let d = TangentPerturbation::new(&id, diag(&[1.0, -1.0, 0.0])).unwrap();
        assert!((hessian_quadratic_form(&t, &id, &d).unwrap() - 4.0).abs() < 1e-14);
        let zero = TangentPerturbation::zero(&id);
        assert_eq!(hessian_quadratic_form(&t, &id, &zero).unwrap(), 0.0);
    }

    #[test]
    fn hessian_operator_space_form() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let h = hessian_operator(&t, &id).unwrap();
        assert_eq!(h.matrix().nrows(), 5);
        assert!(h.eigenvalues()[0] > 0.0);
        assert!((h.matrix() - h.matrix().transpose()).abs().max() < 1e-14);

        let z = hessian_operator(&CurvatureTensor::zero(3).unwrap(), &id).unwrap();
        assert_eq!(z.matrix().abs().max(), 0.0);
    }

    #[test]
    fn hessian_operator_matches_quadratic_form() {
        let g = UpperMetric::new(diag(&[2.0, 1.0, 0.5])).unwrap();
        let t = pullback_fixture();
        let h = hessian_operator(&t, &g).unwrap();
        for e in h.basis() {
            let q = hessian_quadratic_form(&t, &g, e).unwrap();
            assert!((h.quadratic(e).unwrap() - q).abs() <= 1e-10 * q.abs().max(1.0));
        }
        let s = DMatrix::from_row_slice(3, 3, &[0.3, 0.2, -0.1, 0.2, -0.4, 0.5, -0.1, 0.5, 0.1]);
        let d = project_tangent(&g, &s).unwrap();
        let q = hessian_quadratic_form(&t, &g, &d).unwrap();
        assert!((h.quadratic(&d).unwrap() - q).abs() <= 1e-10 * q.abs());
        let hd = h.apply(&d).unwrap();
        assert!((spd::inner_product(&g, &hd, &d).unwrap() - q).abs() <= 1e-10 * q.abs());
    }

    #[test]
    fn verify_examples() {
        let id = UpperMetric::identity(3).unwrap();
        for kappa in [0.5, 2.0] {
            let t = CurvatureTensor::constant_curvature(3, kappa).unwrap();
            let c = verify_einstein(&t, &id, 1e-8).unwrap();
            assert_eq!(c.lambda, 2.0 * kappa);
            assert_eq!(c.residual, 0.0);
            assert!(c.passed);
        }
        let c = verify_einstein(&pullback_fixture(), &id, 1e-8).unwrap();
        assert_eq!(c.lambda, 6.0);
        assert!((c.residual - 6f64.sqrt()).abs() < 1e-14);
        assert!(!c.passed);
        let g = UpperMetric::new(diag(&[2.0, 1.0, 0.5])).unwrap();
        let z = verify_einstein(&CurvatureTensor::zero(3).unwrap(), &g, 1e-8).unwrap();
        assert_eq!((z.lambda, z.residual, z.passed), (0.0, 0.0, true));
    }

    #[test]
    fn solve_space_form_from_identity() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let rep = solve_einstein(&t, &id, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(rep.lambda, 2.0);
        assert_eq!(rep.minimizer.upper(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn solve_pullback_closed_form() {
        let id = UpperMetric::identity(3).unwrap();
        let t = pullback_fixture();
        for use_newton in [true, false] {
            let opts = SolveOptions {
                use_newton,
                max_iter: 2000,
                ..SolveOptions::default()
            };
            let rep = solve_einstein(&t, &id, &opts).unwrap();
            assert!(rep.converged, "newton={use_newton}: {:?}", rep.status);
            let expected = diag(&[4f64.powf(-2.0 / 3.0), 4f64.powf(1.0 / 3.0), 4f64.powf(1.0 / 3.0)]);
            let expected = UpperMetric::new(expected).unwrap();
            assert!(spd::geodesic_distance(&rep.minimizer, &expected).unwrap() < 1e-8);
            assert!((rep.lambda - 2.0 * 4f64.powf(2.0 / 3.0)).abs() < 1e-9);
            assert!(rep.einstein_residual <= rep.residual_bound_factor * rep.grad_norm * (1.0 + 1e-9) + 1e-14);
            for w in rep.r_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-13 * w[0].abs());
            }
        }
    }

    #[test]
    fn solve_reports_max_iterations() {
        let id = UpperMetric::identity(3).unwrap();
        let opts = SolveOptions {
            max_iter: 1,
            use_newton: false,
            ..SolveOptions::default()
        };
        let rep = solve_einstein(&pullback_fixture(), &id, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.status, SolveStatus::MaxIterations);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn solve_rejects_bad_options() {
        let id = UpperMetric::identity(3).unwrap();
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let opts = SolveOptions {
            tol_grad: 0.0,
            ..SolveOptions::default()
        };
        assert!(matches!(solve_einstein(&t, &id, &opts), Err(Error::InvalidArgument(_))));
        let id4 = UpperMetric::identity(4).unwrap();
        assert!(solve_einstein(&t, &id4, &SolveOptions::default()).is_err());
    }

    #[test]
    fn solve_non_positive_tensor_does_not_converge() {
        // For κ < 0, R is unbounded below on the slice.
        let t = CurvatureTensor::constant_curvature(3, -1.0).unwrap();
        let start = spd::normalize_det(&diag(&[2.0, 1.0, 1.0])).unwrap();
        let opts = SolveOptions {
            max_iter: 30,
            ..SolveOptions::default()
        };
        match solve_einstein(&t, &start, &opts) {
            Ok(rep) => assert!(!rep.converged),
            Err(Error::NonFinite(_)) | Err(Error::IllConditioned(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
