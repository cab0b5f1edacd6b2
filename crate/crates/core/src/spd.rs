//! Geometry of the slice of contravariant metrics with unit determinant.
//!
//! Points are SPD matrices `G = g^ab` with `det G = 1`; tangent vectors are
//! symmetric `D = d^ab` with `tr(G⁻¹D) = 0`. The inner product is the
//! affine-invariant one, `⟨D1, D2⟩_G = tr(G⁻¹ D1 G⁻¹ D2)`, whose geodesics are
//! `G·exp(t·G⁻¹D)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Symmetry tolerance for metric matrices.
pub const METRIC_SYMMETRY_TOL: f64 = 1e-12;
/// Allowed deviation of `det G` from 1.
pub const METRIC_DET_TOL: f64 = 1e-10;
/// Allowed g-trace of a tangent vector, relative to `max(1, ‖G⁻¹D‖)`.
pub const TANGENT_TRACE_TOL: f64 = 1e-10;
/// Base points of tangent vectors must agree to this absolute tolerance.
pub const BASE_MATCH_TOL: f64 = 1e-12;

/// A contravariant metric `g^ab`, symmetric positive definite with unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperMetric {
    upper: DMatrix<f64>,
    lower: DMatrix<f64>,
}

impl UpperMetric {
    pub fn new(upper: DMatrix<f64>) -> Result<Self> {
        let n = upper.nrows();
        if upper.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: upper.ncols(),
            });
        }
        if upper.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("metric"));
        }
        let asym = linalg::max_asymmetry(&upper);
        if asym > METRIC_SYMMETRY_TOL * upper.abs().max().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let upper = linalg::symmetrize(&upper);
        let lower = linalg::spd_inverse(&upper)?;
        let det = upper.determinant();
        if (det - 1.0).abs() > METRIC_DET_TOL {
            return Err(Error::DeterminantNotOne(det));
        }
        Ok(Self { upper, lower })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Self {
            upper: DMatrix::identity(n, n),
            lower: DMatrix::identity(n, n),
        })
    }

    pub fn dim(&self) -> usize {
        self.upper.nrows()
    }

    /// The stored matrix `g^ab`.
    pub fn upper(&self) -> &DMatrix<f64> {
        &self.upper
    }

    /// The inverse matrix `g_ab`.
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn into_upper(self) -> DMatrix<f64> {
        self.upper
    }

    /// Descending eigenvalues of `g^ab`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues(&self.upper).iter().copied().collect()
    }

    fn same_point(&self, other: &DMatrix<f64>) -> bool {
        other.nrows() == self.dim() && (other - &self.upper).abs().max() <= BASE_MATCH_TOL
    }
}

/// Rescales an SPD matrix to unit determinant: `S·det(S)^{-1/n}`.
pub fn normalize_det(s: &DMatrix<f64>) -> Result<UpperMetric> {
    Ok(normalize_det_with_scale(s)?.0)
}

/// Like [`normalize_det`], also returning the applied factor.
pub fn normalize_det_with_scale(s: &DMatrix<f64>) -> Result<(UpperMetric, f64)> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.ncols(),
        });
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("metric"));
    }
    let s = linalg::symmetrize(s);
    let values = linalg::sym_eigenvalues(&s);
    let smallest = values[n - 1];
    if !(smallest > 0.0) {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    // log-sum of the spectrum avoids under/overflow of det for wide spectra.
    let log_det: f64 = values.iter().map(|v| v.ln()).sum();
    let scale = (-log_det / n as f64).exp();
    let scaled = &s * scale;
    let lower = linalg::spd_inverse(&scaled)?;
    Ok((
        UpperMetric {
            upper: scaled,
            lower,
        },
        scale,
    ))
}

/// A symmetric `d^ab` with `g_ab d^ab = 0`, attached to its base metric.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPerturbation {
    d: DMatrix<f64>,
    base: DMatrix<f64>,
}

impl TangentPerturbation {
    pub fn new(base: &UpperMetric, d: DMatrix<f64>) -> Result<Self> {
        let n = base.dim();
        if d.nrows() != n || d.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: d.nrows(),
            });
        }
        let asym = linalg::max_asymmetry(&d);
        if asym > METRIC_SYMMETRY_TOL * d.abs().max().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let mixed = base.lower() * &d;
        let tr = mixed.trace();
        if tr.abs() > TANGENT_TRACE_TOL * linalg::frobenius(&mixed).max(1.0) {
            return Err(Error::NotTangent(tr));
        }
        Ok(Self {
            d: linalg::symmetrize(&d),
            base: base.upper().clone(),
        })
    }

    pub fn zero(base: &UpperMetric) -> Self {
        let n = base.dim();
        Self {
            d: DMatrix::zeros(n, n),
            base: base.upper().clone(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.d
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            d: &self.d * factor,
            base: self.base.clone(),
        }
    }

    pub(crate) fn check_base(&self, g: &UpperMetric) -> Result<()> {
        if !g.same_point(&self.base) {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    /// Builds a tangent vector from a matrix already known to be tangent.
    pub(crate) fn from_parts(base: &UpperMetric, d: DMatrix<f64>) -> Self {
        Self {
            d: linalg::symmetrize(&d),
            base: base.upper().clone(),
        }
    }
}

/// `⟨D1, D2⟩_G = tr(G⁻¹ D1 G⁻¹ D2)`.
pub fn inner_product(
    g: &UpperMetric,
    d1: &TangentPerturbation,
    d2: &TangentPerturbation,
) -> Result<f64> {
    d1.check_base(g)?;
    d2.check_base(g)?;
    let a = g.lower() * d1.matrix();
    let b = g.lower() * d2.matrix();
    // tr(AB) without forming the product.
    Ok(linalg::contract(&a, &b.transpose()))
}

pub fn norm(g: &UpperMetric, d: &TangentPerturbation) -> Result<f64> {
    Ok(inner_product(g, d, d)?.max(0.0).sqrt())
}

/// Orthogonal projection of a symmetric matrix onto the tangent space at `g`:
/// `S − (tr(G⁻¹S)/n)·G`.
pub fn project_tangent(g: &UpperMetric, s: &DMatrix<f64>) -> Result<TangentPerturbation> {
    let n = g.dim();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.nrows(),
        });
    }
    let asym = linalg::max_asymmetry(s);
    if asym > METRIC_SYMMETRY_TOL * s.abs().max().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let tr = (g.lower() * s).trace();
    let d = s - g.upper() * (tr / n as f64);
    Ok(TangentPerturbation::from_parts(g, d))
}

/// Geodesic `G^{1/2} exp(t·G^{-1/2} D G^{-1/2}) G^{1/2}`, without the
/// determinant clean-up applied by [`geodesic`].
pub fn geodesic_raw(g: &UpperMetric, d: &TangentPerturbation, t: f64) -> Result<DMatrix<f64>> {
    d.check_base(g)?;
    let (sqrt, inv_sqrt) = linalg::spd_sqrt_pair(g.upper())?;
    let generator = linalg::symmetrize(&(&inv_sqrt * d.matrix() * &inv_sqrt)) * t;
    let m = &sqrt * linalg::sym_exp(&generator) * &sqrt;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("geodesic"));
    }
    Ok(linalg::symmetrize(&m))
}

/// Point at parameter `t` on the geodesic through `g` with velocity `d`.
pub fn geodesic(g: &UpperMetric, d: &TangentPerturbation, t: f64) -> Result<UpperMetric> {
    normalize_det(&geodesic_raw(g, d, t)?)
}

/// Affine-invariant distance `‖log(G1^{-1/2} G2 G1^{-1/2})‖_F`.
pub fn geodesic_distance(g1: &UpperMetric, g2: &UpperMetric) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            actual: g2.dim(),
        });
    }
    let (_, inv_sqrt) = linalg::spd_sqrt_pair(g1.upper())?;
    let inner = linalg::symmetrize(&(&inv_sqrt * g2.upper() * &inv_sqrt));
    let logs = linalg::sym_eigenvalues(&inner);
    Ok(logs.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// The tangent vector at `g1` whose unit-time geodesic reaches `g2`.
pub fn log_map(g1: &UpperMetric, g2: &UpperMetric) -> Result<TangentPerturbation> {
    let (sqrt, inv_sqrt) = linalg::spd_sqrt_pair(g1.upper())?;
    let inner = linalg::symmetrize(&(&inv_sqrt * g2.upper() * &inv_sqrt));
    let d = &sqrt * linalg::spd_log(&inner)? * &sqrt;
    Ok(TangentPerturbation::from_parts(g1, d))
}

/// Orthonormal basis of the tangent space at `g`: `G^{1/2} E_k G^{1/2}` for the
/// Frobenius-orthonormal traceless basis `E_k`.
pub fn tangent_basis(g: &UpperMetric) -> Result<Vec<TangentPerturbation>> {
    let (sqrt, _) = linalg::spd_sqrt_pair(g.upper())?;
    Ok(linalg::traceless_symmetric_basis(g.dim())
        .into_iter()
        .map(|e| TangentPerturbation::from_parts(g, &sqrt * e * &sqrt))
        .collect())
}
