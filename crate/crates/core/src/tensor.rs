//! Dense (4,0) tensors with the algebraic symmetries of a Riemann tensor.
//!
//! Components are stored row-major in index order `a, b, c, d`. Symmetry is a
//! validated invariant of [`CurvatureTensor`], not a storage property: the raw
//! [`Tensor4`] holds any n⁴ array and is only promoted after checking (or
//! projecting onto) antisymmetry, pair symmetry and the first Bianchi identity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::UpperMetric;

/// Absolute symmetry tolerance applied to externally supplied tensors.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;

/// Planes whose Gram determinant falls below this fraction of `|v|²|q|²` are rejected.
pub const PLANE_DEGENERACY_TOL: f64 = 1e-12;

/// Condition numbers above this make `pullback` refuse the transformation.
const MAX_PULLBACK_CONDITION: f64 = 1e12;

/// A raw dense n×n×n×n array with no symmetry guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n.pow(4)],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n.pow(4) {
            return Err(Error::DimensionMismatch {
                expected: n.pow(4),
                actual: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t.data[Self::offset(n, a, b, c, d)] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    #[inline]
    fn offset(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * n + b) * n + c) * n + d
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[Self::offset(self.n, a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        let n = self.n;
        self.data[Self::offset(n, a, b, c, d)] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn check_dim(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::DimensionTooSmall(self.n));
        }
        Ok(())
    }
}

/// Maximum violation of each symmetry class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub max_antisym_violation: f64,
    pub max_pair_violation: f64,
    pub max_bianchi_violation: f64,
    pub passed: bool,
}

/// Measures how far `raw` is from being of curvature type.
pub fn validate_symmetries(raw: &Tensor4, tol: f64) -> Result<SymmetryReport> {
    raw.check_dim()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("symmetry tolerance must be > 0, got {tol}")));
    }
    let n = raw.n;
    let (mut anti, mut pair, mut bianchi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let r = raw.get(a, b, c, d);
                    anti = anti
                        .max((r + raw.get(b, a, c, d)).abs())
                        .max((r + raw.get(a, b, d, c)).abs());
                    pair = pair.max((r - raw.get(c, d, a, b)).abs());
                    bianchi = bianchi.max((r + raw.get(a, c, d, b) + raw.get(a, d, b, c)).abs());
                }
            }
        }
    }
    Ok(SymmetryReport {
        max_antisym_violation: anti,
        max_pair_violation: pair,
        max_bianchi_violation: bianchi,
        passed: anti <= tol && pair <= tol && bianchi <= tol,
    })
}

/// A pair of linearly independent vectors spanning a 2-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    v: DVector<f64>,
    q: DVector<f64>,
}

impl Plane {
    pub fn new(v: DVector<f64>, q: DVector<f64>) -> Result<Self> {
        if v.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                actual: q.len(),
            });
        }
        let (vv, qq, vq) = (v.dot(&v), q.dot(&q), v.dot(&q));
        let gram = vv * qq - vq * vq;
        let floor = PLANE_DEGENERACY_TOL * vv * qq;
        if !(vv > 0.0 && qq > 0.0) || !(gram > floor) {
            return Err(Error::DegeneratePlane { gram, floor });
        }
        Ok(Self { v, q })
    }

    pub fn from_slices(v: &[f64], q: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v), DVector::from_column_slice(q))
    }

    /// The coordinate plane spanned by `e_i` and `e_j`.
    pub fn coordinate(n: usize, i: usize, j: usize) -> Result<Self> {
        let mut v = DVector::zeros(n);
        let mut q = DVector::zeros(n);
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!("axis out of range for n = {n}")));
        }
        v[i] = 1.0;
        q[j] = 1.0;
        Self::new(v, q)
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }
}

/// A (4,0) tensor satisfying the curvature symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    inner: Tensor4,
}

impl CurvatureTensor {
    /// Validates `raw` at tolerance `tol`; fails with the offending report.
    pub fn from_raw(raw: Tensor4, tol: f64) -> Result<Self> {
        let report = validate_symmetries(&raw, tol)?;
        if !report.passed {
            return Err(Error::SymmetryViolation(report));
        }
        Ok(Self { inner: raw })
    }

    /// Orthogonal projection onto the curvature-type subspace.
    ///
    /// First averages over the order-8 group generated by the two
    /// antisymmetries and the pair swap, then removes the totally
    /// antisymmetric part, which for pair-symmetric tensors is exactly the
    /// Bianchi sum `(R_abcd + R_acdb + R_adbc)/3`.
    pub fn project(raw: &Tensor4) -> Result<Self> {
        raw.check_dim()?;
        let n = raw.n;
        let sym = Tensor4::from_fn(n, |a, b, c, d| {
            (raw.get(a, b, c, d) - raw.get(b, a, c, d) - raw.get(a, b, d, c) + raw.get(b, a, d, c)
                + raw.get(c, d, a, b)
                - raw.get(d, c, a, b)
                - raw.get(c, d, b, a)
                + raw.get(d, c, b, a))
                / 8.0
        });
        let projected = Tensor4::from_fn(n, |a, b, c, d| {
            let cyclic = (sym.get(a, b, c, d) + sym.get(a, c, d, b) + sym.get(a, d, b, c)) / 3.0;
            sym.get(a, b, c, d) - cyclic
        });
        Ok(Self { inner: projected })
    }

    pub fn zero(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Self {
            inner: Tensor4::zeros(n),
        })
    }

    /// The space form `κ(δ_ac δ_bd − δ_ad δ_bc)`.
    pub fn constant_curvature(n: usize, kappa: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let inner = Tensor4::from_fn(n, |a, b, c, d| {
            kappa * (delta(a, c) * delta(b, d) - delta(a, d) * delta(b, c))
        });
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.inner.get(a, b, c, d)
    }

    pub fn as_raw(&self) -> &Tensor4 {
        &self.inner
    }

    pub fn into_raw(self) -> Tensor4 {
        self.inner
    }

    /// Largest absolute component; the natural scale for tolerances.
    pub fn scale(&self) -> f64 {
        self.inner.max_abs()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            inner: Tensor4 {
                n: self.inner.n,
                data: self.inner.data.iter().map(|x| x * factor).collect(),
            },
        }
    }

    /// `self + factor · other`; curvature type is closed under linear combinations.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        self.check_same(other.dim())?;
        let data = self
            .inner
            .data
            .iter()
            .zip(&other.inner.data)
            .map(|(x, y)| x + factor * y)
            .collect();
        Ok(Self {
            inner: Tensor4 { n: self.inner.n, data },
        })
    }

    fn check_same(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: n,
            });
        }
        Ok(())
    }

    /// Covariant change of frame `R'_abcd = A_pa A_qb A_rc A_sd R_pqrs`.
    ///
    /// Composition follows `pullback(pullback(T, A), B) = pullback(T, A·B)`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: a.nrows().max(a.ncols()),
            });
        }
        let sv = a.clone().singular_values();
        let (smax, smin) = sv.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| {
            (hi.max(s), lo.min(s))
        });
        if !(smin > 0.0) || smax / smin > MAX_PULLBACK_CONDITION {
            return Err(Error::Singular);
        }
        // One index slot at a time: O(n⁵) instead of O(n⁸).
        let mut cur = self.inner.clone();
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for i0 in 0..n {
                for i1 in 0..n {
                    for i2 in 0..n {
                        for i3 in 0..n {
                            let idx = [i0, i1, i2, i3];
                            let mut acc = 0.0;
                            for p in 0..n {
                                let mut src = idx;
                                src[slot] = p;
                                acc += a[(p, idx[slot])] * cur.get(src[0], src[1], src[2], src[3]);
                            }
                            next.set(i0, i1, i2, i3, acc);
                        }
                    }
                }
            }
            cur = next;
        }
        Ok(Self { inner: cur })
    }

    /// `M_bd = Σ_ac R_abcd X^ac` for an arbitrary n×n matrix `X`.
    pub fn partial_trace(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        self.check_same(x.nrows())?;
        self.check_same(x.ncols())?;
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for c in 0..n {
                let w = x[(a, c)];
                if w == 0.0 {
                    continue;
                }
                for b in 0..n {
                    for d in 0..n {
                        out[(b, d)] += w * self.get(a, b, c, d);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Q(X, Y) = Σ R_abcd X^ac Y^bd`, symmetric in `X, Y` by pair symmetry.
    pub fn double_contract(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        let m = self.partial_trace(x)?;
        self.check_same(y.nrows())?;
        Ok(crate::linalg::contract(&m, y))
    }

    /// Ricci tensor `Ric_bd = R_abcd g^ac`.
    pub fn ricci(&self, g: &UpperMetric) -> Result<DMatrix<f64>> {
        let ric = self.partial_trace(g.upper())?;
        Ok(crate::linalg::symmetrize(&ric))
    }

    /// Scalar curvature `R_abcd g^ac g^bd`.
    pub fn scalar_curvature(&self, g: &UpperMetric) -> Result<f64> {
        self.scalar_curvature_of(g.upper())
    }

    /// Scalar curvature for any contravariant matrix, det-1 or not.
    pub fn scalar_curvature_of(&self, g_upper: &DMatrix<f64>) -> Result<f64> {
        self.double_contract(g_upper, g_upper)
    }

    /// `Ric − (R/n)·g_lower`.
    pub fn traceless_ricci(&self, g: &UpperMetric) -> Result<DMatrix<f64>> {
        let ric = self.ricci(g)?;
        let r = crate::linalg::contract(&ric, g.upper());
        Ok(ric - g.lower() * (r / self.dim() as f64))
    }

    /// The metric-free quantity `R_abcd v^a q^b v^c q^d`.
    pub fn sectional_numerator(&self, plane: &Plane) -> Result<f64> {
        self.check_same(plane.dim())?;
        Ok(self.quartic(plane.v(), plane.q()))
    }

    pub(crate) fn quartic(&self, v: &DVector<f64>, q: &DVector<f64>) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let w = v[a] * q[b];
                if w == 0.0 {
                    continue;
                }
                for c in 0..n {
                    for d in 0..n {
                        acc += w * v[c] * q[d] * self.get(a, b, c, d);
                    }
                }
            }
        }
        acc
    }

    /// `u_a = Σ R_abcd q^b v^c q^d`, half the gradient of the numerator in `v`.
    pub(crate) fn numerator_grad_v(&self, v: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n, |a, _| {
            let mut acc = 0.0;
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        acc += self.get(a, b, c, d) * q[b] * v[c] * q[d];
                    }
                }
            }
            acc
        })
    }

    /// Sectional curvature of `plane` under the metric `g`.
    pub fn sectional_curvature(&self, g: &UpperMetric, plane: &Plane) -> Result<f64> {
        let num = self.sectional_numerator(plane)?;
        let lower = g.lower();
        let (v, q) = (plane.v(), plane.q());
        let vv = (lower * v).dot(v);
        let qq = (lower * q).dot(q);
        let vq = (lower * v).dot(q);
        let gram = vv * qq - vq * vq;
        let floor = PLANE_DEGENERACY_TOL * vv * qq;
        if !(gram > floor) {
            return Err(Error::DegeneratePlane { gram, floor });
        }
        Ok(num / gram)
    }
}
