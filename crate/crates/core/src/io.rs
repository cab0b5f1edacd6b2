//! Serializable file schemas for tensors and metrics.
//!
//! Tensor files carry `n`, a `format` tag and `components`: either the dense
//! row-major list of n⁴ values in index order `a, b, c, d`, or a sparse list of
//! `[a, b, c, d, value]` entries with 0-based indices. Sparse entries are
//! literal; entries implied by symmetry must be listed unless `symmetrize` is
//! set, in which case the input is projected onto the curvature subspace.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spd::{self, UpperMetric};
use crate::tensor::{CurvatureTensor, Tensor4, DEFAULT_SYMMETRY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry(pub usize, pub usize, pub usize, pub usize, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", content = "components", rename_all = "lowercase")]
pub enum Components {
    Dense(Vec<f64>),
    Sparse(Vec<SparseEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub n: usize,
    #[serde(flatten)]
    pub components: Components,
    #[serde(default)]
    pub symmetrize: bool,
}

impl TensorFile {
    /// Dense file holding exactly the components of `t`.
    pub fn dense(t: &CurvatureTensor) -> Self {
        Self {
            n: t.dim(),
            components: Components::Dense(t.as_raw().as_slice().to_vec()),
            symmetrize: false,
        }
    }

    /// The raw array described by the file, before any symmetry handling.
    pub fn to_raw(&self) -> Result<Tensor4> {
        let n = self.n;
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        match &self.components {
            Components::Dense(values) => {
                if values.len() != n.pow(4) {
                    return Err(Error::InvalidArgument(format!(
                        "dense components must have length n^4 = {}, got {}",
                        n.pow(4),
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("tensor components"));
                }
                Tensor4::from_vec(n, values.clone())
            }
            Components::Sparse(entries) => {
                let mut raw = Tensor4::zeros(n);
                let mut seen = std::collections::HashSet::new();
                for &SparseEntry(a, b, c, d, value) in entries {
                    if a >= n || b >= n || c >= n || d >= n {
                        return Err(Error::InvalidArgument(format!(
                            "sparse index [{a},{b},{c},{d}] out of range for n = {n}"
                        )));
                    }
                    if !value.is_finite() {
                        return Err(Error::NonFinite("tensor components"));
                    }
                    if !seen.insert((a, b, c, d)) {
                        return Err(Error::InvalidArgument(format!(
                            "duplicate sparse entry [{a},{b},{c},{d}]"
                        )));
                    }
                    raw.set(a, b, c, d, value);
                }
                Ok(raw)
            }
        }
    }

    /// Loads the tensor, projecting when `symmetrize` is set (by the file or
    /// the caller) and otherwise validating at [`DEFAULT_SYMMETRY_TOL`].
    pub fn load(&self, force_symmetrize: bool) -> Result<CurvatureTensor> {
        let raw = self.to_raw()?;
        if self.symmetrize || force_symmetrize {
            CurvatureTensor::project(&raw)
        } else {
            CurvatureTensor::from_raw(raw, DEFAULT_SYMMETRY_TOL)
        }
    }
}

/// Symmetry tolerance for metric files.
pub const METRIC_FILE_SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub n: usize,
    pub g_upper: Vec<Vec<f64>>,
}

/// A metric read from file, rescaled to unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMetric {
    pub metric: UpperMetric,
    /// Factor applied to the stored matrix.
    pub applied_scale: f64,
}

impl MetricFile {
    pub fn from_metric(g: &UpperMetric) -> Self {
        Self::from_matrix(g.upper())
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            n: m.nrows(),
            g_upper: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        }
    }

    pub fn load(&self) -> Result<LoadedMetric> {
        let n = self.n;
        if self.g_upper.len() != n || self.g_upper.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!("g_upper must be a {n}x{n} matrix")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.g_upper[i][j]);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric components"));
        }
        let asym = crate::linalg::max_asymmetry(&m);
        if asym > METRIC_FILE_SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let (metric, applied_scale) = spd::normalize_det_with_scale(&m)?;
        Ok(LoadedMetric { metric, applied_scale })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip() {
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        let file = TensorFile::dense(&t);
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"format\":\"dense\""));
        let back: TensorFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.load(false).unwrap(), t);
    }

    #[test]
    fn sparse_space_form() {
        let json = r#"{"n":3,"format":"sparse","components":[
            [0,1,0,1,1.0],[1,0,1,0,1.0],[0,1,1,0,-1.0],[1,0,0,1,-1.0]]}"#;
        let file: TensorFile = serde_json::from_str(json).unwrap();
        let t = file.load(false).unwrap();
        assert_eq!(t.get(0, 1, 0, 1), 1.0);
        assert!(!file.symmetrize);
    }

    #[test]
    fn sparse_missing_mirrors_rejected() {
        let json = r#"{"n":3,"format":"sparse","components":[[0,1,0,1,1.0]]}"#;
        let file: TensorFile = serde_json::from_str(json).unwrap();
        assert!(matches!(file.load(false), Err(Error::SymmetryViolation(_))));
        let t = file.load(true).unwrap();
        assert_eq!(t.get(0, 1, 0, 1), 0.25);
    }

    #[test]
    fn malformed_tensor_files() {
        let bad_len = TensorFile {
            n: 3,
            components: Components::Dense(vec![0.0; 10]),
            symmetrize: false,
        };
        assert!(bad_len.load(false).is_err());
        let bad_idx = TensorFile {
            n: 3,
            components: Components::Sparse(vec![SparseEntry(0, 3, 0, 1, 1.0)]),
            symmetrize: true,
        };
        assert!(bad_idx.load(false).is_err());
        let dup = TensorFile {
            n: 3,
            components: Components::Sparse(vec![SparseEntry(0, 1, 0, 1, 1.0), SparseEntry(0, 1, 0, 1, 2.0)]),
            symmetrize: true,
        };
        assert!(dup.load(false).is_err());
        let small = TensorFile {
            n: 2,
            components: Components::Dense(vec![0.0; 16]),
            symmetrize: false,
        };
        assert!(matches!(small.load(false), Err(Error::DimensionTooSmall(2))));
    }

    #[test]
    fn metric_file_normalizes() {
        let file: MetricFile = serde_json::from_str(r#"{"n":3,"g_upper":[[4,0,0],[0,1,0],[0,0,1]]}"#).unwrap();
        let loaded = file.load().unwrap();
        assert!((loaded.applied_scale - 4f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((loaded.metric.upper().determinant() - 1.0).abs() < 1e-12);
        let asym: MetricFile = serde_json::from_str(r#"{"n":3,"g_upper":[[1,0.1,0],[0,1,0],[0,0,1]]}"#).unwrap();
        assert!(matches!(asym.load(), Err(Error::NotSymmetric(_))));
        let indef: MetricFile = serde_json::from_str(r#"{"n":3,"g_upper":[[1,0,0],[0,-1,0],[0,0,1]]}"#).unwrap();
        assert!(matches!(indef.load(), Err(Error::NotPositiveDefinite(_))));
        let ragged: MetricFile = serde_json::from_str(r#"{"n":3,"g_upper":[[1,0],[0,1,0],[0,0,1]]}"#).unwrap();
        assert!(ragged.load().is_err());
    }
}
