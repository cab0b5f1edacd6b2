//! Oracles shared by the integration tests. None of them call into the
//! library's contraction or projection code.
#![allow(dead_code)]

use einstein_core::oracle::{self, FixtureKind, FixtureSpec};
use einstein_core::{CurvatureTensor, Tensor4};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

pub fn gaussian_tensor(n: usize, seed: u64) -> Tensor4 {
    let mut r = rng(seed);
    Tensor4::from_fn(n, |_, _, _, _| StandardNormal.sample(&mut r))
}

pub fn idx(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

/// Orthogonal projector onto the joint kernel of the pair antisymmetries,
/// pair interchange and the first Bianchi identity, built from an SVD of the
/// stacked constraint rows. Returns the projector and its rank.
pub fn constraint_projector(n: usize) -> (DMatrix<f64>, usize) {
    let dim = n.pow(4);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let i = idx(n, a, b, c, d);
                    rows.push(vec![(i, 1.0), (idx(n, b, a, c, d), 1.0)]);
                    rows.push(vec![(i, 1.0), (idx(n, a, b, d, c), 1.0)]);
                    rows.push(vec![(i, 1.0), (idx(n, c, d, a, b), -1.0)]);
                    rows.push(vec![(i, 1.0), (idx(n, a, c, d, b), 1.0), (idx(n, a, d, b, c), 1.0)]);
                }
            }
        }
    }
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for row in &rows {
        for &(i, x) in row {
            for &(j, y) in row {
                gram[(i, j)] += x * y;
            }
        }
    }
    let eig = gram.symmetric_eigen();
    let mut p = DMatrix::zeros(dim, dim);
    let mut rank = 0;
    for k in 0..dim {
        if eig.eigenvalues[k].abs() < 1e-9 {
            let v = eig.eigenvectors.column(k);
            p += v * v.transpose();
            rank += 1;
        }
    }
    (p, rank)
}

const PERMS: [[usize; 4]; 24] = {
    let mut out = [[0; 4]; 24];
    let mut k = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                if a != b && b != c && a != c {
                    let d = 6 - a - b - c;
                    out[k] = [a, b, c, d];
                    k += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

fn perm_sign(p: &[usize; 4]) -> f64 {
    let mut inv = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1.0 } else { -1.0 }
}

/// Total antisymmetrization over all 24 index permutations.
pub fn alternate(t: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let ix = [a, b, c, d];
                    let mut s = 0.0;
                    for p in &PERMS {
                        s += perm_sign(p) * t[idx(n, ix[p[0]], ix[p[1]], ix[p[2]], ix[p[3]])];
                    }
                    out[idx(n, a, b, c, d)] = s / 24.0;
                }
            }
        }
    }
    out
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    if i == j || j == k || i == k {
        0.0
    } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
        1.0
    } else {
        -1.0
    }
}

/// For n = 3 the numerator on an orthonormal frame is `uᵀMu` with `u = v×q`
/// and `M_ij = ¼ Σ R_abcd ε_abi ε_cdj`.
pub fn bivector_matrix(t: &CurvatureTensor) -> DMatrix<f64> {
    assert_eq!(t.dim(), 3);
    DMatrix::from_fn(3, 3, |i, j| {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        s += t.get(a, b, c, d) * levi_civita(a, b, i) * levi_civita(c, d, j);
                    }
                }
            }
        }
        s / 4.0
    })
}

/// Minimum of the numerator over an angular grid of ~`points` unit normals
/// covering the upper hemisphere.
pub fn grid_min_sectional(t: &CurvatureTensor, points: usize) -> f64 {
    let m = bivector_matrix(t);
    let side = (points as f64).sqrt().ceil() as usize;
    let mut best = f64::INFINITY;
    for i in 0..=side {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / side as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..side {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / side as f64;
            let u = DVector::from_vec(vec![st * phi.cos(), st * phi.sin(), ct]);
            best = best.min((u.transpose() * &m * &u)[(0, 0)]);
        }
    }
    best
}

/// Exact minimum for n = 3: the smallest eigenvalue of the bivector matrix.
pub fn exact_min_sectional(t: &CurvatureTensor) -> f64 {
    bivector_matrix(t).symmetric_eigen().eigenvalues.min()
}

/// `R_abcd g^ac g^bd` by direct summation.
pub fn scalar_by_loops(t: &CurvatureTensor, g: &DMatrix<f64>) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    s += t.get(a, b, c, d) * g[(a, c)] * g[(b, d)];
                }
            }
        }
    }
    s
}

/// RK4 integration of `m'' = m'·m⁻¹·m'` from `(m, m')` up to time `t`.
pub fn rk4_geodesic(m0: &DMatrix<f64>, v0: &DMatrix<f64>, t: f64, steps: usize) -> DMatrix<f64> {
    let h = t / steps as f64;
    let acc = |m: &DMatrix<f64>, v: &DMatrix<f64>| {
        let inv = m.clone().try_inverse().expect("invertible");
        v * inv * v
    };
    let (mut m, mut v) = (m0.clone(), v0.clone());
    for _ in 0..steps {
        let k1m = v.clone();
        let k1v = acc(&m, &v);
        let k2m = &v + &k1v * (h / 2.0);
        let k2v = acc(&(&m + &k1m * (h / 2.0)), &k2m);
        let k3m = &v + &k2v * (h / 2.0);
        let k3v = acc(&(&m + &k2m * (h / 2.0)), &k3m);
        let k4m = &v + &k3v * h;
        let k4v = acc(&(&m + &k3m * h), &k4m);
        m += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }
    m
}

/// A strictly positive fixture of one of the three kinds, chosen by `seed`.
pub fn positive_fixture(n: usize, seed: u64) -> CurvatureTensor {
    let kind = match seed % 3 {
        0 => FixtureKind::Constant { kappa: 0.5 + (seed % 7) as f64 * 0.25 },
        1 => FixtureKind::Pullback { kappa: 1.0 },
        _ => FixtureKind::Perturbed { kappa: 1.0, eps: 0.2 },
    };
    oracle::generate_fixture(&FixtureSpec { n, kind, seed }).expect("fixture")
}

/// Random det-1 SPD matrix with eigenvalues `exp(x)`, `x` traceless Gaussian of width `spread`.
pub fn random_det1(n: usize, spread: f64, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let mut x: Vec<f64> = (0..n).map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            spread * z
        }).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let z: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut r));
    let q = z.qr().q();
    let lam: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let m = &q * diag(&lam) * q.transpose();
    let m = (&m + m.transpose()) * 0.5;
    (m, lam)
}
