//! Laplacians, dense symmetric eigendecomposition and the spectral view of
//! diffusion: eigenvalue maps, filter responses and polynomial filters.
//!
//! Random-walk matrices are not symmetric. Their spectrum is read off the
//! similar matrix `D^-1/2 T_rw D^1/2 = T_sym` instead.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::coefficients::{DiffusionSpec, Family, PolyFilter};
use crate::csc::LinearOperator;
use crate::graph::{transition_matrix, SparseGraph, TransitionKind, TransitionMatrix};
use crate::{Error, Result};

/// Default size cap for [`eigen`].
pub const EIGEN_CAP: usize = 3000;

/// Largest `|M_ij - M_ji|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `D - A`
    Unnormalized,
    /// `I - A D^-1`
    RandomWalk,
    /// `I - D^-1/2 A D^-1/2`
    Symmetric,
}

impl fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaplacianKind::Unnormalized => "L_un",
            LaplacianKind::RandomWalk => "L_rw",
            LaplacianKind::Symmetric => "L_sym",
        })
    }
}

/// Dense Laplacian of `g`.
pub fn laplacian(g: &SparseGraph, kind: LaplacianKind) -> Result<DMatrix<f64>> {
    let n = g.n();
    match kind {
        LaplacianKind::Unnormalized => {
            let mut l = -g.adjacency().to_dense();
            for (i, d) in g.degrees().into_iter().enumerate() {
                l[(i, i)] += d;
            }
            Ok(l)
        }
        LaplacianKind::RandomWalk | LaplacianKind::Symmetric => {
            let tk = if kind == LaplacianKind::RandomWalk {
                TransitionKind::RandomWalk
            } else {
                TransitionKind::Symmetric
            };
            let t = transition_matrix(g, tk)?;
            Ok(DMatrix::identity(n, n) - t.matrix().to_dense())
        }
    }
}

/// Dense symmetric matrix with the spectrum of `t`.
///
/// Symmetric kinds are returned as is. A random walk on an undirected graph
/// is mapped through `D^-1/2 T D^1/2`; on a directed graph there is no such
/// form and [`Error::NotSymmetric`] is returned.
pub fn symmetric_form(t: &TransitionMatrix) -> Result<DMatrix<f64>> {
    let m = t.matrix();
    if t.is_symmetric() {
        return Ok(m.to_dense());
    }
    if t.kind() != TransitionKind::RandomWalk || !t.is_reversible() {
        return Err(Error::NotSymmetric(m.max_asymmetry()));
    }
    let s: Vec<f64> = t.degrees().iter().map(|d| d.sqrt()).collect();
    let mut d = DMatrix::zeros(t.n(), t.n());
    for (i, j, v) in m.iter() {
        d[(i, j)] = v * s[j] / s[i];
    }
    Ok((&d + d.transpose()) * 0.5)
}

/// Spectrum of the Laplacian `I - T` via [`symmetric_form`].
pub fn transition_laplacian_spectrum(t: &TransitionMatrix, want_vectors: bool) -> Result<SpectrumReport> {
    let n = t.n();
    let l = DMatrix::identity(n, n) - symmetric_form(t)?;
    let mut r = eigen(&l, want_vectors)?;
    r.source = format!("I - T ({})", t.kind());
    Ok(r)
}

/// Spectrum of a graph Laplacian. `L_rw` is analysed through `L_sym`, which
/// has the same eigenvalues; eigenvectors are those of `L_sym`.
pub fn laplacian_spectrum(g: &SparseGraph, kind: LaplacianKind, want_vectors: bool) -> Result<SpectrumReport> {
    let solve_kind = match kind {
        LaplacianKind::RandomWalk => LaplacianKind::Symmetric,
        k => k,
    };
    let mut r = eigen(&laplacian(g, solve_kind)?, want_vectors)?;
    r.source = kind.to_string();
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub source: String,
}

impl SpectrumReport {
    pub fn from_values(mut eigenvalues: Vec<f64>, source: impl Into<String>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self {
            eigenvalues,
            eigenvectors: None,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigendecomposition of a symmetric matrix with at most [`EIGEN_CAP`] rows.
pub fn eigen(m: &DMatrix<f64>, want_vectors: bool) -> Result<SpectrumReport> {
    eigen_with_cap(m, want_vectors, EIGEN_CAP)
}

pub fn eigen_with_cap(m: &DMatrix<f64>, want_vectors: bool, cap: usize) -> Result<SpectrumReport> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    if !want_vectors {
        let values = sym.symmetric_eigenvalues().iter().copied().collect();
        return Ok(SpectrumReport::from_values(values, "matrix"));
    }
    let e = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    Ok(SpectrumReport {
        eigenvalues,
        eigenvectors: Some(vectors),
        source: "matrix".into(),
    })
}

/// Eigenvalue of `S` corresponding to an eigenvalue `lambda_t` of `T`.
///
/// PPR and heat use their closed forms, explicit coefficients the power sum
/// `sum_k theta_k lambda^k`.
pub fn eigenvalue_map(spec: &DiffusionSpec, lambda_t: f64) -> f64 {
    match &spec.family {
        Family::Ppr { alpha } => alpha / (1.0 - (1.0 - alpha) * lambda_t),
        Family::Heat { t } => (t * (lambda_t - 1.0)).exp(),
        Family::Explicit { theta } => theta.iter().rev().fold(0.0, |acc, th| acc * lambda_t + th),
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rows `(lambda_L, response)` with `response = eigenvalue_map(spec, 1 - lambda_L)`.
pub fn filter_response_curve(spec: &DiffusionSpec, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(bad) = grid.iter().find(|l| !(0.0..=2.0).contains(*l)) {
        return Err(Error::InvalidParameter(format!(
            "Laplacian eigenvalue {bad} outside [0, 2]"
        )));
    }
    Ok(grid.iter().map(|&l| (l, eigenvalue_map(spec, 1.0 - l))).collect())
}

/// `sum_j xi_j L^j x` by Horner's rule.
pub fn apply_poly_filter(xi: &PolyFilter, l: &dyn LinearOperator, x: &[f64]) -> Result<Vec<f64>> {
    let n = l.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut y: Vec<f64> = x.iter().map(|v| v * xi.xi[xi.order()]).collect();
    let mut tmp = vec![0.0; n];
    for &c in xi.xi.iter().rev().skip(1) {
        l.apply(&y, &mut tmp);
        for ((yi, ti), xi) in y.iter_mut().zip(&tmp).zip(x) {
            *yi = ti + c * xi;
        }
    }
    Ok(y)
}

/// Euclidean norms of the partial sums `sum_{j<=J} xi_j L^j x` for
/// `J = 0..=order`. Useful for watching a filter series diverge.
pub fn partial_sum_norms(xi: &PolyFilter, l: &dyn LinearOperator, x: &[f64]) -> Result<Vec<f64>> {
    let n = l.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut power = x.to_vec();
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut norms = Vec::with_capacity(xi.xi.len());
    for (j, &c) in xi.xi.iter().enumerate() {
        if j > 0 {
            l.apply(&power, &mut next);
            std::mem::swap(&mut power, &mut next);
        }
        for (a, p) in acc.iter_mut().zip(&power) {
            *a += c * p;
        }
        norms.push(acc.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok(norms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    /// `after_(i) - before_(i)` in ascending order.
    pub deltas: Vec<f64>,
    /// `sqrt(sum delta^2)`
    pub l2: f64,
    pub max_abs: f64,
}

/// Pair eigenvalues by sorted position and report the differences.
pub fn spectrum_compare(before: &SpectrumReport, after: &SpectrumReport) -> Result<SpectrumComparison> {
    if before.len() != after.len() {
        return Err(Error::DimensionMismatch {
            expected: before.len(),
            got: after.len(),
        });
    }
    let mut b = before.eigenvalues.clone();
    let mut a = after.eigenvalues.clone();
    b.sort_by(f64::total_cmp);
    a.sort_by(f64::total_cmp);
    let deltas: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let l2 = deltas.iter().map(|d| d * d).sum::<f64>().sqrt();
    let max_abs = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(SpectrumComparison { deltas, l2, max_abs })
}
