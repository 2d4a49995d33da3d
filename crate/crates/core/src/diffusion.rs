//! Computing the diffusion matrix `S = sum_k theta_k T^k`.
//!
//! Three routes are provided:
//!
//! * [`diffuse_exact_ppr`] solves `(I - (1 - alpha) T) s_i = alpha e_i` per
//!   column with conjugate gradients (symmetric or reversible `T`) or a
//!   stationary iteration (anything else);
//! * [`diffuse_series`] accumulates the truncated series with Horner's rule,
//!   one column at a time, without forming powers of `T`;
//! * [`push_ppr`] and [`push_heat`] approximate a single column locally,
//!   touching only nodes that receive enough residual mass.
//!
//! Columns are independent and computed in parallel; the result does not
//! depend on scheduling.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coefficients::{DiffusionSpec, Family};
use crate::csc::{CscMatrix, LinearOperator};
use crate::graph::{TransitionKind, TransitionMatrix};
use crate::{Error, Result};

/// Per-column residual bound (infinity norm) the exact solver must reach.
pub const EXACT_RESIDUAL_TOL: f64 = 1e-10;

/// Tail mass used when a series is requested without an explicit order, and
/// for heat-kernel "exact" evaluation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Largest matrix handled by the dense verification solver.
pub const DENSE_VERIFY_CAP: usize = 500;

/// How a [`DiffusionMatrix`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exactness {
    Exact,
    Series(usize),
    Push(f64),
}

/// One column of a diffusion matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Dense(Vec<f64>),
    /// `(row, value)` pairs sorted by row.
    Sparse(Vec<(usize, f64)>),
}

impl Column {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            Column::Dense(v) => v[i],
            Column::Sparse(e) => e
                .binary_search_by_key(&i, |&(r, _)| r)
                .map(|p| e[p].1)
                .unwrap_or(0.0),
        }
    }

    /// Nonzero entries in ascending row order.
    pub fn nonzeros(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            Column::Dense(v) => Box::new(v.iter().copied().enumerate().filter(|&(_, x)| x != 0.0)),
            Column::Sparse(e) => Box::new(e.iter().copied()),
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        match self {
            Column::Dense(v) => v.clone(),
            Column::Sparse(e) => {
                let mut v = vec![0.0; n];
                for &(i, x) in e {
                    v[i] = x;
                }
                v
            }
        }
    }

    pub fn sum(&self) -> f64 {
        self.nonzeros().map(|(_, v)| v).sum()
    }
}

/// The diffusion matrix `S`, stored column by column.
#[derive(Debug, Clone)]
pub struct DiffusionMatrix {
    n: usize,
    columns: Vec<Column>,
    pub spec: DiffusionSpec,
    pub kind: TransitionKind,
    pub exactness: Exactness,
}

impl DiffusionMatrix {
    pub fn new(
        columns: Vec<Column>,
        spec: DiffusionSpec,
        kind: TransitionKind,
        exactness: Exactness,
    ) -> Self {
        Self {
            n: columns.len(),
            columns,
            spec,
            kind,
            exactness,
        }
    }

    /// Wrap a dense matrix, e.g. for tests and external results.
    pub fn from_dense(m: &DMatrix<f64>, spec: DiffusionSpec, kind: TransitionKind, exactness: Exactness) -> Self {
        let columns = (0..m.ncols())
            .map(|j| Column::Dense(m.column(j).iter().copied().collect()))
            .collect();
        Self::new(columns, spec, kind, exactness)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j].get(i)
    }

    /// `(row, col, value)` for every nonzero entry, column by column.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.nonzeros().map(move |(i, v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.nonzeros().count()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.columns.iter().map(Column::sum).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.nonzeros() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn to_csc(&self) -> CscMatrix {
        let cols = self.columns.iter().map(|c| c.nonzeros().collect()).collect();
        CscMatrix::from_columns(self.n, cols)
    }

    /// Largest absolute entrywise difference to another matrix.
    pub fn max_abs_diff(&self, other: &DiffusionMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        (0..self.n)
            .map(|j| {
                let (a, b) = (self.columns[j].to_dense(self.n), other.columns[j].to_dense(self.n));
                a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Computation route for [`diffuse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionMode {
    /// Linear solve for PPR; for the heat kernel and explicit lists, the
    /// series truncated at [`DEFAULT_TAIL_TOL`] (or the full list).
    Exact,
    /// Truncated series with `k` terms, or the order implied by the spec
    /// (falling back to a [`DEFAULT_TAIL_TOL`] tail) when `None`.
    Series { k: Option<usize> },
    /// Local push approximation; requires a random-walk transition matrix.
    Push { eps: f64 },
}

/// Compute the diffusion matrix of `t` for `spec` using `mode`.
pub fn diffuse(t: &TransitionMatrix, spec: &DiffusionSpec, mode: DiffusionMode) -> Result<DiffusionMatrix> {
    spec.validate()?;
    if spec.is_identity() {
        return Ok(identity(t, spec));
    }
    match (mode, &spec.family) {
        (DiffusionMode::Exact, Family::Ppr { alpha }) => diffuse_exact_ppr(t, *alpha),
        (DiffusionMode::Exact, Family::Heat { .. }) => {
            let k = spec.truncation_k(DEFAULT_TAIL_TOL)?;
            diffuse_series(t, spec, k)
        }
        (DiffusionMode::Exact, Family::Explicit { theta }) => diffuse_series(t, spec, theta.len() - 1),
        (DiffusionMode::Series { k }, _) => {
            let k = match k.or_else(|| spec.series_order()) {
                Some(k) => k,
                None => spec.truncation_k(DEFAULT_TAIL_TOL)?,
            };
            diffuse_series(t, spec, k)
        }
        (DiffusionMode::Push { eps }, Family::Ppr { alpha }) => push_ppr_all(t, *alpha, eps),
        (DiffusionMode::Push { eps }, Family::Heat { t: time }) => push_heat_all(t, *time, eps),
        (DiffusionMode::Push { .. }, Family::Explicit { .. }) => Err(Error::Unsupported(
            "push approximation is available for PPR and heat kernel only".into(),
        )),
    }
}

fn identity(t: &TransitionMatrix, spec: &DiffusionSpec) -> DiffusionMatrix {
    let cols = (0..t.n()).map(|i| Column::Sparse(vec![(i, 1.0)])).collect();
    DiffusionMatrix::new(cols, spec.clone(), t.kind(), Exactness::Exact)
}

/// Symmetric operator `D^-1/2 T D^1/2` for a reversible random walk `T`.
struct Symmetrized<'a> {
    t: &'a TransitionMatrix,
    sqrt_d: Vec<f64>,
}

impl LinearOperator for Symmetrized<'_> {
    fn dim(&self) -> usize {
        self.t.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z: Vec<f64> = x.iter().zip(&self.sqrt_d).map(|(a, s)| a * s).collect();
        self.t.apply(&z, y);
        for (yi, s) in y.iter_mut().zip(&self.sqrt_d) {
            *yi /= s;
        }
    }
}

/// `x - c * M x`.
fn shifted_apply(m: &dyn LinearOperator, c: f64, x: &[f64], y: &mut [f64]) {
    m.apply(x, y);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi - c * *yi;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients on `(I - c M) x = b` for symmetric `M` with spectral
/// radius at most 1 and `c < 1`.
fn conjugate_gradient(m: &dyn LinearOperator, c: f64, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let stop = 1e-30 * rr.max(f64::MIN_POSITIVE);
    for _ in 0..(2 * n + 200) {
        if rr <= stop {
            break;
        }
        shifted_apply(m, c, &p, &mut ap);
        let step = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    x
}

/// Fixed-point iteration `x <- b + c M x`; converges geometrically at rate
/// `c` for any `M` with norm at most 1.
fn stationary(m: &dyn LinearOperator, c: f64, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    // Enough sweeps to shrink the initial error by 1e-16 relative to b.
    let sweeps = ((1e-16f64).ln() / c.ln()).ceil() as usize + 10;
    let mut x = b.to_vec();
    let mut y = vec![0.0; n];
    for _ in 0..sweeps {
        m.apply(&x, &mut y);
        let mut delta = 0.0f64;
        for i in 0..n {
            let v = b[i] + c * y[i];
            delta = delta.max((v - x[i]).abs());
            x[i] = v;
        }
        if delta <= 1e-17 * bnorm {
            break;
        }
    }
    x
}

fn residual_inf(t: &TransitionMatrix, c: f64, x: &[f64], b: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    shifted_apply(t, c, x, &mut y);
    y.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Solve `(I - c T) x = b` choosing the solver from the structure of `T`, with
/// up to two rounds of iterative refinement.
fn solve_shifted(t: &TransitionMatrix, c: f64, b: &[f64]) -> (Vec<f64>, f64) {
    let sym = if !t.is_symmetric() && t.is_reversible() {
        Some(Symmetrized {
            t,
            sqrt_d: t.degrees().iter().map(|d| d.sqrt()).collect(),
        })
    } else {
        None
    };
    let solve = |rhs: &[f64]| -> Vec<f64> {
        if t.is_symmetric() {
            conjugate_gradient(t, c, rhs)
        } else if let Some(s) = &sym {
            let scaled: Vec<f64> = rhs.iter().zip(&s.sqrt_d).map(|(v, d)| v / d).collect();
            let u = conjugate_gradient(s, c, &scaled);
            u.iter().zip(&s.sqrt_d).map(|(v, d)| v * d).collect()
        } else {
            stationary(t, c, rhs)
        }
    };
    let mut x = solve(b);
    let mut res = residual_inf(t, c, &x, b);
    for _ in 0..2 {
        if res < EXACT_RESIDUAL_TOL * 1e-3 {
            break;
        }
        let mut ax = vec![0.0; x.len()];
        shifted_apply(t, c, &x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        res = residual_inf(t, c, &x, b);
    }
    (x, res)
}

/// Exact PPR diffusion `S = alpha (I - (1 - alpha) T)^-1`, one linear solve
/// per column. Every column's residual is below [`EXACT_RESIDUAL_TOL`].
pub fn diffuse_exact_ppr(t: &TransitionMatrix, alpha: f64) -> Result<DiffusionMatrix> {
    let spec = DiffusionSpec::ppr(alpha)?;
    let n = t.n();
    let c = 1.0 - alpha;
    let solved: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut b = vec![0.0; n];
            b[i] = alpha;
            solve_shifted(t, c, &b)
        })
        .collect();
    let (worst_col, worst) = solved
        .iter()
        .enumerate()
        .map(|(j, (_, r))| (j, *r))
        .fold((0, 0.0), |acc, (j, r)| if r > acc.1 { (j, r) } else { acc });
    if !(worst < EXACT_RESIDUAL_TOL) {
        return Err(Error::NonConvergence {
            worst_residual: worst,
            column: worst_col,
        });
    }
    let cols = solved.into_iter().map(|(x, _)| Column::Dense(x)).collect();
    Ok(DiffusionMatrix::new(cols, spec, t.kind(), Exactness::Exact))
}

/// Dense LU reference for exact PPR, limited to [`DENSE_VERIFY_CAP`] nodes.
pub fn diffuse_exact_ppr_dense(t: &TransitionMatrix, alpha: f64) -> Result<DiffusionMatrix> {
    let spec = DiffusionSpec::ppr(alpha)?;
    let n = t.n();
    if n > DENSE_VERIFY_CAP {
        return Err(Error::TooLarge {
            n,
            cap: DENSE_VERIFY_CAP,
        });
    }
    let m = DMatrix::identity(n, n) - t.matrix().to_dense() * (1.0 - alpha);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence {
            worst_residual: f64::INFINITY,
            column: 0,
        })?;
    Ok(DiffusionMatrix::from_dense(&(inv * alpha), spec, t.kind(), Exactness::Exact))
}

/// Truncated series `sum_{k=0}^{K} theta_k T^k`, evaluated per column with
/// Horner's rule.
pub fn diffuse_series(t: &TransitionMatrix, spec: &DiffusionSpec, k: usize) -> Result<DiffusionMatrix> {
    spec.validate()?;
    let mut spec = spec.clone();
    spec.truncation = crate::coefficients::Truncation::SeriesK { k };
    if spec.is_identity() {
        return Ok(identity(t, &spec));
    }
    let theta = spec.thetas(k);
    let n = t.n();
    let cols: Vec<Column> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut y = vec![0.0; n];
            let mut tmp = vec![0.0; n];
            y[i] = theta[k];
            for &th in theta[..k].iter().rev() {
                t.apply(&y, &mut tmp);
                std::mem::swap(&mut y, &mut tmp);
                y[i] += th;
            }
            Column::Dense(y)
        })
        .collect();
    Ok(DiffusionMatrix::new(cols, spec, t.kind(), Exactness::Series(k)))
}

/// Result of a push approximation of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct PushColumn {
    /// Approximate column, `(row, value)` sorted by row.
    pub entries: Vec<(usize, f64)>,
    /// Mass not yet propagated, `(row, value)` sorted by row. For PPR the
    /// exact column equals `entries + alpha (I - (1 - alpha) T)^-1 residual`.
    pub residual: Vec<(usize, f64)>,
    /// Number of push operations performed.
    pub pushes: usize,
    /// Number of distinct nodes whose value or residual was modified.
    pub touched: usize,
}

impl PushColumn {
    pub fn residual_mass(&self) -> f64 {
        self.residual.iter().map(|&(_, v)| v).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        Column::Sparse(self.entries.clone()).to_dense(n)
    }
}

fn require_random_walk(t: &TransitionMatrix, eps: f64) -> Result<()> {
    if t.kind() != TransitionKind::RandomWalk {
        return Err(Error::Unsupported(format!(
            "push approximation requires a random-walk transition matrix, got {}",
            t.kind()
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "push tolerance must be positive, got {eps}"
        )));
    }
    Ok(())
}

fn sorted(map: HashMap<usize, f64>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = map.into_iter().filter(|&(_, x)| x != 0.0).collect();
    v.sort_unstable_by_key(|&(i, _)| i);
    v
}

/// Local push approximation of PPR column `source` on a column-stochastic `T`.
///
/// Repeatedly moves an `alpha` share of a node's residual into the estimate
/// and spreads the rest to its out-neighbors, until every node satisfies
/// `r_u < eps * d_u`. The L1 error equals the remaining residual mass, which
/// is at most `eps` times the volume of the touched nodes.
pub fn push_ppr(t: &TransitionMatrix, alpha: f64, eps: f64, source: usize) -> Result<PushColumn> {
    require_random_walk(t, eps)?;
    DiffusionSpec::ppr(alpha)?;
    let deg = t.degrees();
    let m = t.matrix();
    let mut p: HashMap<usize, f64> = HashMap::new();
    let mut r: HashMap<usize, f64> = HashMap::from([(source, 1.0)]);
    let mut queue = VecDeque::from([source]);
    let mut queued = HashSet::from([source]);
    let mut pushes = 0;
    while let Some(u) = queue.pop_front() {
        queued.remove(&u);
        let ru = r[&u];
        if ru < eps * deg[u] {
            continue;
        }
        pushes += 1;
        *p.entry(u).or_insert(0.0) += alpha * ru;
        r.insert(u, 0.0);
        let spread = (1.0 - alpha) * ru;
        let (rows, vals) = m.column(u);
        for (&v, &w) in rows.iter().zip(vals) {
            let rv = r.entry(v).or_insert(0.0);
            *rv += spread * w;
            if *rv >= eps * deg[v] && queued.insert(v) {
                queue.push_back(v);
            }
        }
    }
    let touched = r.len();
    Ok(PushColumn {
        entries: sorted(p),
        residual: sorted(r),
        pushes,
        touched,
    })
}

/// Local approximation of heat-kernel column `source` on a column-stochastic
/// `T`.
///
/// The Taylor series is truncated where its analytic tail drops below
/// `eps / 2`. Mass at series level `k` on node `u` is propagated to level
/// `k + 1` only while the weight it could still contribute,
/// `q * sum_{m>k} theta_m`, is at least `eps * d_u / (K + 1)`; the residual
/// reports the dropped contributions.
pub fn push_heat(t: &TransitionMatrix, time: f64, eps: f64, source: usize) -> Result<PushColumn> {
    require_random_walk(t, eps)?;
    let spec = DiffusionSpec::heat(time)?;
    let k_max = spec.truncation_k(eps / 2.0)?;
    let theta = spec.thetas(k_max);
    // suffix[k] = sum_{m >= k} theta_m, with suffix[K + 1] = 0.
    let mut suffix = vec![0.0; k_max + 2];
    for k in (0..=k_max).rev() {
        suffix[k] = suffix[k + 1] + theta[k];
    }
    let deg = t.degrees();
    let m = t.matrix();
    let scale = eps / (k_max as f64 + 1.0);

    let mut x: HashMap<usize, f64> = HashMap::new();
    let mut dropped: HashMap<usize, f64> = HashMap::new();
    let mut level: Vec<(usize, f64)> = vec![(source, 1.0)];
    let mut pushes = 0;
    let mut seen: HashSet<usize> = HashSet::from([source]);
    for k in 0..=k_max {
        let mut next: HashMap<usize, f64> = HashMap::new();
        for &(u, q) in &level {
            *x.entry(u).or_insert(0.0) += theta[k] * q;
            let future = q * suffix[k + 1];
            if future == 0.0 {
                continue;
            }
            if future < scale * deg[u] {
                *dropped.entry(u).or_insert(0.0) += future;
                continue;
            }
            pushes += 1;
            let (rows, vals) = m.column(u);
            for (&v, &w) in rows.iter().zip(vals) {
                *next.entry(v).or_insert(0.0) += q * w;
                seen.insert(v);
            }
        }
        // Sorted order keeps floating-point accumulation deterministic.
        level = sorted(next);
        if level.is_empty() {
            break;
        }
    }
    Ok(PushColumn {
        entries: sorted(x),
        residual: sorted(dropped),
        pushes,
        touched: seen.len(),
    })
}

/// Push-PPR for every column.
pub fn push_ppr_all(t: &TransitionMatrix, alpha: f64, eps: f64) -> Result<DiffusionMatrix> {
    let spec = DiffusionSpec::ppr(alpha)?;
    let cols = (0..t.n())
        .into_par_iter()
        .map(|i| push_ppr(t, alpha, eps, i).map(|c| Column::Sparse(c.entries)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffusionMatrix::new(cols, spec, t.kind(), Exactness::Push(eps)))
}

/// Push-heat for every column.
pub fn push_heat_all(t: &TransitionMatrix, time: f64, eps: f64) -> Result<DiffusionMatrix> {
    let spec = DiffusionSpec::heat(time)?;
    let cols = (0..t.n())
        .into_par_iter()
        .map(|i| push_heat(t, time, eps, i).map(|c| Column::Sparse(c.entries)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffusionMatrix::new(cols, spec, t.kind(), Exactness::Push(eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_graph, transition_matrix, Edge, SparseGraph};
    use approx::assert_relative_eq;

    fn graph(edges: &[(u64, u64)]) -> SparseGraph {
        let e: Vec<Edge> = edges.iter().map(|&(a, b)| (a, b, None)).collect();
        load_graph(&e, None, false).unwrap().graph
    }

    fn k2() -> SparseGraph {
        graph(&[(0, 1)])
    }

    fn l1(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }

    #[test]
    fn exact_ppr_k2() {
        // alpha (I - (1 - alpha) A)^-1 with A = [[0,1],[1,0]], alpha = 1/2:
        // (1/2) * (1 / (1 - 1/4)) * [[1, 1/2], [1/2, 1]].
        let t = transition_matrix(&k2(), TransitionKind::RandomWalk).unwrap();
        let s = diffuse_exact_ppr(&t, 0.5).unwrap();
        assert_relative_eq!(s.get(0, 0), 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.get(1, 0), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.get(0, 1), 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.get(1, 1), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_ppr_k3() {
        // K3 with T_rw = A/2, alpha = 1/2: I - T/2 has eigenvalue 1/2 on the
        // all-ones vector and 5/4 on its complement, so
        // S = 0.2 J + 0.4 I (dense inverse agrees).
        let t = transition_matrix(&graph(&[(0, 1), (1, 2), (2, 0)]), TransitionKind::RandomWalk).unwrap();
        let s = diffuse_exact_ppr(&t, 0.5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.6 } else { 0.2 };
                assert_relative_eq!(s.get(i, j), want, epsilon = 1e-12);
            }
        }
        for c in s.column_sums() {
            assert_relative_eq!(c, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn alpha_near_one_is_identity() {
        let g = graph(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        for kind in [TransitionKind::RandomWalk, TransitionKind::Symmetric] {
            let t = transition_matrix(&g, kind).unwrap();
            let s = diffuse_exact_ppr(&t, 1.0 - 1e-12).unwrap();
            let d = s.to_dense() - DMatrix::<f64>::identity(4, 4);
            assert!(d.amax() < 1e-9);
        }
    }

    #[test]
    fn exact_matches_dense_reference_on_directed_graph() {
        // Not reversible: exercises the stationary iteration.
        let e: Vec<Edge> = vec![(0, 1, None), (1, 2, None), (2, 0, None), (0, 2, Some(2.0))];
        let g = load_graph(&e, None, true).unwrap().graph;
        let t = transition_matrix(&g, TransitionKind::RandomWalk).unwrap();
        assert!(!t.is_reversible());
        let s = diffuse_exact_ppr(&t, 0.2).unwrap();
        let d = diffuse_exact_ppr_dense(&t, 0.2).unwrap();
        assert!(s.max_abs_diff(&d) < 1e-12);
    }

    #[test]
    fn series_identity_and_gcn_cases() {
        let g = graph(&[(0, 1), (1, 2), (2, 3)]);
        let t = transition_matrix(&g, TransitionKind::Symmetric).unwrap();
        let id = diffuse_series(&t, &DiffusionSpec::explicit(vec![1.0, 0.0]).unwrap(), 1).unwrap();
        assert_eq!(id.to_dense(), DMatrix::identity(4, 4));
        let gcn = diffuse_series(&t, &DiffusionSpec::explicit(vec![0.0, 1.0, 0.0]).unwrap(), 2).unwrap();
        assert!((gcn.to_dense() - t.matrix().to_dense()).amax() < 1e-15);
    }

    #[test]
    fn series_heat_k2() {
        // e^-t expm(tA) = e^-t [[cosh t, sinh t], [sinh t, cosh t]];
        // at t = ln 2 this is [[0.625, 0.375], [0.375, 0.625]].
        let t = transition_matrix(&k2(), TransitionKind::RandomWalk).unwrap();
        let s = diffuse_series(&t, &DiffusionSpec::heat(2f64.ln()).unwrap(), 60).unwrap();
        assert_relative_eq!(s.get(0, 0), 0.625, epsilon = 1e-14);
        assert_relative_eq!(s.get(1, 0), 0.375, epsilon = 1e-14);
    }

    #[test]
    fn identity_spec_short_circuits() {
        let g = graph(&[(0, 1)]);
        let t = transition_matrix(&g, TransitionKind::RandomWalk).unwrap();
        let s = diffuse(&t, &DiffusionSpec::explicit(vec![1.0]).unwrap(), DiffusionMode::Exact).unwrap();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.get(0, 0), 1.0);
    }

    #[test]
    fn push_absorbing_single_node() {
        let m = CscMatrix::identity(1);
        let t = TransitionMatrix::from_parts(m, TransitionKind::RandomWalk, vec![1.0]);
        let c = push_ppr(&t, 0.3, 1e-10, 0).unwrap();
        assert_eq!(c.entries.len(), 1);
        assert_relative_eq!(c.entries[0].1, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn push_ppr_k2() {
        let t = transition_matrix(&k2(), TransitionKind::RandomWalk).unwrap();
        let c = push_ppr(&t, 0.5, 1e-8, 0).unwrap();
        assert!(l1(&c.to_dense(2), &[2.0 / 3.0, 1.0 / 3.0]) < 1e-6);
        assert!(c.residual.iter().all(|&(u, r)| r < 1e-8 * t.degrees()[u]));
    }

    #[test]
    fn push_ppr_star_center() {
        let edges: Vec<(u64, u64)> = (1..100).map(|i| (0, i)).collect();
        let t = transition_matrix(&graph(&edges), TransitionKind::RandomWalk).unwrap();
        let exact = diffuse_exact_ppr(&t, 0.15).unwrap();
        let c = push_ppr(&t, 0.15, 1e-4, 0).unwrap();
        assert!(l1(&c.to_dense(100), &exact.column(0).to_dense(100)) < 1e-2);
    }

    #[test]
    fn push_ppr_error_is_residual_mass() {
        let edges: Vec<(u64, u64)> = (0..30).map(|i| (i, (i + 1) % 30)).chain((0..30).map(|i| (i, (i + 7) % 30))).collect();
        let t = transition_matrix(&graph(&edges), TransitionKind::RandomWalk).unwrap();
        let exact = diffuse_exact_ppr(&t, 0.2).unwrap();
        let c = push_ppr(&t, 0.2, 1e-5, 3).unwrap();
        let err = l1(&c.to_dense(30), &exact.column(3).to_dense(30));
        assert_relative_eq!(err, c.residual_mass(), max_relative = 1e-6);
    }

    #[test]
    fn push_requires_random_walk() {
        let t = transition_matrix(&k2(), TransitionKind::Symmetric).unwrap();
        assert!(matches!(push_ppr(&t, 0.5, 1e-4, 0), Err(Error::Unsupported(_))));
        let t = transition_matrix(&k2(), TransitionKind::RandomWalk).unwrap();
        assert!(push_ppr(&t, 0.5, 0.0, 0).is_err());
    }

    #[test]
    fn push_heat_small_time_is_identity() {
        let t = transition_matrix(&graph(&[(0, 1), (1, 2)]), TransitionKind::RandomWalk).unwrap();
        let c = push_heat(&t, 1e-9, 1e-6, 1).unwrap();
        assert!(l1(&c.to_dense(3), &[0.0, 1.0, 0.0]) < 1e-6);
    }

    #[test]
    fn push_heat_k2() {
        let t = transition_matrix(&k2(), TransitionKind::RandomWalk).unwrap();
        let c = push_heat(&t, 2f64.ln(), 1e-6, 0).unwrap();
        assert!(l1(&c.to_dense(2), &[0.625, 0.375]) < 1e-4);
    }

    #[test]
    fn push_heat_ring() {
        let edges: Vec<(u64, u64)> = (0..50).map(|i| (i, (i + 1) % 50)).collect();
        let t = transition_matrix(&graph(&edges), TransitionKind::RandomWalk).unwrap();
        let spec = DiffusionSpec::heat(3.0).unwrap();
        let series = diffuse_series(&t, &spec, 200).unwrap();
        let eps = 1e-6;
        for src in [0, 17, 49] {
            let c = push_heat(&t, 3.0, eps, src).unwrap();
            let err = l1(&c.to_dense(50), &series.column(src).to_dense(50));
            assert!(err < 1e-3, "ring column {src}: {err}");
            assert!(err < eps * 3f64.exp(), "accuracy contract, column {src}: {err}");
        }
    }
}
