//! Truncating a dense diffusion matrix back to a sparse graph and
//! renormalizing it.
//!
//! The order of operations is fixed: sparsify, optionally drop weights,
//! optionally symmetrize with `(S + S^T) / 2`, then optionally build a
//! transition matrix on the result.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::csc::CscMatrix;
use crate::diffusion::DiffusionMatrix;
use crate::graph::{transition_matrix, SparseGraph, TransitionKind, TransitionMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsifyRule {
    /// Keep the `k` largest entries of every column.
    TopK(usize),
    /// Keep entries `>= eps`.
    Threshold(f64),
    /// Threshold at the `eps` that yields roughly this average degree.
    TargetDegree(f64),
}

impl SparsifyRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SparsifyRule::TopK(0) => Err(Error::InvalidParameter("top-k needs k >= 1".into())),
            SparsifyRule::Threshold(e) if !(e > 0.0 && e.is_finite()) => Err(Error::InvalidParameter(
                format!("threshold must be positive, got {e}"),
            )),
            SparsifyRule::TargetDegree(d) if !(d > 0.0 && d.is_finite()) => Err(Error::InvalidParameter(
                format!("target degree must be positive, got {d}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SparsifyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparsifyRule::TopK(k) => write!(f, "topk:{k}"),
            SparsifyRule::Threshold(e) => write!(f, "eps:{e}"),
            SparsifyRule::TargetDegree(d) => write!(f, "degree:{d}"),
        }
    }
}

/// Normalization applied after sparsification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Renorm {
    /// `D^-1/2 S D^-1/2`.
    SymmetricOnSTilde,
    /// `S D^-1`, column-stochastic.
    RandomWalkOnSTilde,
    None,
}

impl fmt::Display for Renorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Renorm::SymmetricOnSTilde => "sym",
            Renorm::RandomWalkOnSTilde => "rw",
            Renorm::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PostProcess {
    pub symmetrize: bool,
    pub unweighted: bool,
    pub renorm: Renorm,
}

impl Default for PostProcess {
    fn default() -> Self {
        Self {
            symmetrize: true,
            unweighted: false,
            renorm: Renorm::RandomWalkOnSTilde,
        }
    }
}

impl PostProcess {
    /// Symmetrize only; what spectral clustering consumes.
    pub fn symmetrize_only() -> Self {
        Self {
            symmetrize: true,
            unweighted: false,
            renorm: Renorm::None,
        }
    }
}

/// Output of [`postprocess`].
#[derive(Debug, Clone)]
pub enum PostOutput {
    Graph(SparseGraph),
    Transition(TransitionMatrix),
}

impl PostOutput {
    pub fn matrix(&self) -> &CscMatrix {
        match self {
            PostOutput::Graph(g) => g.adjacency(),
            PostOutput::Transition(t) => t.matrix(),
        }
    }

    pub fn is_directed(&self) -> bool {
        match self {
            PostOutput::Graph(g) => g.is_directed(),
            PostOutput::Transition(t) => !t.is_symmetric(),
        }
    }
}

/// Descending by value, ascending by row on ties.
fn by_mass(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}

fn positive_column(s: &DiffusionMatrix, j: usize) -> Vec<(usize, f64)> {
    s.column(j).nonzeros().filter(|&(_, v)| v > 0.0).collect()
}

/// The `ceil(N * avg_degree)`-th largest entry of `S`. If fewer positive
/// entries exist, the smallest positive entry is returned so nothing is
/// dropped.
pub fn epsilon_for_degree(s: &DiffusionMatrix, avg_degree: f64) -> Result<f64> {
    let n = s.n();
    if !(avg_degree > 0.0 && avg_degree <= n as f64) {
        return Err(Error::InvalidParameter(format!(
            "target degree must lie in (0, {n}], got {avg_degree}"
        )));
    }
    let mut all: Vec<f64> = s.nonzeros().map(|(_, _, v)| v).filter(|&v| v > 0.0).collect();
    if all.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let m = (n as f64 * avg_degree).ceil() as usize;
    if m >= all.len() {
        return Ok(all.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let (_, nth, _) = all.select_nth_unstable_by(m - 1, |a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    Ok(*nth)
}

/// Sparsify `S` into a directed weighted graph. The diagonal of `S` is kept
/// like any other entry.
pub fn sparsify(s: &DiffusionMatrix, rule: SparsifyRule) -> Result<SparseGraph> {
    rule.validate()?;
    let n = s.n();
    let columns: Vec<Vec<(usize, f64)>> = match rule {
        SparsifyRule::TopK(k) => {
            if k > n {
                return Err(Error::InvalidParameter(format!(
                    "top-k with k = {k} exceeds node count {n}"
                )));
            }
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let mut col = positive_column(s, j);
                    if col.len() > k {
                        col.select_nth_unstable_by(k - 1, by_mass);
                        col.truncate(k);
                    }
                    col.sort_unstable_by_key(|&(i, _)| i);
                    col
                })
                .collect()
        }
        SparsifyRule::Threshold(eps) => threshold_columns(s, eps)?,
        SparsifyRule::TargetDegree(d) => threshold_columns(s, epsilon_for_degree(s, d)?)?,
    };
    Ok(SparseGraph::from_adjacency(CscMatrix::from_columns(n, columns), true))
}

fn threshold_columns(s: &DiffusionMatrix, eps: f64) -> Result<Vec<Vec<(usize, f64)>>> {
    let max = s.nonzeros().map(|(_, _, v)| v).fold(f64::NEG_INFINITY, f64::max);
    if !(max >= eps) {
        return Err(Error::InvalidParameter(format!(
            "threshold {eps} exceeds the largest entry {max}; the result would be empty"
        )));
    }
    Ok((0..s.n())
        .into_par_iter()
        .map(|j| positive_column(s, j).into_iter().filter(|&(_, v)| v >= eps).collect())
        .collect())
}

/// Resolve a target-degree rule into the threshold it stands for.
pub fn resolve_rule(s: &DiffusionMatrix, rule: SparsifyRule) -> Result<(SparsifyRule, Option<f64>)> {
    match rule {
        SparsifyRule::TargetDegree(d) => {
            let eps = epsilon_for_degree(s, d)?;
            Ok((SparsifyRule::Threshold(eps), Some(eps)))
        }
        SparsifyRule::Threshold(e) => Ok((rule, Some(e))),
        SparsifyRule::TopK(_) => Ok((rule, None)),
    }
}

/// `(A + A^T) / 2` as an undirected graph.
pub fn symmetrize(g: &SparseGraph) -> SparseGraph {
    let adj = g.adjacency();
    let triplets: Vec<(usize, usize, f64)> = adj
        .iter()
        .map(|(i, j, v)| (i, j, 0.5 * v))
        .chain(adj.iter().map(|(i, j, v)| (j, i, 0.5 * v)))
        .collect();
    SparseGraph::from_adjacency(CscMatrix::from_triplets(g.n(), triplets), false)
}

/// Unweight, symmetrize and renormalize a sparsified graph, in that order.
pub fn postprocess(g: &SparseGraph, opts: PostProcess) -> Result<PostOutput> {
    let mut g = g.clone();
    if opts.unweighted {
        let mut adj = g.adjacency().clone();
        adj.values_mut().iter_mut().for_each(|v| *v = 1.0);
        g = SparseGraph::from_adjacency(adj, g.is_directed());
    }
    if opts.symmetrize {
        g = symmetrize(&g);
    }
    let kind = match opts.renorm {
        Renorm::None => return Ok(PostOutput::Graph(g)),
        Renorm::SymmetricOnSTilde => TransitionKind::Symmetric,
        Renorm::RandomWalkOnSTilde => TransitionKind::RandomWalk,
    };
    let isolated: Vec<usize> = g
        .degrees()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= 0.0)
        .map(|(i, _)| i)
        .collect();
    if !isolated.is_empty() {
        return Err(Error::IsolatedNodes(isolated));
    }
    Ok(PostOutput::Transition(transition_matrix(&g, kind)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::DiffusionSpec;
    use crate::diffusion::{Column, Exactness};
    use nalgebra::DMatrix;

    fn dm(m: DMatrix<f64>) -> DiffusionMatrix {
        DiffusionMatrix::from_dense(
            &m,
            DiffusionSpec::ppr(0.15).unwrap(),
            TransitionKind::RandomWalk,
            Exactness::Exact,
        )
    }

    fn single_column() -> DiffusionMatrix {
        let cols = vec![
            Column::Dense(vec![0.5, 0.3, 0.2]),
            Column::Dense(vec![0.0, 0.0, 0.0]),
            Column::Dense(vec![0.0, 0.0, 0.0]),
        ];
        DiffusionMatrix::new(cols, DiffusionSpec::ppr(0.15).unwrap(), TransitionKind::RandomWalk, Exactness::Exact)
    }

    fn nine() -> DiffusionMatrix {
        // Column-major listing of the nine entries.
        dm(DMatrix::from_column_slice(3, 3, &[0.5, 0.3, 0.2, 0.4, 0.35, 0.25, 0.45, 0.3, 0.25]))
    }

    #[test]
    fn topk_keeps_largest() {
        let g = sparsify(&single_column(), SparsifyRule::TopK(2)).unwrap();
        assert_eq!(g.adjacency().column(0), (&[0usize, 1][..], &[0.5, 0.3][..]));
        assert!(g.is_directed());
    }

    #[test]
    fn topk_ties_prefer_smaller_row() {
        let s = dm(DMatrix::from_column_slice(3, 3, &[0.2, 0.2, 0.2, 1.0, 0.0, 0.0, 0.1, 0.3, 0.3]));
        let g = sparsify(&s, SparsifyRule::TopK(1)).unwrap();
        assert_eq!(g.adjacency().column(0).0, &[0]);
        assert_eq!(g.adjacency().column(1).0, &[0]);
        assert_eq!(g.adjacency().column(2).0, &[1]);
    }

    #[test]
    fn topk_too_large() {
        assert!(sparsify(&single_column(), SparsifyRule::TopK(4)).is_err());
    }

    #[test]
    fn threshold_keeps_entries_at_or_above() {
        let g = sparsify(&single_column(), SparsifyRule::Threshold(0.25)).unwrap();
        assert_eq!(g.adjacency().column(0), (&[0usize, 1][..], &[0.5, 0.3][..]));
        let g = sparsify(&single_column(), SparsifyRule::Threshold(0.3)).unwrap();
        assert_eq!(g.nnz(), 2);
        assert!(sparsify(&single_column(), SparsifyRule::Threshold(0.6)).is_err());
    }

    #[test]
    fn target_degree_nine_entries() {
        let s = nine();
        assert_eq!(epsilon_for_degree(&s, 2.0).unwrap(), 0.3);
        let g = sparsify(&s, SparsifyRule::TargetDegree(2.0)).unwrap();
        assert_eq!(g.nnz(), 6);
    }

    #[test]
    fn epsilon_edge_cases() {
        let s = dm(DMatrix::from_element(4, 4, 0.1));
        assert_eq!(epsilon_for_degree(&s, 2.0).unwrap(), 0.1);
        assert_eq!(sparsify(&s, SparsifyRule::TargetDegree(2.0)).unwrap().nnz(), 16);
        let s = nine();
        assert_eq!(epsilon_for_degree(&s, 3.0).unwrap(), 0.2);
        assert!(epsilon_for_degree(&s, 3.5).is_err());
        assert!(epsilon_for_degree(&s, 0.0).is_err());
    }

    #[test]
    fn symmetrize_averages() {
        let s = dm(DMatrix::from_column_slice(2, 2, &[0.0, 0.4, 0.2, 0.0]));
        let g = sparsify(&s, SparsifyRule::Threshold(0.1)).unwrap();
        let out = postprocess(&g, PostProcess::symmetrize_only()).unwrap();
        let m = out.matrix();
        assert!((m.get(0, 1) - 0.3).abs() < 1e-15);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!(!out.is_directed());
    }

    #[test]
    fn unweighted_sets_ones() {
        let g = sparsify(&nine(), SparsifyRule::Threshold(0.25)).unwrap();
        let out = postprocess(
            &g,
            PostProcess {
                symmetrize: false,
                unweighted: true,
                renorm: Renorm::None,
            },
        )
        .unwrap();
        assert!(out.matrix().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn random_walk_renorm_is_column_stochastic() {
        let g = sparsify(&nine(), SparsifyRule::Threshold(0.25)).unwrap();
        for symmetrize in [false, true] {
            let out = postprocess(
                &g,
                PostProcess {
                    symmetrize,
                    unweighted: false,
                    renorm: Renorm::RandomWalkOnSTilde,
                },
            )
            .unwrap();
            for c in out.matrix().column_sums() {
                assert!((c - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_nodes_fail_renorm() {
        // Column 2 and row 2 are tiny, so thresholding isolates node 2.
        let s = dm(DMatrix::from_column_slice(3, 3, &[0.5, 0.5, 0.01, 0.5, 0.5, 0.01, 0.01, 0.01, 0.01]));
        let g = sparsify(&s, SparsifyRule::Threshold(0.1)).unwrap();
        match postprocess(&g, PostProcess::default()) {
            Err(Error::IsolatedNodes(v)) => assert_eq!(v, vec![2]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(postprocess(&g, PostProcess::symmetrize_only()).is_ok());
    }
}
