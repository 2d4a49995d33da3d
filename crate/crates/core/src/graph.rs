//! Sparse graph representation, connected components and transition matrices.

use std::collections::BTreeMap;
use std::fmt;

use crate::csc::{CscMatrix, LinearOperator};
use crate::{Error, Result};

/// An input edge `(src, dst, weight)`; a missing weight means 1.0.
pub type Edge = (u64, u64, Option<f64>);

/// Weighted adjacency in column-major layout.
///
/// Entry `(i, j)` is the weight of the edge from `j` to `i`. Undirected graphs
/// store both triangles. Graphs built from input edges never carry
/// self-loops; graphs produced by sparsifying a diffusion matrix may hold
/// diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    adj: CscMatrix,
    directed: bool,
}

/// Mapping from dense node index to the id used in the original input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    original: Vec<u64>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        Self {
            original: (0..n as u64).collect(),
        }
    }

    pub fn from_original(original: Vec<u64>) -> Self {
        Self { original }
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.original.iter().enumerate().all(|(i, &o)| o == i as u64)
    }

    pub fn original(&self, dense: usize) -> u64 {
        self.original[dense]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.original
    }

    /// Restrict to the nodes kept by an old→new index map.
    pub fn restrict(&self, map: &[Option<usize>]) -> Self {
        let mut kept: Vec<(usize, u64)> = map
            .iter()
            .enumerate()
            .filter_map(|(old, new)| new.map(|n| (n, self.original[old])))
            .collect();
        kept.sort_unstable();
        Self {
            original: kept.into_iter().map(|(_, o)| o).collect(),
        }
    }
}

/// A graph together with the ids its nodes had in the input.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: SparseGraph,
    pub ids: IdMap,
}

impl SparseGraph {
    /// Wrap an adjacency matrix. The caller guarantees nonnegative weights and,
    /// for undirected graphs, exact symmetry.
    pub fn from_adjacency(adj: CscMatrix, directed: bool) -> Self {
        debug_assert!(adj.values().iter().all(|&v| v > 0.0));
        debug_assert!(directed || adj.is_symmetric());
        Self { adj, directed }
    }

    /// Build from dense-index triplets. Duplicate entries are summed; for
    /// undirected graphs each off-diagonal triplet is mirrored.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], directed: bool) -> Result<Self> {
        let mut t = Vec::with_capacity(triplets.len() * 2);
        for &(i, j, w) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::BadWeight {
                    src: j as u64,
                    dst: i as u64,
                    weight: w,
                });
            }
            t.push((i, j, w));
            if !directed && i != j {
                t.push((j, i, w));
            }
        }
        Ok(Self {
            adj: CscMatrix::from_triplets(n, t),
            directed,
        })
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    /// Number of stored (directed) entries.
    pub fn nnz(&self) -> usize {
        self.adj.nnz()
    }

    /// Number of edges: stored entries for directed graphs, unordered pairs
    /// (loops counted once) for undirected graphs.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.nnz()
        } else {
            self.adj.iter().filter(|&(i, j, _)| i <= j).count()
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> &CscMatrix {
        &self.adj
    }

    pub fn into_adjacency(self) -> CscMatrix {
        self.adj
    }

    pub fn has_self_loops(&self) -> bool {
        self.adj.iter().any(|(i, j, _)| i == j)
    }

    /// Weighted degree of each node, taken as the column sum (out-weight in
    /// the column-major convention; equal to the row sum when undirected).
    pub fn degrees(&self) -> Vec<f64> {
        self.adj.column_sums()
    }

    /// Neighbors of `j` (rows of column `j`) with edge weights.
    pub fn neighbors(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (rows, vals) = self.adj.column(j);
        rows.iter().copied().zip(vals.iter().copied())
    }

    /// Connected-component label per node, ignoring edge direction. Labels are
    /// numbered in order of each component's smallest node.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j, _) in self.adj.iter() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut root_label = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            let r = find(&mut parent, v);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            label[v] = root_label[r];
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().1 == 1
    }

    /// Induced subgraph on the nodes with `Some` entries of an old→new map.
    pub fn induced(&self, map: &[Option<usize>]) -> Self {
        let m = map.iter().flatten().count();
        let triplets = self
            .adj
            .iter()
            .filter_map(|(i, j, v)| Some((map[i]?, map[j]?, v)))
            .collect();
        Self {
            adj: CscMatrix::from_triplets(m, triplets),
            directed: self.directed,
        }
    }

    /// Export as dense-index triplets `(src, dst, weight)`. Undirected graphs
    /// emit each pair once with `src <= dst`.
    pub fn to_edges(&self) -> Vec<(usize, usize, f64)> {
        self.adj
            .iter()
            .filter(|&(i, j, _)| self.directed || j <= i)
            .map(|(i, j, v)| (j, i, v))
            .collect()
    }
}

/// Build a graph from raw input edges.
///
/// With `n_hint` the ids are used as dense indices directly and must be below
/// it. Without a hint, ids are densified to `0..N` in ascending id order and
/// the original ids are returned in the [`IdMap`]. Duplicate edges are merged
/// by summing weights.
pub fn load_graph(edges: &[Edge], n_hint: Option<usize>, directed: bool) -> Result<LoadedGraph> {
    load_graph_with(edges, n_hint, directed, false)
}

/// [`load_graph`] that optionally accepts self-loops, for reading back graphs
/// produced by sparsification.
pub fn load_graph_with(
    edges: &[Edge],
    n_hint: Option<usize>,
    directed: bool,
    allow_self_loops: bool,
) -> Result<LoadedGraph> {
    for &(s, d, w) in edges {
        if s == d && !allow_self_loops {
            return Err(Error::SelfLoop(s));
        }
        if let Some(w) = w {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::BadWeight {
                    src: s,
                    dst: d,
                    weight: w,
                });
            }
        }
    }

    let (n, ids, index): (usize, IdMap, Box<dyn Fn(u64) -> usize>) = match n_hint {
        Some(n) => {
            if let Some(&(s, d, _)) = edges.iter().find(|&&(s, d, _)| s as usize >= n || d as usize >= n) {
                return Err(Error::InvalidInput(format!(
                    "edge ({s}, {d}) references a node outside 0..{n}"
                )));
            }
            (n, IdMap::identity(n), Box::new(|id| id as usize))
        }
        None => {
            let mut uniq: BTreeMap<u64, usize> = BTreeMap::new();
            for &(s, d, _) in edges {
                uniq.insert(s, 0);
                uniq.insert(d, 0);
            }
            for (k, (_, slot)) in uniq.iter_mut().enumerate() {
                *slot = k;
            }
            let original: Vec<u64> = uniq.keys().copied().collect();
            (
                original.len(),
                IdMap::from_original(original),
                Box::new(move |id| uniq[&id]),
            )
        }
    };

    let triplets: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(s, d, w)| (index(d), index(s), w.unwrap_or(1.0)))
        .collect();
    let graph = if directed {
        SparseGraph::from_triplets(n, &triplets, true)?
    } else {
        // Sum duplicates per orientation; an edge listed in both orientations
        // is one undirected edge whose weight is the mean of the two.
        let mut oriented: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in &triplets {
            *oriented.entry((i, j)).or_insert(0.0) += w;
        }
        let t: Vec<_> = oriented
            .iter()
            .filter_map(|(&(i, j), &w)| match oriented.get(&(j, i)) {
                Some(_) if i == j => Some((i, j, w)),
                Some(&back) if i < j => Some((i, j, 0.5 * (w + back))),
                Some(_) => None,
                None => Some((i, j, w)),
            })
            .collect();
        SparseGraph::from_triplets(n, &t, false)?
    };
    Ok(LoadedGraph { graph, ids })
}

/// Restrict to the largest connected component (ties go to the component
/// containing the smallest node index). Returns the subgraph and the
/// old→new index map.
pub fn largest_connected_component(g: &SparseGraph) -> Result<(SparseGraph, Vec<Option<usize>>)> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (label, count) = g.components();
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    // max_by_key returns the last maximum; reverse so the earliest label wins.
    let best = (0..count).rev().max_by_key(|&l| sizes[l]).unwrap();
    let mut next = 0;
    let map: Vec<Option<usize>> = label
        .iter()
        .map(|&l| {
            (l == best).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Ok((g.induced(&map), map))
}

/// Normalization used to turn an adjacency matrix into a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionKind {
    /// `A D^-1`, column-stochastic.
    RandomWalk,
    /// `D^-1/2 A D^-1/2`.
    Symmetric,
    /// `(wI + D)^-1/2 (wI + A) (wI + D)^-1/2` with self-loop weight `w > 0`.
    SymmetricSelfLoop(f64),
}

impl TransitionKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TransitionKind::SymmetricSelfLoop(w) if !(w.is_finite() && w > 0.0) => Err(
                Error::InvalidParameter(format!("self-loop weight must be positive, got {w}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn is_symmetric_kind(&self) -> bool {
        !matches!(self, TransitionKind::RandomWalk)
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionKind::RandomWalk => write!(f, "rw"),
            TransitionKind::Symmetric => write!(f, "sym"),
            TransitionKind::SymmetricSelfLoop(w) => write!(f, "sym-loop:{w}"),
        }
    }
}

/// A transition matrix together with the degrees of the graph it came from.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    matrix: CscMatrix,
    kind: TransitionKind,
    degrees: Vec<f64>,
    symmetric: bool,
    reversible: bool,
}

impl TransitionMatrix {
    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    /// Weighted degrees of the source graph (before any self-loop weight).
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Whether the stored matrix is exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Whether the matrix is similar to a symmetric one through
    /// `D^1/2 T D^-1/2`, i.e. a random walk on an undirected graph.
    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// Wrap an arbitrary matrix, e.g. a hand-built absorbing chain. The
    /// symmetry flag is computed; the matrix is treated as non-reversible
    /// unless symmetric.
    pub fn from_parts(matrix: CscMatrix, kind: TransitionKind, degrees: Vec<f64>) -> Self {
        let symmetric = matrix.is_symmetric();
        Self {
            matrix,
            kind,
            degrees,
            symmetric,
            reversible: symmetric,
        }
    }
}

impl LinearOperator for TransitionMatrix {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.apply(x, y)
    }
}

/// Construct the transition matrix of `g` for the given normalization.
pub fn transition_matrix(g: &SparseGraph, kind: TransitionKind) -> Result<TransitionMatrix> {
    kind.validate()?;
    let degrees = g.degrees();
    let source_symmetric = !g.is_directed() || g.adjacency().is_symmetric();
    let (matrix, symmetric) = match kind {
        TransitionKind::RandomWalk => {
            if let Some(z) = degrees.iter().position(|&d| d <= 0.0) {
                return Err(Error::ZeroDegree(z));
            }
            let mut m = g.adjacency().clone();
            m.scale_entries(|_, j| 1.0 / degrees[j]);
            let sym = m.is_symmetric();
            (m, sym)
        }
        TransitionKind::Symmetric => {
            if let Some(z) = degrees.iter().position(|&d| d <= 0.0) {
                return Err(Error::ZeroDegree(z));
            }
            let s: Vec<f64> = degrees.iter().map(|d| d.sqrt().recip()).collect();
            let mut m = g.adjacency().clone();
            m.scale_entries(|i, j| mirrored_product(&s, i, j));
            (m, source_symmetric)
        }
        TransitionKind::SymmetricSelfLoop(w) => {
            let s: Vec<f64> = degrees.iter().map(|d| (w + d).sqrt().recip()).collect();
            let mut t: Vec<(usize, usize, f64)> = g.adjacency().iter().collect();
            t.extend((0..g.n()).map(|i| (i, i, w)));
            let mut m = CscMatrix::from_triplets(g.n(), t);
            m.scale_entries(|i, j| mirrored_product(&s, i, j));
            (m, source_symmetric)
        }
    };
    Ok(TransitionMatrix {
        matrix,
        kind,
        degrees,
        symmetric,
        reversible: source_symmetric,
    })
}

/// `s[i] * s[j]` evaluated in a fixed index order, so `(i, j)` and `(j, i)`
/// produce bit-identical scale factors.
fn mirrored_product(s: &[f64], i: usize, j: usize) -> f64 {
    if i <= j {
        s[i] * s[j]
    } else {
        s[j] * s[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn undirected(edges: &[(u64, u64)]) -> SparseGraph {
        let e: Vec<Edge> = edges.iter().map(|&(a, b)| (a, b, None)).collect();
        load_graph(&e, None, false).unwrap().graph
    }

    #[test]
    fn single_edge() {
        let g = undirected(&[(0, 1)]);
        assert_eq!(g.n(), 2);
        assert_eq!(g.nnz(), 2);
        assert_eq!(g.degrees(), vec![1.0, 1.0]);
    }

    #[test]
    fn reversed_duplicate_is_merged() {
        let g = undirected(&[(0, 1), (1, 0)]);
        assert_eq!(g, undirected(&[(0, 1)]));
    }

    #[test]
    fn triangle_degrees() {
        let g = undirected(&[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(g.degrees(), vec![2.0, 2.0, 2.0]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn undirected_duplicates_sum_per_orientation() {
        let e = [(0, 1, Some(0.5)), (0, 1, Some(0.5)), (1, 2, Some(1.0)), (2, 1, Some(3.0))];
        let g = load_graph(&e, None, false).unwrap().graph;
        assert_eq!(g.adjacency().get(1, 0), 1.0);
        assert_eq!(g.adjacency().get(2, 1), 2.0);
        assert!(g.adjacency().is_symmetric());
    }

    #[test]
    fn directed_duplicates_sum() {
        let g = load_graph(&[(0, 1, Some(0.5)), (0, 1, Some(0.25))], None, true)
            .unwrap()
            .graph;
        assert_eq!(g.nnz(), 1);
        assert_eq!(g.adjacency().get(1, 0), 0.75);
    }

    #[test]
    fn ids_are_densified() {
        let lg = load_graph(&[(10, 42, None), (42, 7, None)], None, false).unwrap();
        assert_eq!(lg.graph.n(), 3);
        assert_eq!(lg.ids.as_slice(), &[7, 10, 42]);
        assert!(lg.graph.adjacency().get(0, 2) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            load_graph(&[(1, 1, None)], None, false),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            load_graph(&[(0, 1, Some(-1.0))], None, false),
            Err(Error::BadWeight { .. })
        ));
        assert!(load_graph(&[(0, 5, None)], Some(3), false).is_err());
    }

    #[test]
    fn lcc_drops_isolated_node() {
        let e: Vec<Edge> = vec![(0, 1, None), (1, 2, None), (2, 0, None)];
        let g = load_graph(&e, Some(4), false).unwrap().graph;
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.n(), 3);
        assert_eq!(map, vec![Some(0), Some(1), Some(2), None]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = undirected(&[(0, 1), (1, 2)]);
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!(lcc, g);
        assert_eq!(map, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn lcc_picks_the_k4() {
        let g = undirected(&[
            (0, 1), (1, 2), (2, 0),
            (3, 4), (4, 5), (5, 3),
            (6, 7), (6, 8), (6, 9), (7, 8), (7, 9), (8, 9),
        ]);
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.n(), 4);
        assert_eq!(lcc.edge_count(), 6);
        assert!(map[..6].iter().all(Option::is_none));
    }

    #[test]
    fn lcc_of_empty_graph_fails() {
        let g = SparseGraph::from_triplets(0, &[], false).unwrap();
        assert!(matches!(largest_connected_component(&g), Err(Error::EmptyGraph)));
    }

    #[test]
    fn k2_random_walk() {
        let t = transition_matrix(&undirected(&[(0, 1)]), TransitionKind::RandomWalk).unwrap();
        assert_eq!(t.matrix().to_dense(), nalgebra::dmatrix![0.0, 1.0; 1.0, 0.0]);
    }

    #[test]
    fn p3_symmetric() {
        let t = transition_matrix(&undirected(&[(0, 1), (1, 2)]), TransitionKind::Symmetric).unwrap();
        let m = t.matrix();
        assert_relative_eq!(m.get(0, 1), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(m.get(2, 1), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(m.get(0, 2), 0.0);
        assert!(t.is_symmetric());
    }

    #[test]
    fn k2_self_loop() {
        let t = transition_matrix(&undirected(&[(0, 1)]), TransitionKind::SymmetricSelfLoop(1.0)).unwrap();
        for (_, _, v) in t.matrix().iter() {
            assert_relative_eq!(v, 0.5, epsilon = 1e-15);
        }
        assert_eq!(t.matrix().nnz(), 4);
    }

    #[test]
    fn self_loop_diagonal() {
        let g = undirected(&[(0, 1), (1, 2)]);
        let t = transition_matrix(&g, TransitionKind::SymmetricSelfLoop(2.0)).unwrap();
        let d = g.degrees();
        for (i, di) in d.iter().enumerate() {
            assert_relative_eq!(t.matrix().get(i, i), 2.0 / (2.0 + di), epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_degree_is_named() {
        let g = load_graph(&[(0, 1, None)], Some(3), false).unwrap().graph;
        assert!(matches!(
            transition_matrix(&g, TransitionKind::RandomWalk),
            Err(Error::ZeroDegree(2))
        ));
        assert!(matches!(
            transition_matrix(&g, TransitionKind::Symmetric),
            Err(Error::ZeroDegree(2))
        ));
        // Self-loops give every node positive degree.
        assert!(transition_matrix(&g, TransitionKind::SymmetricSelfLoop(1.0)).is_ok());
    }

    #[test]
    fn bad_loop_weight() {
        let g = undirected(&[(0, 1)]);
        assert!(transition_matrix(&g, TransitionKind::SymmetricSelfLoop(0.0)).is_err());
    }
}
