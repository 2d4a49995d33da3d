//! Planted-partition graphs and unsupervised evaluation: spectral clustering,
//! k-means and Hungarian-matched accuracy.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{largest_connected_component, SparseGraph};
use crate::pipeline::{apply_gdc, GdcConfig};
use crate::sparsify::Renorm;
use crate::spectral::{laplacian_spectrum, LaplacianKind};
use crate::{Error, Result};

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_RESTARTS: usize = 10;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Largest number of clusters or classes accepted by [`hungarian_accuracy`].
pub const MAX_MATCH_SIZE: usize = 64;

/// Stochastic block model with one within-block and one cross-block edge
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl SbmSpec {
    pub fn new(block_sizes: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> Result<Self> {
        let s = Self {
            block_sizes,
            p_in,
            p_out,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::InvalidParameter("block sizes must be positive".into()));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Block index of every node, blocks laid out consecutively.
    pub fn labels(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
            .collect()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Sample an undirected, unweighted graph and its ground-truth labels.
pub fn generate_sbm(spec: &SbmSpec) -> Result<(SparseGraph, Vec<usize>)> {
    spec.validate()?;
    let labels = spec.labels();
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { spec.p_in } else { spec.p_out };
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Ok((SparseGraph::from_triplets(n, &edges, false)?, labels))
}

/// Erdős–Rényi graph: every pair is an edge with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<SparseGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    SparseGraph::from_triplets(n, &edges, false)
}

/// First connected [`generate_er`] sample, trying seeds `seed`, `seed + 1`, ...
pub fn generate_connected_er(n: usize, p: f64, seed: u64) -> Result<SparseGraph> {
    for attempt in 0..10_000u64 {
        let g = generate_er(n, p, seed.wrapping_add(attempt))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::InvalidParameter(format!("no connected sample for n = {n}, p = {p}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// `k x d`, one centroid per row.
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Inertia after each assignment step of the returned run.
    pub history: Vec<f64>,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, c: &DMatrix<f64>, k: usize) -> f64 {
    (0..points.ncols()).map(|d| (points[(i, d)] - c[(k, d)]).powi(2)).sum()
}

fn seed_plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut best: Vec<f64> = vec![f64::INFINITY; n];
    while chosen.len() < k {
        let last = *chosen.last().unwrap();
        for (i, b) in best.iter_mut().enumerate() {
            let d: f64 = (0..points.ncols()).map(|d| (points[(i, d)] - points[(last, d)]).powi(2)).sum();
            *b = b.min(d);
        }
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &b) in best.iter().enumerate() {
                if b > 0.0 && target < b {
                    pick = i;
                    break;
                }
                target -= b;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        chosen.push(next);
    }
    DMatrix::from_fn(k, points.ncols(), |r, c| points[(chosen[r], c)])
}

fn lloyd(points: &DMatrix<f64>, mut centroids: DMatrix<f64>) -> KMeansResult {
    let (n, dim) = points.shape();
    let k = centroids.nrows();
    let mut assignment = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let (best, dist) = (0..k)
                .map(|c| (c, sq_dist(points, i, &centroids, c)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            inertia += dist;
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for d in 0..dim {
                sums[(c, d)] += points[(i, d)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    centroids[(c, d)] = sums[(c, d)] / counts[c] as f64;
                }
            }
        }
    }
    KMeansResult {
        assignment,
        inertia: *history.last().unwrap(),
        centroids,
        history,
    }
}

/// k-means on the rows of `points`: k-means++ seeding, Lloyd iterations until
/// the assignment is stable (at most [`KMEANS_MAX_ITER`]), best inertia over
/// `restarts` runs.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k-means needs 1 <= k <= {n}, got k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, seed_plus_plus(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm with
/// potentials). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "cost matrix must be square");
    // 1-based arrays; index 0 is a virtual column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignment: Vec<usize>,
    pub accuracy: f64,
    /// Class matched to each cluster id; `None` for unmatched clusters.
    pub matched_permutation: Vec<Option<usize>>,
}

/// Match clusters to classes maximizing agreement and report the matched
/// fraction.
pub fn hungarian_accuracy(assignment: &[usize], labels: &[usize]) -> Result<ClusteringResult> {
    if assignment.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: assignment.len(),
        });
    }
    if assignment.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let clusters = assignment.iter().max().unwrap() + 1;
    let classes = labels.iter().max().unwrap() + 1;
    let size = clusters.max(classes);
    if size > MAX_MATCH_SIZE {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_MATCH_SIZE} clusters and classes can be matched, got {size}"
        )));
    }
    let mut table = DMatrix::<f64>::zeros(size, size);
    for (&a, &l) in assignment.iter().zip(labels) {
        table[(a, l)] += 1.0;
    }
    let top = table.max();
    let cost = table.map(|c| top - c);
    let matching = min_cost_assignment(&cost);
    let matched: f64 = matching.iter().enumerate().map(|(c, &l)| table[(c, l)]).sum();
    let matched_permutation = (0..clusters).map(|c| (matching[c] < classes).then_some(matching[c])).collect();
    Ok(ClusteringResult {
        assignment: assignment.to_vec(),
        accuracy: matched / assignment.len() as f64,
        matched_permutation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralOptions {
    /// Scale embedding rows to unit length before k-means.
    pub normalize_rows: bool,
    pub restarts: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            normalize_rows: true,
            restarts: KMEANS_RESTARTS,
        }
    }
}

/// Rows of the eigenvectors of `L_sym` for the `k` smallest eigenvalues.
pub fn spectral_embedding(g: &SparseGraph, k: usize, normalize_rows: bool) -> Result<DMatrix<f64>> {
    if k < 2 || k > g.n() {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= clusters <= {}, got {k}",
            g.n()
        )));
    }
    let (_, components) = g.components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let report = laplacian_spectrum(g, LaplacianKind::Symmetric, true)?;
    let u = report.eigenvectors.expect("requested eigenvectors");
    let mut emb = u.columns(0, k).into_owned();
    if normalize_rows {
        for mut row in emb.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
    }
    Ok(emb)
}

/// Spectral clustering with `L_sym` followed by k-means.
pub fn spectral_cluster(g: &SparseGraph, k: usize, seed: u64, opts: SpectralOptions) -> Result<Vec<usize>> {
    let emb = spectral_embedding(g, k, opts.normalize_rows)?;
    Ok(kmeans(&emb, k, seed, opts.restarts)?.assignment)
}

/// Percentile bootstrap confidence interval of the mean.
pub fn bootstrap_mean_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| *values.choose(&mut rng).unwrap()).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (resamples - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        means[lo] + (means[hi] - means[lo]) * (pos - lo as f64)
    };
    let tail = (1.0 - level) / 2.0;
    (q(tail), q(1.0 - tail))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    /// Nodes in the largest connected component that both arms cluster.
    pub nodes: usize,
    pub raw_accuracy: f64,
    pub gdc_accuracy: f64,
}

impl SeedResult {
    pub fn delta(&self) -> f64 {
        self.gdc_accuracy - self.raw_accuracy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringReport {
    pub rows: Vec<SeedResult>,
    pub raw_mean: f64,
    pub gdc_mean: f64,
    pub delta_mean: f64,
    pub raw_ci: (f64, f64),
    pub gdc_ci: (f64, f64),
    /// Paired bootstrap 95% interval of the mean accuracy difference.
    pub delta_ci: (f64, f64),
}

impl ClusteringReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,nodes,raw_accuracy,gdc_accuracy,delta\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.seed, r.nodes, r.raw_accuracy, r.gdc_accuracy, r.delta()));
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "seeds: {}\nraw mean: {:.4} [{:.4}, {:.4}]\ngdc mean: {:.4} [{:.4}, {:.4}]\ndelta mean: {:.4} [{:.4}, {:.4}]\n",
            self.rows.len(),
            self.raw_mean,
            self.raw_ci.0,
            self.raw_ci.1,
            self.gdc_mean,
            self.gdc_ci.0,
            self.gdc_ci.1,
            self.delta_mean,
            self.delta_ci.0,
            self.delta_ci.1
        )
    }
}

/// Cluster one sampled graph with and without GDC.
///
/// Both arms work on the largest connected component of the raw graph. The
/// GDC arm clusters the sparsified graph after symmetrization; the
/// configured renormalization is skipped because spectral clustering
/// normalizes on its own.
pub fn eval_seed(spec: &SbmSpec, gdc: &GdcConfig, opts: SpectralOptions) -> Result<SeedResult> {
    let (g, labels) = generate_sbm(spec)?;
    let (lcc, map) = largest_connected_component(&g)?;
    let labels: Vec<usize> = map
        .iter()
        .zip(&labels)
        .filter_map(|(m, &l)| m.map(|_| l))
        .collect();
    let k = spec.block_sizes.len();
    let cluster_seed = spec.seed ^ 0x9e37_79b9_7f4a_7c15;

    let raw = spectral_cluster(&lcc, k, cluster_seed, opts)?;
    let raw_accuracy = hungarian_accuracy(&raw, &labels)?.accuracy;

    let mut cfg = gdc.clone();
    cfg.post.symmetrize = true;
    cfg.post.renorm = Renorm::None;
    let out = apply_gdc(&lcc, &cfg)?.result.to_graph();
    let gdc_assign = spectral_cluster(&out, k, cluster_seed, opts)?;
    let gdc_accuracy = hungarian_accuracy(&gdc_assign, &labels)?.accuracy;

    Ok(SeedResult {
        seed: spec.seed,
        nodes: lcc.n(),
        raw_accuracy,
        gdc_accuracy,
    })
}

/// Paired comparison over `seeds` graphs. Graph `i` uses seed
/// `spec.seed + i`; seeds run in parallel.
pub fn eval_gdc_clustering(spec: &SbmSpec, gdc: &GdcConfig, seeds: usize, opts: SpectralOptions) -> Result<ClusteringReport> {
    spec.validate()?;
    if seeds == 0 {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    let rows = (0..seeds as u64)
        .into_par_iter()
        .map(|i| eval_seed(&spec.with_seed(spec.seed.wrapping_add(i)), gdc, opts))
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = rows.iter().map(|r| r.raw_accuracy).collect();
    let gdc_acc: Vec<f64> = rows.iter().map(|r| r.gdc_accuracy).collect();
    let delta: Vec<f64> = rows.iter().map(SeedResult::delta).collect();
    let ci = |v: &[f64]| bootstrap_mean_ci(v, 0.95, BOOTSTRAP_RESAMPLES, spec.seed);
    Ok(ClusteringReport {
        raw_mean: mean(&raw),
        gdc_mean: mean(&gdc_acc),
        delta_mean: mean(&delta),
        raw_ci: ci(&raw),
        gdc_ci: ci(&gdc_acc),
        delta_ci: ci(&delta),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsify::SparsifyRule;

    #[test]
    fn sbm_validation() {
        assert!(SbmSpec::new(vec![3, 3], 0.0, 0.0, 1).is_err());
        assert!(SbmSpec::new(vec![3, 3], 0.2, 0.3, 1).is_err());
        assert!(SbmSpec::new(vec![], 0.5, 0.1, 1).is_err());
    }

    #[test]
    fn sbm_disjoint_triangles() {
        let (g, labels) = generate_sbm(&SbmSpec::new(vec![3, 3], 1.0, 0.0, 5).unwrap()).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.components().1, 2);
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn sbm_is_deterministic() {
        let s = SbmSpec::new(vec![20, 20], 0.3, 0.05, 9).unwrap();
        assert_eq!(generate_sbm(&s).unwrap(), generate_sbm(&s).unwrap());
        assert_ne!(generate_sbm(&s).unwrap().0, generate_sbm(&s.with_seed(10)).unwrap().0);
    }

    #[test]
    fn sbm_within_block_edges_match_expectation() {
        let mut total = 0usize;
        for seed in 0..30 {
            let s = SbmSpec::new(vec![100, 100], 0.1, 0.01, seed).unwrap();
            let (g, labels) = generate_sbm(&s).unwrap();
            total += g.to_edges().iter().filter(|(a, b, _)| labels[*a] == labels[*b]).count();
        }
        let mean = total as f64 / 30.0;
        // Binomial(2 * C(100, 2), 0.1) per graph, averaged over 30 graphs.
        let trials: f64 = 2.0 * 4950.0;
        let sd = (trials * 0.1 * 0.9 / 30.0).sqrt();
        assert!((mean - 990.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn kmeans_separates_clouds() {
        let pts = DMatrix::from_row_slice(6, 2, &[0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.0, 5.0, 5.1]);
        let r = kmeans(&pts, 2, 1, KMEANS_RESTARTS).unwrap();
        assert_eq!(hungarian_accuracy(&r.assignment, &[0, 0, 0, 1, 1, 1]).unwrap().accuracy, 1.0);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn kmeans_degenerate_inputs() {
        let same = DMatrix::from_element(5, 2, 1.0);
        let r = kmeans(&same, 2, 3, 3).unwrap();
        assert_eq!(r.inertia, 0.0);
        let pts = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 3.0, 7.0]);
        let r = kmeans(&pts, 4, 3, 1).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut ids = r.assignment.clone();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert!(kmeans(&pts, 5, 0, 1).is_err());
    }

    #[test]
    fn kmeans_inertia_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = DMatrix::from_fn(200, 3, |_, _| rng.gen::<f64>());
        let r = kmeans(&pts, 6, 2, 1).unwrap();
        assert!(r.history.len() > 1);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn hungarian_examples() {
        let labels = [0, 0, 1, 1, 2, 2];
        assert_eq!(hungarian_accuracy(&labels, &labels).unwrap().accuracy, 1.0);
        let perm = [2, 2, 0, 0, 1, 1];
        let r = hungarian_accuracy(&perm, &labels).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.matched_permutation, vec![Some(1), Some(2), Some(0)]);
        assert_eq!(hungarian_accuracy(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap().accuracy, 0.5);
        assert!(hungarian_accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let cost = DMatrix::from_fn(n, n, |_, _| rng.gen_range(0..10) as f64);
            let a = min_cost_assignment(&cost);
            let got: f64 = a.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best = f64::INFINITY;
            permutations(&mut perm, 0, &mut |p| {
                best = best.min(p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum());
            });
            assert_eq!(got, best);
        }
    }

    fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permutations(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn two_cliques_with_bridge() {
        let mut e = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    e.push((base + i, base + j, 1.0));
                }
            }
        }
        e.push((0, 5, 1.0));
        let g = SparseGraph::from_triplets(10, &e, false).unwrap();
        let a = spectral_cluster(&g, 2, 0, SpectralOptions::default()).unwrap();
        let labels: Vec<usize> = (0..10).map(|i| i / 5).collect();
        assert_eq!(hungarian_accuracy(&a, &labels).unwrap().accuracy, 1.0);
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let g = SparseGraph::from_triplets(4, &[(0, 1, 1.0), (2, 3, 1.0)], false).unwrap();
        assert!(matches!(
            spectral_cluster(&g, 2, 0, SpectralOptions::default()),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn complete_graph_has_no_structure() {
        let mut e = Vec::new();
        for i in 0..20 {
            for j in i + 1..20 {
                e.push((i, j, 1.0));
            }
        }
        let g = SparseGraph::from_triplets(20, &e, false).unwrap();
        let a = spectral_cluster(&g, 2, 0, SpectralOptions::default()).unwrap();
        let labels: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let acc = hungarian_accuracy(&a, &labels).unwrap().accuracy;
        assert!((0.5..=1.0).contains(&acc));
    }

    #[test]
    fn well_separated_sbm_clusters_accurately() {
        let mut accs = Vec::new();
        for seed in 0..20 {
            let s = SbmSpec::new(vec![50, 50], 0.2, 0.02, seed).unwrap();
            let (g, labels) = generate_sbm(&s).unwrap();
            let (lcc, map) = largest_connected_component(&g).unwrap();
            let labels: Vec<usize> = map.iter().zip(&labels).filter_map(|(m, &l)| m.map(|_| l)).collect();
            let a = spectral_cluster(&lcc, 2, seed, SpectralOptions::default()).unwrap();
            accs.push(hungarian_accuracy(&a, &labels).unwrap().accuracy);
        }
        assert!(mean(&accs) > 0.9, "{accs:?}");
    }

    #[test]
    fn bootstrap_single_value_is_degenerate() {
        assert_eq!(bootstrap_mean_ci(&[0.7], 0.95, 1000, 1), (0.7, 0.7));
        let (lo, hi) = bootstrap_mean_ci(&[0.0, 1.0, 0.0, 1.0, 1.0, 0.0], 0.95, 1000, 1);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn nearly_disjoint_blocks_both_arms_perfect() {
        // Clustering needs a connected graph, so the blocks share a few edges
        // and top-k keeps every entry.
        let spec = SbmSpec::new(vec![12, 12], 1.0, 0.1, 0).unwrap();
        let cfg = GdcConfig {
            sparsify: Some(SparsifyRule::TopK(24)),
            ..GdcConfig::default()
        };
        let r = eval_gdc_clustering(&spec, &cfg, 3, SpectralOptions::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.nodes, 24);
            assert_eq!(row.raw_accuracy, 1.0);
            assert_eq!(row.gdc_accuracy, 1.0);
        }
        assert_eq!(r.delta_mean, 0.0);
        let one = eval_gdc_clustering(&spec, &cfg, 1, SpectralOptions::default()).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.delta_ci, (0.0, 0.0));
    }
}
