//! The end-to-end transform: graph in, sparsified diffusion graph out, with a
//! provenance sidecar.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::coefficients::{DiffusionSpec, Family, Truncation};
use crate::csc::CscMatrix;
use crate::diffusion::{diffuse, DiffusionMatrix, DiffusionMode};
use crate::graph::{transition_matrix, IdMap, SparseGraph, TransitionKind};
use crate::io::{self, ReadOptions, Sidecar};
use crate::sparsify::{postprocess, resolve_rule, sparsify, PostOutput, PostProcess, SparsifyRule};
use crate::Result;

/// Everything that determines the transformed graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GdcConfig {
    pub transition: TransitionKind,
    pub diffusion: DiffusionSpec,
    pub mode: DiffusionMode,
    /// `None` skips sparsification and post-processing and returns `S`.
    pub sparsify: Option<SparsifyRule>,
    pub post: PostProcess,
}

impl Default for GdcConfig {
    /// Self-loop symmetric transition, PPR with `alpha = 0.15`, top-64,
    /// symmetrized and renormalized as a random walk.
    fn default() -> Self {
        Self {
            transition: TransitionKind::SymmetricSelfLoop(1.0),
            diffusion: DiffusionSpec::ppr(0.15).expect("valid alpha"),
            mode: DiffusionMode::Exact,
            sparsify: Some(SparsifyRule::TopK(64)),
            post: PostProcess::default(),
        }
    }
}

impl GdcConfig {
    /// Stable `key = value` description of every parameter.
    pub fn describe(&self) -> Sidecar {
        let mut s = Sidecar::new();
        s.set("transition", self.transition);
        match &self.diffusion.family {
            Family::Ppr { alpha } => s.set("method", "ppr").set("alpha", alpha),
            Family::Heat { t } => s.set("method", "heat").set("t", t),
            Family::Explicit { theta } => s.set("method", "explicit").set(
                "theta",
                theta.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            ),
        };
        if let Truncation::SeriesK { k } = self.diffusion.truncation {
            s.set("spec_series_k", k);
        }
        match self.mode {
            DiffusionMode::Exact => s.set("mode", "exact"),
            DiffusionMode::Series { k: Some(k) } => s.set("mode", format!("series:{k}")),
            DiffusionMode::Series { k: None } => s.set("mode", "series"),
            DiffusionMode::Push { eps } => s.set("mode", format!("push:{eps}")),
        };
        match self.sparsify {
            Some(rule) => {
                s.set("sparsify", rule)
                    .set("symmetrize", self.post.symmetrize)
                    .set("unweighted", self.post.unweighted)
                    .set("renorm", self.post.renorm);
            }
            None => {
                s.set("sparsify", "none");
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub enum GdcResult {
    /// The diffusion matrix itself, when no sparsification was requested.
    Diffusion(DiffusionMatrix),
    Sparse(PostOutput),
}

impl GdcResult {
    /// Output as a matrix with exact zeros and negative round-off removed.
    pub fn to_csc(&self) -> CscMatrix {
        match self {
            GdcResult::Diffusion(s) => {
                let mut m = s.to_csc();
                m.prune(|_, _, v| v > 0.0);
                m
            }
            GdcResult::Sparse(p) => p.matrix().clone(),
        }
    }

    /// Output as a graph; directed unless the matrix is exactly symmetric.
    pub fn to_graph(&self) -> SparseGraph {
        if let GdcResult::Sparse(PostOutput::Graph(g)) = self {
            return g.clone();
        }
        let m = self.to_csc();
        let directed = !m.is_symmetric();
        SparseGraph::from_adjacency(m, directed)
    }
}

#[derive(Debug, Clone)]
pub struct GdcOutput {
    pub result: GdcResult,
    /// Threshold actually applied, for threshold and target-degree rules.
    pub resolved_eps: Option<f64>,
    pub diffusion_nnz: usize,
    /// Wall time per stage in milliseconds.
    pub timings: Vec<(&'static str, f64)>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Run transition, diffusion, sparsification and post-processing on `g`.
pub fn apply_gdc(g: &SparseGraph, cfg: &GdcConfig) -> Result<GdcOutput> {
    if cfg.diffusion.is_identity() {
        log::warn!("diffusion spec is the identity; output is the self-loop-only graph");
    }
    let mut timings = Vec::new();
    let t0 = Instant::now();
    let t = transition_matrix(g, cfg.transition)?;
    timings.push(("transition", ms_since(t0)));

    let t0 = Instant::now();
    let s = diffuse(&t, &cfg.diffusion, cfg.mode)?;
    timings.push(("diffusion", ms_since(t0)));
    let diffusion_nnz = s.nnz();

    let Some(rule) = cfg.sparsify else {
        return Ok(GdcOutput {
            result: GdcResult::Diffusion(s),
            resolved_eps: None,
            diffusion_nnz,
            timings,
        });
    };
    let t0 = Instant::now();
    let (rule, resolved_eps) = resolve_rule(&s, rule)?;
    let sparse = sparsify(&s, rule)?;
    timings.push(("sparsify", ms_since(t0)));

    let t0 = Instant::now();
    let out = postprocess(&sparse, cfg.post)?;
    timings.push(("postprocess", ms_since(t0)));
    Ok(GdcOutput {
        result: GdcResult::Sparse(out),
        resolved_eps,
        diffusion_nnz,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    EdgeList,
    /// Binary column store, see [`io::write_csc_binary`].
    Binary,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::EdgeList => "edgelist",
            OutputFormat::Binary => "binary",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Treat the input as directed (unless its sidecar says otherwise).
    pub directed: bool,
    pub gdc: GdcConfig,
    pub format: OutputFormat,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
            directed: false,
            gdc: GdcConfig::default(),
            format: OutputFormat::default(),
            seed: 0,
        }
    }

    /// Parameters that influence the output, excluding paths.
    pub fn describe(&self) -> Sidecar {
        let mut s = self.gdc.describe();
        s.set("input_directed", self.directed)
            .set("format", self.format)
            .set("seed", self.seed);
        s
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub output: GdcOutput,
    pub config_hash: String,
    pub metadata: Sidecar,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Load the input, run [`apply_gdc`] and write the output plus its sidecar.
///
/// The config hash covers every parameter and the input bytes, but not the
/// paths, timings or timestamp.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let t0 = Instant::now();
    let input_bytes = fs::read(&cfg.input).map_err(|e| {
        crate::Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", cfg.input.display())))
    })?;
    let loaded = io::read_graph(
        &cfg.input,
        ReadOptions {
            directed: cfg.directed,
            allow_self_loops: false,
        },
    )?;
    let load_ms = ms_since(t0);

    let out = apply_gdc(&loaded.graph, &cfg.gdc)?;

    let mut meta = cfg.describe();
    meta.set("input_sha256", sha256_hex(&input_bytes));
    let config_hash = sha256_hex(meta.to_text().as_bytes());
    meta.set("config_sha256", &config_hash)
        .set("input", cfg.input.display())
        .set("output", cfg.output.display())
        .set("diffusion_nnz", out.diffusion_nnz)
        .set("eps_resolved", out.resolved_eps.map_or("none".to_string(), |e| e.to_string()))
        .set("tool_version", env!("CARGO_PKG_VERSION"))
        .set(
            "timestamp_unix",
            SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        )
        .set("time_load_ms", format!("{load_ms:.3}"));
    for (stage, ms) in &out.timings {
        meta.set(format!("time_{stage}_ms"), format!("{ms:.3}"));
    }

    let t0 = Instant::now();
    write_result(&cfg.output, cfg.format, &out.result, &loaded.ids, &meta)?;
    meta.set("time_write_ms", format!("{:.3}", ms_since(t0)));
    // Rewrite the sidecar so it includes the write time.
    write_result_sidecar(&cfg.output, &out.result, &loaded.ids, &meta)?;

    Ok(PipelineReport {
        output: out,
        config_hash,
        metadata: meta,
    })
}

fn write_result(path: &std::path::Path, format: OutputFormat, r: &GdcResult, ids: &IdMap, meta: &Sidecar) -> Result<()> {
    match format {
        OutputFormat::EdgeList => io::write_graph(path, &r.to_graph(), ids, meta),
        OutputFormat::Binary => {
            io::write_csc_file(path, &r.to_csc())?;
            write_result_sidecar(path, r, ids, meta)
        }
    }
}

fn write_result_sidecar(path: &std::path::Path, r: &GdcResult, ids: &IdMap, meta: &Sidecar) -> Result<()> {
    let mut full = meta.clone();
    full.extend(&io::graph_sidecar(&r.to_graph(), ids));
    fs::write(io::sidecar_path(path), full.to_text())?;
    Ok(())
}
