//! Command-line frontend for the `gdc` binary.
//!
//! Every failure is reported as one `E_CODE: message` line on stderr. Exit
//! codes: 0 success, 1 computation error, 2 I/O or usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cluster::{eval_gdc_clustering, generate_sbm, SbmSpec, SpectralOptions};
use crate::coefficients::{closed_form_filter, convert, ArithmeticMode, Direction, DiffusionSpec, Family};
use crate::diffusion::DiffusionMode;
use crate::graph::{IdMap, TransitionKind};
use crate::io::{self, ReadOptions, Sidecar};
use crate::pipeline::{apply_gdc, run_pipeline, GdcConfig, GdcResult, OutputFormat, PipelineConfig};
use crate::sparsify::{PostOutput, PostProcess, Renorm, SparsifyRule};
use crate::spectral::{
    eigen, filter_response_curve, linspace, spectrum_compare, transition_laplacian_spectrum,
    SpectrumReport,
};
use crate::{Error, Result};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "GDC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "gdc", version, about = "Sparsified generalized graph diffusion")]
pub struct Cli {
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Diffuse, sparsify and renormalize a graph.
    Transform(TransformArgs),
    /// Compare Laplacian spectra before and after the transform and emit the
    /// filter response curve.
    Spectrum(SpectrumArgs),
    /// Convert between diffusion coefficients theta and polynomial filter
    /// coefficients xi.
    ConvertCoeffs(ConvertArgs),
    /// Sample a stochastic block model graph.
    GenSbm(GenSbmArgs),
    /// Compare spectral clustering with and without the transform on SBM graphs.
    EvalCluster(EvalClusterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ppr,
    Heat,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransitionArg {
    Rw,
    Sym,
    SymLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenormArg {
    Sym,
    Rw,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Edgelist,
    Binary,
}

/// Flags shared by every command that runs the transform.
#[derive(Args, Debug, Clone, Default)]
pub struct GdcArgs {
    /// `key = value` file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// PPR teleport probability.
    #[arg(long, conflicts_with_all = ["t", "theta_file"])]
    pub alpha: Option<f64>,
    /// Heat kernel diffusion time.
    #[arg(long, conflicts_with = "theta_file")]
    pub t: Option<f64>,
    /// Explicit coefficients theta_0..theta_K.
    #[arg(long)]
    pub theta_file: Option<PathBuf>,
    /// Exact computation (linear solve for PPR).
    #[arg(long, group = "mode")]
    pub exact: bool,
    /// Truncated series up to the power T^K.
    #[arg(long, value_name = "K", group = "mode")]
    pub series: Option<usize>,
    /// Local push approximation with this tolerance.
    #[arg(long, value_name = "EPS", group = "mode")]
    pub push: Option<f64>,
    /// `topk:K`, `eps:E`, `degree:D` or `none`.
    #[arg(long)]
    pub sparsify: Option<String>,
    #[arg(long, conflicts_with = "no_symmetrize")]
    pub symmetrize: bool,
    #[arg(long)]
    pub no_symmetrize: bool,
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long, value_enum)]
    pub renorm: Option<RenormArg>,
    #[arg(long, value_enum)]
    pub transition: Option<TransitionArg>,
    #[arg(long)]
    pub self_loop_weight: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Treat input edges as directed.
    #[arg(long)]
    pub directed: bool,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub gdc: GdcArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Eigenvalue comparison CSV; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Filter response CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    #[command(flatten)]
    pub gdc: GdcArgs,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long, value_enum, default_value = "theta-to-xi")]
    pub direction: DirectionArg,
    /// File with input coefficients.
    #[arg(long, conflicts_with_all = ["values", "method"])]
    pub input: Option<PathBuf>,
    /// Comma-separated input coefficients.
    #[arg(long, conflicts_with = "method")]
    pub values: Option<String>,
    /// Emit the closed-form xi of a PPR or heat spec instead.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, conflicts_with = "t")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Highest index emitted for `--method`.
    #[arg(long, default_value_t = 20)]
    pub order: usize,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    ThetaToXi,
    XiToTheta,
}

#[derive(Args, Debug, Clone)]
pub struct SbmArgs {
    /// Comma-separated block sizes.
    #[arg(long, default_value = "100,100,100")]
    pub blocks: String,
    #[arg(long, default_value_t = 0.06)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    pub p_out: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SbmArgs {
    fn spec(&self) -> Result<SbmSpec> {
        let sizes = self
            .blocks
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("bad block size {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SbmSpec::new(sizes, self.p_in, self.p_out, self.seed)
    }
}

#[derive(Args, Debug)]
pub struct GenSbmArgs {
    #[command(flatten)]
    pub sbm: SbmArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth labels, one per line in node order.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalClusterArgs {
    #[command(flatten)]
    pub sbm: SbmArgs,
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Per-seed CSV; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Skip unit-length normalization of embedding rows.
    #[arg(long)]
    pub no_row_normalize: bool,
    #[command(flatten)]
    pub gdc: GdcArgs,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Parse `topk:K`, `eps:E`, `degree:D` or `none`.
pub fn parse_sparsify(s: &str) -> Result<Option<SparsifyRule>> {
    if s == "none" {
        return Ok(None);
    }
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("--sparsify expects topk:K, eps:E, degree:D or none, got {s:?}")))?;
    let bad = || usage(format!("bad --sparsify value {s:?}"));
    let rule = match kind {
        "topk" => SparsifyRule::TopK(value.parse().map_err(|_| bad())?),
        "eps" => SparsifyRule::Threshold(value.parse().map_err(|_| bad())?),
        "degree" => SparsifyRule::TargetDegree(value.parse().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    rule.validate()?;
    Ok(Some(rule))
}

fn parse_mode(s: &str) -> Result<DiffusionMode> {
    let bad = || usage(format!("bad mode {s:?}; expected exact, series:K or push:EPS"));
    match s.split_once(':') {
        None if s == "exact" => Ok(DiffusionMode::Exact),
        None if s == "series" => Ok(DiffusionMode::Series { k: None }),
        Some(("series", k)) => Ok(DiffusionMode::Series {
            k: Some(k.parse().map_err(|_| bad())?),
        }),
        Some(("push", e)) => Ok(DiffusionMode::Push {
            eps: e.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| usage(format!("config: bad value {v:?} for {key}")))
}

fn value_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T> {
    T::from_str(v, false).map_err(|_| usage(format!("config: bad value {v:?} for {key}")))
}

/// Values for one command after merging the config file under the flags.
struct Merged<'a> {
    file: Sidecar,
    args: &'a GdcArgs,
}

impl<'a> Merged<'a> {
    fn new(args: &'a GdcArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => io::read_sidecar(p)?.ok_or_else(|| {
                Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("{}: config file not found", p.display()),
                ))
            })?,
            None => Sidecar::new(),
        };
        const KNOWN: &[&str] = &[
            "alpha", "directed", "format", "input", "method", "mode", "output", "renorm", "seed", "self_loop_weight",
            "sparsify", "symmetrize", "t", "theta_file", "transition", "unweighted",
        ];
        if let Some(k) = file.0.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(usage(format!("config: unknown key {k:?}")));
        }
        Ok(Self { file, args })
    }

    fn file<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.file.get(key).map(|v| parse_value(key, v)).transpose()
    }

    fn gdc(&self) -> Result<GdcConfig> {
        let a = self.args;
        let alpha = a.alpha.map_or_else(|| self.file("alpha"), |v| Ok(Some(v)))?;
        let t = a.t.map_or_else(|| self.file("t"), |v| Ok(Some(v)))?;
        let theta_file: Option<PathBuf> = a.theta_file.clone().map_or_else(|| self.file("theta_file"), |v| Ok(Some(v)))?;
        let method = match a.method {
            Some(m) => Some(m),
            None => self.file.get("method").map(|v| value_enum("method", v)).transpose()?,
        };
        let given = [alpha.is_some(), t.is_some(), theta_file.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(usage("--alpha, --t and --theta-file are mutually exclusive"));
        }
        let method = method.unwrap_or(if t.is_some() {
            MethodArg::Heat
        } else if theta_file.is_some() {
            MethodArg::Explicit
        } else {
            MethodArg::Ppr
        });
        let diffusion = match method {
            MethodArg::Ppr if t.is_some() || theta_file.is_some() => {
                return Err(usage("--method ppr takes --alpha only"))
            }
            MethodArg::Heat if alpha.is_some() || theta_file.is_some() => {
                return Err(usage("--method heat takes --t only"))
            }
            MethodArg::Explicit if alpha.is_some() || t.is_some() => {
                return Err(usage("--method explicit takes --theta-file only"))
            }
            MethodArg::Ppr => DiffusionSpec::ppr(alpha.unwrap_or(0.15))?,
            MethodArg::Heat => DiffusionSpec::heat(t.unwrap_or(5.0))?,
            MethodArg::Explicit => {
                let path = theta_file.ok_or_else(|| usage("--method explicit needs --theta-file"))?;
                DiffusionSpec::explicit(io::read_float_list(&path)?)?
            }
        };

        let mode = if a.exact {
            DiffusionMode::Exact
        } else if let Some(k) = a.series {
            DiffusionMode::Series { k: Some(k) }
        } else if let Some(eps) = a.push {
            DiffusionMode::Push { eps }
        } else if let Some(m) = self.file.get("mode") {
            parse_mode(m)?
        } else {
            DiffusionMode::Exact
        };

        let sparsify = match a.sparsify.as_deref().or(self.file.get("sparsify")) {
            Some(s) => parse_sparsify(s)?,
            None => Some(SparsifyRule::TopK(64)),
        };
        let symmetrize = if a.symmetrize {
            true
        } else if a.no_symmetrize {
            false
        } else {
            self.file("symmetrize")?.unwrap_or(true)
        };
        let unweighted = a.unweighted || self.file("unweighted")?.unwrap_or(false);
        let renorm = match a.renorm {
            Some(r) => r,
            None => self
                .file
                .get("renorm")
                .map(|v| value_enum("renorm", v))
                .transpose()?
                .unwrap_or(RenormArg::Rw),
        };

        let mut loop_weight = a.self_loop_weight.map_or_else(|| self.file("self_loop_weight"), |v| Ok(Some(v)))?;
        let transition = match (a.transition, self.file.get("transition")) {
            (Some(t), _) => t,
            // Also accept the `sym-loop:W` form written to sidecars.
            (None, Some(v)) if v.starts_with("sym-loop:") => {
                if loop_weight.is_none() {
                    loop_weight = Some(parse_value("transition", &v["sym-loop:".len()..])?);
                }
                TransitionArg::SymLoop
            }
            (None, Some(v)) => value_enum("transition", v)?,
            (None, None) => TransitionArg::SymLoop,
        };
        let transition = match (transition, loop_weight) {
            (TransitionArg::SymLoop, w) => TransitionKind::SymmetricSelfLoop(w.unwrap_or(1.0)),
            (_, Some(_)) => return Err(usage("--self-loop-weight requires --transition sym-loop")),
            (TransitionArg::Rw, None) => TransitionKind::RandomWalk,
            (TransitionArg::Sym, None) => TransitionKind::Symmetric,
        };
        self.finish(diffusion, mode, sparsify, symmetrize, unweighted, renorm, transition)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        diffusion: DiffusionSpec,
        mode: DiffusionMode,
        sparsify: Option<SparsifyRule>,
        symmetrize: bool,
        unweighted: bool,
        renorm: RenormArg,
        transition: TransitionKind,
    ) -> Result<GdcConfig> {
        transition.validate()?;
        if let DiffusionMode::Push { eps } = mode {
            if !(eps > 0.0) {
                return Err(usage("--push needs a positive tolerance"));
            }
            if transition != TransitionKind::RandomWalk {
                return Err(usage("--push requires --transition rw"));
            }
        }
        Ok(GdcConfig {
            transition,
            diffusion,
            mode,
            sparsify,
            post: PostProcess {
                symmetrize,
                unweighted,
                renorm: match renorm {
                    RenormArg::Sym => Renorm::SymmetricOnSTilde,
                    RenormArg::Rw => Renorm::RandomWalkOnSTilde,
                    RenormArg::None => Renorm::None,
                },
            },
        })
    }
}

/// Build the pipeline configuration for `transform`. Flags override values
/// from `--config`.
pub fn parse_config(args: &TransformArgs) -> Result<PipelineConfig> {
    let merged = Merged::new(&args.gdc)?;
    let gdc = merged.gdc()?;
    let input: PathBuf = args
        .input
        .clone()
        .map_or_else(|| merged.file("input"), |v| Ok(Some(v)))?
        .ok_or_else(|| usage("--input is required"))?;
    let output: PathBuf = args
        .output
        .clone()
        .map_or_else(|| merged.file("output"), |v| Ok(Some(v)))?
        .ok_or_else(|| usage("--output is required"))?;
    if input.as_os_str().is_empty() || output.as_os_str().is_empty() {
        return Err(usage("paths must be nonempty"));
    }
    let format = match args.format {
        Some(f) => f,
        None => merged
            .file
            .get("format")
            .map(|v| value_enum("format", v))
            .transpose()?
            .unwrap_or(FormatArg::Edgelist),
    };
    Ok(PipelineConfig {
        input,
        output,
        directed: args.directed || merged.file("directed")?.unwrap_or(false),
        gdc,
        format: match format {
            FormatArg::Edgelist => OutputFormat::EdgeList,
            FormatArg::Binary => OutputFormat::Binary,
        },
        seed: args.seed.map_or_else(|| merged.file("seed"), |v| Ok(Some(v)))?.unwrap_or(0),
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(fs::File::create(p).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_transform(args: &TransformArgs) -> Result<()> {
    let cfg = parse_config(args)?;
    let report = run_pipeline(&cfg)?;
    log::info!("config hash {}", report.config_hash);
    Ok(())
}

fn after_spectrum(result: &GdcResult) -> Result<SpectrumReport> {
    match result {
        GdcResult::Sparse(PostOutput::Transition(t)) => transition_laplacian_spectrum(t, false),
        GdcResult::Sparse(PostOutput::Graph(g)) => {
            crate::spectral::laplacian_spectrum(g, crate::spectral::LaplacianKind::Symmetric, false)
        }
        GdcResult::Diffusion(s) => {
            let n = s.n();
            let mut r = eigen(&(nalgebra::DMatrix::identity(n, n) - s.to_dense()), false)?;
            r.source = "I - S".into();
            Ok(r)
        }
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let gdc = Merged::new(&args.gdc)?.gdc()?;
    let loaded = io::read_graph(&args.input, ReadOptions::default())?;
    let t = crate::graph::transition_matrix(&loaded.graph, gdc.transition)?;
    let before = transition_laplacian_spectrum(&t, false)?;
    let out = apply_gdc(&loaded.graph, &gdc)?;
    let after = after_spectrum(&out.result)?;
    let cmp = spectrum_compare(&before, &after)?;

    let mut w = open_out(args.output.as_deref())?;
    writeln!(w, "index,lambda_before,lambda_after,delta")?;
    for (i, ((b, a), d)) in before.eigenvalues.iter().zip(&after.eigenvalues).zip(&cmp.deltas).enumerate() {
        writeln!(w, "{i},{b},{a},{d}")?;
    }
    w.flush()?;
    if let Some(path) = &args.curve {
        let curve = filter_response_curve(&gdc.diffusion, &linspace(0.0, 2.0, args.grid_points))?;
        let mut w = open_out(Some(path))?;
        writeln!(w, "lambda_L,response")?;
        for (l, r) in curve {
            writeln!(w, "{l},{r}")?;
        }
        w.flush()?;
    }
    eprintln!("l2 deviation {} max {}", cmp.l2, cmp.max_abs);
    Ok(())
}

fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let values: Vec<f64> = if let Some(method) = args.method {
        let spec = match method {
            MethodArg::Ppr if args.t.is_none() => DiffusionSpec::ppr(args.alpha.unwrap_or(0.15))?,
            MethodArg::Heat if args.alpha.is_none() => DiffusionSpec::heat(args.t.unwrap_or(5.0))?,
            MethodArg::Explicit => return Err(usage("--method explicit has no closed form; pass --values")),
            _ => return Err(usage("--alpha goes with ppr and --t with heat")),
        };
        if args.direction != DirectionArg::ThetaToXi {
            return Err(usage("--method produces xi; use --direction theta-to-xi"));
        }
        if let Family::Ppr { alpha } = spec.family {
            if alpha <= 0.5 {
                log::warn!("the PPR filter series converges only for alpha > 0.5");
            }
        }
        closed_form_filter(&spec, args.order)?.xi
    } else {
        let input = match (&args.input, &args.values) {
            (Some(p), None) => io::read_float_list(p)?,
            (None, Some(v)) => io::parse_float_list(v)?,
            _ => return Err(usage("pass exactly one of --input, --values or --method")),
        };
        let direction = match args.direction {
            DirectionArg::ThetaToXi => Direction::ThetaToXi,
            DirectionArg::XiToTheta => Direction::XiToTheta,
        };
        let mode = if args.exact { ArithmeticMode::Exact } else { ArithmeticMode::Float };
        convert(&input, direction, mode)?
    };
    let mut w = open_out(args.output.as_deref())?;
    writeln!(w, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen_sbm(args: &GenSbmArgs) -> Result<()> {
    let spec = args.sbm.spec()?;
    let (g, labels) = generate_sbm(&spec)?;
    let mut meta = Sidecar::new();
    meta.set("blocks", &args.sbm.blocks)
        .set("p_in", spec.p_in)
        .set("p_out", spec.p_out)
        .set("seed", spec.seed);
    io::write_graph(&args.output, &g, &IdMap::identity(g.n()), &meta)?;
    if let Some(p) = &args.labels {
        let mut w = open_out(Some(p))?;
        for l in labels {
            writeln!(w, "{l}")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_eval_cluster(args: &EvalClusterArgs) -> Result<()> {
    let spec = args.sbm.spec()?;
    let gdc = Merged::new(&args.gdc)?.gdc()?;
    let opts = SpectralOptions {
        normalize_rows: !args.no_row_normalize,
        ..SpectralOptions::default()
    };
    let report = eval_gdc_clustering(&spec, &gdc, args.seeds, opts)?;
    match &args.output {
        Some(p) => {
            fs::write(p, report.to_csv())?;
            print!("{}", report.summary());
        }
        None => print!("{}\n{}", report.to_csv(), report.summary()),
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        // Fails only if a pool already exists, e.g. when called twice in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match &cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::ConvertCoeffs(a) => cmd_convert(a),
        Command::GenSbm(a) => cmd_gen_sbm(a),
        Command::EvalCluster(a) => cmd_eval_cluster(a),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("E_USAGE: {}", one_line(first.trim_start_matches("error:")));
            return 2;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}: {}", e.code(), one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transform(args: &[&str]) -> Result<PipelineConfig> {
        let mut full = vec!["gdc", "transform", "--input", "in.txt", "--output", "out.txt"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).map_err(|e| usage(e.to_string()))?.command {
            Command::Transform(a) => parse_config(&a),
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults() {
        let c = transform(&[]).unwrap();
        assert_eq!(c.gdc, GdcConfig::default());
        assert_eq!(c.format, OutputFormat::EdgeList);
    }

    #[test]
    fn heat_with_threshold() {
        let c = transform(&["--method", "heat", "--t", "5", "--sparsify", "eps:0.0001"]).unwrap();
        assert_eq!(c.gdc.diffusion, DiffusionSpec::heat(5.0).unwrap());
        assert_eq!(c.gdc.sparsify, Some(SparsifyRule::Threshold(1e-4)));
    }

    #[test]
    fn target_degree() {
        let c = transform(&["--sparsify", "degree:64"]).unwrap();
        assert_eq!(c.gdc.sparsify, Some(SparsifyRule::TargetDegree(64.0)));
    }

    #[test]
    fn conflicts_are_usage_errors() {
        for bad in [
            &["--alpha", "0.1", "--t", "3"][..],
            &["--method", "heat", "--alpha", "0.1"],
            &["--exact", "--series", "10"],
            &["--symmetrize", "--no-symmetrize"],
            &["--sparsify", "topk:0"],
            &["--sparsify", "top:3"],
            &["--transition", "rw", "--self-loop-weight", "2"],
            &["--push", "1e-4"],
        ] {
            let e = transform(bad).unwrap_err();
            assert_eq!(e.code(), "E_USAGE", "{bad:?}");
        }
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg");
        fs::write(&p, "method = heat\nt = 3\nsparsify = topk:8\ntransition = sym-loop:2\nrenorm = none\n").unwrap();
        let c = transform(&["--config", p.to_str().unwrap(), "--sparsify", "eps:0.01"]).unwrap();
        assert_eq!(c.gdc.diffusion, DiffusionSpec::heat(3.0).unwrap());
        assert_eq!(c.gdc.sparsify, Some(SparsifyRule::Threshold(0.01)));
        assert_eq!(c.gdc.transition, TransitionKind::SymmetricSelfLoop(2.0));
        assert_eq!(c.gdc.post.renorm, Renorm::None);
        fs::write(&p, "colour = blue\n").unwrap();
        assert!(transform(&["--config", p.to_str().unwrap()]).is_err());
    }
}
