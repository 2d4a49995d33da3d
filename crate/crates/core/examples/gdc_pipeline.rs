//! Run the full pipeline (diffuse, sparsify, symmetrize, renormalize) on a
//! generated SBM graph and write the result with its sidecar.
//!
//! cargo run --example gdc_pipeline -- [output-dir]

use std::path::PathBuf;

use gdc::cluster::{generate_sbm, SbmSpec};
use gdc::graph::IdMap;
use gdc::io::{sidecar_path, write_graph, Sidecar};
use gdc::pipeline::{run_pipeline, PipelineConfig};
use gdc::sparsify::SparsifyRule;

fn main() -> gdc::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (g, _) = generate_sbm(&SbmSpec::new(vec![40, 40, 40], 0.2, 0.02, 7)?)?;
    let input = dir.join("gdc_example_input.txt");
    write_graph(&input, &g, &IdMap::identity(g.n()), &Sidecar::new())?;

    let mut cfg = PipelineConfig::new(&input, dir.join("gdc_example_output.txt"));
    cfg.gdc.sparsify = Some(SparsifyRule::TargetDegree(16.0));
    let report = run_pipeline(&cfg)?;
    println!("input: {} nodes, {} edges", g.n(), g.edge_count());
    println!("output: {} entries, eps {:?}", report.output.result.to_csc().nnz(), report.output.resolved_eps);
    println!("wrote {}", cfg.output.display());
    println!("config hash {}", report.config_hash);
    print!("{}", std::fs::read_to_string(sidecar_path(&cfg.output))?);
    Ok(())
}
