//! Compute a PPR and a heat-kernel diffusion matrix on a small graph three
//! ways and compare them.
//!
//! cargo run --example diffusion_basics

use gdc::coefficients::DiffusionSpec;
use gdc::diffusion::{diffuse, DiffusionMode};
use gdc::graph::{transition_matrix, SparseGraph, TransitionKind};

fn main() -> gdc::Result<()> {
    // A 6-cycle with one chord.
    let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (5, 0, 1.0), (0, 3, 1.0)];
    let g = SparseGraph::from_triplets(6, &edges, false)?;
    let t = transition_matrix(&g, TransitionKind::RandomWalk)?;

    let ppr = DiffusionSpec::ppr(0.15)?;
    let exact = diffuse(&t, &ppr, DiffusionMode::Exact)?;
    let series = diffuse(&t, &ppr, DiffusionMode::Series { k: Some(200) })?;
    let push = diffuse(&t, &ppr, DiffusionMode::Push { eps: 1e-8 })?;
    println!("PPR alpha=0.15, column 0 (exact):");
    for (i, v) in exact.column(0).to_dense(6).iter().enumerate() {
        println!("  node {i}: {v:.6}");
    }
    println!("series vs exact: {:.2e}", series.max_abs_diff(&exact));
    println!("push   vs exact: {:.2e}", push.max_abs_diff(&exact));

    let heat = DiffusionSpec::heat(3.0)?;
    let hk = diffuse(&t, &heat, DiffusionMode::Exact)?;
    let sums = hk.column_sums();
    println!("heat t=3 column sums (random walk keeps mass): {:?}", sums.iter().map(|s| format!("{s:.12}")).collect::<Vec<_>>());
    Ok(())
}
