//! Push-based PPR touches a neighbourhood whose size depends on alpha and
//! the tolerance, not on the size of the graph.
//!
//! cargo run --release --example push_locality

use gdc::cluster::{generate_sbm, SbmSpec};
use gdc::diffusion::{diffuse_exact_ppr, push_ppr};
use gdc::graph::{largest_connected_component, transition_matrix, TransitionKind};

fn main() -> gdc::Result<()> {
    let alpha = 0.15;
    for n in [500, 1000, 2000, 4000] {
        let spec = SbmSpec::new(vec![50; n / 50], 0.2, 0.1 / n as f64, 3)?;
        let (g, _) = largest_connected_component(&generate_sbm(&spec)?.0)?;
        let t = transition_matrix(&g, TransitionKind::RandomWalk)?;
        let mut line = format!("N = {:4}:", g.n());
        for eps in [1e-4, 1e-5, 1e-6] {
            let col = push_ppr(&t, alpha, eps, 0)?;
            line += &format!("  eps {eps:.0e} touched {:4} residual {:.1e}", col.touched, col.residual_mass());
        }
        println!("{line}");
    }

    // Error against the exact column shrinks with the tolerance.
    let spec = SbmSpec::new(vec![50; 10], 0.2, 0.0002, 3)?;
    let (g, _) = largest_connected_component(&generate_sbm(&spec)?.0)?;
    let t = transition_matrix(&g, TransitionKind::RandomWalk)?;
    let exact = diffuse_exact_ppr(&t, alpha)?.column(0).to_dense(g.n());
    for eps in [1e-4, 1e-6, 1e-8] {
        let approx = push_ppr(&t, alpha, eps, 0)?.to_dense(g.n());
        let l1: f64 = approx.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum();
        println!("eps {eps:.0e}: L1 error {l1:.2e}");
    }
    Ok(())
}
