//! Inspect what diffusion does to the spectrum: the filter response over
//! Laplacian eigenvalues, and how much sparsification moves the eigenvalues
//! of S.
//!
//! cargo run --example spectral_analysis

use gdc::cluster::{generate_sbm, SbmSpec};
use gdc::coefficients::DiffusionSpec;
use gdc::diffusion::diffuse_exact_ppr;
use gdc::graph::{transition_matrix, TransitionKind};
use gdc::sparsify::{sparsify, SparsifyRule};
use gdc::spectral::{eigen, filter_response_curve, linspace, spectrum_compare};

fn main() -> gdc::Result<()> {
    let grid = linspace(0.0, 2.0, 9);
    for spec in [DiffusionSpec::ppr(0.1)?, DiffusionSpec::heat(5.0)?] {
        let curve = filter_response_curve(&spec, &grid)?;
        let shown: Vec<String> = curve.iter().map(|(l, r)| format!("{l:.2}:{r:.3}")).collect();
        println!("{spec}: {}", shown.join(" "));
    }

    let (g, _) = generate_sbm(&SbmSpec::new(vec![50, 50], 0.2, 0.02, 1)?)?;
    let t = transition_matrix(&g, TransitionKind::SymmetricSelfLoop(1.0))?;
    let s = diffuse_exact_ppr(&t, 0.1)?;
    let before = eigen(&s.to_dense(), false)?;
    for eps in [1e-4, 1e-3, 1e-2] {
        let st = sparsify(&s, SparsifyRule::Threshold(eps))?.adjacency().to_dense();
        let after = eigen(&((&st + st.transpose()) * 0.5), false)?;
        let cmp = spectrum_compare(&before, &after)?;
        println!(
            "eps {eps:.0e}: kept {} entries, eigenvalue shift l2 {:.3e} (bound N*eps = {:.3e})",
            st.iter().filter(|v| **v != 0.0).count(),
            cmp.l2,
            g.n() as f64 * eps
        );
    }
    Ok(())
}
