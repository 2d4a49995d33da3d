//! Spectral clustering on a planted partition, on the raw graph and on its
//! GDC graph, over several seeds with bootstrap intervals.
//!
//! cargo run --release --example sbm_clustering

use gdc::cluster::{eval_gdc_clustering, generate_sbm, hungarian_accuracy, spectral_cluster, SbmSpec, SpectralOptions};
use gdc::pipeline::GdcConfig;

fn main() -> gdc::Result<()> {
    let spec = SbmSpec::new(vec![60, 60, 60], 0.12, 0.03, 11)?;
    let (g, labels) = generate_sbm(&spec)?;
    let assign = spectral_cluster(&g, 3, 0, SpectralOptions::default())?;
    let acc = hungarian_accuracy(&assign, &labels)?;
    println!("single run: accuracy {:.3}, cluster -> class {:?}", acc.accuracy, acc.matched_permutation);

    let report = eval_gdc_clustering(&spec, &GdcConfig::default(), 10, SpectralOptions::default())?;
    print!("{}", report.to_csv());
    println!("{}", report.summary());
    Ok(())
}
