use std::fs;

use gdc::cluster::{generate_sbm, SbmSpec};
use gdc::diffusion::{diffuse, DiffusionMode};
use gdc::graph::{transition_matrix, IdMap};
use gdc::io::{read_graph, sidecar_path, write_graph, ReadOptions, Sidecar};
use gdc::pipeline::{run_pipeline, GdcConfig, OutputFormat, PipelineConfig};
use gdc::sparsify::{postprocess, sparsify, SparsifyRule};

fn sbm_file(dir: &std::path::Path) -> std::path::PathBuf {
    let (g, _) = generate_sbm(&SbmSpec::new(vec![30, 30, 30], 0.3, 0.03, 4).unwrap()).unwrap();
    let p = dir.join("sbm.txt");
    write_graph(&p, &g, &IdMap::identity(g.n()), &Sidecar::new()).unwrap();
    p
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = sbm_file(dir.path());
    for format in [OutputFormat::EdgeList, OutputFormat::Binary] {
        let mut outputs = Vec::new();
        let mut hashes = Vec::new();
        for run in 0..2 {
            let mut cfg = PipelineConfig::new(&input, dir.path().join(format!("out{run}")));
            cfg.format = format;
            cfg.gdc.sparsify = Some(SparsifyRule::TargetDegree(12.0));
            hashes.push(run_pipeline(&cfg).unwrap().config_hash);
            outputs.push(fs::read(&cfg.output).unwrap());
        }
        assert_eq!(hashes[0], hashes[1]);
        assert_eq!(outputs[0], outputs[1]);
    }
}

#[test]
fn config_hash_tracks_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let input = sbm_file(dir.path());
    let a = PipelineConfig::new(&input, dir.path().join("a"));
    let mut b = PipelineConfig::new(&input, dir.path().join("b"));
    b.gdc.sparsify = Some(SparsifyRule::TopK(32));
    let ha = run_pipeline(&a).unwrap().config_hash;
    let hb = run_pipeline(&b).unwrap().config_hash;
    assert_ne!(ha, hb);
    let mut c = a.clone();
    c.output = dir.path().join("c");
    assert_eq!(run_pipeline(&c).unwrap().config_hash, ha);
}

#[test]
fn pipeline_equals_manual_composition() {
    let dir = tempfile::tempdir().unwrap();
    let input = sbm_file(dir.path());
    let cfg = PipelineConfig::new(&input, dir.path().join("out.txt"));
    run_pipeline(&cfg).unwrap();
    let written = read_graph(&cfg.output, ReadOptions { allow_self_loops: true, ..Default::default() }).unwrap();

    let g = read_graph(&input, ReadOptions::default()).unwrap().graph;
    let gdc = GdcConfig::default();
    let t = transition_matrix(&g, gdc.transition).unwrap();
    let s = diffuse(&t, &gdc.diffusion, DiffusionMode::Exact).unwrap();
    let sparse = sparsify(&s, gdc.sparsify.unwrap()).unwrap();
    let manual = postprocess(&sparse, gdc.post).unwrap();
    assert_eq!(written.graph.adjacency(), manual.matrix());
}

#[test]
fn sidecar_records_every_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let input = sbm_file(dir.path());
    let cfg = PipelineConfig::new(&input, dir.path().join("out.txt"));
    let report = run_pipeline(&cfg).unwrap();
    let text = fs::read_to_string(sidecar_path(&cfg.output)).unwrap();
    for (k, v) in cfg.describe().0 {
        assert!(text.contains(&format!("{k} = {v}\n")), "missing {k}");
    }
    assert!(text.contains(&format!("config_sha256 = {}\n", report.config_hash)));
    for stage in ["load", "transition", "diffusion", "sparsify", "postprocess", "write"] {
        assert!(text.contains(&format!("time_{stage}_ms = ")), "missing {stage}");
    }
}

#[test]
fn original_ids_survive_export() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ids.txt");
    fs::write(&input, "100 205\n205 300\n300 100\n300 4000\n").unwrap();
    let mut cfg = PipelineConfig::new(&input, dir.path().join("out.txt"));
    cfg.gdc.sparsify = Some(SparsifyRule::TopK(2));
    run_pipeline(&cfg).unwrap();
    let back = read_graph(&cfg.output, ReadOptions { allow_self_loops: true, ..Default::default() }).unwrap();
    assert_eq!(back.ids.as_slice(), &[100, 205, 300, 4000]);
}
