use dwgm::error::Error;
use dwgm::io::pipeline::{EDGE_LIST, EDGE_PROBABILITIES, MANIFEST};
use dwgm::io::{filter_otus, run_pipeline, Manifest, RunConfig};
use dwgm::rng::stream;
use dwgm::sim::{generate_counts, sample_random_graph, MarginalPreset, SimulationSpec};
use dwgm::CountDataset;
use std::path::Path;
use std::time::Instant;

fn fixture() -> CountDataset {
    let spec = SimulationSpec {
        p: 5,
        n: 30,
        sparsity: 0.4,
        marginal: MarginalPreset::setting(2, 1.0).unwrap(),
        covariate_prob: 0.5,
        seed: 4,
    };
    let mut rng = stream(4, 0);
    let g = sample_random_graph(5, 0.4, &mut rng).unwrap();
    generate_counts(g, &spec, &mut rng).unwrap().dataset
}

fn small_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.output.dir = dir.to_path_buf();
    cfg.chain.iterations = 400;
    cfg.marginals.mh.iterations = 2_000;
    cfg
}

#[test]
fn smoke_fixture_runs_quickly_and_reproduces() {
    let ds = fixture();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_pipeline(&small_config(a.path()), &ds, None).unwrap();
    assert!(start.elapsed().as_secs() < 60);
    run_pipeline(&small_config(b.path()), &ds, None).unwrap();
    let read = |d: &Path| std::fs::read(d.join(EDGE_PROBABILITIES)).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let manifest: Manifest = serde_json::from_slice(&std::fs::read(a.path().join(MANIFEST)).unwrap()).unwrap();
    assert!(manifest.completed && manifest.failed_stage.is_none());
    assert_eq!(manifest.config, small_config(a.path()));
    for f in &manifest.artifacts {
        assert!(a.path().join(f).exists(), "{f}");
    }
    assert_eq!(out.fits.len(), 5);
    assert!(out.fits.iter().all(|f| f.nb_bic.is_some()));
}

#[test]
fn full_cutoff_gives_empty_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.output.cutoff = 1.0;
    run_pipeline(&cfg, &fixture(), None).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join(EDGE_LIST)).unwrap(), "");
}

#[test]
fn failure_leaves_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.input.min_prevalence = 1.0;
    cfg.input.min_distinct = 10_000;
    let err = run_pipeline(&cfg, &fixture(), None).unwrap_err();
    assert!(matches!(err, Error::EmptySelection));
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(dir.path().join(MANIFEST)).unwrap()).unwrap();
    assert!(!manifest.completed);
    assert_eq!(manifest.failed_stage.as_deref(), Some("prepare"));
}

#[test]
fn library_size_covariate_is_added() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.input.library_size_covariate = true;
    cfg.chain.iterations = 50;
    let out = run_pipeline(&cfg, &fixture(), None).unwrap();
    assert_eq!(out.manifest.covariates, vec!["x".to_string(), "log_size_factor".to_string()]);
}

/// Two groups of four samples. Columns are built so the group-wise rule
/// (prevalence >= 0.25 and more than two distinct values in each group)
/// keeps exactly `keep_a` and `keep_b`.
#[test]
fn groupwise_filter_fixture() {
    let cols: Vec<(&str, [u64; 8])> = vec![
        ("keep_a", [0, 1, 2, 3, 5, 0, 1, 2]),
        ("keep_b", [4, 4, 1, 0, 9, 8, 0, 7]),
        ("zeros", [0; 8]),
        ("few_values_b", [0, 1, 2, 3, 1, 1, 0, 1]),
        ("absent_in_b", [1, 2, 3, 4, 0, 0, 0, 0]),
        ("rare_a", [0, 0, 0, 0, 1, 2, 3, 4]),
    ];
    let n = 8;
    let counts: Vec<u64> = cols.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    let ds = CountDataset::from_columns(n, cols.len(), counts)
        .unwrap()
        .with_names(cols.iter().map(|(s, _)| s.to_string()).collect(), (0..n).map(|i| format!("s{i}")).collect())
        .unwrap();
    let groups = [0, 0, 0, 0, 1, 1, 1, 1];
    let kept = filter_otus(&ds, 0.25, 2, Some(&groups)).unwrap();
    assert_eq!(kept.column_names(), &["keep_a".to_string(), "keep_b".to_string()]);
    let pooled = filter_otus(&ds, 0.25, 2, None).unwrap();
    assert_eq!(pooled.ncols(), 5);
}
