use cwpcn::harness::{run_experiment, Algorithm, ExperimentSpec};
use cwpcn::NetworkConfig;

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::from_toml_str(text).unwrap()
}

#[test]
fn results_are_byte_identical_across_runs() {
    let base = NetworkConfig::default().with_counts(3, 2);
    let text = |dir: &std::path::Path| {
        format!(
            "algorithms = [\"alg1\", \"greedy\", \"unknown_csi\", \"no_coop_baseline\"]\n\
             states = 12\nseed = 21\noutput = {:?}\n[sweep]\naxis = \"outage_reduction\"\nvalues = [0.0, 0.02]\n",
            dir
        )
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&spec(&text(a.path())), &base).unwrap();
    run_experiment(&spec(&text(b.path())), &base).unwrap();
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert!(a.path().join("dual_log_p0_r0.csv").exists());
}

#[test]
fn one_row_per_algorithm_and_point() {
    let base = NetworkConfig::default();
    let s = spec(
        "algorithms = [\"greedy\", \"no_coop_baseline\"]\nstates = 5\nseed = 1\nreplicates = 2\n\
         [sweep]\naxis = \"num_eavs\"\nvalues = [1, 2, 3]\n",
    );
    let result = run_experiment(&s, &base).unwrap();
    assert_eq!(result.rows.len(), 6);
    for row in &result.rows {
        assert_eq!(row.num_eavs as f64, row.value);
        assert_eq!(row.replicates, 2);
        let eps_ps = row.eps_ps.unwrap();
        assert!((0.0..=1.0).contains(&eps_ps));
        if row.algorithm == Algorithm::NoCoopBaseline {
            assert_eq!(eps_ps, row.eps_p);
            assert_eq!(row.ergodic_su_rate, Some(0.0));
        }
    }
}

#[test]
fn unreachable_targets_are_reported_not_fatal() {
    let base = NetworkConfig::default().with_counts(2, 1);
    let s = spec(
        "algorithms = [\"alg1\", \"greedy\"]\nstates = 10\nseed = 4\n\
         [sweep]\naxis = \"outage_reduction\"\nvalues = [1.0]\n",
    );
    let result = run_experiment(&s, &base).unwrap();
    let alg1 = &result.rows[0];
    assert_eq!(alg1.algorithm, Algorithm::Alg1);
    assert_eq!(alg1.status, "infeasible");
    assert!(alg1.ergodic_su_rate.is_none() && alg1.min_achievable.is_some());
    assert_eq!(result.rows[1].status, "ok");
}

#[test]
fn shipped_experiment_files_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments");
    let desk = NetworkConfig::from_path(dir.join("desk.toml")).unwrap();
    assert_eq!(desk.hash(), NetworkConfig::default().hash());
    let mut specs = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() != "desk.toml" {
            ExperimentSpec::from_path(&path).unwrap();
            specs += 1;
        }
    }
    assert!(specs >= 4);
}
