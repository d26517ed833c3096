use std::path::PathBuf;

use edge_slicer::config::Config;
use edge_slicer::goldens::{cases, check, compare_csv, GOLDEN_TOLERANCE};
use edge_slicer::sweep::run_sweep;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("goldens")
}

fn reference() -> Config {
    Config::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/two_sp_edge_node.json"))
        .unwrap()
}

#[test]
fn checked_in_goldens_match() {
    let failures = check(&golden_dir()).unwrap();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn golden_shapes() {
    let expected_rows = [80, 64, 16, 64];
    for (case, rows) in cases().iter().zip(expected_rows) {
        let text = std::fs::read_to_string(golden_dir().join(case.file)).unwrap();
        assert_eq!(text.lines().count(), rows + 1, "{}", case.name);
    }
}

#[test]
fn perturbed_epsilon_is_detected() {
    let mut config = reference();
    config.epsilon = 0.05;
    let mut drifted = 0;
    for case in cases() {
        let golden = std::fs::read_to_string(golden_dir().join(case.file)).unwrap();
        let fresh = run_sweep(&config, &case.spec().unwrap()).unwrap().to_csv();
        drifted += usize::from(!compare_csv(&golden, &fresh, GOLDEN_TOLERANCE).is_empty());
    }
    assert!(drifted > 0);
}

#[test]
fn bundled_config_holds_reference_parameters() {
    let c = reference();
    assert_eq!(c.capacities, vec![96.0, 384.0]);
    assert_eq!((c.sps[0].lambda, c.sps[0].mu), (20.0, 1.0));
    assert_eq!((c.sps[1].lambda, c.sps[1].mu), (5.0, 10.0));
    assert_eq!(c.sps[0].demand, vec![1.0, 2.0]);
    assert_eq!(c.sps[1].demand, vec![4.0, 0.5]);
    assert_eq!(c.epsilon, 0.01);
    assert_eq!(c, Config::from_json(edge_slicer::config::TWO_SP_EDGE_NODE_JSON).unwrap());
}
