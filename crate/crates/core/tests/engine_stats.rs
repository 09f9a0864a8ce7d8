use bellharness::analysis::{freedom_test, stats::chi_square_gof};
use bellharness::engine::{run_experiment_with, ExecutionMode, ExperimentConfig, TrialRecord};
use bellharness::models::{build_model, ModelDescriptor};
use bellharness::outcomes::pair_index;

fn run(name: &str, n: u64, seed: u64, mode: ExecutionMode) -> Vec<TrialRecord> {
    let cfg = ExperimentConfig::new(ModelDescriptor::builtin(name).unwrap(), n, seed).with_mode(mode);
    let model = build_model(&cfg.model).unwrap();
    run_experiment_with(&cfg, model.as_ref(), None).unwrap()
}

#[test]
fn settings_are_fair_coins() {
    let n = 1_000_000;
    let log = run("uniform-lhv", n, 42, ExecutionMode::Parallel);
    let mut cells = [0u64; 4];
    log.iter().for_each(|r| cells[pair_index(r.settings())] += 1);
    for c in cells {
        assert!((c as f64 / n as f64 - 0.25).abs() < 0.002, "{cells:?}");
    }
    let (_, p) = chi_square_gof(&cells, &[0.25; 4]);
    assert!(p > 0.001, "p = {p}");
    let left_two = log.iter().filter(|r| r.a.number() == 2).count() as f64 / n as f64;
    let right_two = log.iter().filter(|r| r.b.number() == 2).count() as f64 / n as f64;
    assert!((left_two - 0.5).abs() < 0.002 && (right_two - 0.5).abs() < 0.002);
}

#[test]
fn revealed_quadruples_agree_with_outcomes() {
    for name in ["uniform-lhv", "rotating-lhv", "conspiracy"] {
        let log = run(name, 50_000, 1, ExecutionMode::Parallel);
        assert!(log.iter().all(|r| r.revealed.is_some() && r.is_consistent()), "{name}");
    }
    let log = run("memory-lhv", 50_000, 1, ExecutionMode::Sequential);
    assert!(log.iter().all(|r| r.revealed.is_some() && r.is_consistent()));
}

#[test]
fn memoryless_models_ignore_execution_mode() {
    for name in ["uniform-lhv", "rotating-lhv", "singlet", "conspiracy", "signaling"] {
        let par = run(name, 20_000, 17, ExecutionMode::Parallel);
        let seq = run(name, 20_000, 17, ExecutionMode::Sequential);
        let strip = |log: &[TrialRecord]| log.iter().map(|r| (r.index, r.a, r.b, r.x, r.y, r.revealed)).collect::<Vec<_>>();
        assert_eq!(strip(&par), strip(&seq), "{name}");
    }
}

#[test]
fn memory_model_depends_on_history() {
    let seq = run("memory-lhv", 20_000, 17, ExecutionMode::Sequential);
    // Same seed with the history withheld: every trial sees an empty past.
    let cfg = ExperimentConfig::new(ModelDescriptor::builtin("memory-lhv").unwrap(), 20_000, 17)
        .with_mode(ExecutionMode::Sequential);
    let model = build_model(&cfg.model).unwrap();
    let amnesic: Vec<TrialRecord> = (0..20_000)
        .map(|i| bellharness::engine::run_trial(&cfg, model.as_ref(), i, &[]).unwrap())
        .collect();
    let differing = seq.iter().zip(&amnesic).filter(|(s, a)| s.revealed != a.revealed).count();
    assert!(differing > 1000, "only {differing} trials differ");
}

#[test]
fn settings_are_independent_of_hidden_state() {
    for (name, mode) in [
        ("uniform-lhv", ExecutionMode::Parallel),
        ("rotating-lhv", ExecutionMode::Parallel),
        ("memory-lhv", ExecutionMode::Sequential),
    ] {
        let report = freedom_test(&run(name, 200_000, 33, mode)).unwrap();
        assert!(report.p_value > 0.001, "{name}: p = {}", report.p_value);
    }
    let report = freedom_test(&run("conspiracy", 200_000, 33, ExecutionMode::Parallel)).unwrap();
    assert!(report.p_value < 1e-6);
}

#[test]
fn worker_count_does_not_change_the_log() {
    let cfg = ExperimentConfig::new(ModelDescriptor::builtin("singlet").unwrap(), 30_000, 4);
    let model = build_model(&cfg.model).unwrap();
    let base = run_experiment_with(&cfg, model.as_ref(), Some(1)).unwrap();
    for w in [2, 3, 7] {
        assert_eq!(run_experiment_with(&cfg, model.as_ref(), Some(w)).unwrap(), base);
    }
}
