use std::fs;
use std::path::Path;

use prostate_sweep::config::SimConfig;
use prostate_sweep::experiment::{emit_traces, run_experiment, ExperimentPlan, PairResult};
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::run_sweep;

fn small_plan(dir: &Path) -> ExperimentPlan {
    let mut plan = ExperimentPlan::desk_scale(dir);
    plan.scenarios = vec![Scenario::S, Scenario::V];
    plan.sweeps_per_scenario = 2;
    plan.thresholds = vec![0.8];
    plan.write_clouds = false;
    plan
}

fn sample_std(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn small_experiment_is_consistent_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig::default();
    let outcome = run_experiment(&small_plan(dir.path()), &cfg).unwrap();

    // 1 S-S pair and 2 × 2 S-V pairs.
    assert_eq!(outcome.pairs.len(), 5);
    for name in ["sweeps.json", "aggregate.csv", "aggregate.md"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }

    // Aggregates recomputed from the pair files on disk.
    let mut on_disk: Vec<PairResult> = fs::read_dir(dir.path().join("pairs"))
        .unwrap()
        .map(|e| serde_json::from_str(&fs::read_to_string(e.unwrap().path()).unwrap()).unwrap())
        .collect();
    assert_eq!(on_disk.len(), 5);
    on_disk.sort_by(|a, b| (&a.set, &a.source, &a.target).cmp(&(&b.set, &b.source, &b.target)));
    for set in ["S-S", "S-V"] {
        let fitness: Vec<f64> = on_disk.iter().filter(|p| p.set == set).map(|p| p.report.fitness).collect();
        let row = outcome.table.get(set, 0.8).unwrap();
        assert_eq!(row.samples, fitness.len());
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
        assert!((row.fitness.mean - mean).abs() < 1e-12);
        if fitness.len() > 1 {
            assert!((row.fitness.std - sample_std(&fitness)).abs() < 1e-12);
        }
    }
    let csv = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(csv.starts_with("set,threshold,samples,fitness_mean"));

    let again = tempfile::tempdir().unwrap();
    let rerun = run_experiment(&small_plan(again.path()), &cfg).unwrap();
    assert_eq!(rerun.table, outcome.table);
    assert_eq!(
        fs::read(again.path().join("aggregate.csv")).unwrap(),
        fs::read(dir.path().join("aggregate.csv")).unwrap()
    );
}

#[test]
fn sweep_traces_are_plot_ready() {
    let cfg = SimConfig::default();
    let dir = tempfile::tempdir().unwrap();

    let s = run_sweep(Scenario::S, &cfg, 51).unwrap();
    let path = emit_traces(&s, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["t", "phi", "probe_x", "probe_y", "probe_z", "phantom_x", "phantom_y", "phantom_z", "fx", "fy", "fz"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), s.trace.len());
    assert!(rows.windows(2).all(|w| (w[1][0] - w[0][0] - cfg.sweep.dt).abs() < 1e-9));
    // Stationary: force stays near the reference, well inside the pause band.
    let fy_ref = cfg.pid.f_ref[0];
    assert!(rows.iter().all(|r| (r[9] - fy_ref).abs() < 1.0));

    // Vertical motion: the probe follows the gland with a short positive lag.
    let v = run_sweep(Scenario::V, &cfg, 52).unwrap();
    let lag = prostate_sweep::sweep::tracking_delay(&v.trace, Scenario::V, cfg.sweep.dt);
    assert!(lag > 0.0 && lag <= 0.6, "lag {lag}");
}
