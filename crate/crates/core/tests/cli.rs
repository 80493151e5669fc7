use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], cwd: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_prostate-sweep"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn sweep_reconstruct_register_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(&["sweep", "--scenario", "S", "--seed", "1", "--out", "a"], d);
    run(&["sweep", "--scenario", "H", "--seed", "2", "--out", "b"], d);
    assert!(d.join("a/meta.json").is_file());

    let msg = run(&["reconstruct", "a", "--out", "a.ply"], d);
    assert!(msg.contains("points"));
    run(&["reconstruct", "b", "--out", "b.xyz"], d);

    run(&["register", "b.xyz", "a.ply", "--threshold", "1.0", "--voxel", "1.0", "--out", "report.json"], d);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    let fitness = report["fitness"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&fitness));
    assert_eq!(report["threshold"].as_f64(), Some(1.0));
}

#[test]
fn config_file_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("sim.toml"), "[pid]\ndeadzone = 0.15\n").unwrap();
    let msg = run(&["--config", "sim.toml", "traces", "--scenario", "V", "--duration", "7", "--out", "tr"], d);
    assert!(msg.contains("max tracking gap"));
    assert!(d.join("tr/V_compensation_seed0.csv").is_file());
    assert!(d.join("tr/V_disturbance.csv").is_file());

    fs::write(d.join("bad.toml"), "[pid]\ndeadzone = -1.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_prostate-sweep"))
        .args(["--config", "bad.toml", "sweep"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml"));
}
