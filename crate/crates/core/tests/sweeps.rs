use std::f64::consts::PI;

use prostate_sweep::config::SimConfig;
use prostate_sweep::error::Error;
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::{goto_slice, read_sweep, run_sweep, write_sweep, WorldState};

#[test]
fn written_sweep_reads_back_identically() {
    let cfg = SimConfig::default();
    let record = run_sweep(Scenario::V, &cfg, 21).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_sweep(&record, dir.path()).unwrap();
    for name in ["meta.json", "slices.csv", "forces.csv", "trajectory.csv"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let contours = std::fs::read_dir(dir.path().join("contours")).unwrap().count();
    assert_eq!(contours, record.present_slices().count());
    assert_eq!(read_sweep(dir.path()).unwrap(), record);
}

#[test]
fn combined_motion_pauses_and_still_covers_the_gland() {
    let cfg = SimConfig::default();
    let s = run_sweep(Scenario::S, &cfg, 31).unwrap();
    let c = run_sweep(Scenario::C, &cfg, 32).unwrap();
    assert!(s.pause_events.is_empty());
    assert!(!c.pause_events.is_empty());

    // Every burst of the disturbance (last quarter of each 2π period) that
    // falls inside the recording window produces at least one pause.
    let (t0, t1) = (c.slices.first().unwrap().t, c.slices.last().unwrap().t);
    let mut bursts = 0;
    for k in 0.. {
        let (start, end) = (2.0 * PI * (k as f64 + 0.75), 2.0 * PI * (k as f64 + 1.0));
        if start > t1 {
            break;
        }
        if start < t0 || end > t1 {
            continue;
        }
        bursts += 1;
        assert!(
            c.pause_events.iter().any(|&(a, b)| a < end && b > start),
            "no pause during burst [{start:.2}, {end:.2}]"
        );
    }
    assert!(bursts >= 2);

    let (ns, nc) = (s.present_slices().count() as f64, c.present_slices().count() as f64);
    assert!((nc - ns).abs() <= 0.1 * ns, "S {ns} vs C {nc} slices");
}

#[test]
fn goto_slice_keeps_contact_under_motion() {
    let cfg = SimConfig::default();
    let mut world = WorldState::at_equilibrium(Scenario::C, &cfg, 3);
    let range = (-0.8, 0.8);
    world.probe_phi = range.0;
    let (end, trace) = goto_slice(&world, 0.25, range, &cfg).unwrap();
    assert_eq!(end.probe_phi, 0.25);
    assert!(!trace.is_empty());
    let worst = trace
        .iter()
        .map(|s| (s.force.y - cfg.pid.f_ref[0]).hypot(s.force.z - cfg.pid.f_ref[1]))
        .fold(0.0, f64::max);
    assert!(worst <= cfg.sweep.pause_threshold + 2.0, "force deviation {worst}");
    // The transit spans more than one burst of the disturbance.
    assert!(end.t > 2.0 * PI);

    match goto_slice(&end, 1.0, range, &cfg) {
        Err(Error::TargetOutOfRange { .. }) => {}
        other => panic!("expected out-of-range error, got {other:?}"),
    }
}
