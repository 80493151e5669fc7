//! Biopsy targeting: rotate back to a recorded slice while the gland moves.

use prostate_sweep::config::SimConfig;
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::{goto_slice, run_sweep, WorldState};

fn main() -> prostate_sweep::Result<()> {
    let cfg = SimConfig::default();
    let record = run_sweep(Scenario::S, &cfg, 1)?;
    let range = record.phi_range().expect("gland was seen");

    // Start at the end of the recorded range, under combined motion.
    let mut world = WorldState::at_equilibrium(Scenario::C, &cfg, 1);
    world.probe_phi = range.0;
    let target = 0.25;
    let (arrived, trace) = goto_slice(&world, target, range, &cfg)?;

    let [fy, fz] = cfg.pid.f_ref;
    let worst = trace.iter().map(|s| (s.force.y - fy).hypot(s.force.z - fz)).fold(0.0, f64::max);
    println!("{:.3} -> {:.3} rad in {:.2} s", range.0, arrived.probe_phi, arrived.t - world.t);
    println!("largest force deviation in transit {worst:.2} N");

    match goto_slice(&arrived, range.1 + 0.5, range, &cfg) {
        Err(e) => println!("out-of-range target rejected: {e}"),
        Ok(_) => unreachable!("target is outside the recorded range"),
    }
    Ok(())
}
