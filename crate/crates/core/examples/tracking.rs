//! How well the force loop keeps up with each disturbance.

use prostate_sweep::config::SimConfig;
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::{simulate_compensation, TrackingSummary};

fn main() -> prostate_sweep::Result<()> {
    let cfg = SimConfig::default();
    // Two full periods of the disturbance (4π s each).
    let duration = 8.0 * std::f64::consts::PI;
    println!("{:>3} {:>10} {:>9} {:>12}", "", "gap (mm)", "delay (s)", "max dF (N)");
    for sc in Scenario::ALL {
        let trace = simulate_compensation(sc, &cfg, 0, duration)?;
        let s = TrackingSummary::from_trace(&trace, sc, &cfg);
        println!("{sc:>3} {:10.3} {:9.2} {:12.3}", s.max_gap, s.delay, s.max_force_deviation);
    }
    Ok(())
}
