//! One full sweep: init, edge finding, recording with force pauses.
//!
//! `cargo run --release --example sweep -- C 3` runs scenario C with seed 3.

use prostate_sweep::config::SimConfig;
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::{run_sweep, write_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario: Scenario = args.next().as_deref().unwrap_or("C").parse()?;
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let cfg = SimConfig::default();
    let record = run_sweep(scenario, &cfg, seed)?;
    let (lo, hi) = record.phi_range().expect("gland was seen");
    println!("scenario {scenario}, seed {seed}");
    println!("  duration          {:.2} s", record.duration);
    println!("  centring move     {:+.3} mm", record.centering_correction);
    println!("  recorded phi      [{lo:.3}, {hi:.3}] rad");
    println!("  slices with gland {}", record.present_slices().count());
    println!("  pauses            {}", record.pause_events.len());
    for (start, end) in record.pause_events.iter().take(5) {
        println!("    {start:7.2} .. {end:7.2} s");
    }

    let dir = std::env::temp_dir().join(format!("prostate_sweep_{scenario}_{seed}"));
    write_sweep(&record, &dir)?;
    println!("record written to {}", dir.display());
    Ok(())
}
