//! A small version of the validation protocol: 2 sweeps per scenario,
//! one threshold. The CLI's `experiment` subcommand runs the full plan.

use prostate_sweep::config::SimConfig;
use prostate_sweep::experiment::{run_experiment, ExperimentPlan};

fn main() -> prostate_sweep::Result<()> {
    let out = std::env::temp_dir().join("prostate_sweep_experiment");
    let mut plan = ExperimentPlan::desk_scale(&out);
    plan.sweeps_per_scenario = 2;
    plan.thresholds = vec![0.8];
    plan.write_clouds = false;

    let outcome = run_experiment(&plan, &SimConfig::default())?;
    for s in &outcome.sweeps {
        println!("{} seed {:2}: {:.1} s, {} points, {} pauses", s.name, s.seed, s.duration, s.points, s.pause_events);
    }
    println!("\n{}", outcome.table.to_markdown(plan.reference_threshold));
    println!("outputs in {}", out.display());
    Ok(())
}
