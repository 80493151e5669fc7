//! Plot-ready CSVs of gland position, probe position and force.

use prostate_sweep::config::SimConfig;
use prostate_sweep::experiment::emit_traces;
use prostate_sweep::motion::Scenario;
use prostate_sweep::sweep::{run_sweep, tracking_delay};

fn main() -> prostate_sweep::Result<()> {
    let cfg = SimConfig::default();
    let dir = std::env::temp_dir().join("prostate_sweep_traces");
    for sc in [Scenario::S, Scenario::V] {
        let record = run_sweep(sc, &cfg, 2)?;
        let path = emit_traces(&record, &dir)?;
        println!("{sc}: {} rows -> {}", record.trace.len(), path.display());
    }
    let record = run_sweep(Scenario::V, &cfg, 2)?;
    println!("V probe lags the gland by {:.2} s", tracking_delay(&record.trace, Scenario::V, cfg.sweep.dt));
    Ok(())
}
