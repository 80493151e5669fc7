//! ICP of a moving-scenario cloud onto a stationary one, with the
//! validation metrics at every threshold.

use prostate_sweep::config::SimConfig;
use prostate_sweep::experiment::PROTOCOL_THRESHOLDS;
use prostate_sweep::motion::Scenario;
use prostate_sweep::reconstruction::reconstruct;
use prostate_sweep::registration::{icp_thresholds, IcpConfig, PreparedTarget};
use prostate_sweep::sweep::run_sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let moving: Scenario = std::env::args().nth(1).as_deref().unwrap_or("H").parse()?;
    let cfg = SimConfig::default();
    let r = cfg.sweep.probe_radius;
    let still = reconstruct(&run_sweep(Scenario::S, &cfg, 1)?, r)?;
    let other = reconstruct(&run_sweep(Scenario::S, &cfg, 2)?, r)?;
    let disturbed = reconstruct(&run_sweep(moving, &cfg, 3)?, r)?;

    let target = PreparedTarget::new(&still)?;
    for (label, source) in [("S-S", &other), (&*format!("S-{moving}"), &disturbed)] {
        println!("{label}");
        for rep in icp_thresholds(source, &target, &PROTOCOL_THRESHOLDS, &IcpConfig::default())? {
            println!(
                "  {:.1} mm: fitness {:.4}  rmse {:.4}  hausdorff {:.3}  ({} iterations{})",
                rep.threshold,
                rep.fitness,
                rep.inlier_rmse,
                rep.hausdorff,
                rep.iterations,
                if rep.converged { "" } else { ", not converged" }
            );
        }
    }
    Ok(())
}
