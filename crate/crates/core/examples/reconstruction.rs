//! Sweep → point cloud → PLY.

use std::time::Instant;

use prostate_sweep::cloud_io::CloudFormat;
use prostate_sweep::config::SimConfig;
use prostate_sweep::motion::Scenario;
use prostate_sweep::reconstruction::{export_cloud, reconstruct};
use prostate_sweep::sweep::run_sweep;

fn main() -> prostate_sweep::Result<()> {
    let cfg = SimConfig::default();
    let record = run_sweep(Scenario::S, &cfg, 1)?;

    let t0 = Instant::now();
    let cloud = reconstruct(&record, cfg.sweep.probe_radius)?;
    println!("{} points in {:.1?}", cloud.len(), t0.elapsed());

    let (lo, hi) = cloud.bounding_box().expect("non-empty");
    println!("bounds x [{:.1}, {:.1}] y [{:.1}, {:.1}] z [{:.1}, {:.1}] mm", lo.x, hi.x, lo.y, hi.y, lo.z, hi.z);
    let floor = cloud.iter().map(|p| p.y.hypot(p.z)).fold(f64::INFINITY, f64::min);
    println!("closest point to the probe axis: {floor:.2} mm");

    let path = std::env::temp_dir().join("prostate_sweep_S1.ply");
    export_cloud(&cloud, &path, CloudFormat::Ply)?;
    println!("wrote {}", path.display());
    Ok(())
}
