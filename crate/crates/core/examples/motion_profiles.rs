//! The four disturbance scenarios, sampled and exported as CSV.

use prostate_sweep::motion::{displacement, velocity, write_disturbance_csv, MotionConfig, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = MotionConfig::default();
    println!("peak-to-peak excursion {:.2} mm", cfg.peak_to_peak());
    println!("{:>6} {:>22} {:>22}", "t", "H disp (y)", "C disp (y, z)");
    for i in 0..=16 {
        let t = i as f64;
        let h = displacement(t, Scenario::H, &cfg);
        let c = displacement(t, Scenario::C, &cfg);
        println!("{t:6.1} {:22.3} {:>10.3} {:>11.3}", h.y, c.y, c.z);
    }
    let v = velocity(11.0, Scenario::V, &cfg);
    println!("V velocity at 11 s: {:.3} mm/s (vertical)", v.z);

    let dir = std::env::temp_dir().join("prostate_sweep_motion");
    std::fs::create_dir_all(&dir)?;
    for sc in Scenario::ALL {
        let path = dir.join(format!("{sc}.csv"));
        write_disturbance_csv(&path, sc, &MotionConfig { duration: 30.0, ..cfg.clone() }, 0.01)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
