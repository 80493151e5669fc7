//! Simulated patient disturbance.
//!
//! The base profile is a cosine burst gated to the last quarter of every
//! `2π` period:
//!
//! ```text
//! v(t) = cos(t/2)   if frac(t / 2π) > 0.75
//!        0          otherwise
//! ```
//!
//! Consecutive bursts move the gland by `∓√2` (times the amplitude), so the
//! motion alternates direction and has no net drift over two periods.
//! Horizontal motion is along world `y`, vertical along world `z`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2, TAU};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Gland motion pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Stationary.
    S,
    /// Horizontal motion.
    H,
    /// Vertical motion.
    V,
    /// Combined: horizontal and vertical, horizontal phase shifted.
    C,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S, Scenario::H, Scenario::V, Scenario::C];

    pub fn tag(self) -> &'static str {
        match self {
            Scenario::S => "S",
            Scenario::H => "H",
            Scenario::V => "V",
            Scenario::C => "C",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S" => Ok(Scenario::S),
            "H" => Ok(Scenario::H),
            "V" => Ok(Scenario::V),
            "C" => Ok(Scenario::C),
            other => Err(Error::InvalidInput(format!("unknown scenario '{other}' (expected S, H, V or C)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionConfig {
    /// Velocity scale A (mm/s). Peak-to-peak excursion is `√2·A`.
    pub amplitude: f64,
    /// Time shift applied to the horizontal component in scenario C.
    pub phase_shift: f64,
    /// Length of exported disturbance traces (s).
    pub duration: f64,
    /// Reserved for stochastic disturbance variants; the cosine profile ignores it.
    pub seed: u64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            amplitude: 15.0 / SQRT_2,
            phase_shift: FRAC_PI_4,
            duration: 60.0,
            seed: 0,
        }
    }
}

impl MotionConfig {
    pub fn peak_to_peak(&self) -> f64 {
        SQRT_2 * self.amplitude
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !(self.duration > 0.0) || !self.phase_shift.is_finite() {
            return Err(Error::InvalidInput(
                "motion: amplitude must be >= 0 and duration > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Dimensionless base profile.
pub fn base_velocity(t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let phase = t / TAU;
    if phase - phase.floor() > 0.75 {
        (t / 2.0).cos()
    } else {
        0.0
    }
}

/// Closed-form integral of [`base_velocity`] from 0 to `t`.
pub fn base_displacement(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let k = (t / TAU).floor();
    let f = t - k * TAU;
    let parity = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    // Completed bursts alternate -√2, +√2, ...
    let completed = if parity > 0.0 { 0.0 } else { -SQRT_2 };
    let partial = if f > 1.5 * std::f64::consts::PI {
        2.0 * parity * ((f / 2.0).sin() - FRAC_1_SQRT_2)
    } else {
        0.0
    };
    completed + partial
}

/// Gland velocity in world axes (mm/s).
pub fn velocity(t: f64, scenario: Scenario, cfg: &MotionConfig) -> Vec3 {
    let a = cfg.amplitude;
    match scenario {
        Scenario::S => Vec3::zeros(),
        Scenario::H => Vec3::new(0.0, a * base_velocity(t), 0.0),
        Scenario::V => Vec3::new(0.0, 0.0, a * base_velocity(t)),
        Scenario::C => Vec3::new(
            0.0,
            a * base_velocity(t + cfg.phase_shift),
            a * base_velocity(t),
        ),
    }
}

/// Gland displacement from its home position (mm), exact integral of [`velocity`].
pub fn displacement(t: f64, scenario: Scenario, cfg: &MotionConfig) -> Vec3 {
    let a = cfg.amplitude;
    let t = t.max(0.0);
    match scenario {
        Scenario::S => Vec3::zeros(),
        Scenario::H => Vec3::new(0.0, a * base_displacement(t), 0.0),
        Scenario::V => Vec3::new(0.0, 0.0, a * base_displacement(t)),
        Scenario::C => Vec3::new(
            0.0,
            a * (base_displacement(t + cfg.phase_shift) - base_displacement(cfg.phase_shift)),
            a * base_displacement(t),
        ),
    }
}

/// Writes `t,dx,dy,dz` rows sampled every `dt` over `cfg.duration`.
pub fn write_disturbance_csv(path: &Path, scenario: Scenario, cfg: &MotionConfig, dt: f64) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let steps = (cfg.duration / dt).round() as usize;
    let write = |w: &mut std::io::BufWriter<std::fs::File>| -> std::io::Result<()> {
        writeln!(w, "t,dx,dy,dz")?;
        for i in 0..=steps {
            let t = i as f64 * dt;
            let d = displacement(t, scenario, cfg);
            writeln!(w, "{t},{},{},{}", d.x, d.y, d.z)?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    /// Composite Simpson quadrature of the base velocity, used as an
    /// independent oracle for the closed-form displacement.
    fn quad(a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = base_velocity(a) + base_velocity(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * base_velocity(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn velocity_examples() {
        let cfg = MotionConfig { amplitude: 2.0, ..MotionConfig::default() };
        for sc in Scenario::ALL {
            assert_eq!(velocity(PI, sc, &cfg), Vec3::zeros());
        }
        let v = velocity(5.0, Scenario::V, &cfg);
        assert_abs_diff_eq!(v.z, 2.0 * 2.5f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.z / 2.0, -0.8011, epsilon = 1e-4);
        assert_eq!(v.x, 0.0);
        assert_eq!(v.y, 0.0);
        assert_eq!(velocity(5.0, Scenario::S, &cfg), Vec3::zeros());
    }

    #[test]
    fn burst_integral_against_quadrature() {
        // The burst lies strictly inside (3π/2, 2π); integrate just inside
        // the gate so the quadrature sees the smooth branch only.
        let first = quad(1.5 * PI + 1e-12, 2.0 * PI - 1e-12, 20_000);
        assert_abs_diff_eq!(first, -SQRT_2, epsilon = 1e-9);
        let second = quad(3.5 * PI + 1e-12, 4.0 * PI - 1e-12, 20_000);
        assert_abs_diff_eq!(second, SQRT_2, epsilon = 1e-9);

        assert_abs_diff_eq!(base_displacement(2.0 * PI), first, epsilon = 1e-9);
        assert_abs_diff_eq!(base_displacement(4.0 * PI), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn displacement_examples() {
        let cfg = MotionConfig::default();
        assert_eq!(displacement(0.0, Scenario::C, &cfg), Vec3::zeros());
        let d = displacement(2.0 * PI, Scenario::V, &cfg);
        assert_abs_diff_eq!(d.z, -SQRT_2 * cfg.amplitude, epsilon = 1e-9);
        assert_abs_diff_eq!(cfg.amplitude, 10.6066, epsilon = 1e-4);
        assert_abs_diff_eq!(cfg.peak_to_peak(), 15.0, epsilon = 1e-12);
    }

    #[test]
    fn duty_cycle_is_one_quarter() {
        let n = 200_000;
        for period in 0..3 {
            let t0 = period as f64 * TAU;
            let zeros = (0..n)
                .filter(|i| base_velocity(t0 + (*i as f64 + 0.5) * TAU / n as f64) == 0.0)
                .count();
            assert_eq!(zeros, 3 * n / 4);
        }
    }

    #[test]
    fn peak_to_peak_over_a_run() {
        let cfg = MotionConfig::default();
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for i in 0..=60_000 {
            let d = displacement(i as f64 * 1e-3, Scenario::V, &cfg).z;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        assert!(hi - lo <= 15.0 + 1e-9);
        assert_abs_diff_eq!(hi - lo, 15.0, epsilon = 1e-6);
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("h".parse::<Scenario>().unwrap(), Scenario::H);
        assert!("X".parse::<Scenario>().is_err());
    }

    proptest! {
        #[test]
        fn closed_form_matches_quadrature(t in 0.0..40.0f64) {
            // Integrate period by period so the quadrature never straddles a gate jump.
            let mut acc = 0.0;
            let mut start = 0.0;
            while start < t {
                let k = (start / TAU).floor();
                let gate = k * TAU + 1.5 * PI;
                let end = ((k + 1.0) * TAU).min(t);
                if end > gate {
                    acc += quad(gate.max(start) + 1e-13, end - 1e-13, 4000);
                }
                start = (k + 1.0) * TAU;
            }
            prop_assert!((base_displacement(t) - acc).abs() < 1e-7);
        }

        #[test]
        fn no_net_drift_over_two_periods(t in 0.0..100.0f64) {
            prop_assert!((base_displacement(t + 2.0 * TAU) - base_displacement(t)).abs() < 1e-9);
        }

        #[test]
        fn combined_components_are_shifted_copies(t in 0.0..50.0f64) {
            let cfg = MotionConfig::default();
            let v = velocity(t, Scenario::C, &cfg);
            prop_assert_eq!(v.y, velocity(t + PI / 4.0, Scenario::V, &cfg).z);
            prop_assert_eq!(v.z, velocity(t, Scenario::V, &cfg).z);
        }

        #[test]
        fn bounded_by_range(t in 0.0..200.0f64) {
            let cfg = MotionConfig::default();
            for sc in Scenario::ALL {
                prop_assert!(displacement(t, sc, &cfg).amax() <= 15.0 + 1e-9);
            }
        }
    }
}
