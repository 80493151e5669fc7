//! PID force controller with a deadzone.
//!
//! The controller regulates the `y` and `z` components of the probe's contact
//! force to `f_ref` and outputs a TCP-frame velocity command in mm/s. The `x`
//! command is always zero: motion along the probe axis is not compensated.
//!
//! Inside the deadzone the proportional and derivative contributions are
//! zeroed and the integrator is frozen (not reset).

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidConfig {
    /// Proportional gain per axis `[y, z]`, mm/s per N.
    pub kp: [f64; 2],
    /// Integral gain per axis, mm/s per N·s.
    pub ki: [f64; 2],
    /// Derivative gain per axis, mm/s per N/s.
    pub kd: [f64; 2],
    /// Error band (N) treated as zero.
    pub deadzone: f64,
    /// Reference force `[F_y, F_z]` in N.
    pub f_ref: [f64; 2],
    /// Bound on the integral contribution `|ki·∫e|` (mm/s).
    pub integrator_limit: f64,
    /// Bound on the command magnitude (mm/s).
    pub output_limit: f64,
    /// Time constant of the optional single-pole force pre-filter (s); 0 disables it.
    pub filter_tau: f64,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self {
            kp: [6.25, 6.25],
            ki: [0.0, 0.0],
            kd: [0.02, 0.02],
            deadzone: 0.1,
            f_ref: [7.0, 0.0],
            integrator_limit: 5.0,
            output_limit: 25.0,
            filter_tau: 0.0,
        }
    }
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        let gains = self.kp.iter().chain(&self.ki).chain(&self.kd);
        if gains.chain(&self.f_ref).any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("pid gains"));
        }
        if !(self.deadzone >= 0.0) {
            return Err(Error::InvalidInput("pid: deadzone must be >= 0".into()));
        }
        if !(self.integrator_limit > 0.0) || !(self.output_limit > 0.0) {
            return Err(Error::InvalidInput("pid: limits must be > 0".into()));
        }
        if !(self.filter_tau >= 0.0) {
            return Err(Error::InvalidInput("pid: filter_tau must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    /// Accumulated error per axis `[y, z]` (N·s).
    pub integral: [f64; 2],
    /// Effective (deadzoned) error of the previous step; `None` before the first step.
    pub prev_error: Option<[f64; 2]>,
    pub last_command: Vec3,
    /// Low-pass filter memory, populated only when filtering is enabled.
    pub filtered: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceMeasurement {
    /// Measured force in the TCP frame (N).
    pub f: Vec3,
    pub noise_sigma: f64,
}

/// Adds independent zero-mean Gaussian noise to each axis.
///
/// With `sigma == 0` the RNG is not touched and the input is returned exactly.
pub fn measure_force<R: Rng + ?Sized>(true_force: Vec3, sigma: f64, rng: &mut R) -> ForceMeasurement {
    if sigma <= 0.0 {
        return ForceMeasurement { f: true_force, noise_sigma: 0.0 };
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let noise = Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    ForceMeasurement { f: true_force + noise, noise_sigma: sigma }
}

/// One controller update. Returns the TCP-frame velocity command (mm/s).
pub fn pid_step(state: &PidState, measured: Vec3, cfg: &PidConfig, dt: f64) -> (Vec3, PidState) {
    debug_assert!(dt > 0.0);
    let mut next = state.clone();

    let raw = [measured.y, measured.z];
    let force = if cfg.filter_tau > 0.0 {
        let alpha = dt / (cfg.filter_tau + dt);
        let f = match state.filtered {
            Some(prev) => [prev[0] + alpha * (raw[0] - prev[0]), prev[1] + alpha * (raw[1] - prev[1])],
            None => raw,
        };
        next.filtered = Some(f);
        f
    } else {
        raw
    };

    let mut out = [0.0; 2];
    let mut eff = [0.0; 2];
    for axis in 0..2 {
        let e = cfg.f_ref[axis] - force[axis];
        let active = e.abs() >= cfg.deadzone;
        eff[axis] = if active { e } else { 0.0 };

        if active && cfg.ki[axis] != 0.0 {
            let bound = cfg.integrator_limit / cfg.ki[axis].abs();
            next.integral[axis] = (state.integral[axis] + e * dt).clamp(-bound, bound);
        }
        let derivative = match state.prev_error {
            Some(prev) if active => (e - prev[axis]) / dt,
            _ => 0.0,
        };
        out[axis] = cfg.kp[axis] * eff[axis] + cfg.ki[axis] * next.integral[axis] + cfg.kd[axis] * derivative;
    }
    next.prev_error = Some(eff);

    let mut cmd = Vec3::new(0.0, out[0], out[1]);
    let norm = cmd.norm();
    if norm > cfg.output_limit {
        cmd *= cfg.output_limit / norm;
    }
    next.last_command = cmd;
    (cmd, next)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn p_only(kp: f64) -> PidConfig {
        PidConfig { kp: [kp, kp], ki: [0.0; 2], kd: [0.0; 2], ..PidConfig::default() }
    }

    #[test]
    fn zero_sigma_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Vec3::new(0.1, 7.25, -0.3);
        assert_eq!(measure_force(f, 0.0, &mut rng).f, f);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5).map(|_| measure_force(Vec3::zeros(), 0.05, &mut rng).f).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }

    #[test]
    fn noise_mean_obeys_law_of_large_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let truth = Vec3::new(1.0, 7.0, -2.0);
        let sigma = 0.05;
        let mut sum = Vec3::zeros();
        for _ in 0..n {
            sum += measure_force(truth, sigma, &mut rng).f;
        }
        let mean = sum / n as f64;
        let bound = 3.0 * sigma / (n as f64).sqrt();
        assert!((mean - truth).amax() < bound, "mean {mean:?}");
    }

    #[test]
    fn error_inside_deadzone_gives_zero_command() {
        let cfg = PidConfig::default();
        let measured = Vec3::new(0.0, 7.05, -0.05);
        let (cmd, st) = pid_step(&PidState::default(), measured, &cfg, 0.01);
        assert_eq!(cmd, Vec3::zeros());
        assert_eq!(st.integral, [0.0, 0.0]);
    }

    #[test]
    fn pure_proportional_law() {
        let cfg = p_only(2.0);
        // e_z = 0 - (-1.5) = 1.5 N
        let (cmd, _) = pid_step(&PidState::default(), Vec3::new(0.0, 7.0, -1.5), &cfg, 0.01);
        assert_abs_diff_eq!(cmd.z, 3.0, epsilon = 1e-12);
        assert_eq!(cmd.x, 0.0);
        assert_eq!(cmd.y, 0.0);
    }

    #[test]
    fn integrator_freezes_in_deadzone_and_is_clamped() {
        let cfg = PidConfig { ki: [1.0, 1.0], integrator_limit: 0.5, ..p_only(0.0) };
        let mut st = PidState::default();
        for _ in 0..100 {
            st = pid_step(&st, Vec3::new(0.0, 6.0, 0.0), &cfg, 0.01).1;
        }
        assert_abs_diff_eq!(st.integral[0], 0.5, epsilon = 1e-12);
        let frozen = st.integral;
        let (cmd, st2) = pid_step(&st, Vec3::new(0.0, 7.05, 0.0), &cfg, 0.01);
        assert_eq!(st2.integral, frozen);
        assert_abs_diff_eq!(cmd.y, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn output_is_limited() {
        let cfg = p_only(100.0);
        let (cmd, _) = pid_step(&PidState::default(), Vec3::new(0.0, 0.0, 5.0), &cfg, 0.01);
        assert_abs_diff_eq!(cmd.norm(), cfg.output_limit, epsilon = 1e-9);
    }

    /// Closed loop against a k = 2 N/mm spring: the probe integrates the
    /// command and the force follows the indentation.
    #[test]
    fn step_response_settles_within_one_second() {
        let cfg = PidConfig::default();
        let k = 2.0;
        let dt = 0.01;
        let mut depth = 0.0; // 0 N at start, 7 N reference: a 7 N step
        let mut st = PidState::default();
        let mut settled_at = None;
        for i in 1..=300 {
            let f = Vec3::new(0.0, k * depth, 0.0);
            let (cmd, next) = pid_step(&st, f, &cfg, dt);
            st = next;
            depth += cmd.y * dt;
            let e = cfg.f_ref[0] - k * depth;
            match (e.abs() < cfg.deadzone, settled_at) {
                (true, None) => settled_at = Some(i as f64 * dt),
                (false, Some(_)) => settled_at = None,
                _ => {}
            }
        }
        let t = settled_at.expect("never settled");
        assert!(t <= 1.0, "settled at {t}");
    }

    #[test]
    fn filter_smooths_a_step() {
        let cfg = PidConfig { filter_tau: 0.1, deadzone: 0.0, ..p_only(1.0) };
        let (_, st) = pid_step(&PidState::default(), Vec3::new(0.0, 7.0, 0.0), &cfg, 0.01);
        let (cmd, _) = pid_step(&st, Vec3::new(0.0, 8.0, 0.0), &cfg, 0.01);
        // filtered force = 7 + (0.01/0.11)·1
        assert_abs_diff_eq!(cmd.y, -(0.01 / 0.11), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn linear_without_deadzone(ey in -10.0..10.0f64, ez in -10.0..10.0f64, alpha in -3.0..3.0f64) {
            let cfg = PidConfig { deadzone: 0.0, output_limit: 1e9, ..p_only(1.7) };
            let cmd = |s: f64| pid_step(&PidState::default(), Vec3::new(0.0, 7.0 - s * ey, -s * ez), &cfg, 0.01).0;
            let a = cmd(alpha);
            let b = cmd(1.0) * alpha;
            prop_assert!((a - b).amax() < 1e-9);
        }

        #[test]
        fn command_never_exceeds_limit(fy in -60.0..60.0f64, fz in -60.0..60.0f64, steps in 1usize..20) {
            let cfg = PidConfig { ki: [3.0, 3.0], ..PidConfig::default() };
            let mut st = PidState::default();
            for _ in 0..steps {
                let (cmd, next) = pid_step(&st, Vec3::new(0.0, fy, fz), &cfg, 0.01);
                prop_assert!(cmd.norm() <= cfg.output_limit + 1e-12);
                prop_assert_eq!(cmd.x, 0.0);
                st = next;
            }
        }

        #[test]
        fn deterministic(fy in 0.0..14.0f64, fz in -3.0..3.0f64) {
            let cfg = PidConfig::default();
            let st = PidState { integral: [0.1, -0.2], prev_error: Some([0.3, 0.0]), ..PidState::default() };
            let a = pid_step(&st, Vec3::new(0.0, fy, fz), &cfg, 0.01);
            let b = pid_step(&st, Vec3::new(0.0, fy, fz), &cfg, 0.01);
            prop_assert_eq!(a, b);
        }
    }
}
