//! Compensation-only runs and tracking metrics.

use serde::{Deserialize, Serialize};

use super::{advance, TraceSample, WorldState};
use crate::config::SimConfig;
use crate::error::Result;
use crate::motion::Scenario;

/// Runs the force loop alone (no rotation, no imaging) for `duration` seconds,
/// starting at the reference-force equilibrium. Includes the final state.
pub fn simulate_compensation(
    scenario: Scenario,
    cfg: &SimConfig,
    seed: u64,
    duration: f64,
) -> Result<Vec<TraceSample>> {
    cfg.validate()?;
    let mut world = WorldState::at_equilibrium(scenario, cfg, seed);
    let steps = (duration / cfg.sweep.dt).round() as usize;
    let mut trace = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        trace.push(advance(&mut world, cfg, 0.0)?);
    }
    trace.push(TraceSample {
        t: world.t,
        phi: world.probe_phi,
        probe: world.probe_pos,
        phantom: world.phantom_pos,
        force: world.true_force(cfg),
    });
    Ok(trace)
}

/// Largest change (mm) of the probe–gland relative position over the trace.
pub fn tracking_gap(trace: &[TraceSample]) -> f64 {
    let Some(first) = trace.first() else { return 0.0 };
    let rel0 = first.probe - first.phantom;
    trace
        .iter()
        .map(|s| (s.probe - s.phantom - rel0).norm())
        .fold(0.0, f64::max)
}

/// Lag (s) in `[0, max_lag]` maximising the normalised cross-correlation of
/// `follower` against `reference`. Both are sampled every `dt`.
pub fn cross_correlation_delay(reference: &[f64], follower: &[f64], dt: f64, max_lag: f64) -> f64 {
    let n = reference.len().min(follower.len());
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len().max(1) as f64;
    let max_k = ((max_lag / dt).round() as usize).min(n.saturating_sub(2));
    let mut best = (f64::NEG_INFINITY, 0usize);
    for k in 0..=max_k {
        let a = &reference[..n - k];
        let b = &follower[k..n];
        let (ma, mb) = (mean(a), mean(b));
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let (dx, dy) = (x - ma, y - mb);
            sab += dx * dy;
            saa += dx * dx;
            sbb += dy * dy;
        }
        let denom = (saa * sbb).sqrt();
        let c = if denom > 0.0 { sab / denom } else { 0.0 };
        if c > best.0 {
            best = (c, k);
        }
    }
    best.1 as f64 * dt
}

/// Compensation delay (s): the largest cross-correlation lag over the axes
/// the scenario moves. Zero for the stationary scenario.
pub fn tracking_delay(trace: &[TraceSample], scenario: Scenario, dt: f64) -> f64 {
    let axes: &[usize] = match scenario {
        Scenario::S => &[],
        Scenario::H => &[1],
        Scenario::V => &[2],
        Scenario::C => &[1, 2],
    };
    axes.iter()
        .map(|&i| {
            let reference: Vec<f64> = trace.iter().map(|s| s.phantom[i]).collect();
            let follower: Vec<f64> = trace.iter().map(|s| s.probe[i]).collect();
            cross_correlation_delay(&reference, &follower, dt, 2.0)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingSummary {
    pub scenario: Scenario,
    pub max_gap: f64,
    pub delay: f64,
    pub max_force_deviation: f64,
}

impl TrackingSummary {
    pub fn from_trace(trace: &[TraceSample], scenario: Scenario, cfg: &SimConfig) -> Self {
        let [fy, fz] = cfg.pid.f_ref;
        TrackingSummary {
            scenario,
            max_gap: tracking_gap(trace),
            delay: tracking_delay(trace, scenario, cfg.sweep.dt),
            max_force_deviation: trace
                .iter()
                .map(|s| (s.force.y - fy).hypot(s.force.z - fz))
                .fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_of_a_shifted_signal() {
        let dt = 0.01;
        let x: Vec<f64> = (0..2000).map(|i| ((i as f64 * dt) * 1.3).sin() + (i as f64 * dt * 0.4).cos()).collect();
        let lag = 37;
        let y: Vec<f64> = (0..2000).map(|i| if i >= lag { x[i - lag] } else { x[0] }).collect();
        let d = cross_correlation_delay(&x, &y, dt, 1.0);
        assert!((d - 0.37).abs() < 1e-9, "{d}");
    }

    #[test]
    fn stationary_run_has_no_gap() {
        let mut cfg = SimConfig::default();
        cfg.sweep.force_noise = 0.0;
        let trace = simulate_compensation(Scenario::S, &cfg, 0, 10.0).unwrap();
        assert_eq!(trace.len(), 1001);
        assert_eq!(tracking_gap(&trace), 0.0);
    }
}
