//! Closed-loop sweep simulation.
//!
//! A [`WorldState`] is advanced in fixed steps: the gland follows the motion
//! profile, the contact force is measured, the PID controller produces a
//! velocity command and the probe integrates it (explicit Euler). On top of
//! the stepping sits the sweep state machine:
//!
//! ```text
//! Init ──► FindEdge ──► Recording ◄──► Paused
//!                           │
//!                           ▼
//!                         Done ──► GotoSlice
//! ```
//!
//! Probe angles live on an integer grid of `rotation_speed·dt`, so recorded
//! slice angles are exact multiples of the slice step and identical across
//! runs.

pub(crate) mod record;
mod tracking;

pub use record::{read_sweep, write_sweep, SliceRecord, SweepRecord, TraceSample};
pub use tracking::{
    cross_correlation_delay, simulate_compensation, tracking_delay, tracking_gap, TrackingSummary,
};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::control::{measure_force, pid_step, PidState};
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::motion::{displacement, velocity, Scenario};
use crate::phantom::{contact_force, slice_contour};
use crate::segmentation::{jitter_contour, segment, visual_offset, SegmentationResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepPhase {
    Init,
    FindEdge,
    Recording,
    Paused,
    Done,
    GotoSlice,
}

impl SweepPhase {
    /// Whether the state machine may move from `self` to `next`.
    pub fn can_transition_to(self, next: SweepPhase) -> bool {
        use SweepPhase::*;
        self == next
            || matches!(
                (self, next),
                (Init, FindEdge)
                    | (FindEdge, Recording)
                    | (Recording, Paused)
                    | (Paused, Recording)
                    | (Recording, Done)
                    | (Done, GotoSlice)
                    | (GotoSlice, Done)
            )
    }
}

/// Complete simulator state.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub scenario: Scenario,
    pub step_count: u64,
    /// Simulated time (s), always `step_count · dt`.
    pub t: f64,
    pub probe_pos: Vec3,
    pub probe_phi: f64,
    /// Gland origin in the world.
    pub phantom_pos: Vec3,
    pub pid_state: PidState,
    pub sweep_phase: SweepPhase,
    /// Force seen by the controller on the last step (N).
    pub last_measured: Vec3,
    pub rng: ChaCha8Rng,
}

impl WorldState {
    /// Probe at the reference-force equilibrium, gland at home, `phi = 0`.
    pub fn at_equilibrium(scenario: Scenario, cfg: &SimConfig, seed: u64) -> Self {
        let home = *cfg.phantom.pose.translation();
        let probe_pos = home + cfg.phantom.equilibrium_offset(cfg.pid.f_ref);
        WorldState {
            scenario,
            step_count: 0,
            t: 0.0,
            probe_pos,
            probe_phi: 0.0,
            phantom_pos: home,
            pid_state: PidState::default(),
            sweep_phase: SweepPhase::Init,
            last_measured: Vec3::new(0.0, cfg.pid.f_ref[0], cfg.pid.f_ref[1]),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Gland displacement from its home position.
    pub fn phantom_offset(&self, cfg: &SimConfig) -> Vec3 {
        self.phantom_pos - cfg.phantom.pose.translation()
    }

    /// True (noise-free) contact force at the current state.
    pub fn true_force(&self, cfg: &SimConfig) -> Vec3 {
        let rel_vel = self.pid_state.last_command - velocity(self.t, self.scenario, &cfg.motion);
        contact_force(&cfg.phantom, &self.probe_pos, &self.phantom_pos, &rel_vel).force_tcp
    }

    /// Distance of the measured force from the reference in the controlled plane.
    pub fn force_deviation(&self, cfg: &SimConfig) -> f64 {
        let f = self.last_measured;
        (f.y - cfg.pid.f_ref[0]).hypot(f.z - cfg.pid.f_ref[1])
    }

    /// Images the current slice: ground-truth contour, optional jitter, segmentation.
    pub fn image_slice(&mut self, cfg: &SimConfig) -> SegmentationResult {
        // The gland only translates, so slicing it in place is equivalent to
        // slicing the home-pose gland from a correspondingly shifted probe.
        let probe_pose = RigidTransform::from_translation(self.probe_pos - self.phantom_offset(cfg));
        let contour = slice_contour(
            &cfg.phantom,
            &probe_pose,
            self.probe_phi,
            cfg.sweep.probe_radius,
            &cfg.image,
            cfg.sweep.contour_samples,
        );
        let contour = jitter_contour(&contour, cfg.segmentation.jitter_sigma, &cfg.image, &mut self.rng);
        segment(&contour, &cfg.image, &cfg.segmentation)
    }

    fn set_phase(&mut self, next: SweepPhase) {
        debug_assert!(self.sweep_phase.can_transition_to(next), "{:?} -> {:?}", self.sweep_phase, next);
        self.sweep_phase = next;
    }

    fn check_finite(&self) -> Result<()> {
        let ok = self.t.is_finite()
            && self.probe_phi.is_finite()
            && self.probe_pos.iter().all(|v| v.is_finite())
            && self.phantom_pos.iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("world state"))
        }
    }
}

/// Advances the world by one step with an extra axial velocity (mm/s)
/// superimposed on the controller's command. Returns the sample describing
/// the state *before* the step.
fn advance(world: &mut WorldState, cfg: &SimConfig, axial_velocity: f64) -> Result<TraceSample> {
    world.check_finite()?;
    let dt = cfg.sweep.dt;
    let true_force = world.true_force(cfg);
    let measured = measure_force(true_force, cfg.sweep.force_noise, &mut world.rng).f;
    world.last_measured = measured;
    let sample = TraceSample {
        t: world.t,
        phi: world.probe_phi,
        probe: world.probe_pos,
        phantom: world.phantom_pos,
        force: measured,
    };
    if measured.norm() > cfg.sweep.abort_force {
        return Err(Error::ForceAbort { force: measured.norm(), limit: cfg.sweep.abort_force, t: world.t });
    }

    let (command, pid_state) = pid_step(&world.pid_state, measured, &cfg.pid, dt);
    world.pid_state = pid_state;
    world.probe_pos += (command + Vec3::new(axial_velocity, 0.0, 0.0)) * dt;

    world.step_count += 1;
    world.t = world.step_count as f64 * dt;
    world.phantom_pos =
        cfg.phantom.pose.translation() + displacement(world.t, world.scenario, &cfg.motion);
    world.check_finite()?;
    Ok(sample)
}

/// One fixed step of the closed loop (phase and angle unchanged).
pub fn step(world: &WorldState, cfg: &SimConfig) -> Result<WorldState> {
    let mut next = world.clone();
    advance(&mut next, cfg, 0.0)?;
    Ok(next)
}

/// Runs one complete sweep and returns everything it recorded.
pub fn run_sweep(scenario: Scenario, cfg: &SimConfig, seed: u64) -> Result<SweepRecord> {
    cfg.validate()?;
    let sw = &cfg.sweep;
    let mut world = WorldState::at_equilibrium(scenario, cfg, seed);
    let mut trace = Vec::new();
    let timeout = |w: &WorldState| -> Result<()> {
        if w.t > sw.max_duration {
            Err(Error::Timeout { max_duration: sw.max_duration })
        } else {
            Ok(())
        }
    };

    // Init: imprecise hand placement along the probe axis, then one visual
    // centring correction while compensation is active.
    if sw.placement_error > 0.0 {
        world.probe_pos.x += world.rng.random_range(-sw.placement_error..=sw.placement_error);
    }
    let first = world.image_slice(cfg);
    let correction = visual_offset(&first, &cfg.image)?;
    let mut remaining = correction;
    while remaining != 0.0 {
        let max_move = sw.centering_speed * sw.dt;
        let delta = remaining.clamp(-max_move, max_move);
        trace.push(advance(&mut world, cfg, delta / sw.dt)?);
        remaining -= delta;
        if remaining.abs() < 1e-12 {
            remaining = 0.0;
        }
        timeout(&world)?;
    }

    let phi_step = sw.phi_step();
    let per_slice = sw.steps_per_slice();
    let mut ticks: i64 = 0;

    // FindEdge: rotate forward until the gland disappears.
    world.set_phase(SweepPhase::FindEdge);
    let mut absent = 0;
    while absent < sw.absent_frames {
        trace.push(advance(&mut world, cfg, 0.0)?);
        ticks += 1;
        world.probe_phi = ticks as f64 * phi_step;
        if ticks % per_slice == 0 {
            let seg = world.image_slice(cfg);
            absent = if seg.present { 0 } else { absent + 1 };
        }
        timeout(&world)?;
    }

    // Recording: rotate back across the whole gland, pausing on force excursions.
    world.set_phase(SweepPhase::Recording);
    let mut slices = Vec::new();
    let mut pause_events = Vec::new();
    let mut pause_start = None;
    let mut seen = false;
    absent = 0;
    loop {
        trace.push(advance(&mut world, cfg, 0.0)?);
        timeout(&world)?;
        let deviated = world.force_deviation(cfg) > sw.pause_threshold;
        match (world.sweep_phase, deviated) {
            (SweepPhase::Recording, true) => {
                world.set_phase(SweepPhase::Paused);
                pause_start = Some(world.t);
                continue;
            }
            (SweepPhase::Paused, true) => continue,
            (SweepPhase::Paused, false) => {
                world.set_phase(SweepPhase::Recording);
                pause_events.push((pause_start.take().unwrap_or(world.t), world.t));
            }
            _ => {}
        }
        ticks -= 1;
        world.probe_phi = ticks as f64 * phi_step;
        if ticks % per_slice == 0 {
            let seg = world.image_slice(cfg);
            if seg.present {
                seen = true;
                absent = 0;
            } else if seen {
                absent += 1;
            }
            slices.push(SliceRecord { phi: world.probe_phi, t: world.t, seg });
            if seen && absent >= sw.absent_frames {
                break;
            }
        }
    }
    if let Some(start) = pause_start {
        pause_events.push((start, world.t));
    }
    world.set_phase(SweepPhase::Done);

    if !slices.iter().any(|s| s.seg.present) {
        return Err(Error::NoProstateInView);
    }
    Ok(SweepRecord {
        scenario,
        seed,
        config: cfg.clone(),
        duration: world.t,
        centering_correction: correction,
        phi_center: 0.0,
        slices,
        trace,
        pause_events,
        final_state: Some(FinalState::from(&world)),
    })
}

/// Pose summary of the world at the end of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub t: f64,
    pub probe_pos: Vec3,
    pub probe_phi: f64,
    pub phantom_pos: Vec3,
}

impl From<&WorldState> for FinalState {
    fn from(w: &WorldState) -> Self {
        FinalState { t: w.t, probe_pos: w.probe_pos, probe_phi: w.probe_phi, phantom_pos: w.phantom_pos }
    }
}

/// Rotates to `phi_target` at the configured speed with compensation active.
///
/// `range` is the recorded angular range `(min, max)`; targets outside it
/// are rejected. Returns the final state and the transit trace.
pub fn goto_slice(
    world: &WorldState,
    phi_target: f64,
    range: (f64, f64),
    cfg: &SimConfig,
) -> Result<(WorldState, Vec<TraceSample>)> {
    let (min, max) = range;
    if !phi_target.is_finite() || phi_target < min || phi_target > max {
        return Err(Error::TargetOutOfRange { target: phi_target, min, max });
    }
    let mut w = world.clone();
    let mut trace = Vec::new();
    if (w.probe_phi - phi_target).abs() <= cfg.sweep.goto_tolerance {
        return Ok((w, trace));
    }
    let resume = w.sweep_phase;
    w.sweep_phase = SweepPhase::GotoSlice;
    let start_t = w.t;
    let phi_step = cfg.sweep.phi_step();
    while w.probe_phi != phi_target {
        trace.push(advance(&mut w, cfg, 0.0)?);
        let remaining = phi_target - w.probe_phi;
        w.probe_phi = if remaining.abs() <= phi_step { phi_target } else { w.probe_phi + phi_step * remaining.signum() };
        if w.t - start_t > cfg.sweep.max_duration {
            return Err(Error::Timeout { max_duration: cfg.sweep.max_duration });
        }
    }
    w.sweep_phase = if resume == SweepPhase::GotoSlice { SweepPhase::Done } else { resume };
    Ok((w, trace))
}
