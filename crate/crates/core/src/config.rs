//! Simulation configuration, loadable from a TOML file.
//!
//! Every section and key is optional; anything missing takes its default.
//!
//! ```toml
//! [phantom]
//! semi_axes = [22.0, 16.0, 22.0]
//! taper = 0.2
//!
//! [pid]
//! kp = [5.0, 5.0]
//!
//! [sweep]
//! pause_threshold = 2.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::PidConfig;
use crate::error::{Error, Result};
use crate::geometry::ImageSpec;
use crate::motion::MotionConfig;
use crate::phantom::PhantomModel;
use crate::segmentation::SegmentationConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Simulation step (s).
    pub dt: f64,
    /// Probe rotation speed (rad/s).
    pub rotation_speed: f64,
    /// Angle between saved slices (rad); rounded to a whole number of steps.
    pub slice_step: f64,
    /// Force deviation from the reference (N) above which rotation pauses.
    pub pause_threshold: f64,
    /// Contact force magnitude (N) that aborts the sweep.
    pub abort_force: f64,
    /// Simulated time limit (s).
    pub max_duration: f64,
    /// Consecutive empty frames that mark an edge of the gland.
    pub absent_frames: usize,
    /// Probe radius (mm).
    pub probe_radius: f64,
    /// Rays cast per slice contour.
    pub contour_samples: usize,
    /// Force sensor noise, standard deviation per axis (N).
    pub force_noise: f64,
    /// Half-width (mm) of the uniform axial error of the initial hand placement.
    pub placement_error: f64,
    /// Axial speed (mm/s) of the visual centring move.
    pub centering_speed: f64,
    /// Arrival tolerance for slice targeting (rad).
    pub goto_tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            rotation_speed: 0.1,
            slice_step: 0.005,
            pause_threshold: 2.0,
            abort_force: 15.0,
            max_duration: 120.0,
            absent_frames: 3,
            probe_radius: 9.0,
            contour_samples: 1000,
            force_noise: 0.02,
            placement_error: 2.0,
            centering_speed: 2.0,
            goto_tolerance: 0.002,
        }
    }
}

impl SweepConfig {
    /// Rotation increment per simulation step (rad).
    pub fn phi_step(&self) -> f64 {
        self.rotation_speed * self.dt
    }

    /// Simulation steps between saved slices.
    pub fn steps_per_slice(&self) -> i64 {
        ((self.slice_step / self.phi_step()).round() as i64).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("rotation_speed", self.rotation_speed),
            ("slice_step", self.slice_step),
            ("pause_threshold", self.pause_threshold),
            ("abort_force", self.abort_force),
            ("max_duration", self.max_duration),
            ("probe_radius", self.probe_radius),
            ("centering_speed", self.centering_speed),
            ("goto_tolerance", self.goto_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("sweep: {name} must be positive")));
            }
        }
        if !(self.force_noise >= 0.0) || !(self.placement_error >= 0.0) {
            return Err(Error::InvalidInput("sweep: noise and placement error must be >= 0".into()));
        }
        if self.absent_frames == 0 || self.contour_samples < 8 {
            return Err(Error::InvalidInput(
                "sweep: absent_frames must be >= 1 and contour_samples >= 8".into(),
            ));
        }
        Ok(())
    }
}

/// All simulator parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub image: ImageSpec,
    pub phantom: PhantomModel,
    pub motion: MotionConfig,
    pub pid: PidConfig,
    pub segmentation: SegmentationConfig,
    pub sweep: SweepConfig,
}

impl SimConfig {
    /// Noise-free, untapered variant used to check reconstruction geometry.
    pub fn ideal() -> Self {
        let mut cfg = SimConfig::default();
        cfg.phantom.taper = 0.0;
        cfg.segmentation.jitter_sigma = 0.0;
        cfg.sweep.force_noise = 0.0;
        cfg.sweep.placement_error = 0.0;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.image.width > 0.0 && self.image.depth > 0.0 && self.image.resolution > 0.0) {
            return Err(Error::InvalidInput("image: dimensions must be positive".into()));
        }
        self.phantom.validate()?;
        self.motion.validate()?;
        self.pid.validate()?;
        self.sweep.validate()?;
        if !(self.segmentation.min_area >= 0.0) || !(self.segmentation.jitter_sigma >= 0.0) {
            return Err(Error::InvalidInput("segmentation: min_area and jitter_sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}
