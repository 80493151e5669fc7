use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FinalState;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::motion::Scenario;
use crate::segmentation::{rasterize, read_contour_csv, write_contour_csv, SegmentationResult};

/// One saved frame of the recording pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub phi: f64,
    pub t: f64,
    pub seg: SegmentationResult,
}

/// State of the loop at one simulation step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub phi: f64,
    pub probe: Vec3,
    pub phantom: Vec3,
    /// Force seen by the controller (N, TCP frame).
    pub force: Vec3,
}

/// Everything captured during one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub scenario: Scenario,
    pub seed: u64,
    pub config: SimConfig,
    /// Simulated time from start to the end of the recording pass (s).
    pub duration: f64,
    /// Axial move (mm) applied by visual centring during initialisation.
    pub centering_correction: f64,
    /// Probe angle of the initial (central) slice.
    pub phi_center: f64,
    /// Recording-pass frames in acquisition order, including empty ones at the edges.
    pub slices: Vec<SliceRecord>,
    /// One sample per simulation step.
    pub trace: Vec<TraceSample>,
    /// `(start, end)` times of force pauses.
    pub pause_events: Vec<(f64, f64)>,
    pub final_state: Option<FinalState>,
}

impl SweepRecord {
    pub fn present_slices(&self) -> impl Iterator<Item = &SliceRecord> {
        self.slices.iter().filter(|s| s.seg.present)
    }

    /// Angular range `(min, max)` covered by slices that show the gland.
    pub fn phi_range(&self) -> Option<(f64, f64)> {
        self.present_slices().fold(None, |acc, s| match acc {
            None => Some((s.phi, s.phi)),
            Some((lo, hi)) => Some((lo.min(s.phi), hi.max(s.phi))),
        })
    }

    pub fn force_trace(&self) -> impl Iterator<Item = (f64, Vec3)> + '_ {
        self.trace.iter().map(|s| (s.t, s.force))
    }

    pub fn probe_trace(&self) -> impl Iterator<Item = (f64, Vec3)> + '_ {
        self.trace.iter().map(|s| (s.t, s.probe))
    }

    pub fn phantom_trace(&self) -> impl Iterator<Item = (f64, Vec3)> + '_ {
        self.trace.iter().map(|s| (s.t, s.phantom))
    }
}

#[derive(Serialize, Deserialize)]
struct Meta {
    scenario: Scenario,
    seed: u64,
    duration: f64,
    centering_correction: f64,
    phi_center: f64,
    slice_count: usize,
    pause_events: Vec<(f64, f64)>,
    final_state: Option<FinalState>,
    config: SimConfig,
}

#[derive(Serialize, Deserialize)]
struct SliceRow {
    index: usize,
    t: f64,
    phi: f64,
    present: bool,
    centroid_u: Option<f64>,
    centroid_v: Option<f64>,
    area: f64,
}

#[derive(Serialize, Deserialize)]
struct ForceRow {
    t: f64,
    fx: f64,
    fy: f64,
    fz: f64,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TrajectoryRow {
    pub t: f64,
    pub phi: f64,
    pub probe_x: f64,
    pub probe_y: f64,
    pub probe_z: f64,
    pub phantom_x: f64,
    pub phantom_y: f64,
    pub phantom_z: f64,
}

impl From<&TraceSample> for TrajectoryRow {
    fn from(s: &TraceSample) -> Self {
        TrajectoryRow {
            t: s.t,
            phi: s.phi,
            probe_x: s.probe.x,
            probe_y: s.probe.y,
            probe_z: s.probe.z,
            phantom_x: s.phantom.x,
            phantom_y: s.phantom.y,
            phantom_z: s.phantom.z,
        }
    }
}

fn contour_file(index: usize) -> String {
    format!("slice_{index:05}.csv")
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path, e.to_string())
    }
}

/// Writes a sweep to `dir`: `meta.json`, `slices.csv`, `forces.csv`,
/// `trajectory.csv` and one `contours/slice_NNNNN.csv` per non-empty slice.
pub fn write_sweep(record: &SweepRecord, dir: &Path) -> Result<()> {
    let contours = dir.join("contours");
    fs::create_dir_all(&contours).map_err(|e| Error::io(&contours, e))?;

    let meta = Meta {
        scenario: record.scenario,
        seed: record.seed,
        duration: record.duration,
        centering_correction: record.centering_correction,
        phi_center: record.phi_center,
        slice_count: record.slices.len(),
        pause_events: record.pause_events.clone(),
        final_state: record.final_state,
        config: record.config.clone(),
    };
    let meta_path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("meta is serializable");
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;

    write_csv(
        &dir.join("slices.csv"),
        record.slices.iter().enumerate().map(|(index, s)| SliceRow {
            index,
            t: s.t,
            phi: s.phi,
            present: s.seg.present,
            centroid_u: s.seg.centroid.map(|c| c.u),
            centroid_v: s.seg.centroid.map(|c| c.v),
            area: s.seg.area(),
        }),
    )?;
    write_csv(
        &dir.join("forces.csv"),
        record.trace.iter().map(|s| ForceRow { t: s.t, fx: s.force.x, fy: s.force.y, fz: s.force.z }),
    )?;
    write_csv(&dir.join("trajectory.csv"), record.trace.iter().map(TrajectoryRow::from))?;

    for (index, s) in record.slices.iter().enumerate() {
        if s.seg.present {
            write_contour_csv(&s.seg.contour, &contours.join(contour_file(index)))?;
        }
    }
    Ok(())
}

/// Reads a sweep written by [`write_sweep`]. Masks are re-rasterized from the
/// stored contours, so the result equals the record that was written.
pub fn read_sweep(dir: &Path) -> Result<SweepRecord> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Meta = serde_json::from_str(&text).map_err(|e| Error::parse(&meta_path, e.to_string()))?;
    let image = meta.config.image.clone();

    let rows: Vec<SliceRow> = read_csv(&dir.join("slices.csv"))?;
    let mut slices = Vec::with_capacity(rows.len());
    for row in rows {
        let seg = if row.present {
            let contour = read_contour_csv(&dir.join("contours").join(contour_file(row.index)))?;
            let mask = rasterize(&contour, &image);
            let centroid = mask.centroid();
            SegmentationResult { present: true, mask, contour, centroid }
        } else {
            SegmentationResult::background(&image)
        };
        slices.push(SliceRecord { phi: row.phi, t: row.t, seg });
    }

    let forces: Vec<ForceRow> = read_csv(&dir.join("forces.csv"))?;
    let traj: Vec<TrajectoryRow> = read_csv(&dir.join("trajectory.csv"))?;
    if forces.len() != traj.len() {
        return Err(Error::parse(dir, "forces.csv and trajectory.csv have different lengths"));
    }
    let trace = forces
        .iter()
        .zip(&traj)
        .map(|(f, p)| TraceSample {
            t: p.t,
            phi: p.phi,
            probe: Vec3::new(p.probe_x, p.probe_y, p.probe_z),
            phantom: Vec3::new(p.phantom_x, p.phantom_y, p.phantom_z),
            force: Vec3::new(f.fx, f.fy, f.fz),
        })
        .collect();

    Ok(SweepRecord {
        scenario: meta.scenario,
        seed: meta.seed,
        config: meta.config,
        duration: meta.duration,
        centering_correction: meta.centering_correction,
        phi_center: meta.phi_center,
        slices,
        trace,
        pause_events: meta.pause_events,
        final_state: meta.final_state,
    })
}
