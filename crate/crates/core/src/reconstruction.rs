//! Point-cloud reconstruction from a recorded sweep.
//!
//! Each contour point `(u, v)` of a slice recorded at angle `phi` is lifted to
//! `(u, v, 0)` and mapped by `slice_transform(phi − phi_center, r)`. The
//! probe's world translation is deliberately ignored: compensation keeps the
//! probe–gland relation fixed, so the cloud lives in the probe frame and any
//! residual tracking error shows up as cloud noise.

use std::path::Path;

use rayon::prelude::*;

use crate::cloud_io::{write_cloud, CloudFormat};
use crate::error::{Error, Result};
use crate::geometry::{slice_transform, PointCloud, Vec3};
use crate::sweep::SweepRecord;

/// Stacks all non-empty slice contours into one cloud, in sweep order.
pub fn reconstruct(record: &SweepRecord, r: f64) -> Result<PointCloud> {
    let slices: Vec<_> = record.present_slices().collect();
    if slices.is_empty() {
        return Err(Error::InvalidInput("sweep record contains no slice with prostate".into()));
    }
    let parts = slices
        .par_iter()
        .map(|s| {
            let t = slice_transform(s.phi - record.phi_center, r)?;
            Ok(s.seg.contour.iter().map(|p| t.apply(&p.embed())).collect::<Vec<Vec3>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for part in parts {
        points.extend(part);
    }
    Ok(PointCloud::new(points))
}

/// Writes a non-empty cloud as PLY or XYZ.
pub fn export_cloud(pc: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    if pc.is_empty() {
        return Err(Error::EmptyCloud);
    }
    write_cloud(pc, path, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::geometry::{ImageSpec, Point2};
    use crate::motion::Scenario;
    use crate::segmentation::{segment, SegmentationConfig};
    use crate::sweep::SliceRecord;

    fn record_with(slices: Vec<SliceRecord>) -> SweepRecord {
        SweepRecord {
            scenario: Scenario::S,
            seed: 0,
            config: SimConfig::default(),
            duration: 0.0,
            centering_correction: 0.0,
            phi_center: 0.0,
            slices,
            trace: Vec::new(),
            pause_events: Vec::new(),
            final_state: None,
        }
    }

    fn square(c: f64) -> Vec<Point2> {
        vec![Point2::new(c - 5.0, 10.0), Point2::new(c + 5.0, 10.0), Point2::new(c + 5.0, 20.0), Point2::new(c - 5.0, 20.0)]
    }

    #[test]
    fn single_central_slice_is_shifted_by_the_radius() {
        let img = ImageSpec::default();
        let seg = segment(&square(30.0), &img, &SegmentationConfig::default());
        let contour = seg.contour.clone();
        let rec = record_with(vec![SliceRecord { phi: 0.0, t: 0.0, seg }]);
        let pc = reconstruct(&rec, 9.0).unwrap();
        let expected: Vec<Vec3> = contour.iter().map(|p| Vec3::new(p.u, p.v + 9.0, 0.0)).collect();
        assert_eq!(pc.points, expected);
    }

    #[test]
    fn empty_record_is_an_error() {
        assert!(reconstruct(&record_with(Vec::new()), 9.0).is_err());
    }

    #[test]
    fn radial_floor_and_order() {
        let img = ImageSpec::default();
        let slices = [-0.2, -0.1, 0.0]
            .iter()
            .map(|&phi| SliceRecord { phi, t: 0.0, seg: segment(&square(30.0), &img, &SegmentationConfig::default()) })
            .collect();
        let pc = reconstruct(&record_with(slices), 9.0).unwrap();
        assert_eq!(pc.len(), 12);
        assert!(pc.iter().all(|p| p.y.hypot(p.z) >= 9.0));
        assert!(pc.points[0].z < 0.0 && pc.points[11].z == 0.0);
    }

    #[test]
    fn export_rejects_empty_cloud() {
        let dir = tempfile::tempdir().unwrap();
        let err = export_cloud(&PointCloud::default(), &dir.path().join("x.ply"), CloudFormat::Ply);
        assert!(matches!(err, Err(Error::EmptyCloud)));
    }
}
