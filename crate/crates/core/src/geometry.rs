//! Rigid-body math shared by every other module.
//!
//! Units are fixed crate-wide: lengths in mm, angles in rad, time in s.
//! Slice points live in the 2D image frame `(u, v)` where `u` runs along the
//! probe axis and `v` is imaging depth measured from the probe surface. They
//! are embedded as `(u, v, 0)` before being lifted into 3D by
//! [`slice_transform`].

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 3-vector in mm (or mm/s, or N, depending on the call site).
pub type Vec3 = Vector3<f64>;

/// Tolerance used when validating rotation blocks.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// A point in the ultrasound image plane, in mm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    /// Lateral position along the probe x-axis.
    pub u: f64,
    /// Depth measured from the probe surface.
    pub v: f64,
}

impl Point2 {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Embeds the image point into the slice's 3D frame as `(u, v, 0)`.
    pub fn embed(&self) -> Vec3 {
        Vec3::new(self.u, self.v, 0.0)
    }
}

/// Extent and pixel size of the ultrasound image window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImageSpec {
    /// Lateral extent along the probe axis (mm).
    pub width: f64,
    /// Imaging depth from the probe surface (mm).
    pub depth: f64,
    /// Mask resolution (mm per pixel).
    pub resolution: f64,
}

impl Default for ImageSpec {
    fn default() -> Self {
        Self {
            width: 60.0,
            depth: 50.0,
            resolution: 0.1,
        }
    }
}

impl ImageSpec {
    pub fn center_u(&self) -> f64 {
        self.width / 2.0
    }

    pub fn contains(&self, p: &Point2) -> bool {
        (0.0..=self.width).contains(&p.u) && (0.0..=self.depth).contains(&p.v)
    }

    /// Mask grid size `(columns, rows)`.
    pub fn grid_size(&self) -> (usize, usize) {
        (
            (self.width / self.resolution).round() as usize,
            (self.depth / self.resolution).round() as usize,
        )
    }
}

/// Proper rigid transform: orthonormal rotation with det +1 plus translation.
///
/// Serialized as the 16 entries of the homogeneous 4x4 matrix in row-major
/// order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 16]", into = "[f64; 16]")]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Builds a transform after checking that `rotation` is a proper rotation.
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        if rotation.iter().chain(translation.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rigid transform"));
        }
        let gram = rotation.transpose() * rotation - Matrix3::identity();
        if gram.amax() > ROTATION_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "rotation block is not orthonormal (max |RᵀR - I| = {:.3e})",
                gram.amax()
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "rotation determinant is {det}, expected +1"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Validates a homogeneous matrix: bottom row must be exactly `[0, 0, 0, 1]`.
    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        if m[(3, 0)] != 0.0 || m[(3, 1)] != 0.0 || m[(3, 2)] != 0.0 || m[(3, 3)] != 1.0 {
            return Err(Error::InvalidInput(
                "bottom row of homogeneous transform must be [0, 0, 0, 1]".into(),
            ));
        }
        let rotation = m.fixed_view::<3, 3>(0, 0).into_owned();
        let translation = m.fixed_view::<3, 1>(0, 3).into_owned();
        Self::from_parts(rotation, translation)
    }

    pub fn from_row_major(values: &[f64; 16]) -> Result<Self> {
        Self::from_matrix(&Matrix4::from_row_slice(values))
    }

    /// Rotation of `angle` rad about the x-axis.
    pub fn rotation_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            rotation: Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            translation: Vec3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let m = self.matrix();
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[r * 4 + c] = m[(r, c)];
            }
        }
        out
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotates a direction without translating it.
    #[inline]
    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Rotation angle in rad, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        let cos = ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        cos.acos()
    }

    /// Largest absolute entry-wise difference of the homogeneous matrices.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        (self.matrix() - other.matrix()).amax()
    }
}

impl TryFrom<[f64; 16]> for RigidTransform {
    type Error = Error;

    fn try_from(values: [f64; 16]) -> Result<Self> {
        Self::from_row_major(&values)
    }
}

impl From<RigidTransform> for [f64; 16] {
    fn from(t: RigidTransform) -> Self {
        t.to_row_major()
    }
}

/// Homogeneous transform lifting slice `(u, v, 0)` points into the
/// reconstruction frame for a probe rotated by `phi` about its x-axis.
///
/// The rotation is about x by `phi` and the translation is
/// `(0, r·cos φ, r·sin φ)`, where `r` is the probe radius (distance from the
/// rotation axis to the imaging surface).
pub fn slice_transform(phi: f64, r: f64) -> Result<RigidTransform> {
    if !phi.is_finite() || !r.is_finite() {
        return Err(Error::NonFinite("slice transform"));
    }
    if r < 0.0 {
        return Err(Error::InvalidInput(format!("probe radius must be >= 0, got {r}")));
    }
    let (s, c) = phi.sin_cos();
    Ok(RigidTransform {
        rotation: Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        translation: Vec3::new(0.0, r * c, r * s),
    })
}

pub fn compose(a: &RigidTransform, b: &RigidTransform) -> RigidTransform {
    a.compose(b)
}

pub fn invert(t: &RigidTransform) -> RigidTransform {
    t.inverse()
}

/// Ordered list of 3D points in mm.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|x| x.is_finite()))
    }

    /// Axis-aligned bounds `(min, max)`, or `None` for an empty cloud.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        Some(sum / self.points.len() as f64)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        apply_transform(t, self)
    }
}

impl FromIterator<Vec3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Vec3>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Maps every point of `pc` through `t`, preserving order.
pub fn apply_transform(t: &RigidTransform, pc: &PointCloud) -> PointCloud {
    pc.points.iter().map(|p| t.apply(p)).collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn lift(phi: f64, r: f64, u: f64, v: f64) -> Vec3 {
        slice_transform(phi, r).unwrap().apply(&Point2::new(u, v).embed())
    }

    #[test]
    fn central_slice_is_pure_radial_offset() {
        let t = slice_transform(0.0, 9.0).unwrap();
        assert_eq!(*t.rotation(), Matrix3::identity());
        assert_eq!(*t.translation(), Vec3::new(0.0, 9.0, 0.0));
        assert_eq!(lift(0.0, 9.0, 10.0, 5.0), Vec3::new(10.0, 14.0, 0.0));
    }

    #[test]
    fn quarter_turn_slice() {
        // Row-by-row: x' = u, y' = (v + r) cos φ, z' = (v + r) sin φ.
        let p = lift(FRAC_PI_2, 9.0, 10.0, 5.0);
        assert_abs_diff_eq!(p, Vec3::new(10.0, 0.0, 14.0), epsilon = 1e-12);
    }

    #[test]
    fn half_turn_without_radius() {
        let p = lift(PI, 0.0, 1.0, 2.0);
        assert_abs_diff_eq!(p, Vec3::new(1.0, -2.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn slice_transform_rejects_bad_input() {
        assert!(slice_transform(f64::NAN, 9.0).is_err());
        assert!(slice_transform(0.1, f64::INFINITY).is_err());
        assert!(slice_transform(0.1, -1.0).is_err());
    }

    #[test]
    fn apply_transform_examples() {
        let cloud = PointCloud::new(vec![Vec3::new(1.0, -2.0, 3.5), Vec3::new(0.0, 0.0, 0.0)]);
        assert_eq!(apply_transform(&RigidTransform::identity(), &cloud), cloud);

        let shifted = apply_transform(
            &RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0)),
            &PointCloud::new(vec![Vec3::zeros()]),
        );
        assert_eq!(shifted.points, vec![Vec3::new(1.0, 0.0, 0.0)]);

        let lifted = apply_transform(
            &slice_transform(FRAC_PI_2, 9.0).unwrap(),
            &PointCloud::new(vec![Vec3::new(10.0, 5.0, 0.0)]),
        );
        assert_abs_diff_eq!(lifted.points[0], Vec3::new(10.0, 0.0, 14.0), epsilon = 1e-12);
    }

    #[test]
    fn compose_and_invert_examples() {
        let t = slice_transform(0.3, 9.0).unwrap();
        assert_eq!(compose(&RigidTransform::identity(), &t), t);

        let inv = invert(&RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0)));
        assert_eq!(*inv.translation(), Vec3::new(-1.0, -2.0, -3.0));

        // Matrix-inverse oracle via nalgebra's general 4x4 inverse.
        let general = t.matrix().try_inverse().unwrap();
        assert!((invert(&t).matrix() - general).amax() < 1e-12);
        let round = compose(&invert(&t), &t);
        assert!(round.max_abs_diff(&RigidTransform::identity()) < 1e-9);
    }

    #[test]
    fn from_matrix_validates() {
        let mut m = Matrix4::identity();
        m[(3, 0)] = 1e-3;
        assert!(RigidTransform::from_matrix(&m).is_err());

        let mut scaled = Matrix4::identity();
        scaled[(0, 0)] = 2.0;
        assert!(RigidTransform::from_matrix(&scaled).is_err());

        let mut reflect = Matrix4::identity();
        reflect[(2, 2)] = -1.0;
        assert!(RigidTransform::from_matrix(&reflect).is_err());
    }

    #[test]
    fn serde_is_row_major() {
        let t = slice_transform(0.25, 9.0).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let values: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(values.len(), 16);
        assert_eq!(values[3], 0.0);
        assert_eq!(values[7], 9.0 * 0.25f64.cos());
        assert_eq!(&values[12..], &[0.0, 0.0, 0.0, 1.0]);
        let back: RigidTransform = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    fn arb_transform() -> impl Strategy<Value = RigidTransform> {
        (
            -PI..PI,
            -PI..PI,
            -PI..PI,
            prop::array::uniform3(-100.0..100.0f64),
        )
            .prop_map(|(a, b, c, t)| {
                let rot = nalgebra::Rotation3::from_euler_angles(a, b, c);
                RigidTransform::from_parts(*rot.matrix(), Vec3::from(t)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn radial_distance_is_preserved(phi in -10.0..10.0f64, r in 0.0..20.0f64,
                                        u in 0.0..60.0f64, v in 0.0..50.0f64) {
            let p = lift(phi, r, u, v);
            prop_assert_eq!(p.x, u);
            prop_assert!(((p.y * p.y + p.z * p.z).sqrt() - (v + r)).abs() < 1e-9);
        }

        #[test]
        fn group_axioms(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let id = RigidTransform::identity();
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!(left.max_abs_diff(&right) < 1e-9);
            prop_assert!(a.inverse().compose(&a).max_abs_diff(&id) < 1e-9);
            prop_assert!(a.compose(&a.inverse()).max_abs_diff(&id) < 1e-9);
            prop_assert!(a.compose(&id).max_abs_diff(&a) < 1e-12);
            // composition of proper rotations stays valid
            prop_assert!(RigidTransform::from_parts(*left.rotation(), *left.translation()).is_ok());
        }
    }
}
