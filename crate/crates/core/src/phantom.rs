//! Synthetic prostate phantom.
//!
//! The gland is a tapered ellipsoid: the `(y, z)` cross-section is scaled by
//! `s(x) = 1 + taper·x/a`, so one end is larger than the other. Contact with
//! the probe is two decoupled linear springs (with optional damping) along the
//! probe's `y` and `z` axes.
//!
//! Force sign convention: the reported force is the load the probe applies to
//! the tissue, expressed in the probe (TCP) frame. Pressing into the gland
//! along `+y` reads positive `F_y`. The probe rotates about its own x-axis
//! during a sweep; the contact is rotationally symmetric about that axis, so
//! the TCP frame used for force control stays aligned with the world axes.

use serde::{Deserialize, Serialize};

use crate::geometry::{ImageSpec, Point2, RigidTransform, Vec3};

/// Tapered-ellipsoid gland plus its contact law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomModel {
    /// Semi-axes `(a, b, c)` in mm along x (probe axis), y and z.
    pub semi_axes: [f64; 3],
    /// Linear cross-section taper, `0 <= taper < 1`.
    pub taper: f64,
    /// Spring stiffness `(k_y, k_z)` in N/mm.
    pub stiffness: [f64; 2],
    /// Damping `(d_y, d_z)` in N·s/mm.
    pub damping: [f64; 2],
    /// Loose-fit band (mm) around the zero-force `y` offset in which the
    /// horizontal force vanishes.
    pub backlash: f64,
    /// Per-component force saturation (N).
    pub force_limit: f64,
    /// Probe position minus gland centre at which the contact force is zero.
    pub zero_force_offset: [f64; 3],
    /// Home pose of the gland frame in the world.
    pub pose: RigidTransform,
}

impl Default for PhantomModel {
    fn default() -> Self {
        Self {
            semi_axes: [22.0, 16.0, 22.0],
            taper: 0.2,
            stiffness: [0.8, 0.8],
            damping: [0.04, 0.04],
            backlash: 0.5,
            force_limit: 50.0,
            zero_force_offset: [-30.0, -36.25, 0.0],
            pose: RigidTransform::identity(),
        }
    }
}

/// Relative pose and force at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    /// Probe position minus gland position minus the zero-force offset (mm).
    pub relative_offset: Vec3,
    /// Contact force in the TCP frame (N).
    pub force_tcp: Vec3,
}

impl PhantomModel {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidInput(format!("phantom: {m}")));
        if self.semi_axes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("semi-axes must be positive");
        }
        if !(0.0..1.0).contains(&self.taper) {
            return bad("taper must be in [0, 1)");
        }
        if self.stiffness.iter().chain(&self.damping).any(|&k| !(k >= 0.0)) {
            return bad("stiffness and damping must be >= 0");
        }
        if !(self.backlash >= 0.0) || !(self.force_limit > 0.0) {
            return bad("backlash must be >= 0 and force_limit > 0");
        }
        Ok(())
    }

    /// Cross-section scale at `x`, clamped positive.
    #[inline]
    pub fn taper_scale(&self, x: f64) -> f64 {
        (1.0 + self.taper * x / self.semi_axes[0]).max(1e-9)
    }

    /// Implicit function, negative inside, zero on the surface.
    #[inline]
    pub fn implicit(&self, p: &Vec3) -> f64 {
        let [a, b, c] = self.semi_axes;
        let s = self.taper_scale(p.x);
        let (xa, yb, zc) = (p.x / a, p.y / (b * s), p.z / (c * s));
        xa * xa + yb * yb + zc * zc - 1.0
    }

    pub fn implicit_gradient(&self, p: &Vec3) -> Vec3 {
        let [a, b, c] = self.semi_axes;
        let s = self.taper_scale(p.x);
        let cross = p.y * p.y / (b * b) + p.z * p.z / (c * c);
        Vec3::new(
            2.0 * p.x / (a * a) - 2.0 * cross * self.taper / (a * s * s * s),
            2.0 * p.y / (b * b * s * s),
            2.0 * p.z / (c * c * s * s),
        )
    }

    /// First-order distance (mm) from `p` to the surface: `|f| / |∇f|`.
    pub fn surface_residual(&self, p: &Vec3) -> f64 {
        self.implicit(p).abs() / self.implicit_gradient(p).norm()
    }

    pub fn contains(&self, p_local: &Vec3) -> bool {
        self.implicit(p_local) <= 0.0
    }

    /// Relative probe offset at rest that produces the reference force.
    pub fn equilibrium_offset(&self, f_ref: [f64; 2]) -> Vec3 {
        let [ky, kz] = self.stiffness;
        let dy = if f_ref[0] == 0.0 {
            0.0
        } else {
            f_ref[0] / ky + self.backlash * f_ref[0].signum()
        };
        let dz = if f_ref[1] == 0.0 { 0.0 } else { f_ref[1] / kz };
        Vec3::from(self.zero_force_offset) + Vec3::new(0.0, dy, dz)
    }
}

/// Implicit-surface membership of a point in the gland frame.
pub fn contains(model: &PhantomModel, p_local: &Vec3) -> bool {
    model.contains(p_local)
}

/// Spring-damper contact force between probe and gland.
///
/// `relative_velocity` is probe velocity minus gland velocity (mm/s).
pub fn contact_force(
    model: &PhantomModel,
    probe_pos_world: &Vec3,
    phantom_pos_world: &Vec3,
    relative_velocity: &Vec3,
) -> ContactState {
    let d = probe_pos_world - phantom_pos_world - Vec3::from(model.zero_force_offset);
    let lim = model.force_limit;

    let band = model.backlash;
    let fy = if d.y.abs() <= band {
        0.0
    } else {
        model.stiffness[0] * (d.y - band * d.y.signum()) + model.damping[0] * relative_velocity.y
    };
    let fz = model.stiffness[1] * d.z + model.damping[1] * relative_velocity.z;

    ContactState {
        relative_offset: d,
        force_tcp: Vec3::new(0.0, fy.clamp(-lim, lim), fz.clamp(-lim, lim)),
    }
}

const SEED_GRID_STEP: f64 = 0.5;
const BISECTION_TOL: f64 = 1e-12;

/// Intersection of the gland surface with the image plane at probe angle `phi`.
///
/// `probe_pose` is the world pose of the (unrotated) probe frame whose origin
/// sits on the rotation axis at image column `u = 0`; `r` is the probe radius.
/// Returns up to `n_samples` points in image coordinates, ordered
/// counter-clockwise around an interior seed. The result is empty when the
/// plane misses the gland inside the image window.
pub fn slice_contour(
    model: &PhantomModel,
    probe_pose: &RigidTransform,
    phi: f64,
    r: f64,
    image: &ImageSpec,
    n_samples: usize,
) -> Vec<Point2> {
    let plane = SlicePlane::new(model, probe_pose, phi, r);
    let Some(seed) = plane.deepest_point(image) else {
        return Vec::new();
    };

    let n = n_samples.max(8);
    let mut out = Vec::with_capacity(n);
    let mut guess = SEED_GRID_STEP;
    for k in 0..n {
        let theta = std::f64::consts::TAU * k as f64 / n as f64;
        let dir = (theta.cos(), theta.sin());
        let radius = plane.boundary_along(seed, dir, guess);
        guess = radius.max(1e-3);
        let p = Point2::new(seed.u + radius * dir.0, seed.v + radius * dir.1);
        if image.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Largest angle (rad) at which the image plane still cuts the gland, found by
/// bisection on contour emptiness. `direction` is `+1.0` or `-1.0`.
pub fn angular_extent(
    model: &PhantomModel,
    probe_pose: &RigidTransform,
    r: f64,
    image: &ImageSpec,
    direction: f64,
) -> Option<f64> {
    let hits = |phi: f64| {
        SlicePlane::new(model, probe_pose, phi, r)
            .deepest_point(image)
            .is_some()
    };
    if !hits(0.0) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    if hits(direction * hi) {
        return Some(hi);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if hits(direction * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Affine map from image coordinates to the gland frame for one slice.
struct SlicePlane<'a> {
    model: &'a PhantomModel,
    origin: Vec3,
    axis_u: Vec3,
    axis_w: Vec3,
    r: f64,
}

impl<'a> SlicePlane<'a> {
    fn new(model: &'a PhantomModel, probe_pose: &RigidTransform, phi: f64, r: f64) -> Self {
        let to_local = model.pose.inverse().compose(probe_pose);
        let (s, c) = phi.sin_cos();
        Self {
            model,
            origin: to_local.apply(&Vec3::zeros()),
            axis_u: to_local.apply_vector(&Vec3::x()),
            axis_w: to_local.apply_vector(&Vec3::new(0.0, c, s)),
            r,
        }
    }

    #[inline]
    fn eval(&self, u: f64, v: f64) -> f64 {
        let q = self.origin + self.axis_u * u + self.axis_w * (v + self.r);
        self.model.implicit(&q)
    }

    /// Most interior point of the section inside the image window, if any.
    fn deepest_point(&self, image: &ImageSpec) -> Option<Point2> {
        let nu = (image.width / SEED_GRID_STEP).ceil() as usize;
        let nv = (image.depth / SEED_GRID_STEP).ceil() as usize;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=nu {
            let u = (i as f64 * SEED_GRID_STEP).min(image.width);
            for j in 0..=nv {
                let v = (j as f64 * SEED_GRID_STEP).min(image.depth);
                let f = self.eval(u, v);
                if f < best.0 {
                    best = (f, u, v);
                }
            }
        }

        // Pattern search refinement, clamped to the window.
        let (mut f, mut u, mut v) = best;
        let mut step = SEED_GRID_STEP;
        while step > 1e-9 {
            let mut moved = false;
            for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let (cu, cv) = ((u + du).clamp(0.0, image.width), (v + dv).clamp(0.0, image.depth));
                let cf = self.eval(cu, cv);
                if cf < f {
                    (f, u, v) = (cf, cu, cv);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (f < 0.0).then(|| Point2::new(u, v))
    }

    /// Distance from `seed` along `dir` to the first surface crossing.
    fn boundary_along(&self, seed: Point2, dir: (f64, f64), guess: f64) -> f64 {
        let at = |t: f64| self.eval(seed.u + t * dir.0, seed.v + t * dir.1);
        let (mut lo, mut hi);
        if at(guess) < 0.0 {
            lo = guess;
            hi = guess * 1.25 + 0.05;
            while at(hi) < 0.0 {
                lo = hi;
                hi = hi * 1.5 + 0.05;
            }
        } else {
            hi = guess;
            lo = guess * 0.8;
            while lo > 1e-12 && at(lo) >= 0.0 {
                hi = lo;
                lo *= 0.5;
            }
            if lo <= 1e-12 {
                lo = 0.0;
            }
        }
        while hi - lo > BISECTION_TOL * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if at(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
