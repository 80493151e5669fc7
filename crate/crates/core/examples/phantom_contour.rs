//! Ground-truth gland cross-sections, angular extent and contact force.

use prostate_sweep::geometry::{ImageSpec, RigidTransform, Vec3};
use prostate_sweep::phantom::{angular_extent, contact_force, slice_contour, PhantomModel};

fn main() {
    let model = PhantomModel::default();
    let image = ImageSpec::default();
    let r = 9.0;
    // Probe seated at the 7 N equilibrium.
    let offset = model.equilibrium_offset([7.0, 0.0]);
    let probe = RigidTransform::from_translation(offset);

    let up = angular_extent(&model, &probe, r, &image, 1.0).unwrap_or(0.0);
    let down = angular_extent(&model, &probe, r, &image, -1.0).unwrap_or(0.0);
    println!("gland visible for phi in [{:.3}, {:.3}] rad", -down, up);

    for phi in [0.0, 0.3, 0.6, 0.8] {
        let contour = slice_contour(&model, &probe, phi, r, &image, 400);
        let (umin, umax) = contour.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.u), hi.max(p.u)));
        let (vmin, vmax) = contour.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.v), hi.max(p.v)));
        if contour.is_empty() {
            println!("phi {phi:.1}: no gland");
        } else {
            println!("phi {phi:.1}: u [{umin:5.1}, {umax:5.1}]  v [{vmin:5.1}, {vmax:5.1}] mm");
        }
    }

    // Pushing 1 mm further into the gland raises F_y by k_y.
    let phantom = Vec3::zeros();
    let rest = contact_force(&model, &offset, &phantom, &Vec3::zeros());
    let deeper = contact_force(&model, &(offset + Vec3::new(0.0, 1.0, 0.0)), &phantom, &Vec3::zeros());
    println!("F at equilibrium {:.2} N, 1 mm deeper {:.2} N", rest.force_tcp.y, deeper.force_tcp.y);
}
