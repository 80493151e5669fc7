//! Where a pixel of slice `phi` ends up in the probe frame.

use prostate_sweep::geometry::{compose, invert, slice_transform, ImageSpec, Point2};

fn main() -> prostate_sweep::Result<()> {
    let image = ImageSpec::default();
    let r = 9.0;
    // Image centre column, 10 mm deep.
    let px = Point2::new(image.center_u(), 10.0);

    for phi in [-0.4, -0.2, 0.0, 0.2, 0.4] {
        let t = slice_transform(phi, r)?;
        let p = t.apply(&px.embed());
        println!(
            "phi {phi:+.1} rad -> ({:7.3}, {:7.3}, {:7.3})  radial {:.3} mm",
            p.x,
            p.y,
            p.z,
            p.y.hypot(p.z)
        );
    }

    // Two slice rotations compose like angles; the inverse undoes a slice.
    let a = slice_transform(0.15, r)?;
    let b = slice_transform(0.25, r)?;
    let back = compose(&invert(&a), &a);
    println!("inverse residual {:.1e}", back.max_abs_diff(&prostate_sweep::geometry::RigidTransform::identity()));
    println!("rotation of b∘a: {:.3} rad", compose(&b, &a).rotation_angle());
    Ok(())
}
