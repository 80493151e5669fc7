//! Oracle segmentation of one slice: mask, centroid and visual offset.

use prostate_sweep::geometry::{ImageSpec, RigidTransform};
use prostate_sweep::phantom::{slice_contour, PhantomModel};
use prostate_sweep::segmentation::{segment, visual_offset, SegmentationConfig};

fn main() -> prostate_sweep::Result<()> {
    let model = PhantomModel::default();
    let image = ImageSpec::default();
    let probe = RigidTransform::from_translation(model.equilibrium_offset([7.0, 0.0]));
    let contour = slice_contour(&model, &probe, 0.0, 9.0, &image, 1000);

    let seg = segment(&contour, &image, &SegmentationConfig::default());
    let c = seg.centroid.expect("central slice shows the gland");
    println!("mask area {:.1} mm², centroid ({:.2}, {:.2}) mm", seg.area(), c.u, c.v);
    // The taper makes one end larger, so the centroid sits off the gland centre.
    println!("visual offset {:+.3} mm along the probe", visual_offset(&seg, &image)?);

    let path = std::env::temp_dir().join("prostate_sweep_mask.pgm");
    seg.mask.write_pgm(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
