//! Geometric stand-in for the segmentation network.
//!
//! [`segment`] rasterizes a ground-truth contour into a filled mask, decides
//! whether the prostate is in view (mask area ≥ `min_area`) and reports the
//! mask centroid. A slice without prostate is reported as background: empty
//! mask, empty contour, no centroid.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ImageSpec, Point2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Minimum mask area (mm²) for the slice to count as containing prostate.
    pub min_area: f64,
    /// Standard deviation (mm) of Gaussian jitter added to contour points.
    pub jitter_sigma: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { min_area: 10.0, jitter_sigma: 0.1 }
    }
}

/// Binary image stored as horizontal runs of set pixels.
///
/// Row `j` covers depths `[j·res, (j+1)·res)`; a span `(j, i0, i1)` sets
/// columns `i0..i1` of that row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub cols: usize,
    pub rows: usize,
    pub resolution: f64,
    pub spans: Vec<(u32, u32, u32)>,
}

impl Mask {
    pub fn empty(image: &ImageSpec) -> Self {
        let (cols, rows) = image.grid_size();
        Mask { cols, rows, resolution: image.resolution, spans: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn pixel_count(&self) -> usize {
        self.spans.iter().map(|&(_, a, b)| (b - a) as usize).sum()
    }

    pub fn area(&self) -> f64 {
        self.pixel_count() as f64 * self.resolution * self.resolution
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.spans
            .iter()
            .any(|&(j, a, b)| j as usize == row && (a as usize..b as usize).contains(&col))
    }

    /// Mean pixel-centre position, or `None` for an empty mask.
    pub fn centroid(&self) -> Option<Point2> {
        let res = self.resolution;
        let (mut n, mut su, mut sv) = (0.0, 0.0, 0.0);
        for &(j, a, b) in &self.spans {
            let count = (b - a) as f64;
            // Sum of column centres (i + 0.5) for i in a..b.
            su += count * (a as f64 + b as f64) / 2.0;
            sv += count * (j as f64 + 0.5);
            n += count;
        }
        (n > 0.0).then(|| Point2::new(su / n * res, sv / n * res))
    }

    /// Writes the mask as a binary PGM (255 = prostate).
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut pixels = vec![0u8; self.cols * self.rows];
        for &(j, a, b) in &self.spans {
            let row = j as usize * self.cols;
            pixels[row + a as usize..row + b as usize].fill(255);
        }
        let mut bytes = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        bytes.extend_from_slice(&pixels);
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub present: bool,
    pub mask: Mask,
    pub contour: Vec<Point2>,
    pub centroid: Option<Point2>,
}

impl SegmentationResult {
    pub fn background(image: &ImageSpec) -> Self {
        SegmentationResult { present: false, mask: Mask::empty(image), contour: Vec::new(), centroid: None }
    }

    pub fn area(&self) -> f64 {
        self.mask.area()
    }
}

/// Even-odd scanline fill of a closed polygon, sampled at pixel centres.
pub fn rasterize(contour: &[Point2], image: &ImageSpec) -> Mask {
    let mut mask = Mask::empty(image);
    if contour.len() < 3 {
        return mask;
    }
    let res = image.resolution;
    let rows = mask.rows;
    let cols = mask.cols;
    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); rows];

    for (k, p) in contour.iter().enumerate() {
        let q = &contour[(k + 1) % contour.len()];
        if p.v == q.v {
            continue;
        }
        let (lo, hi) = if p.v < q.v { (p, q) } else { (q, p) };
        // Half-open rule: a row centre at exactly lo.v counts, at hi.v does not.
        let first = ((lo.v / res - 0.5).ceil()).max(0.0) as usize;
        let last_excl = ((hi.v / res - 0.5).ceil()).clamp(0.0, rows as f64) as usize;
        for j in first..last_excl {
            let vc = (j as f64 + 0.5) * res;
            let t = (vc - lo.v) / (hi.v - lo.v);
            crossings[j].push(lo.u + t * (hi.u - lo.u));
        }
    }

    for (j, xs) in crossings.iter_mut().enumerate() {
        if xs.len() < 2 {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            // Columns whose centre lies in [x0, x1).
            let a = ((pair[0] / res - 0.5).ceil()).clamp(0.0, cols as f64) as u32;
            let b = ((pair[1] / res - 0.5).ceil()).clamp(0.0, cols as f64) as u32;
            if b > a {
                mask.spans.push((j as u32, a, b));
            }
        }
    }
    mask
}

/// Segments a slice given its ground-truth contour.
pub fn segment(contour_gt: &[Point2], image: &ImageSpec, cfg: &SegmentationConfig) -> SegmentationResult {
    let mask = rasterize(contour_gt, image);
    if mask.is_empty() || mask.area() < cfg.min_area {
        return SegmentationResult::background(image);
    }
    let centroid = mask.centroid();
    SegmentationResult { present: true, mask, contour: contour_gt.to_vec(), centroid }
}

/// Signed lateral distance (mm) from the image centre to the mask centroid.
pub fn visual_offset(seg: &SegmentationResult, image: &ImageSpec) -> Result<f64> {
    match (seg.present, seg.centroid) {
        (true, Some(c)) => Ok(c.u - image.center_u()),
        _ => Err(Error::NoProstateInView),
    }
}

/// Perturbs every contour point with isotropic Gaussian noise, keeping it
/// inside the image window.
pub fn jitter_contour<R: Rng + ?Sized>(contour: &[Point2], sigma: f64, image: &ImageSpec, rng: &mut R) -> Vec<Point2> {
    if sigma <= 0.0 {
        return contour.to_vec();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    contour
        .iter()
        .map(|p| {
            let u = (p.u + normal.sample(rng)).clamp(0.0, image.width);
            let v = (p.v + normal.sample(rng)).clamp(0.0, image.depth);
            Point2::new(u, v)
        })
        .collect()
}

pub fn write_contour_csv(contour: &[Point2], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        writeln!(w, "u,v")?;
        for p in contour {
            writeln!(w, "{},{}", p.u, p.v)?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn read_contour_csv(path: &Path) -> Result<Vec<Point2>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',').map(|s| s.trim().parse::<f64>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => out.push(Point2::new(u, v)),
            _ => return Err(Error::parse(path, format!("line {}: expected 'u,v'", n + 1))),
        }
    }
    Ok(out)
}
