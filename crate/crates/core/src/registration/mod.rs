//! Point-to-point ICP and the validation metrics.
//!
//! * **fitness** — inlier correspondences (nearest target point within the
//!   threshold) divided by the number of *source* points;
//! * **inlier RMSE** — root-mean-square inlier distance at the final transform;
//! * **Hausdorff** — directed, from the transformed source to the target.

pub mod kdtree;

pub use kdtree::{KdTree, Neighbor};

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IcpConfig {
    pub max_iter: usize,
    /// Convergence tolerance on the change of both fitness and RMSE.
    pub eps: f64,
    /// Also report the symmetric Hausdorff distance.
    pub symmetric_hausdorff: bool,
    /// Voxel edge (mm) for optional downsampling of both clouds; off when `None`.
    pub voxel_size: Option<f64>,
}

impl Default for IcpConfig {
    fn default() -> Self {
        Self { max_iter: 50, eps: 1e-6, symmetric_hausdorff: false, voxel_size: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    pub fitness: f64,
    pub inlier_rmse: f64,
    /// Directed Hausdorff distance, transformed source → target (mm).
    pub hausdorff: f64,
    /// `max(directed(a→b), directed(b→a))`, when requested.
    pub hausdorff_symmetric: Option<f64>,
    pub transform: RigidTransform,
    pub threshold: f64,
    pub iterations: usize,
    pub converged: bool,
    pub source_points: usize,
    pub target_points: usize,
}

/// Exact nearest target point for every query point, in query order.
pub fn nearest_neighbors(query: &PointCloud, target: &PointCloud) -> Result<Vec<(usize, f64)>> {
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree = KdTree::new(&target.points);
    Ok(query
        .points
        .par_iter()
        .map(|q| {
            let n = tree.nearest(q).expect("tree is not empty");
            (n.index, n.distance())
        })
        .collect())
}

/// Least-squares rigid transform mapping `source[i]` onto `target[i]`
/// (cross-covariance SVD with reflection correction).
pub fn best_fit_transform(source: &[Vec3], target: &[Vec3]) -> Result<RigidTransform> {
    if source.len() != target.len() {
        return Err(Error::InvalidInput(format!(
            "paired point lists differ in length ({} vs {})",
            source.len(),
            target.len()
        )));
    }
    if source.len() < 3 {
        return Err(Error::Degenerate("fewer than three pairs"));
    }
    let n = source.len() as f64;
    let cs = source.iter().sum::<Vec3>() / n;
    let ct = target.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (s, t) in source.iter().zip(target) {
        let (ds, dt) = (s - cs, t - ct);
        h += ds * dt.transpose();
        spread += ds * ds.transpose();
    }
    if !h.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("correspondences"));
    }
    // Collinear or coincident sources leave the rotation undetermined.
    let sv = spread.symmetric_eigenvalues();
    let (mut sorted, scale) = ([sv[0], sv[1], sv[2]], sv.max().max(f64::MIN_POSITIVE));
    sorted.sort_by(f64::total_cmp);
    if sorted[1] <= 1e-12 * scale || sorted[2] <= 0.0 {
        return Err(Error::Degenerate("source points are collinear or coincident"));
    }

    let svd = SVD::new(h, true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let r = v * fix * u.transpose();
    let t = ct - r * cs;
    RigidTransform::from_parts(r, t)
}

/// Directed Hausdorff distance `max_a min_b |a − b|`.
pub fn hausdorff_directed(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree = KdTree::new(&b.points);
    Ok(directed_with_tree(&a.points, &tree))
}

/// Symmetric Hausdorff distance.
pub fn hausdorff_symmetric(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(hausdorff_directed(a, b)?.max(hausdorff_directed(b, a)?))
}

/// Max-of-min with early exit: a point only needs a full search when no
/// target lies closer than the running maximum.
fn directed_with_tree(points: &[Vec3], tree: &KdTree) -> f64 {
    const CHUNK: usize = 4096;
    let mut max_d2 = 0.0f64;
    for chunk in points.chunks(CHUNK) {
        let bound = max_d2;
        let local = chunk
            .par_iter()
            .filter(|p| bound == 0.0 || !tree.any_within(p, bound))
            .map(|p| tree.nearest(p).expect("tree is not empty").dist_sq)
            .reduce(|| 0.0, f64::max);
        max_d2 = max_d2.max(local);
    }
    max_d2.sqrt()
}

/// Target cloud with its search tree, reusable across registrations.
pub struct PreparedTarget<'a> {
    pub cloud: &'a PointCloud,
    tree: KdTree,
}

impl<'a> PreparedTarget<'a> {
    pub fn new(cloud: &'a PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(PreparedTarget { cloud, tree: KdTree::new(&cloud.points) })
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }
}

struct Correspondences {
    /// `(source index, target index)` for every inlier, in source order.
    pairs: Vec<(usize, usize)>,
    sum_sq: f64,
}

impl Correspondences {
    fn fitness(&self, n_source: usize) -> f64 {
        self.pairs.len() as f64 / n_source as f64
    }

    fn rmse(&self) -> f64 {
        if self.pairs.is_empty() {
            0.0
        } else {
            (self.sum_sq / self.pairs.len() as f64).sqrt()
        }
    }
}

/// Candidates kept per source point between ICP iterations.
const CACHED: usize = 3;

/// Neighbour searches look this many thresholds out, so that outliers can
/// be proven outliers from the cache.
const SEARCH_REACH: f64 = 1.5;

/// Per-source-point memory of the last full neighbour search.
///
/// A search at `q_ref` kept the `CACHED` nearest targets and proved every
/// other target at least `rest` away. After the query moves by `δ`, those
/// others are still ≥ `rest − δ` away (triangle inequality), so if the best
/// cached candidate is closer than that it is the exact nearest neighbour;
/// and if `rest − δ` and all cached candidates exceed the threshold, the
/// point is an outlier. Only otherwise does the tree get searched again.
/// Late ICP iterations move points by microns, so that is rare.
#[derive(Clone)]
struct MatchCache {
    q_ref: Vec3,
    rest: f64,
    len: u8,
    idx: [u32; CACHED],
}

impl MatchCache {
    const EMPTY: Self = Self { q_ref: Vec3::new(0.0, 0.0, 0.0), rest: f64::NEG_INFINITY, len: 0, idx: [0; CACHED] };

    /// Nearest neighbour within the threshold if the cache can prove it:
    /// `Some(None)` is a proven outlier, `None` means search again.
    fn lookup(&self, q: &Vec3, target: &[Vec3], threshold: f64) -> Option<Option<(usize, f64)>> {
        // Margins absorb rounding in the distance arithmetic.
        let moved = (q - self.q_ref).norm() * (1.0 + 1e-9) + 1e-12;
        let floor = self.rest - moved;
        if floor <= 0.0 {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.idx[..self.len as usize] {
            let j = j as usize;
            let d2 = (target[j] - q).norm_squared();
            if best.is_none_or(|(bj, bd)| d2 < bd || (d2 == bd && j < bj)) {
                best = Some((j, d2));
            }
        }
        let floor_sq = floor * floor * (1.0 - 1e-12);
        match best {
            Some((j, d2)) if d2 < floor_sq => Some((d2 <= threshold * threshold).then_some((j, d2))),
            _ if floor > threshold * (1.0 + 1e-12) && best.is_none_or(|(_, d2)| d2 > threshold * threshold) => {
                Some(None)
            }
            _ => None,
        }
    }
}

fn correspond(
    source: &[Vec3],
    transform: &RigidTransform,
    target: &PreparedTarget<'_>,
    threshold: f64,
    cache: &mut [MatchCache],
) -> Correspondences {
    let (tree, target_points) = (&target.tree, &target.cloud.points);
    let threshold_sq = threshold * threshold;
    let radius_sq = (SEARCH_REACH * threshold).powi(2);
    // Sequential within a chunk so a search can be seeded with the previous
    // point's candidates: consecutive contour points are neighbours.
    const CHUNK: usize = 4096;
    let found: Vec<Option<(usize, f64)>> = source
        .par_chunks(CHUNK)
        .zip(cache.par_chunks_mut(CHUNK))
        .flat_map_iter(|(ps, cs)| {
            let mut buf = Vec::with_capacity(CACHED + 1);
            let mut seeds = Vec::with_capacity(2 * CACHED);
            let mut prev: &[u32] = &[];
            ps.iter().zip(cs.iter_mut()).map(move |(p, c)| {
                let q = transform.apply(p);
                let hit = match c.lookup(&q, target_points, threshold) {
                    Some(hit) => hit,
                    None => {
                        seeds.clear();
                        seeds.extend_from_slice(&c.idx[..c.len as usize]);
                        seeds.extend_from_slice(prev);
                        let rest_sq = tree.k_nearest_within(&q, CACHED, radius_sq, &seeds, &mut buf);
                        c.q_ref = q;
                        c.rest = rest_sq.sqrt();
                        c.len = buf.len() as u8;
                        for (slot, n) in c.idx.iter_mut().zip(buf.iter()) {
                            *slot = n.index as u32;
                        }
                        buf.first().filter(|n| n.dist_sq <= threshold_sq).map(|n| (n.index, n.dist_sq))
                    }
                };
                prev = &c.idx[..c.len as usize];
                hit
            }).collect::<Vec<_>>()
        })
        .collect();
    let mut pairs = Vec::with_capacity(found.len());
    let mut sum_sq = 0.0;
    for (i, f) in found.iter().enumerate() {
        if let Some((j, d2)) = f {
            pairs.push((i, *j));
            sum_sq += d2;
        }
    }
    Correspondences { pairs, sum_sq }
}

/// Point-to-point ICP from the identity.
pub fn icp(
    source: &PointCloud,
    target: &PointCloud,
    threshold: f64,
    max_iter: usize,
    eps: f64,
) -> Result<RegistrationReport> {
    let prepared = PreparedTarget::new(target)?;
    let cfg = IcpConfig { max_iter, eps, ..IcpConfig::default() };
    icp_prepared(source, &prepared, threshold, &cfg)
}

/// ICP against a target whose tree has already been built.
///
/// Every iteration matches all source points under the current transform,
/// then solves for the absolute transform from the original source points.
/// Iteration stops when both fitness and RMSE change by less than `eps`, or
/// when the inlier residual is exactly zero. Metrics always refer to the
/// returned transform.
pub fn icp_prepared(
    source: &PointCloud,
    target: &PreparedTarget<'_>,
    threshold: f64,
    cfg: &IcpConfig,
) -> Result<RegistrationReport> {
    Ok(icp_thresholds(source, target, &[threshold], cfg)?.remove(0))
}

/// Independent ICP runs of one pair at several thresholds, in the given
/// order. The initial neighbour search is shared between them.
pub fn icp_thresholds(
    source: &PointCloud,
    target: &PreparedTarget<'_>,
    thresholds: &[f64],
    cfg: &IcpConfig,
) -> Result<Vec<RegistrationReport>> {
    if source.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if let Some(th) = thresholds.iter().find(|&&th| !(th > 0.0 && th.is_finite())) {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {th}")));
    }
    let Some(&widest) = thresholds.iter().max_by(|a, b| a.total_cmp(b)) else {
        return Ok(Vec::new());
    };
    let mut primed = vec![MatchCache::EMPTY; source.len()];
    correspond(&source.points, &RigidTransform::identity(), target, widest, &mut primed);
    thresholds.par_iter().map(|&th| run_icp(&source.points, target, th, cfg, primed.clone())).collect()
}

fn run_icp(
    src: &[Vec3],
    target: &PreparedTarget<'_>,
    threshold: f64,
    cfg: &IcpConfig,
    mut cache: Vec<MatchCache>,
) -> Result<RegistrationReport> {
    let mut transform = RigidTransform::identity();
    let mut current = correspond(src, &transform, target, threshold, &mut cache);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        if current.pairs.is_empty() {
            break;
        }
        if current.sum_sq == 0.0 {
            converged = true;
            break;
        }
        let (s, t): (Vec<Vec3>, Vec<Vec3>) =
            current.pairs.iter().map(|&(i, j)| (src[i], target.cloud.points[j])).unzip();
        let next_transform = match best_fit_transform(&s, &t) {
            Ok(tf) => tf,
            Err(Error::Degenerate(_)) => break,
            Err(e) => return Err(e),
        };
        let next = correspond(src, &next_transform, target, threshold, &mut cache);
        iterations += 1;
        let d_fit = (next.fitness(src.len()) - current.fitness(src.len())).abs();
        let d_rmse = (next.rmse() - current.rmse()).abs();
        transform = next_transform;
        current = next;
        if d_fit < cfg.eps && d_rmse < cfg.eps {
            converged = true;
            break;
        }
    }
    drop(cache);

    let n_src = src.len();
    if current.pairs.is_empty() {
        converged = false;
    }
    let moved: Vec<Vec3> = src.iter().map(|p| transform.apply(p)).collect();
    let hausdorff = directed_with_tree(&moved, &target.tree);
    let hausdorff_symmetric = if cfg.symmetric_hausdorff {
        let back = KdTree::new(&moved);
        Some(hausdorff.max(directed_with_tree(&target.cloud.points, &back)))
    } else {
        None
    };
    Ok(RegistrationReport {
        fitness: current.fitness(n_src),
        inlier_rmse: current.rmse(),
        hausdorff,
        hausdorff_symmetric,
        transform,
        threshold,
        iterations,
        converged,
        source_points: n_src,
        target_points: target.cloud.len(),
    })
}

/// ICP with optional voxel downsampling of both clouds.
pub fn register(source: &PointCloud, target: &PointCloud, threshold: f64, cfg: &IcpConfig) -> Result<RegistrationReport> {
    match cfg.voxel_size {
        Some(v) => {
            let (s, t) = (voxel_downsample(source, v)?, voxel_downsample(target, v)?);
            icp_prepared(&s, &PreparedTarget::new(&t)?, threshold, cfg)
        }
        None => icp_prepared(source, &PreparedTarget::new(target)?, threshold, cfg),
    }
}

/// Replaces the points in each occupied voxel by their centroid. Output is
/// ordered by voxel coordinates, so it is deterministic.
pub fn voxel_downsample(pc: &PointCloud, voxel: f64) -> Result<PointCloud> {
    if !(voxel > 0.0 && voxel.is_finite()) {
        return Err(Error::InvalidInput(format!("voxel size must be positive, got {voxel}")));
    }
    let mut cells: BTreeMap<(i64, i64, i64), (Vec3, usize)> = BTreeMap::new();
    for p in &pc.points {
        let key = ((p.x / voxel).floor() as i64, (p.y / voxel).floor() as i64, (p.z / voxel).floor() as i64);
        let e = cells.entry(key).or_insert((Vec3::zeros(), 0));
        e.0 += p;
        e.1 += 1;
    }
    Ok(cells.into_values().map(|(sum, n)| sum / n as f64).collect())
}

/// Fitness and RMSE of `source` under a fixed `transform` (no optimisation).
pub fn evaluate(source: &PointCloud, target: &PointCloud, transform: &RigidTransform, threshold: f64) -> Result<(f64, f64)> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let prepared = PreparedTarget::new(target)?;
    let mut cache = vec![MatchCache::EMPTY; source.len()];
    let c = correspond(&source.points, transform, &prepared, threshold, &mut cache);
    Ok((c.fitness(source.len()), c.rmse()))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn pc(points: &[[f64; 3]]) -> PointCloud {
        points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect()
    }

    fn blob(seed: u64, n: usize) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                // Anisotropic so the registration is well conditioned.
                Vec3::new(
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-3.0..3.0),
                )
            })
            .collect()
    }

    #[test]
    fn nearest_neighbor_examples() {
        let target = pc(&[[3.0, 4.0, 0.0], [10.0, 0.0, 0.0]]);
        let nn = nearest_neighbors(&pc(&[[0.0, 0.0, 0.0]]), &target).unwrap();
        assert_eq!(nn, vec![(0, 5.0)]);
        let same = blob(1, 50);
        let nn = nearest_neighbors(&same, &same).unwrap();
        assert!(nn.iter().enumerate().all(|(i, &(j, d))| i == j && d == 0.0));
        assert!(matches!(nearest_neighbors(&same, &PointCloud::default()), Err(Error::EmptyCloud)));
    }

    #[test]
    fn best_fit_examples() {
        let src = blob(2, 30).points;
        let shifted: Vec<Vec3> = src.iter().map(|p| p + Vec3::new(1.0, 2.0, 3.0)).collect();
        let t = best_fit_transform(&src, &shifted).unwrap();
        assert!(t.max_abs_diff(&RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0))) < 1e-9);

        let rot = RigidTransform::rotation_x(std::f64::consts::FRAC_PI_2);
        let rotated: Vec<Vec3> = src.iter().map(|p| rot.apply(p)).collect();
        assert!(best_fit_transform(&src, &rotated).unwrap().max_abs_diff(&rot) < 1e-9);
    }

    #[test]
    fn degenerate_pairs_are_rejected() {
        let line: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(best_fit_transform(&line, &line), Err(Error::Degenerate(_))));
        let same = vec![Vec3::new(1.0, 1.0, 1.0); 4];
        assert!(matches!(best_fit_transform(&same, &same), Err(Error::Degenerate(_))));
        assert!(matches!(best_fit_transform(&line[..2], &line[..2]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn best_fit_beats_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let src = blob(4, 40).points;
        let truth = RigidTransform::rotation_x(0.4).compose(&RigidTransform::from_translation(Vec3::new(0.3, -1.0, 2.0)));
        let tgt: Vec<Vec3> = src
            .iter()
            .map(|p| truth.apply(p) + Vec3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
            .collect();
        let fit = best_fit_transform(&src, &tgt).unwrap();
        let cost = |t: &RigidTransform| src.iter().zip(&tgt).map(|(s, q)| (t.apply(s) - q).norm_squared()).sum::<f64>();
        let best = cost(&fit);
        for _ in 0..1000 {
            let axis = nalgebra::Unit::new_normalize(Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
            let angle = rng.random_range(-0.01..0.01);
            let r = nalgebra::Rotation3::from_axis_angle(&axis, angle).into_inner();
            let dt = Vec3::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01));
            let pert = RigidTransform::from_parts(r, dt).unwrap().compose(&fit);
            assert!(cost(&pert) >= best - 1e-9);
        }
    }

    #[test]
    fn self_registration_is_exact() {
        let cloud = blob(5, 2000);
        for th in [0.4, 0.8, 1.2] {
            let r = icp(&cloud, &cloud, th, 50, 1e-6).unwrap();
            assert_eq!(r.fitness, 1.0);
            assert_eq!(r.inlier_rmse, 0.0);
            assert_eq!(r.hausdorff, 0.0);
            assert_eq!(r.transform, RigidTransform::identity());
            assert!(r.converged);
        }
    }

    #[test]
    fn recovers_small_translation() {
        let target = blob(6, 3000);
        let offset = Vec3::new(0.5, 0.0, 0.0);
        let source: PointCloud = target.iter().map(|p| p - offset).collect();
        let r = icp(&source, &target, 2.0, 50, 1e-6).unwrap();
        assert!((r.transform.translation() - offset).amax() < 1e-6, "{:?}", r.transform);
        assert_eq!(r.fitness, 1.0);
    }

    #[test]
    fn partial_overlap_example() {
        let source = pc(&[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        let target = pc(&[[0.0, 0.0, 0.0]]);
        let r = icp(&source, &target, 0.8, 50, 1e-6).unwrap();
        assert_eq!(r.fitness, 0.5);
        assert_eq!(r.inlier_rmse, 0.0);
        assert_eq!(r.transform, RigidTransform::identity());
    }

    #[test]
    fn no_inliers_is_not_fatal() {
        let source = pc(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let target: PointCloud = source.iter().map(|p| p + Vec3::new(50.0, 0.0, 0.0)).collect();
        let r = icp(&source, &target, 1.0, 50, 1e-6).unwrap();
        assert!(!r.converged);
        assert_eq!(r.fitness, 0.0);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_directed(&pc(&[[0.0, 0.0, 0.0]]), &pc(&[[3.0, 4.0, 0.0]])).unwrap(), 5.0);
        let a = blob(7, 500);
        assert_eq!(hausdorff_directed(&a, &a).unwrap(), 0.0);
        assert!(hausdorff_directed(&a, &PointCloud::default()).is_err());
        let b = pc(&[[0.0, 0.0, 0.0]]);
        let c = pc(&[[0.0, 0.0, 0.0], [0.0, 0.0, 7.0]]);
        assert_eq!(hausdorff_directed(&b, &c).unwrap(), 0.0);
        assert_eq!(hausdorff_symmetric(&b, &c).unwrap(), 7.0);
    }

    #[test]
    fn rigid_invariance() {
        let target = blob(8, 1500);
        let source: PointCloud = target.iter().map(|p| RigidTransform::rotation_x(0.02).apply(p) + Vec3::new(0.1, 0.05, 0.0)).collect();
        let g = RigidTransform::rotation_x(1.1).compose(&RigidTransform::from_translation(Vec3::new(5.0, -3.0, 2.0)));
        let a = icp(&source, &target, 0.8, 50, 1e-6).unwrap();
        let b = icp(&source.transformed(&g), &target.transformed(&g), 0.8, 50, 1e-6).unwrap();
        assert_abs_diff_eq!(a.fitness, b.fitness, epsilon = 1e-6);
        assert_abs_diff_eq!(a.inlier_rmse, b.inlier_rmse, epsilon = 1e-6);
    }

    #[test]
    fn fixed_transform_metrics_are_monotone_in_threshold() {
        let target = blob(9, 1000);
        let source = blob(10, 1000);
        let id = RigidTransform::identity();
        let mut prev = (0.0, 0.0);
        for th in [0.2, 0.4, 0.6, 0.8, 1.0, 1.2] {
            let (f, r) = evaluate(&source, &target, &id, th).unwrap();
            assert!(f >= prev.0);
            if f > prev.0 {
                assert!(r >= prev.1);
            }
            prev = (f, r);
        }
    }

    #[test]
    fn voxel_downsample_merges_cells() {
        let cloud = pc(&[[0.1, 0.1, 0.1], [0.3, 0.3, 0.3], [1.5, 0.0, 0.0]]);
        let d = voxel_downsample(&cloud, 1.0).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.points.contains(&Vec3::new(0.2, 0.2, 0.2)));
    }
}
