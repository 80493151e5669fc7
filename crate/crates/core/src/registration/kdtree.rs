//! Exact nearest-neighbour search over a static 3-D point set.
//!
//! Implicit balanced kd-tree: points are permuted so that every subrange
//! `[lo, hi)` stores its splitting point at the midpoint, with the left half
//! below and the right half above on that node's axis. No node objects are
//! allocated; the split axis is kept in a parallel array.
//!
//! Ties are broken towards the smallest original index, so results are
//! identical to a brute-force scan.

use crate::geometry::Vec3;

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    index: Vec<u32>,
    slot_of: Vec<u32>,
    axis: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist_sq.sqrt()
    }
}

/// Candidate set filled during a search.
trait Candidates {
    /// Squared distance beyond which nothing can improve the set.
    fn bound(&self) -> f64;
    fn offer(&mut self, d2: f64, idx: u32);
}

/// Single nearest point, ties to the lowest index.
struct Best {
    d2: f64,
    idx: u32,
    max: f64,
}

impl Candidates for Best {
    #[inline]
    fn bound(&self) -> f64 {
        self.max.min(self.d2)
    }

    #[inline]
    fn offer(&mut self, d2: f64, idx: u32) {
        if d2 < self.d2 || (d2 == self.d2 && idx < self.idx) {
            self.d2 = d2;
            self.idx = idx;
        }
    }
}

/// Largest `k + 1` a k-nearest search supports.
const MAX_CAP: usize = 33;

/// The `cap` nearest points, sorted by `(dist², index)`.
struct KBest {
    d2: [f64; MAX_CAP],
    idx: [u32; MAX_CAP],
    len: usize,
    cap: usize,
    max: f64,
}

impl Candidates for KBest {
    #[inline]
    fn bound(&self) -> f64 {
        match self.len == self.cap {
            true => self.max.min(self.d2[self.cap - 1]),
            false => self.max,
        }
    }

    #[inline]
    fn offer(&mut self, d2: f64, idx: u32) {
        let key = (d2, idx);
        let last = self.cap - 1;
        if self.len == self.cap && key >= (self.d2[last], self.idx[last]) {
            return;
        }
        let mut at = self.len;
        while at > 0 && (self.d2[at - 1], self.idx[at - 1]) > key {
            at -= 1;
        }
        // Seeded points are met again during the descent.
        if at > 0 && self.idx[at - 1] == idx {
            return;
        }
        let end = self.len.min(last);
        self.d2.copy_within(at..end, at + 1);
        self.idx.copy_within(at..end, at + 1);
        self.d2[at] = d2;
        self.idx[at] = idx;
        self.len = end + 1;
    }
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    dx * dx + dy * dy + dz * dz
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        assert!(points.len() < u32::MAX as usize, "too many points for the index type");
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut axis = vec![0u8; points.len()];
        build(points, &mut order, &mut axis, 0);
        let permuted = order.iter().map(|&i| {
            let p = points[i as usize];
            [p.x, p.y, p.z]
        });
        let mut slot_of = vec![0u32; order.len()];
        for (slot, &i) in order.iter().enumerate() {
            slot_of[i as usize] = slot as u32;
        }
        KdTree { points: permuted.collect(), index: order, slot_of, axis }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact nearest neighbour; `None` only for an empty tree.
    pub fn nearest(&self, q: &Vec3) -> Option<Neighbor> {
        self.nearest_within(q, f64::INFINITY)
    }

    /// Nearest neighbour with `dist² <= max_dist_sq`, if any.
    pub fn nearest_within(&self, q: &Vec3, max_dist_sq: f64) -> Option<Neighbor> {
        let mut best = Best { d2: f64::INFINITY, idx: u32::MAX, max: max_dist_sq };
        self.run(q, &mut best);
        (best.idx != u32::MAX).then(|| Neighbor { index: best.idx as usize, dist_sq: best.d2 })
    }

    /// The (up to) `k` nearest points within `max_dist_sq`, closest first,
    /// written to `out`. Returns a lower bound on the squared distance of
    /// every point not in `out`: the (k+1)-th distance, capped at
    /// `max_dist_sq`.
    ///
    /// `seeds` are indices of points likely to be near `q`; they only tighten
    /// the search bound early and never change the result.
    pub fn k_nearest_within(&self, q: &Vec3, k: usize, max_dist_sq: f64, seeds: &[u32], out: &mut Vec<Neighbor>) -> f64 {
        assert!(k < MAX_CAP, "k-nearest search supports k < {MAX_CAP}");
        out.clear();
        let mut best = KBest { d2: [0.0; MAX_CAP], idx: [0; MAX_CAP], len: 0, cap: k + 1, max: max_dist_sq };
        let qa = [q.x, q.y, q.z];
        for &i in seeds {
            let d2 = dist_sq(&self.points[self.slot_of[i as usize] as usize], &qa);
            if d2 <= best.bound() {
                best.offer(d2, i);
            }
        }
        self.run(q, &mut best);
        let found = best.len.min(k);
        out.extend((0..found).map(|i| Neighbor { index: best.idx[i] as usize, dist_sq: best.d2[i] }));
        if best.len == best.cap {
            best.d2[k].min(max_dist_sq)
        } else {
            max_dist_sq
        }
    }

    /// Whether any point lies strictly closer than `sqrt(dist_sq)`.
    pub fn any_within(&self, q: &Vec3, dist_sq: f64) -> bool {
        self.any(0, self.points.len(), &[q.x, q.y, q.z], dist_sq)
    }

    fn run<C: Candidates>(&self, q: &Vec3, best: &mut C) {
        let q = [q.x, q.y, q.z];
        let mut off = [0.0; 3];
        self.search(0, self.points.len(), &q, best, &mut off, 0.0);
    }

    /// `off` holds the per-axis distance from `q` to the current cell and
    /// `cell_d2` its squared sum, so far cells are pruned by their true box
    /// distance rather than by one splitting plane.
    fn search<C: Candidates>(&self, lo: usize, hi: usize, q: &[f64; 3], best: &mut C, off: &mut [f64; 3], cell_d2: f64) {
        if hi - lo <= LEAF_SIZE {
            for slot in lo..hi {
                let d2 = dist_sq(&self.points[slot], q);
                if d2 <= best.bound() {
                    best.offer(d2, self.index[slot]);
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let ax = self.axis[mid] as usize;
        let p = &self.points[mid];
        let d2 = dist_sq(p, q);
        if d2 <= best.bound() {
            best.offer(d2, self.index[mid]);
        }
        let diff = q[ax] - p[ax];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, best, off, cell_d2);
        let old = off[ax];
        let far_d2 = cell_d2 - old * old + diff * diff;
        if far_d2 <= best.bound() {
            off[ax] = diff;
            self.search(far.0, far.1, q, best, off, far_d2);
            off[ax] = old;
        }
    }

    fn any(&self, lo: usize, hi: usize, q: &[f64; 3], d2max: f64) -> bool {
        if hi - lo <= LEAF_SIZE {
            return self.points[lo..hi].iter().any(|p| dist_sq(p, q) < d2max);
        }
        let mid = lo + (hi - lo) / 2;
        let ax = self.axis[mid] as usize;
        let p = &self.points[mid];
        if dist_sq(p, q) < d2max {
            return true;
        }
        let diff = q[ax] - p[ax];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.any(near.0, near.1, q, d2max) || (diff * diff < d2max && self.any(far.0, far.1, q, d2max))
    }
}

fn build(points: &[Vec3], order: &mut [u32], axis: &mut [u8], depth: usize) {
    let n = order.len();
    if n <= LEAF_SIZE {
        return;
    }
    // Split on the axis of largest spread.
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        let p = points[i as usize];
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let ax = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(depth % 3);
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| points[a as usize][ax].total_cmp(&points[b as usize][ax]));
    axis[mid] = ax as u8;
    let (left, right) = order.split_at_mut(mid);
    let (axis_left, axis_right) = axis.split_at_mut(mid);
    build(points, left, axis_left, depth + 1);
    build(points, &mut right[1..], &mut axis_right[1..], depth + 1);
}
