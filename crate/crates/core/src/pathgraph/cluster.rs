//! Grouping shading points around randomly chosen centers.
//!
//! Centers are drawn per compatibility class; every point joins its nearest
//! center, found by expanding shells of hash-grid cells. Oversized clusters are
//! split by promoting random members to centers and reassigning.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::math::Vec3;
use crate::pathgraph::graph::{Cluster, PathGraph};
use crate::transport::tracer::{stream_rng, STREAM_CLUSTER};
use crate::transport::ClassKey;

/// Cells per axis are capped to keep the grid sparse for skewed inputs.
const MAX_CELLS_PER_AXIS: f64 = 1024.0;

struct CenterGrid<'a> {
    positions: &'a [Vec3],
    centers: &'a [u32],
    lo: Vec3,
    cell: f64,
    /// Axes along which the points actually spread.
    active: [bool; 3],
    dims: [i64; 3],
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> CenterGrid<'a> {
    fn new(positions: &'a [Vec3], members: &[u32], centers: &'a [u32], k: usize) -> Self {
        let mut lo = Vec3::splat(f64::INFINITY);
        let mut hi = Vec3::splat(f64::NEG_INFINITY);
        for &m in members {
            let p = positions[m as usize];
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = hi - lo;
        let scale = extent.x.max(extent.y).max(extent.z);
        let active = [0, 1, 2].map(|a| extent[a] > 1e-9 * scale.max(1e-300));
        let d = active.iter().filter(|&&a| a).count();
        let cell = if d == 0 {
            1.0
        } else {
            // Volume per point times K gives about K points per cell.
            let vol: f64 = (0..3).filter(|&a| active[a]).map(|a| extent[a]).product();
            let c = (k as f64 * vol / members.len() as f64).powf(1.0 / d as f64);
            let floor = (0..3).filter(|&a| active[a]).map(|a| extent[a]).fold(0.0, f64::max) / MAX_CELLS_PER_AXIS;
            c.max(floor)
        };
        let dims = [0, 1, 2].map(|a| if active[a] { (extent[a] / cell).floor() as i64 + 1 } else { 1 });
        let mut grid = CenterGrid { positions, centers, lo, cell, active, dims, cells: HashMap::new() };
        for (ci, &c) in centers.iter().enumerate() {
            let key = grid.cell_of(positions[c as usize]);
            grid.cells.entry(key).or_default().push(ci as u32);
        }
        grid
    }

    fn cell_of(&self, p: Vec3) -> [i64; 3] {
        [0, 1, 2].map(|a| {
            if self.active[a] {
                (((p[a] - self.lo[a]) / self.cell).floor() as i64).clamp(0, self.dims[a] - 1)
            } else {
                0
            }
        })
    }

    fn consider(&self, p: Vec3, ci: u32, best: &mut (f64, u32)) {
        let d = (self.positions[self.centers[ci as usize] as usize] - p).length_squared();
        if d < best.0 || (d == best.0 && ci < best.1) {
            *best = (d, ci);
        }
    }

    fn brute_force(&self, p: Vec3) -> u32 {
        let mut best = (f64::INFINITY, u32::MAX);
        for ci in 0..self.centers.len() as u32 {
            self.consider(p, ci, &mut best);
        }
        best.1
    }

    /// Index into `centers` of the nearest center; ties go to the lowest index.
    fn nearest(&self, p: Vec3) -> u32 {
        let home = self.cell_of(p);
        let max_ring = self.dims.iter().copied().max().unwrap_or(1);
        let mut best = (f64::INFINITY, u32::MAX);
        // Past this many cells a linear scan is cheaper.
        let budget = 4 * self.centers.len() + 64;
        let mut visited = 0;
        let span = |a: usize, r: i64| if self.active[a] { r } else { 0 };
        for r in 0..=max_ring {
            let (rx, ry, rz) = (span(0, r), span(1, r), span(2, r));
            for dx in -rx..=rx {
                for dy in -ry..=ry {
                    for dz in -rz..=rz {
                        // Only the shell at Chebyshev distance r.
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        visited += 1;
                        let key = [home[0] + dx, home[1] + dy, home[2] + dz];
                        if let Some(list) = self.cells.get(&key) {
                            for &ci in list {
                                self.consider(p, ci, &mut best);
                            }
                        }
                    }
                }
            }
            // Anything beyond this shell is at least r cells away.
            if best.1 != u32::MAX && best.0.sqrt() <= r as f64 * self.cell {
                return best.1;
            }
            if visited > budget {
                return self.brute_force(p);
            }
        }
        if best.1 == u32::MAX {
            self.brute_force(p)
        } else {
            best.1
        }
    }
}

/// Assigns every member to its nearest center; centers always own themselves.
fn assign(positions: &[Vec3], members: &[u32], centers: &[u32], k: usize) -> Vec<u32> {
    let grid = CenterGrid::new(positions, members, centers, k);
    let own: HashMap<u32, u32> = centers.iter().enumerate().map(|(ci, &c)| (c, ci as u32)).collect();
    members
        .par_iter()
        .map(|&m| match own.get(&m) {
            Some(&ci) => ci,
            None => grid.nearest(positions[m as usize]),
        })
        .collect()
}

/// Clusters one compatibility class. Returns `(center, members)` lists.
fn cluster_class<R: Rng + ?Sized>(positions: &[Vec3], members: &[u32], k: usize, rng: &mut R) -> Vec<Cluster> {
    let n = members.len();
    if k <= 1 {
        return members.iter().map(|&m| Cluster { center: m, members: vec![m] }).collect();
    }
    let m = n.div_ceil(k);
    let mut centers: Vec<u32> = sample(rng, n, m).into_iter().map(|i| members[i]).collect();
    centers.sort_unstable();
    loop {
        let owner = assign(positions, members, &centers, k);
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); centers.len()];
        for (&p, &ci) in members.iter().zip(&owner) {
            groups[ci as usize].push(p);
        }
        let mut promoted = Vec::new();
        for (ci, g) in groups.iter().enumerate() {
            if g.len() > 2 * k {
                let extra = g.len().div_ceil(k) - 1;
                let candidates: Vec<u32> = g.iter().copied().filter(|&p| p != centers[ci]).collect();
                promoted.extend(sample(rng, candidates.len(), extra).into_iter().map(|i| candidates[i]));
            }
        }
        if promoted.is_empty() {
            return centers
                .iter()
                .zip(groups)
                .map(|(&center, mut members)| {
                    members.sort_unstable();
                    Cluster { center, members }
                })
                .collect();
        }
        centers.extend(promoted);
        centers.sort_unstable();
    }
}

/// Clusters points of equal class around about `len / k` random centers per
/// class. Deterministic for a given seed. Returns the cluster of each point
/// and the clusters, ordered by class and then by center index.
pub fn cluster_points(positions: &[Vec3], classes: &[ClassKey], k: usize, seed: u64) -> (Vec<u32>, Vec<Cluster>) {
    assert_eq!(positions.len(), classes.len());
    let k = k.max(1);
    let mut by_class: BTreeMap<ClassKey, Vec<u32>> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        by_class.entry(*c).or_default().push(i as u32);
    }
    let mut clusters = Vec::new();
    for (ci, members) in by_class.values().enumerate() {
        let mut rng = stream_rng(seed, STREAM_CLUSTER, ci as u64);
        clusters.extend(cluster_class(positions, members, k, &mut rng));
    }
    let mut cluster_of = vec![0u32; positions.len()];
    for (id, c) in clusters.iter().enumerate() {
        for &m in &c.members {
            cluster_of[m as usize] = id as u32;
        }
    }
    (cluster_of, clusters)
}

impl PathGraph {
    /// Replaces the cluster assignment with one of target size `k`.
    pub fn assign_clusters(&mut self, k: usize, seed: u64) {
        let classes: Vec<ClassKey> = self.kind.iter().map(|s| s.class_key()).collect();
        let (cluster_of, clusters) = cluster_points(&self.position, &classes, k, seed);
        self.cluster_of = cluster_of;
        self.clusters = clusters;
    }
}
