//! Structure-of-arrays view of every recorded shading point.

use crate::math::Vec3;
use crate::spectrum::Spectrum;
use crate::transport::{PathRecord, RecordSet, ScatterKind, ShadingPointRecord};

pub const NO_EDGE: u32 = u32::MAX;

/// Camera-side data of one traced path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEntry {
    pub pixel: u32,
    /// Index of the depth-0 record, or [`NO_EDGE`] when the path never scattered.
    pub first: u32,
    pub emission: Spectrum,
    pub camera_weight: Spectrum,
    pub pt_estimate: Spectrum,
    pub first_bounce_direct: Option<Spectrum>,
}

/// One cluster of compatible shading points.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: u32,
    /// Record indices in ascending order, center included.
    pub members: Vec<u32>,
}

/// All records of a render, stored per field, with continuation edges and
/// cluster assignment.
///
/// Record `q` at depth `i` receives its incoming indirect radiance from
/// record `next[q]` at depth `i + 1` of the same path; that edge carries
/// `w_cont[next[q]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGraph {
    pub width: usize,
    pub height: usize,
    pub spp: u32,

    pub position: Vec<Vec3>,
    pub wo: Vec<Vec3>,
    pub kind: Vec<ScatterKind>,
    pub phase_dir: Vec<Vec3>,
    pub phase_pdf: Vec<f64>,
    pub phase_emitter_pdf: Vec<f64>,
    pub emitter_dir: Vec<Vec3>,
    pub emitter_pdf: Vec<f64>,
    pub emitter_delta: Vec<bool>,
    pub direct_emitter: Vec<Spectrum>,
    pub direct_phase: Vec<Spectrum>,
    /// Incoming indirect radiance as estimated by the tracer.
    pub indirect_init: Vec<Spectrum>,
    pub w_cont: Vec<Spectrum>,
    pub path: Vec<u32>,
    pub depth: Vec<u32>,

    /// Successor record along the path, or [`NO_EDGE`] at the path's end.
    pub next: Vec<u32>,
    /// Predecessor record, or [`NO_EDGE`] at depth 0.
    pub prev: Vec<u32>,
    pub cluster_of: Vec<u32>,
    pub clusters: Vec<Cluster>,
    pub paths: Vec<PathEntry>,
}

impl PathGraph {
    pub fn from_set(set: &RecordSet) -> Self {
        Self::from_paths(set.width, set.height, set.spp, &set.paths)
    }

    /// Flattens paths in order. Every record starts in its own cluster.
    pub fn from_paths(width: usize, height: usize, spp: u32, paths: &[PathRecord]) -> Self {
        let n: usize = paths.iter().map(|p| p.records.len()).sum();
        let mut g = PathGraph {
            width,
            height,
            spp,
            position: Vec::with_capacity(n),
            wo: Vec::with_capacity(n),
            kind: Vec::with_capacity(n),
            phase_dir: Vec::with_capacity(n),
            phase_pdf: Vec::with_capacity(n),
            phase_emitter_pdf: Vec::with_capacity(n),
            emitter_dir: Vec::with_capacity(n),
            emitter_pdf: Vec::with_capacity(n),
            emitter_delta: Vec::with_capacity(n),
            direct_emitter: Vec::with_capacity(n),
            direct_phase: Vec::with_capacity(n),
            indirect_init: Vec::with_capacity(n),
            w_cont: Vec::with_capacity(n),
            path: Vec::with_capacity(n),
            depth: Vec::with_capacity(n),
            next: Vec::with_capacity(n),
            prev: Vec::with_capacity(n),
            cluster_of: Vec::new(),
            clusters: Vec::new(),
            paths: Vec::with_capacity(paths.len()),
        };
        for (pi, p) in paths.iter().enumerate() {
            let base = g.len() as u32;
            let len = p.records.len() as u32;
            g.paths.push(PathEntry {
                pixel: p.pixel,
                first: if len > 0 { base } else { NO_EDGE },
                emission: p.emission,
                camera_weight: p.camera_weight,
                pt_estimate: p.pt_estimate,
                first_bounce_direct: p.first_bounce_direct,
            });
            for (k, r) in p.records.iter().enumerate() {
                let k = k as u32;
                g.push(r, pi as u32, k);
                g.next.push(if k + 1 < len { base + k + 1 } else { NO_EDGE });
                g.prev.push(if k > 0 { base + k - 1 } else { NO_EDGE });
            }
        }
        g.cluster_of = (0..g.len() as u32).collect();
        g.clusters = (0..g.len() as u32).map(|q| Cluster { center: q, members: vec![q] }).collect();
        g
    }

    fn push(&mut self, r: &ShadingPointRecord, path: u32, depth: u32) {
        self.position.push(r.position);
        self.wo.push(r.wo);
        self.kind.push(r.kind);
        self.phase_dir.push(r.phase_dir);
        self.phase_pdf.push(r.phase_pdf);
        self.phase_emitter_pdf.push(r.phase_emitter_pdf);
        self.emitter_dir.push(r.emitter_dir);
        self.emitter_pdf.push(r.emitter_pdf);
        self.emitter_delta.push(r.emitter_delta);
        self.direct_emitter.push(r.direct_emitter);
        self.direct_phase.push(r.direct_phase);
        self.indirect_init.push(r.indirect);
        self.w_cont.push(r.w_cont);
        self.path.push(path);
        self.depth.push(depth);
    }

    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    /// Interleaved light-sample vector: entry `2q` is the emitter sample of
    /// record `q`, entry `2q + 1` its local-strategy sample.
    pub fn light_samples(&self) -> Vec<Spectrum> {
        self.direct_emitter
            .iter()
            .zip(&self.direct_phase)
            .flat_map(|(&e, &p)| [e, p])
            .collect()
    }

    /// Tracer's own two-sample direct estimate at record `q`.
    pub fn pt_direct(&self, q: usize) -> Spectrum {
        self.record(q).mis_direct()
    }

    /// Reassembles record `q` (with its initial indirect value).
    pub fn record(&self, q: usize) -> ShadingPointRecord {
        ShadingPointRecord {
            position: self.position[q],
            wo: self.wo[q],
            kind: self.kind[q],
            phase_dir: self.phase_dir[q],
            phase_pdf: self.phase_pdf[q],
            phase_emitter_pdf: self.phase_emitter_pdf[q],
            emitter_dir: self.emitter_dir[q],
            emitter_pdf: self.emitter_pdf[q],
            emitter_delta: self.emitter_delta[q],
            direct_emitter: self.direct_emitter[q],
            direct_phase: self.direct_phase[q],
            indirect: self.indirect_init[q],
            w_cont: self.w_cont[q],
            path: self.path[q],
            depth: self.depth[q],
            pixel: self.paths[self.path[q] as usize].pixel,
        }
    }
}
