//! Random but self-consistent record sets for exercising the solver without
//! tracing a scene.

use rand::Rng;

use crate::math::Vec3;
use crate::scene::{phase::uniform_sphere, PhaseHG};
use crate::spectrum::Spectrum;
use crate::transport::{PathRecord, ScatterKind, ShadingPointRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub width: usize,
    pub height: usize,
    pub spp: u32,
    pub max_len: usize,
    /// Probability that a vertex is a surface point instead of a volume point.
    pub surface_fraction: f64,
    /// Probability that an emitter sample is from a delta light.
    pub delta_fraction: f64,
    /// Probability that a path's last record keeps a non-zero incoming value.
    pub open_end_fraction: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            width: 6,
            height: 5,
            spp: 2,
            max_len: 6,
            surface_fraction: 0.2,
            delta_fraction: 0.2,
            open_end_fraction: 0.3,
        }
    }
}

fn spectrum<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Spectrum {
    Spectrum::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi))
}

fn random_kind<R: Rng + ?Sized>(cfg: &SyntheticConfig, rng: &mut R) -> ScatterKind {
    // A few fixed classes so clusters have several members.
    const G: [f64; 2] = [0.0, 0.6];
    const ALBEDO: [f64; 2] = [0.4, 0.8];
    if rng.gen::<f64>() < cfg.surface_fraction {
        let c = rng.gen_range(0..2);
        ScatterKind::Surface {
            surface: c as u32,
            albedo: Spectrum::new(ALBEDO[c], 0.5 * ALBEDO[c], 0.9),
            normal: uniform_sphere(rng),
        }
    } else {
        let c = rng.gen_range(0..2);
        ScatterKind::Volume {
            medium: c as u32,
            sigma_s: Spectrum::new(1.2, 0.9, 0.6 + 0.3 * c as f64),
            phase: PhaseHG::new(G[c]),
        }
    }
}

fn random_record<R: Rng + ?Sized>(cfg: &SyntheticConfig, rng: &mut R) -> ShadingPointRecord {
    let kind = random_kind(cfg, rng);
    let mut wo = uniform_sphere(rng);
    if let ScatterKind::Surface { normal, .. } = kind {
        if wo.dot(normal) < 0.0 {
            wo = -wo;
        }
    }
    let (phase_dir, phase_pdf) = kind.sample(wo, rng);
    let hits_light = rng.gen::<f64>() < 0.4;
    let phase_emitter_pdf = if hits_light { rng.gen_range(0.1..4.0) } else { 0.0 };
    let direct_phase = if hits_light { spectrum(rng, 0.0, 3.0) } else { Spectrum::ZERO };
    let delta = rng.gen::<f64>() < cfg.delta_fraction;
    let emitter_dir = uniform_sphere(rng);
    let emitter_pdf = if delta { 1.0 } else { rng.gen_range(0.1..4.0) };
    let direct_emitter = if rng.gen::<f64>() < 0.2 { Spectrum::ZERO } else { spectrum(rng, 0.0, 3.0) };
    ShadingPointRecord {
        position: Vec3::new(rng.gen(), rng.gen(), rng.gen()),
        wo,
        kind,
        phase_dir,
        phase_pdf,
        phase_emitter_pdf,
        emitter_dir,
        emitter_pdf,
        emitter_delta: delta,
        direct_emitter,
        direct_phase,
        indirect: Spectrum::ZERO,
        w_cont: spectrum(rng, 0.1, 0.6),
        path: 0,
        depth: 0,
        pixel: 0,
    }
}

/// Paths whose recorded indirect values and estimates are consistent with
/// the tracer's own recursion, covering every pixel `spp` times.
pub fn random_paths<R: Rng + ?Sized>(cfg: &SyntheticConfig, rng: &mut R) -> Vec<PathRecord> {
    let mut paths = Vec::new();
    for pixel in 0..(cfg.width * cfg.height) as u32 {
        for sample in 0..cfg.spp {
            let len = rng.gen_range(0..=cfg.max_len);
            let index = paths.len() as u32;
            let mut records: Vec<ShadingPointRecord> = (0..len).map(|_| random_record(cfg, rng)).collect();
            for (d, r) in records.iter_mut().enumerate() {
                r.path = index;
                r.depth = d as u32;
                r.pixel = pixel;
            }
            if let Some(last) = records.last_mut() {
                if rng.gen::<f64>() < cfg.open_end_fraction {
                    last.indirect = spectrum(rng, 0.0, 2.0);
                }
            }
            for k in (0..len.saturating_sub(1)).rev() {
                let next = records[k + 1];
                records[k].indirect = next.w_cont * (next.mis_direct() + next.single_indirect(next.indirect));
            }
            let mut path = PathRecord {
                pixel,
                sample,
                emission: if rng.gen::<f64>() < 0.1 { spectrum(rng, 0.0, 1.0) } else { Spectrum::ZERO },
                camera_weight: records.first().map_or(Spectrum::ZERO, |r| r.w_cont),
                records,
                pt_estimate: Spectrum::ZERO,
                first_bounce_direct: None,
            };
            path.pt_estimate = path.reconstruct();
            paths.push(path);
        }
    }
    paths
}
