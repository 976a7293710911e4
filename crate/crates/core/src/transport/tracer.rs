//! Instrumented volumetric path tracer with next-event estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::image::Image;
use crate::math::Ray;
use crate::scene::{FreeFlight, Material, Scene};
use crate::spectrum::Spectrum;
use crate::transport::record::{PathRecord, ScatterKind, ShadingPointRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Maximum number of shading points per path.
    pub max_depth: u32,
    /// Depth at which Russian roulette starts.
    pub rr_start: u32,
    /// Lower bound on the survival probability.
    pub rr_floor: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { max_depth: 64, rr_start: 8, rr_floor: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub spp: u32,
    pub seed: u64,
    pub keep_records: bool,
    pub trace: TraceConfig,
}

pub struct RenderOutput {
    pub image: Image,
    /// Paths in pixel order, then sample order. Empty unless records were kept.
    pub paths: Vec<PathRecord>,
}

/// Stream domains keep the tracer and auxiliary samplers decorrelated.
pub(crate) const STREAM_TRACE: u64 = 0;
pub(crate) const STREAM_EXTRA_DIRECT: u64 = 1;
pub(crate) const STREAM_CLUSTER: u64 = 2;

/// Counter-based stream for one unit of work, independent of scheduling.
pub(crate) fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// What a ray meets first.
enum Event {
    Escape,
    Absorbed,
    Emitter { radiance: Spectrum },
    Medium { ray: Ray, t: f64, medium: usize, weight: Spectrum },
    Surface { ray: Ray, t: f64, surface: usize, normal: crate::math::Vec3, albedo: Spectrum, weight: Spectrum },
}

fn next_event<R: Rng + ?Sized>(scene: &Scene, ray: Ray, rng: &mut R) -> Event {
    let hit = scene.intersect(&ray);
    let t_surf = hit.map_or(f64::INFINITY, |h| h.t);
    match scene.sample_free_flight(&ray, t_surf, rng) {
        FreeFlight::Scatter { t, medium, weight } => Event::Medium { ray, t, medium, weight },
        FreeFlight::Pass { weight } => match hit {
            None => Event::Escape,
            Some(h) => match h.material {
                Material::Black => Event::Absorbed,
                Material::Emitter(k) => Event::Emitter {
                    radiance: weight * scene.emitters[k].emitted_toward(ray.dir),
                },
                Material::Lambertian(albedo) => Event::Surface {
                    ray,
                    t: h.t,
                    surface: h.surface,
                    normal: h.normal,
                    albedo,
                    weight,
                },
            },
        },
    }
}

/// Traces one camera path through pixel `pixel` and records every shading point.
pub fn trace_path<R: Rng + ?Sized>(
    scene: &Scene,
    pixel: u32,
    sample: u32,
    rng: &mut R,
    config: &TraceConfig,
) -> PathRecord {
    let width = scene.camera.width as u32;
    let (px, py) = ((pixel % width) as f64, (pixel / width) as f64);
    let ray = scene.camera.generate_ray(px + rng.gen::<f64>(), py + rng.gen::<f64>());

    let mut path = PathRecord {
        pixel,
        sample,
        emission: Spectrum::ZERO,
        camera_weight: Spectrum::ZERO,
        records: Vec::new(),
        pt_estimate: Spectrum::ZERO,
        first_bounce_direct: None,
    };
    let mut radiance = Spectrum::ZERO;
    // Throughput up to (not including) the segment that reaches the next vertex.
    let mut beta = Spectrum::ONE;
    let mut event = next_event(scene, ray, rng);
    let mut depth = 0u32;

    loop {
        let (position, wo, kind, weight) = match event {
            Event::Escape | Event::Absorbed => break,
            Event::Emitter { radiance: le } => {
                if depth == 0 {
                    path.emission = le;
                    radiance += le;
                }
                break;
            }
            Event::Medium { ray, t, medium, weight } => {
                let position = ray.at(t);
                let m = &scene.media[medium];
                let kind = ScatterKind::Volume {
                    medium: medium as u32,
                    sigma_s: m.sigma_s_at(position),
                    phase: m.phase,
                };
                (position, -ray.dir, kind, weight)
            }
            Event::Surface { ray, t, surface, normal, albedo, weight } => {
                let wo = -ray.dir;
                let normal = if normal.dot(wo) < 0.0 { -normal } else { normal };
                let kind = ScatterKind::Surface { surface: surface as u32, albedo, normal };
                (ray.at(t), wo, kind, weight)
            }
        };
        if depth >= config.max_depth {
            break;
        }
        let mut w_cont = weight;
        if depth >= config.rr_start {
            // Throughput as a volumetric tracer carries it, scattering coefficient included.
            let survival = (beta * weight * kind.coeff()).mean().min(1.0).max(config.rr_floor);
            if rng.gen::<f64>() >= survival {
                break;
            }
            w_cont = weight / survival;
        }
        beta *= w_cont;

        // Next-event estimation.
        let es = scene.sample_emitter(position, rng);
        let f_e = kind.eval(wo, es.dir);
        if es.is_delta {
            radiance += beta * f_e * es.radiance;
        } else {
            let denom = es.pdf_sa + kind.pdf(wo, es.dir);
            if denom > 0.0 {
                radiance += beta * f_e * es.radiance / denom;
            }
        }

        // Local-strategy continuation.
        let (dir, phase_pdf) = kind.sample(wo, rng);
        let phase_emitter_pdf = scene.pdf_emitter_dir(position, dir);
        let f_p = kind.eval(wo, dir);
        let next = next_event(scene, Ray::new(position, dir), rng);
        let direct_phase = match next {
            Event::Emitter { radiance: le } => le,
            _ => Spectrum::ZERO,
        };
        if !direct_phase.is_black() {
            radiance += beta * f_p * direct_phase / (phase_pdf + phase_emitter_pdf);
        }

        path.records.push(ShadingPointRecord {
            position,
            wo,
            kind,
            phase_dir: dir,
            phase_pdf,
            phase_emitter_pdf,
            emitter_dir: es.dir,
            emitter_pdf: es.pdf_sa,
            emitter_delta: es.is_delta,
            direct_emitter: es.radiance,
            direct_phase,
            indirect: Spectrum::ZERO,
            w_cont,
            path: 0,
            depth,
            pixel,
        });

        beta *= f_p / phase_pdf;
        event = next;
        depth += 1;
    }

    // Backward pass: the indirect radiance arriving at each vertex is its
    // successor's scattered radiance carried over the connecting segment.
    let mut scattered = Spectrum::ZERO;
    let n = path.records.len();
    for k in (0..n).rev() {
        let incoming = if k + 1 < n { path.records[k + 1].w_cont * scattered } else { Spectrum::ZERO };
        let r = &mut path.records[k];
        r.indirect = incoming;
        scattered = r.mis_direct() + r.single_indirect(incoming);
    }
    if let Some(first) = path.records.first() {
        path.camera_weight = first.w_cont;
    }
    path.pt_estimate = radiance;
    path
}

/// Renders the scene with the baseline path tracer, optionally keeping all
/// path records. Output is independent of the worker count.
pub fn render_pt(scene: &Scene, settings: &RenderSettings) -> Result<RenderOutput> {
    scene.validate()?;
    if settings.spp == 0 {
        return Err(crate::Error::Config("spp must be at least 1".into()));
    }
    let (w, h) = (scene.camera.width, scene.camera.height);
    let spp = settings.spp;
    let per_pixel: Vec<(Spectrum, Vec<PathRecord>)> = (0..(w * h) as u32)
        .into_par_iter()
        .map(|pixel| {
            let mut sum = Spectrum::ZERO;
            let mut kept = Vec::new();
            for s in 0..spp {
                let stream = pixel as u64 * spp as u64 + s as u64;
                let mut rng = stream_rng(settings.seed, STREAM_TRACE, stream);
                let path = trace_path(scene, pixel, s, &mut rng, &settings.trace);
                sum += path.pt_estimate;
                if settings.keep_records {
                    kept.push(path);
                }
            }
            (sum / spp as f64, kept)
        })
        .collect();

    let mut values = Vec::with_capacity(w * h);
    let mut paths = Vec::new();
    for (v, kept) in per_pixel {
        values.push(v);
        paths.extend(kept);
    }
    for (i, p) in paths.iter_mut().enumerate() {
        for r in &mut p.records {
            r.path = i as u32;
        }
    }
    Ok(RenderOutput { image: Image::from_spectra(w, h, &values), paths })
}

/// Averages path estimates into an image; used to rebuild the PT image from records.
pub fn image_from_paths(width: usize, height: usize, paths: &[PathRecord], value: impl Fn(&PathRecord) -> Spectrum) -> Image {
    let mut sums = vec![Spectrum::ZERO; width * height];
    let mut counts = vec![0u32; width * height];
    for p in paths {
        sums[p.pixel as usize] += value(p);
        counts[p.pixel as usize] += 1;
    }
    let values: Vec<Spectrum> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { *s / c as f64 } else { Spectrum::ZERO })
        .collect();
    Image::from_spectra(width, height, &values)
}
