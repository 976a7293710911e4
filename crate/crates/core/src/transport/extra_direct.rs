use rand::Rng;
use rayon::prelude::*;

use crate::math::Ray;
use crate::scene::{Material, Scene};
use crate::spectrum::Spectrum;
use crate::transport::record::{PathRecord, ShadingPointRecord};
use crate::transport::tracer::{stream_rng, STREAM_EXTRA_DIRECT};

/// One fresh two-strategy direct estimate at the record's position: an
/// emitter sample plus a local-strategy sample whose emitter hit is weighted
/// by estimated transmittance.
pub fn fresh_direct_estimate<R: Rng + ?Sized>(scene: &Scene, rec: &ShadingPointRecord, rng: &mut R) -> Spectrum {
    let (x, wo, kind) = (rec.position, rec.wo, rec.kind);
    let mut out = Spectrum::ZERO;

    let es = scene.sample_emitter(x, rng);
    let f_e = kind.eval(wo, es.dir);
    if es.is_delta {
        out += f_e * es.radiance;
    } else {
        let denom = es.pdf_sa + kind.pdf(wo, es.dir);
        if denom > 0.0 {
            out += f_e * es.radiance / denom;
        }
    }

    let (dir, pdf) = kind.sample(wo, rng);
    let ray = Ray::new(x, dir);
    if let Some(hit) = scene.intersect(&ray) {
        if let Material::Emitter(k) = hit.material {
            let le = scene.emitters[k].emitted_toward(dir);
            if !le.is_black() {
                let d = le * scene.transmittance(&ray, hit.t, rng);
                let denom = pdf + scene.pdf_emitter_dir(x, dir);
                out += kind.eval(wo, dir) * d / denom;
            }
        }
    }
    out
}

/// Stores, for every path's first shading point, the average of its original
/// direct estimate and `n_extra` fresh ones. Consumed only when writing output.
pub fn record_extra_direct(scene: &Scene, paths: &mut [PathRecord], n_extra: u32, seed: u64) {
    paths.par_iter_mut().enumerate().for_each(|(i, path)| {
        let Some(first) = path.records.first() else {
            path.first_bounce_direct = None;
            return;
        };
        let mut sum = first.mis_direct();
        if n_extra > 0 {
            let mut rng = stream_rng(seed, STREAM_EXTRA_DIRECT, i as u64);
            for _ in 0..n_extra {
                sum += fresh_direct_estimate(scene, first, &mut rng);
            }
        }
        path.first_bounce_direct = Some(sum / (1 + n_extra) as f64);
    });
}
