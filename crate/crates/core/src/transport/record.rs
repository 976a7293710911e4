//! Per-vertex records written by the instrumented tracer.

use rand::Rng;

use crate::math::{Vec3, INV_PI};
use crate::scene::PhaseHG;
use crate::spectrum::Spectrum;

/// Local scattering model at a shading point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScatterKind {
    Volume { medium: u32, sigma_s: Spectrum, phase: PhaseHG },
    /// `normal` is oriented toward the side the path arrived from.
    Surface { surface: u32, albedo: Spectrum, normal: Vec3 },
}

/// Points may only share a cluster when their keys are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassKey {
    Volume(u32),
    Surface([u64; 3]),
}

impl ScatterKind {
    /// Scattering function value for light leaving toward `wo` after
    /// arriving from direction `w` (both pointing away from the vertex):
    /// σ_s·ρ for volumes, albedo/π·cosθ for Lambertian surfaces.
    pub fn eval(&self, wo: Vec3, w: Vec3) -> Spectrum {
        self.coeff() * self.eval_scalar(wo, w)
    }

    /// Spectral factor of [`ScatterKind::eval`]: σ_s or the albedo.
    pub fn coeff(&self) -> Spectrum {
        match *self {
            ScatterKind::Volume { sigma_s, .. } => sigma_s,
            ScatterKind::Surface { albedo, .. } => albedo,
        }
    }

    /// Directional factor of [`ScatterKind::eval`]: ρ or cosθ/π.
    pub fn eval_scalar(&self, wo: Vec3, w: Vec3) -> f64 {
        match *self {
            ScatterKind::Volume { phase, .. } => phase.eval(-wo, w),
            ScatterKind::Surface { normal, .. } => {
                let cos = normal.dot(w);
                if cos > 0.0 {
                    cos * INV_PI
                } else {
                    0.0
                }
            }
        }
    }

    /// Solid-angle density of the local sampling strategy producing `w`.
    pub fn pdf(&self, wo: Vec3, w: Vec3) -> f64 {
        match *self {
            ScatterKind::Volume { phase, .. } => phase.eval(-wo, w),
            ScatterKind::Surface { normal, .. } => normal.dot(w).max(0.0) * INV_PI,
        }
    }

    /// Draws a direction from the local strategy (phase function or cosine
    /// hemisphere). The density is always positive.
    pub fn sample<R: Rng + ?Sized>(&self, wo: Vec3, rng: &mut R) -> (Vec3, f64) {
        match *self {
            ScatterKind::Volume { phase, .. } => phase.sample(-wo, rng),
            ScatterKind::Surface { normal, .. } => {
                let u1: f64 = rng.gen();
                let u2: f64 = rng.gen();
                let r = u1.sqrt();
                let phi = 2.0 * std::f64::consts::PI * u2;
                // 1 - u1 > 0, so cosθ is strictly positive.
                let cos = (1.0 - u1).sqrt();
                let (s, t) = normal.orthonormal_basis();
                let w = (s * (r * phi.cos()) + t * (r * phi.sin()) + normal * cos).normalized();
                (w, self.pdf(wo, w))
            }
        }
    }

    pub fn class_key(&self) -> ClassKey {
        match *self {
            ScatterKind::Volume { medium, .. } => ClassKey::Volume(medium),
            ScatterKind::Surface { albedo, .. } => ClassKey::Surface(albedo.0.map(f64::to_bits)),
        }
    }

    pub fn is_volume(&self) -> bool {
        matches!(self, ScatterKind::Volume { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadingPointRecord {
    pub position: Vec3,
    /// Unit direction toward the previous vertex (or the camera).
    pub wo: Vec3,
    pub kind: ScatterKind,
    /// Direction drawn from the local strategy, its density, and the density
    /// with which emitter sampling at this point would have produced it.
    pub phase_dir: Vec3,
    pub phase_pdf: f64,
    pub phase_emitter_pdf: f64,
    pub emitter_dir: Vec3,
    /// Solid-angle emitter-sampling density; 1 for delta emitters.
    pub emitter_pdf: f64,
    pub emitter_delta: bool,
    /// Direct radiance arriving along `emitter_dir`.
    pub direct_emitter: Spectrum,
    /// Direct radiance arriving along `phase_dir` (an emitter hit without a collision).
    pub direct_phase: Spectrum,
    /// Indirect radiance arriving along `phase_dir` as estimated by the tracer.
    pub indirect: Spectrum,
    /// Tr/p_t of the segment arriving here from the previous vertex, divided
    /// by any Russian-roulette survival probability.
    pub w_cont: Spectrum,
    pub path: u32,
    pub depth: u32,
    pub pixel: u32,
}

impl ShadingPointRecord {
    /// One-sample MIS estimate of scattered direct radiance, combining the
    /// emitter and local-strategy samples with the balance heuristic.
    pub fn mis_direct(&self) -> Spectrum {
        let mut out = Spectrum::ZERO;
        let f_e = self.kind.eval(self.wo, self.emitter_dir);
        if self.emitter_delta {
            out += f_e * self.direct_emitter;
        } else {
            let denom = self.emitter_pdf + self.kind.pdf(self.wo, self.emitter_dir);
            if denom > 0.0 {
                out += f_e * self.direct_emitter / denom;
            }
        }
        let denom = self.phase_pdf + self.phase_emitter_pdf;
        if denom > 0.0 && !self.direct_phase.is_black() {
            out += self.kind.eval(self.wo, self.phase_dir) * self.direct_phase / denom;
        }
        out
    }

    /// Single-sample estimate of scattered indirect radiance, f_s·I/p.
    pub fn single_indirect(&self, incoming: Spectrum) -> Spectrum {
        if self.phase_pdf > 0.0 {
            self.kind.eval(self.wo, self.phase_dir) * incoming / self.phase_pdf
        } else {
            Spectrum::ZERO
        }
    }
}

/// All vertices of one traced camera path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub pixel: u32,
    pub sample: u32,
    /// Emitted radiance seen directly by the camera ray (already weighted).
    pub emission: Spectrum,
    /// Tr/p of the camera segment; equals `records[0].w_cont`.
    pub camera_weight: Spectrum,
    pub records: Vec<ShadingPointRecord>,
    pub pt_estimate: Spectrum,
    /// Averaged first-bounce direct estimate, when extra samples were taken.
    pub first_bounce_direct: Option<Spectrum>,
}

impl PathRecord {
    /// Recomputes the pixel contribution from the stored records alone,
    /// rebuilding every incoming indirect value from its successor.
    pub fn reconstruct(&self) -> Spectrum {
        let mut incoming = match self.records.last() {
            Some(r) => r.indirect,
            None => return self.emission,
        };
        let mut scattered = Spectrum::ZERO;
        for (k, r) in self.records.iter().enumerate().rev() {
            if k + 1 < self.records.len() {
                incoming = self.records[k + 1].w_cont * scattered;
            }
            scattered = r.mis_direct() + r.single_indirect(incoming);
        }
        self.emission + self.camera_weight * scattered
    }
}
