//! Scene description and the low-level sampling routines whose densities the
//! path graph consumes.

pub mod emitter;
pub mod geometry;
pub mod medium;
pub mod phase;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{Ray, Vec3};
use crate::spectrum::Spectrum;

pub use emitter::{Emitter, EmitterSample};
pub use geometry::{Quad, Shape};
pub use medium::{DensityGrid, DistanceSample, GridSource, Medium, MediumKind};
pub use phase::{eval_phase, sample_phase, PhaseHG};

/// Self-intersection guard for secondary rays.
pub const RAY_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    Lambertian(Spectrum),
    Black,
    /// Reported for hits on the quad of area emitter `k`.
    Emitter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub shape: Shape,
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub origin: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    /// Primary ray through image position `(px + u, py + v)`; row 0 is the top.
    pub fn generate_ray(&self, px: f64, py: f64) -> Ray {
        let forward = (self.look_at - self.origin).normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        let tan_half = (self.fov.to_radians() * 0.5).tan();
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * px / self.width as f64 - 1.0) * tan_half * aspect;
        let sy = (1.0 - 2.0 * py / self.height as f64) * tan_half;
        Ray::new(self.origin, (forward + right * sx + up * sy).normalized())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Index into `surfaces`, then area emitters in emitter order.
    pub surface: usize,
    pub t: f64,
    pub normal: Vec3,
    pub material: Material,
}

/// A portion of a ray that lies inside one medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSegment {
    pub medium: usize,
    pub t0: f64,
    pub t1: f64,
}

/// Result of free-flight sampling along a ray through every medium it crosses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeFlight {
    Scatter { t: f64, medium: usize, weight: Spectrum },
    Pass { weight: Spectrum },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub camera: Camera,
    pub media: Vec<Medium>,
    pub surfaces: Vec<Surface>,
    pub emitters: Vec<Emitter>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        let c = &self.camera;
        if c.width == 0 || c.height == 0 {
            return Err(Error::Validation("camera resolution must be positive".into()));
        }
        if !(c.fov > 0.0 && c.fov < 180.0) {
            return Err(Error::Validation(format!("camera fov {} outside (0, 180)", c.fov)));
        }
        let forward = c.look_at - c.origin;
        if forward.length() == 0.0 || forward.cross(c.up).length() == 0.0 {
            return Err(Error::Validation("camera look_at/up are degenerate".into()));
        }
        if self.emitters.is_empty() {
            return Err(Error::Validation("scene has no emitters".into()));
        }
        for (i, m) in self.media.iter().enumerate() {
            let e = m.bounds.extent();
            if !(e.x > 0.0 && e.y > 0.0 && e.z > 0.0) {
                return Err(Error::Validation(format!("medium '{}' has empty bounds", m.name)));
            }
            if !m.sigma_t.is_valid() || !m.sigma_s.is_valid() {
                return Err(Error::Validation(format!(
                    "medium '{}' has negative or non-finite coefficients",
                    m.name
                )));
            }
            if (0..3).any(|ch| m.sigma_s[ch] > m.sigma_t[ch]) {
                return Err(Error::Validation(format!("medium '{}' has sigma_s > sigma_t", m.name)));
            }
            if !(m.phase.g > -1.0 && m.phase.g < 1.0) {
                return Err(Error::Validation(format!("medium '{}' has g outside (-1, 1)", m.name)));
            }
            if let MediumKind::Grid(g) = &m.kind {
                if !(g.scale.is_finite() && g.scale >= 0.0) {
                    return Err(Error::Validation(format!("medium '{}' has invalid density scale", m.name)));
                }
            }
            for other in &self.media[i + 1..] {
                if m.bounds.overlaps(&other.bounds) {
                    return Err(Error::Validation(format!(
                        "media '{}' and '{}' overlap",
                        m.name, other.name
                    )));
                }
            }
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            match s.material {
                Material::Lambertian(a) if !a.is_valid() || a.max_channel() > 1.0 => {
                    return Err(Error::Validation(format!("surface {i} albedo outside [0, 1]")));
                }
                Material::Emitter(_) => {
                    return Err(Error::Validation(format!(
                        "surface {i}: emitter geometry is declared on the emitter itself"
                    )));
                }
                _ => {}
            }
        }
        for (i, e) in self.emitters.iter().enumerate() {
            let ok = match e {
                Emitter::Point { intensity, .. } => intensity.is_valid(),
                Emitter::Area { quad, radiance } => radiance.is_valid() && quad.area() > 0.0,
                Emitter::Directional { direction, irradiance } => {
                    irradiance.is_valid() && direction.length() > 0.0
                }
            };
            if !ok {
                return Err(Error::Validation(format!("emitter {i} is degenerate or negative")));
            }
        }
        Ok(())
    }

    fn area_emitters(&self) -> impl Iterator<Item = (usize, &Quad)> {
        self.emitters.iter().enumerate().filter_map(|(i, e)| match e {
            Emitter::Area { quad, .. } => Some((i, quad)),
            _ => None,
        })
    }

    /// Nearest hit in `(t_min, t_max)`; exact ties go to the lowest id.
    pub fn intersect_range(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Some((t, normal)) = s.shape.intersect(ray, t_min, limit) {
                if best.is_none_or(|b| t < b.t) {
                    limit = t;
                    best = Some(Hit { surface: i, t, normal, material: s.material });
                }
            }
        }
        // `limit` excludes equal t, which keeps the lowest id on ties.
        let base = self.surfaces.len();
        for (k, (emitter, quad)) in self.area_emitters().enumerate() {
            if let Some(t) = quad.intersect(ray, t_min, limit) {
                limit = t;
                best = Some(Hit {
                    surface: base + k,
                    t,
                    normal: quad.normal(),
                    material: Material::Emitter(emitter),
                });
            }
        }
        best
    }

    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        self.intersect_range(ray, RAY_EPSILON, f64::INFINITY)
    }

    /// Media intervals crossed by the ray within `[t_min, t_max]`, in order.
    pub fn medium_segments(&self, ray: &Ray, t_min: f64, t_max: f64) -> Vec<MediumSegment> {
        let mut segs = Vec::new();
        for (i, m) in self.media.iter().enumerate() {
            if let Some((t0, t1)) = m.bounds.clip(ray, t_min, t_max) {
                if t1 > t0 {
                    segs.push(MediumSegment { medium: i, t0, t1 });
                }
            }
        }
        if segs.len() > 1 {
            segs.sort_by(|a, b| a.t0.total_cmp(&b.t0));
        }
        segs
    }

    /// Transmittance along `ray` over `[0, t_max]` through all media.
    pub fn transmittance<R: Rng + ?Sized>(&self, ray: &Ray, t_max: f64, rng: &mut R) -> Spectrum {
        let mut tr = Spectrum::ONE;
        for s in self.medium_segments(ray, 0.0, t_max) {
            tr *= self.media[s.medium].transmittance(ray.at(s.t0), ray.at(s.t1), rng);
            if tr.is_black() {
                break;
            }
        }
        tr
    }

    /// Samples the first real collision along `ray` before `t_max`.
    pub fn sample_free_flight<R: Rng + ?Sized>(&self, ray: &Ray, t_max: f64, rng: &mut R) -> FreeFlight {
        let mut weight = Spectrum::ONE;
        for s in self.medium_segments(ray, 0.0, t_max) {
            let m = &self.media[s.medium];
            if m.sigma_s.is_black() {
                // Pure absorbers never scatter; attenuate instead of sampling collisions.
                weight *= m.transmittance(ray.at(s.t0), ray.at(s.t1), rng);
                continue;
            }
            let sub = Ray::new(ray.at(s.t0), ray.dir);
            match m.sample_distance(&sub, s.t1 - s.t0, rng) {
                DistanceSample::Scatter { t, weight: w } => {
                    return FreeFlight::Scatter { t: s.t0 + t, medium: s.medium, weight: weight * w };
                }
                DistanceSample::Pass { weight: w } => weight *= w,
            }
        }
        FreeFlight::Pass { weight }
    }

    /// Solid-angle density with which [`Scene::sample_emitter`] at `x`
    /// produces direction `w`. Zero for directions that miss every area
    /// emitter; delta emitters never contribute.
    pub fn pdf_emitter_dir(&self, x: Vec3, w: Vec3) -> f64 {
        self.pdf_area_emitters(x, w, None)
    }

    fn pdf_area_emitters(&self, x: Vec3, w: Vec3, skip: Option<usize>) -> f64 {
        let n = self.emitters.len() as f64;
        let ray = Ray::new(x, w);
        let mut pdf = 0.0;
        for (i, quad) in self.area_emitters() {
            if Some(i) == skip {
                continue;
            }
            if let Some(t) = quad.intersect(&ray, RAY_EPSILON, f64::INFINITY) {
                let cos = quad.normal().dot(w).abs();
                if cos > 0.0 {
                    pdf += t * t / (quad.area() * cos) / n;
                }
            }
        }
        pdf
    }

    fn visible<R: Rng + ?Sized>(&self, ray: &Ray, dist: f64, rng: &mut R) -> Spectrum {
        let t_max = if dist.is_finite() { dist * (1.0 - 1e-9) } else { f64::INFINITY };
        if self.intersect_range(ray, RAY_EPSILON, t_max).is_some() {
            return Spectrum::ZERO;
        }
        self.transmittance(ray, t_max, rng)
    }

    /// Next-event estimation: picks an emitter uniformly and a point on it.
    /// Panics on a scene without emitters; [`Scene::validate`] rejects those.
    pub fn sample_emitter<R: Rng + ?Sized>(&self, x: Vec3, rng: &mut R) -> EmitterSample {
        let n = self.emitters.len();
        let idx = ((rng.gen::<f64>() * n as f64) as usize).min(n - 1);
        match &self.emitters[idx] {
            Emitter::Area { quad, radiance } => {
                let y = quad.point_at(rng.gen(), rng.gen());
                let to = y - x;
                let dist = to.length();
                let dir = to / dist;
                let cos = quad.normal().dot(-dir);
                let own = if cos.abs() > 0.0 {
                    dist * dist / (quad.area() * cos.abs()) / n as f64
                } else {
                    0.0
                };
                let pdf_sa = own + self.pdf_area_emitters(x, dir, Some(idx));
                let radiance = if cos > 0.0 {
                    *radiance * self.visible(&Ray::new(x, dir), dist, rng)
                } else {
                    Spectrum::ZERO
                };
                EmitterSample { dir, pdf_sa, radiance, is_delta: false }
            }
            Emitter::Point { position, intensity } => {
                let to = *position - x;
                let dist = to.length();
                let dir = to / dist;
                let radiance = *intensity * (n as f64 / (dist * dist)) * self.visible(&Ray::new(x, dir), dist, rng);
                EmitterSample { dir, pdf_sa: 1.0, radiance, is_delta: true }
            }
            Emitter::Directional { direction, irradiance } => {
                let dir = -direction.normalized();
                let radiance = *irradiance * n as f64 * self.visible(&Ray::new(x, dir), f64::INFINITY, rng);
                EmitterSample { dir, pdf_sa: 1.0, radiance, is_delta: true }
            }
        }
    }
}
