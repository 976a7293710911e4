use crate::math::Vec3;
use crate::scene::geometry::Quad;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub enum Emitter {
    /// Isotropic point source with radiant intensity (W/sr).
    Point { position: Vec3, intensity: Spectrum },
    /// One-sided quad emitting uniform radiance on the `edge_u × edge_v` side.
    Area { quad: Quad, radiance: Spectrum },
    /// Distant source; `direction` is the direction light travels.
    Directional { direction: Vec3, irradiance: Spectrum },
}

impl Emitter {
    pub fn is_delta(&self) -> bool {
        !matches!(self, Emitter::Area { .. })
    }

    /// Radiance leaving an area emitter toward `-dir` for a ray travelling
    /// along `dir` that hits it. Zero on the back side.
    pub fn emitted_toward(&self, dir: Vec3) -> Spectrum {
        match self {
            Emitter::Area { quad, radiance } if quad.normal().dot(dir) < 0.0 => *radiance,
            _ => Spectrum::ZERO,
        }
    }
}

/// Result of next-event estimation from a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterSample {
    /// Unit direction from the shading point toward the emitter.
    pub dir: Vec3,
    /// Solid-angle density of the strategy (all emitters). For delta emitters
    /// this is 1 and the selection probability is folded into `radiance`.
    pub pdf_sa: f64,
    /// Incoming radiance including visibility and transmittance.
    pub radiance: Spectrum,
    pub is_delta: bool,
}
