//! Built-in scenes used by the acceptance suite and the CLI.

use crate::math::{Aabb, Vec3};
use crate::scene::{Camera, DensityGrid, Emitter, Medium, Quad, Scene};
use crate::spectrum::Spectrum;

pub const PRESET_NAMES: [&str; 2] = ["fogbox", "gridpuff"];

fn fog_bounds() -> Aabb {
    Aabb::new(Vec3::new(-0.5, 0.0, -0.5), Vec3::new(0.5, 1.0, 0.5))
}

fn fog_camera(width: usize, height: usize) -> Camera {
    Camera {
        origin: Vec3::new(0.0, 1.1, 3.2),
        look_at: Vec3::new(0.0, 0.45, 0.0),
        up: Vec3::new(0.0, 1.0, 0.0),
        fov: 30.0,
        width,
        height,
    }
}

/// Square light above the box, emitting downward.
fn fog_light() -> Emitter {
    Emitter::Area {
        quad: Quad::new(Vec3::new(-0.5, 1.4, -0.5), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
        radiance: Spectrum::splat(10.0),
    }
}

/// Homogeneous unit cube of forward-scattering fog lit from above.
pub fn fogbox(width: usize, height: usize) -> Scene {
    Scene {
        camera: fog_camera(width, height),
        media: vec![Medium::homogeneous("fog", fog_bounds(), Spectrum::splat(2.0), Spectrum::splat(1.8), 0.5)],
        surfaces: Vec::new(),
        emitters: vec![fog_light()],
    }
}

/// The same cube stored as a constant-density voxel grid.
pub fn gridpuff(width: usize, height: usize) -> Scene {
    let grid = DensityGrid::constant([8, 8, 8], 1.0, 1.0);
    Scene {
        camera: fog_camera(width, height),
        media: vec![Medium::grid("puff", fog_bounds(), Spectrum::splat(2.0), Spectrum::splat(1.8), 0.5, grid)],
        surfaces: Vec::new(),
        emitters: vec![fog_light()],
    }
}

pub fn by_name(name: &str, width: usize, height: usize) -> Option<Scene> {
    match name {
        "fogbox" => Some(fogbox(width, height)),
        "gridpuff" => Some(gridpuff(width, height)),
        _ => None,
    }
}
