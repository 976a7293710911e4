//! Disk cache for expensive path-traced reference images.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::scene_format::serialize_scene;
use crate::image::Image;
use crate::scene::{MediumKind, Scene};
use crate::transport::{render_pt, RenderSettings, TraceConfig};

/// Content hash of everything that determines a reference image. Grid voxels
/// are hashed directly since the scene text may only name their file.
pub fn reference_key(scene: &Scene, spp: u32, seed: u64, trace: &TraceConfig) -> String {
    let mut h = Sha256::new();
    h.update(serialize_scene(scene).as_bytes());
    for m in &scene.media {
        if let MediumKind::Grid(g) = &m.kind {
            for v in &g.data {
                h.update(v.to_le_bytes());
            }
        }
    }
    h.update(format!("spp {spp}\nseed {seed}\ntrace {} {} {:e}\n", trace.max_depth, trace.rr_start, trace.rr_floor));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn reference_path(cache_dir: &Path, scene: &Scene, spp: u32, seed: u64, trace: &TraceConfig) -> PathBuf {
    cache_dir.join(format!("ref-{}.pfm", reference_key(scene, spp, seed, trace)))
}

/// Loads the reference from `cache_dir` or renders and stores it.
pub fn cached_reference(scene: &Scene, spp: u32, seed: u64, trace: &TraceConfig, cache_dir: &Path) -> Result<Image> {
    let path = reference_path(cache_dir, scene, spp, seed, trace);
    if path.exists() {
        if let Ok(img) = Image::read_pfm(&path) {
            if (img.width, img.height) == (scene.camera.width, scene.camera.height) {
                return Ok(img);
            }
        }
    }
    let settings = RenderSettings { spp, seed, keep_records: false, trace: *trace };
    let image = render_pt(scene, &settings)?.image;
    std::fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
    // Write then rename so an interrupted run never leaves a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    image.write_pfm(&tmp)?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(image)
}
