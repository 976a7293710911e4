//! Text scene format.
//!
//! A scene is a sequence of blocks, each closed by `end`. Blank lines and
//! `#` comments are ignored.
//!
//! ```text
//! camera
//!   origin 0 1.1 3.2
//!   look_at 0 0.45 0
//!   up 0 1 0
//!   fov 30
//!   resolution 256 256
//! end
//!
//! medium fog
//!   kind homogeneous            # or: grid
//!   bounds -0.5 0 -0.5 0.5 1 0.5
//!   sigma_t 2 2 2
//!   sigma_s 1.8 1.8 1.8
//!   g 0.5
//!   density constant 8 8 8 1    # grid only; or: density file puff.volg
//!   density_scale 1             # grid only, default 1
//!   majorant 4                  # grid only, optional looser bound
//! end
//!
//! surface
//!   sphere 0 0 0 1              # or: box x0 y0 z0 x1 y1 z1
//!                               # or: quad ox oy oz ux uy uz vx vy vz
//!   material lambertian 0.5 0.5 0.5   # or: material black
//! end
//!
//! emitter area                  # emits on the u × v side of the quad
//!   quad -0.5 1.4 -0.5 1 0 0 0 0 1
//!   radiance 10 10 10
//! end
//! emitter point
//!   position 0 2 0
//!   intensity 1 1 1
//! end
//! emitter directional
//!   direction 0 -1 0
//!   irradiance 1 1 1
//! end
//! ```
//!
//! Relative grid file paths are resolved against the scene file's directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::scene::medium::read_volume_grid;
use crate::scene::{Camera, DensityGrid, Emitter, GridSource, Material, Medium, MediumKind, Quad, Scene, Shape, Surface};
use crate::spectrum::Spectrum;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    args: Vec<&'a str>,
}

impl Line<'_> {
    fn floats(&self, n: usize) -> Result<Vec<f64>> {
        if self.args.len() != n {
            return Err(perr(self.number, format!("'{}' expects {n} values, found {}", self.key, self.args.len())));
        }
        self.args
            .iter()
            .map(|a| {
                a.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(self.number, format!("'{a}' is not a finite number")))
            })
            .collect()
    }

    fn float(&self) -> Result<f64> {
        Ok(self.floats(1)?[0])
    }

    fn vec3(&self) -> Result<Vec3> {
        let v = self.floats(3)?;
        Ok(Vec3::new(v[0], v[1], v[2]))
    }

    fn spectrum(&self) -> Result<Spectrum> {
        let v = self.floats(3)?;
        Ok(Spectrum::new(v[0], v[1], v[2]))
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let mut words = content.split_whitespace();
            let key = words.next()?;
            Some(Line { number: i + 1, key, args: words.collect() })
        })
        .collect()
}

fn quad_from(v: &[f64]) -> Quad {
    Quad::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]), Vec3::new(v[6], v[7], v[8]))
}

/// Collects the lines of one block, after its header, up to `end`.
fn block<'a, 'b>(lines: &'b [Line<'a>], start: usize) -> Result<(&'b [Line<'a>], usize)> {
    let header = &lines[start];
    match lines[start + 1..].iter().position(|l| l.key == "end") {
        Some(off) => {
            let body = &lines[start + 1..start + 1 + off];
            if let Some(l) = body.iter().find(|l| matches!(l.key, "camera" | "medium" | "surface" | "emitter")) {
                return Err(perr(l.number, format!("'{}' block opened before '{}' block was closed", l.key, header.key)));
            }
            Ok((body, start + off + 2))
        }
        None => Err(perr(header.number, format!("'{}' block is missing 'end'", header.key))),
    }
}

fn unknown(l: &Line, block: &str) -> Error {
    perr(l.number, format!("unknown key '{}' in {block} block", l.key))
}

fn parse_camera(header: &Line, body: &[Line]) -> Result<Camera> {
    let (mut origin, mut look_at, mut up, mut fov, mut res) = (None, None, Some(Vec3::new(0.0, 1.0, 0.0)), None, None);
    for l in body {
        match l.key {
            "origin" => origin = Some(l.vec3()?),
            "look_at" => look_at = Some(l.vec3()?),
            "up" => up = Some(l.vec3()?),
            "fov" => fov = Some(l.float()?),
            "resolution" => {
                let v = l.floats(2)?;
                if v.iter().any(|x| *x < 1.0 || x.fract() != 0.0) {
                    return Err(perr(l.number, "resolution must be two positive integers"));
                }
                res = Some((v[0] as usize, v[1] as usize));
            }
            _ => return Err(unknown(l, "camera")),
        }
    }
    let missing = |what: &str| perr(header.number, format!("camera block is missing '{what}'"));
    let (width, height) = res.ok_or_else(|| missing("resolution"))?;
    Ok(Camera {
        origin: origin.ok_or_else(|| missing("origin"))?,
        look_at: look_at.ok_or_else(|| missing("look_at"))?,
        up: up.unwrap(),
        fov: fov.ok_or_else(|| missing("fov"))?,
        width,
        height,
    })
}

fn parse_medium(header: &Line, body: &[Line], base: &Path) -> Result<Medium> {
    let name = match header.args.as_slice() {
        [name] => name.to_string(),
        _ => return Err(perr(header.number, "medium block needs exactly one name")),
    };
    let (mut kind, mut bounds, mut sigma_t, mut sigma_s, mut g) = (None, None, None, None, 0.0);
    let (mut density, mut scale, mut majorant) = (None, 1.0, None);
    for l in body {
        match l.key {
            "kind" => match l.args.as_slice() {
                ["homogeneous"] => kind = Some(false),
                ["grid"] => kind = Some(true),
                _ => return Err(perr(l.number, "kind must be 'homogeneous' or 'grid'")),
            },
            "bounds" => {
                let v = l.floats(6)?;
                bounds = Some(Aabb::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5])));
            }
            "sigma_t" => sigma_t = Some(l.spectrum()?),
            "sigma_s" => sigma_s = Some(l.spectrum()?),
            "g" => g = l.float()?,
            "density_scale" => scale = l.float()?,
            "majorant" => majorant = Some(l.float()?),
            "density" => {
                density = Some(match l.args.as_slice() {
                    ["constant", rest @ ..] if rest.len() == 4 => {
                        let v = Line { number: l.number, key: "density constant", args: rest.to_vec() }.floats(4)?;
                        if v[..3].iter().any(|x| *x < 1.0 || x.fract() != 0.0) {
                            return Err(perr(l.number, "grid dimensions must be positive integers"));
                        }
                        if v[3] < 0.0 {
                            return Err(perr(l.number, "density must be non-negative"));
                        }
                        DensityGrid::constant([v[0] as usize, v[1] as usize, v[2] as usize], v[3] as f32, 1.0)
                    }
                    ["file", path] => {
                        // The path is kept as written so the scene serializes back unchanged.
                        let (dims, data) = read_volume_grid(&base.join(path))?;
                        DensityGrid::from_data(dims, data, 1.0, GridSource::File(PathBuf::from(path)))?
                    }
                    _ => return Err(perr(l.number, "density expects 'constant nx ny nz value' or 'file PATH'")),
                });
            }
            _ => return Err(unknown(l, "medium")),
        }
    }
    let missing = |what: &str| perr(header.number, format!("medium '{name}' is missing '{what}'"));
    let bounds = bounds.ok_or_else(|| missing("bounds"))?;
    let sigma_t = sigma_t.ok_or_else(|| missing("sigma_t"))?;
    let sigma_s = sigma_s.ok_or_else(|| missing("sigma_s"))?;
    match kind.ok_or_else(|| missing("kind"))? {
        false => {
            if density.is_some() || majorant.is_some() {
                return Err(perr(header.number, format!("homogeneous medium '{name}' cannot have a density grid")));
            }
            Ok(Medium::homogeneous(name, bounds, sigma_t, sigma_s, g))
        }
        true => {
            let mut grid = density.ok_or_else(|| missing("density"))?;
            grid.scale = scale;
            let m = Medium::grid(name, bounds, sigma_t, sigma_s, g, grid);
            Ok(match majorant {
                Some(mu) => m.with_majorant(mu),
                None => m,
            })
        }
    }
}

fn parse_surface(header: &Line, body: &[Line]) -> Result<Surface> {
    let (mut shape, mut material) = (None, None);
    for l in body {
        match l.key {
            "sphere" => {
                let v = l.floats(4)?;
                shape = Some(Shape::Sphere { center: Vec3::new(v[0], v[1], v[2]), radius: v[3] });
            }
            "box" => {
                let v = l.floats(6)?;
                shape = Some(Shape::Box(Aabb::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))));
            }
            "quad" => shape = Some(Shape::Quad(quad_from(&l.floats(9)?))),
            "material" => {
                material = Some(match l.args.first() {
                    Some(&"black") if l.args.len() == 1 => Material::Black,
                    Some(&"lambertian") => {
                        let rest = Line { number: l.number, key: "material lambertian", args: l.args[1..].to_vec() };
                        Material::Lambertian(rest.spectrum()?)
                    }
                    _ => return Err(perr(l.number, "material must be 'lambertian r g b' or 'black'")),
                });
            }
            _ => return Err(unknown(l, "surface")),
        }
    }
    Ok(Surface {
        shape: shape.ok_or_else(|| perr(header.number, "surface block has no shape"))?,
        material: material.ok_or_else(|| perr(header.number, "surface block has no material"))?,
    })
}

fn parse_emitter(header: &Line, body: &[Line]) -> Result<Emitter> {
    let kind = match header.args.as_slice() {
        [k] => *k,
        _ => return Err(perr(header.number, "emitter block needs a kind: area, point or directional")),
    };
    let get = |key: &str| -> Result<&Line> {
        body.iter()
            .find(|l| l.key == key)
            .ok_or_else(|| perr(header.number, format!("{kind} emitter is missing '{key}'")))
    };
    let allowed: &[&str] = match kind {
        "area" => &["quad", "radiance"],
        "point" => &["position", "intensity"],
        "directional" => &["direction", "irradiance"],
        _ => return Err(perr(header.number, format!("unknown emitter kind '{kind}'"))),
    };
    if let Some(l) = body.iter().find(|l| !allowed.contains(&l.key)) {
        return Err(unknown(l, &format!("{kind} emitter")));
    }
    Ok(match kind {
        "area" => Emitter::Area { quad: quad_from(&get("quad")?.floats(9)?), radiance: get("radiance")?.spectrum()? },
        "point" => Emitter::Point { position: get("position")?.vec3()?, intensity: get("intensity")?.spectrum()? },
        _ => Emitter::Directional { direction: get("direction")?.vec3()?, irradiance: get("irradiance")?.spectrum()? },
    })
}

/// Parses scene text. `base` resolves relative grid paths. The result is validated.
pub fn parse_scene_str(text: &str, base: &Path) -> Result<Scene> {
    let lines = tokenize(text);
    let (mut camera, mut media, mut surfaces, mut emitters) = (None, Vec::new(), Vec::new(), Vec::new());
    let mut i = 0;
    while i < lines.len() {
        let header = &lines[i];
        let (body, next) = match header.key {
            "camera" | "medium" | "surface" | "emitter" => block(&lines, i)?,
            other => return Err(perr(header.number, format!("expected a block, found '{other}'"))),
        };
        match header.key {
            "camera" => {
                if camera.is_some() {
                    return Err(perr(header.number, "duplicate camera block"));
                }
                camera = Some(parse_camera(header, body)?);
            }
            "medium" => media.push(parse_medium(header, body, base)?),
            "surface" => surfaces.push(parse_surface(header, body)?),
            _ => emitters.push(parse_emitter(header, body)?),
        }
        i = next;
    }
    let camera = camera.ok_or_else(|| perr(lines.last().map_or(1, |l| l.number), "scene has no camera block"))?;
    let scene = Scene { camera, media, surfaces, emitters };
    scene.validate()?;
    Ok(scene)
}

pub fn parse_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene_str(&text, path.parent().unwrap_or(Path::new(".")))
}

fn v3(v: Vec3) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

fn sp(s: Spectrum) -> String {
    format!("{} {} {}", s[0], s[1], s[2])
}

fn quad_text(q: &Quad) -> String {
    format!("{} {} {}", v3(q.origin), v3(q.edge_u), v3(q.edge_v))
}

/// Writes a scene in the text format. Numbers use the shortest exact
/// representation, so parsing the output reproduces the scene.
pub fn serialize_scene(scene: &Scene) -> String {
    let mut s = String::new();
    let c = &scene.camera;
    let _ = writeln!(s, "camera");
    let _ = writeln!(s, "  origin {}", v3(c.origin));
    let _ = writeln!(s, "  look_at {}", v3(c.look_at));
    let _ = writeln!(s, "  up {}", v3(c.up));
    let _ = writeln!(s, "  fov {}", c.fov);
    let _ = writeln!(s, "  resolution {} {}", c.width, c.height);
    let _ = writeln!(s, "end");
    for m in &scene.media {
        let _ = writeln!(s, "\nmedium {}", m.name);
        let kind = if matches!(m.kind, MediumKind::Grid(_)) { "grid" } else { "homogeneous" };
        let _ = writeln!(s, "  kind {kind}");
        let _ = writeln!(s, "  bounds {} {}", v3(m.bounds.min), v3(m.bounds.max));
        let _ = writeln!(s, "  sigma_t {}", sp(m.sigma_t));
        let _ = writeln!(s, "  sigma_s {}", sp(m.sigma_s));
        let _ = writeln!(s, "  g {}", m.phase.g);
        if let MediumKind::Grid(g) = &m.kind {
            match &g.source {
                GridSource::Constant { value } => {
                    let _ = writeln!(s, "  density constant {} {} {} {}", g.dims[0], g.dims[1], g.dims[2], value);
                }
                GridSource::File(p) => {
                    let _ = writeln!(s, "  density file {}", p.display());
                }
            }
            let _ = writeln!(s, "  density_scale {}", g.scale);
            let _ = writeln!(s, "  majorant {}", m.majorant());
        }
        let _ = writeln!(s, "end");
    }
    for surf in &scene.surfaces {
        let _ = writeln!(s, "\nsurface");
        match &surf.shape {
            Shape::Sphere { center, radius } => {
                let _ = writeln!(s, "  sphere {} {radius}", v3(*center));
            }
            Shape::Box(b) => {
                let _ = writeln!(s, "  box {} {}", v3(b.min), v3(b.max));
            }
            Shape::Quad(q) => {
                let _ = writeln!(s, "  quad {}", quad_text(q));
            }
        }
        match surf.material {
            Material::Lambertian(a) => {
                let _ = writeln!(s, "  material lambertian {}", sp(a));
            }
            _ => {
                let _ = writeln!(s, "  material black");
            }
        }
        let _ = writeln!(s, "end");
    }
    for e in &scene.emitters {
        match e {
            Emitter::Area { quad, radiance } => {
                let _ = writeln!(s, "\nemitter area\n  quad {}\n  radiance {}\nend", quad_text(quad), sp(*radiance));
            }
            Emitter::Point { position, intensity } => {
                let _ = writeln!(s, "\nemitter point\n  position {}\n  intensity {}\nend", v3(*position), sp(*intensity));
            }
            Emitter::Directional { direction, irradiance } => {
                let _ = writeln!(s, "\nemitter directional\n  direction {}\n  irradiance {}\nend", v3(*direction), sp(*irradiance));
            }
        }
    }
    s
}

/// A preset name (`fogbox`, `gridpuff`) or a path to a scene file.
pub fn load_scene(spec: &str) -> Result<Scene> {
    if let Some(scene) = crate::harness::presets::by_name(spec, 256, 256) {
        return Ok(scene);
    }
    parse_scene(&PathBuf::from(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::scene::medium::write_volume_grid;

    const MINIMAL: &str = "camera\n origin 0 0 -3\n look_at 0 0 0\n fov 40\n resolution 4 3\nend\nemitter point\n position 0 2 0\n intensity 1 1 1\nend\n";

    #[test]
    fn minimal_scene_parses() {
        let s = parse_scene_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!((s.camera.width, s.camera.height), (4, 3));
        assert_eq!(s.camera.up, Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(s.emitters.len(), 1);
    }

    #[test]
    fn scattering_above_extinction_names_the_medium() {
        let text = format!("{MINIMAL}medium smoke\n kind homogeneous\n bounds 0 0 0 1 1 1\n sigma_t 1 1 1\n sigma_s 2 1 1\nend\n");
        match parse_scene_str(&text, Path::new(".")) {
            Err(Error::Validation(msg)) => assert!(msg.contains("smoke"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn parse_error_line(text: &str) -> usize {
        match parse_scene_str(text, Path::new(".")) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_error_line("camera\n origin 0 0 x\nend\n"), 2);
        assert_eq!(parse_error_line("# header\n\ncamera\n fov 30\n"), 3);
        assert_eq!(parse_error_line(&format!("{MINIMAL}surface\n sphere 0 0 0 1\n material chrome\nend\n")), 13);
        assert_eq!(parse_error_line(&format!("{MINIMAL}bogus\n")), 11);
        assert_eq!(parse_error_line(&format!("{MINIMAL}emitter spot\nend\n")), 11);
        assert_eq!(parse_error_line("camera\n origin 0 0 -3\n look_at 0 0 0\n fov 40\n resolution 4 3\n tilt 1\nend\n"), 6);
    }

    #[test]
    fn presets_round_trip() {
        for scene in [presets::fogbox(64, 48), presets::gridpuff(32, 32)] {
            let text = serialize_scene(&scene);
            assert_eq!(parse_scene_str(&text, Path::new(".")).unwrap(), scene);
        }
    }

    #[test]
    fn every_block_kind_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        write_volume_grid(&dir.path().join("cloud.volg"), [2, 3, 1], &[0.0, 0.5, 1.0, 1.5, 2.0, 0.25]).unwrap();
        let text = format!(
            "{MINIMAL}
medium cloud
  kind grid
  bounds 1 1 1 2 2 2
  sigma_t 1 2 3
  sigma_s 0.5 1 1.5
  g -0.3
  density file cloud.volg
  density_scale 0.7
  majorant 9
end
medium haze
  kind homogeneous
  bounds -2 -2 -2 0 0 0
  sigma_t 0.1 0.1 0.1
  sigma_s 0.05 0.05 0.05
end
surface
  box -5 -1.5 -5 5 -1 5
  material lambertian 0.8 0.7 0.1
end
surface
  sphere 3 3 3 0.25
  material black
end
surface
  quad 0 0 5 1 0 0 0 1 0
  material lambertian 0.2 0.2 0.2
end
emitter area
  quad -1 3 -1 0 0 2 2 0 0
  radiance 4 4 4
end
emitter directional
  direction 0.1 -1 0
  irradiance 0.5 0.5 0.5
end
"
        );
        let scene = parse_scene_str(&text, dir.path()).unwrap();
        assert_eq!(scene.media.len(), 2);
        assert_eq!(scene.media[0].majorant(), 9.0);
        assert_eq!(scene.surfaces.len(), 3);
        assert_eq!(scene.emitters.len(), 3);
        let again = parse_scene_str(&serialize_scene(&scene), dir.path()).unwrap();
        assert_eq!(again, scene);
    }

    #[test]
    fn scene_files_load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.scene");
        std::fs::write(&path, MINIMAL).unwrap();
        assert!(parse_scene(&path).is_ok());
        assert!(matches!(parse_scene(&dir.path().join("missing.scene")), Err(Error::Io { .. })));
        assert_eq!(load_scene("fogbox").unwrap(), presets::fogbox(256, 256));
    }
}
