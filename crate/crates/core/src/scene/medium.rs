//! Participating media: homogeneous slabs with closed-form transmittance and
//! voxel grids handled with null-collision tracking against a scalar majorant.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Vec3};
use crate::scene::phase::PhaseHG;
use crate::spectrum::Spectrum;

/// Where a grid's voxel data came from. Kept so a scene can be written back out.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSource {
    Constant { value: f32 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub dims: [usize; 3],
    /// x-fastest voxel densities.
    pub data: Vec<f32>,
    pub scale: f64,
    pub source: GridSource,
}

impl DensityGrid {
    pub fn constant(dims: [usize; 3], value: f32, scale: f64) -> Self {
        Self {
            dims,
            data: vec![value; dims[0] * dims[1] * dims[2]],
            scale,
            source: GridSource::Constant { value },
        }
    }

    pub fn from_data(dims: [usize; 3], data: Vec<f32>, scale: f64, source: GridSource) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::VolumeGrid(format!("zero dimension in {dims:?}")));
        }
        if data.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::VolumeGrid(format!(
                "expected {} voxels, got {}",
                dims[0] * dims[1] * dims[2],
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::VolumeGrid(format!("density value {v} is negative or non-finite")));
        }
        Ok(Self { dims, data, scale, source })
    }

    pub fn max_density(&self) -> f64 {
        self.data.iter().fold(0.0f32, |m, &v| m.max(v)) as f64
    }

    /// Nearest-voxel (piecewise constant) lookup at normalized grid
    /// coordinates in `[0,1]^3`.
    pub fn lookup(&self, local: Vec3) -> f64 {
        let idx = |c: f64, n: usize| -> usize { ((c * n as f64).floor().max(0.0) as usize).min(n - 1) };
        let ix = idx(local.x, self.dims[0]);
        let iy = idx(local.y, self.dims[1]);
        let iz = idx(local.z, self.dims[2]);
        self.data[ix + self.dims[0] * (iy + self.dims[1] * iz)] as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MediumKind {
    Homogeneous,
    Grid(DensityGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub name: String,
    pub bounds: Aabb,
    /// Extinction coefficient; scaled by the voxel density for grids.
    pub sigma_t: Spectrum,
    /// Scattering coefficient; scaled by the voxel density for grids.
    pub sigma_s: Spectrum,
    pub phase: PhaseHG,
    pub kind: MediumKind,
    majorant: f64,
}

/// Outcome of free-flight sampling along a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceSample {
    /// Real collision at parameter `t`; `weight` is Tr/p_t per channel.
    Scatter { t: f64, weight: Spectrum },
    /// No collision before the end of the segment; `weight` is Tr/P(pass).
    Pass { weight: Spectrum },
}

impl Medium {
    pub fn homogeneous(name: impl Into<String>, bounds: Aabb, sigma_t: Spectrum, sigma_s: Spectrum, g: f64) -> Self {
        Self {
            name: name.into(),
            bounds,
            sigma_t,
            sigma_s,
            phase: PhaseHG::new(g),
            kind: MediumKind::Homogeneous,
            majorant: sigma_t.max_channel(),
        }
    }

    pub fn grid(
        name: impl Into<String>,
        bounds: Aabb,
        sigma_t: Spectrum,
        sigma_s: Spectrum,
        g: f64,
        grid: DensityGrid,
    ) -> Self {
        let majorant = grid.max_density() * grid.scale * sigma_t.max_channel();
        Self {
            name: name.into(),
            bounds,
            sigma_t,
            sigma_s,
            phase: PhaseHG::new(g),
            kind: MediumKind::Grid(grid),
            majorant,
        }
    }

    /// Loosens the majorant. Values below the tight bound are ignored.
    pub fn with_majorant(mut self, majorant: f64) -> Self {
        self.majorant = self.majorant.max(majorant);
        self
    }

    pub fn majorant(&self) -> f64 {
        self.majorant
    }

    fn density_at(&self, p: Vec3) -> f64 {
        match &self.kind {
            MediumKind::Homogeneous => 1.0,
            MediumKind::Grid(grid) => {
                let e = self.bounds.extent();
                let local = p - self.bounds.min;
                let local = Vec3::new(local.x / e.x, local.y / e.y, local.z / e.z);
                grid.lookup(local) * grid.scale
            }
        }
    }

    pub fn sigma_t_at(&self, p: Vec3) -> Spectrum {
        self.sigma_t * self.density_at(p)
    }

    pub fn sigma_s_at(&self, p: Vec3) -> Spectrum {
        self.sigma_s * self.density_at(p)
    }

    /// Transmittance between two points inside the medium. Exact for
    /// homogeneous media, an unbiased ratio-tracking estimate for grids.
    pub fn transmittance<R: Rng + ?Sized>(&self, x: Vec3, y: Vec3, rng: &mut R) -> Spectrum {
        let d = (y - x).length();
        if d == 0.0 {
            return Spectrum::ONE;
        }
        match &self.kind {
            MediumKind::Homogeneous => (self.sigma_t * d).exp_neg(),
            MediumKind::Grid(_) => {
                let mu = self.majorant;
                if mu <= 0.0 {
                    return Spectrum::ONE;
                }
                let dir = (y - x) / d;
                let mut tr = Spectrum::ONE;
                let mut t = 0.0;
                loop {
                    t += -(1.0 - rng.gen::<f64>()).ln() / mu;
                    if t >= d {
                        return tr;
                    }
                    let sigma = self.sigma_t_at(x + dir * t);
                    for c in 0..3 {
                        tr[c] *= 1.0 - sigma[c] / mu;
                    }
                    if tr.is_black() {
                        return tr;
                    }
                }
            }
        }
    }

    /// Samples a collision along `ray` within `[0, t_max]`; the ray origin is
    /// inside the medium and `ray.dir` is unit length.
    pub fn sample_distance<R: Rng + ?Sized>(&self, ray: &Ray, t_max: f64, rng: &mut R) -> DistanceSample {
        match &self.kind {
            MediumKind::Homogeneous => {
                let sigma_bar = scalar_extinction(self.sigma_t);
                if sigma_bar <= 0.0 {
                    return DistanceSample::Pass { weight: Spectrum::ONE };
                }
                let t = -(1.0 - rng.gen::<f64>()).ln() / sigma_bar;
                if t < t_max {
                    // Tr / p_t with p_t = σ̄ e^{-σ̄ t}
                    let weight = self.sigma_t.map(|s| (-(s - sigma_bar) * t).exp() / sigma_bar);
                    DistanceSample::Scatter { t, weight }
                } else {
                    let weight = self.sigma_t.map(|s| (-(s - sigma_bar) * t_max).exp());
                    DistanceSample::Pass { weight }
                }
            }
            MediumKind::Grid(_) => {
                let mu = self.majorant;
                if mu <= 0.0 {
                    return DistanceSample::Pass { weight: Spectrum::ONE };
                }
                let mut weight = Spectrum::ONE;
                let mut t = 0.0;
                loop {
                    t += -(1.0 - rng.gen::<f64>()).ln() / mu;
                    if t >= t_max {
                        return DistanceSample::Pass { weight };
                    }
                    let sigma = self.sigma_t_at(ray.at(t));
                    let p_real = (sigma.mean() / mu).min(1.0);
                    if rng.gen::<f64>() < p_real {
                        return DistanceSample::Scatter { t, weight: weight / (mu * p_real) };
                    }
                    let p_null = 1.0 - p_real;
                    for c in 0..3 {
                        weight[c] *= (mu - sigma[c]).max(0.0) / (mu * p_null);
                    }
                }
            }
        }
    }
}

/// Scalar extinction driving analog sampling: the shared value when the
/// medium is grey, otherwise the channel mean.
fn scalar_extinction(sigma_t: Spectrum) -> f64 {
    let [r, g, b] = sigma_t.0;
    if r == g && g == b {
        r
    } else {
        sigma_t.mean()
    }
}

const VOLG_MAGIC: &[u8; 4] = b"VOLG";

/// Reads a raw `VOLG` density grid: magic, three little-endian `u32` dims,
/// then x-fastest little-endian `f32` voxels.
pub fn read_volume_grid(path: &Path) -> Result<([usize; 3], Vec<f32>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_volume_grid(&bytes)
}

pub fn parse_volume_grid(bytes: &[u8]) -> Result<([usize; 3], Vec<f32>)> {
    if bytes.len() < 16 {
        return Err(Error::VolumeGrid("file shorter than 16-byte header".into()));
    }
    if &bytes[0..4] != VOLG_MAGIC {
        return Err(Error::VolumeGrid("bad magic, expected VOLG".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let dims = [dim(0), dim(1), dim(2)];
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| Error::VolumeGrid("dimension overflow".into()))?;
    let body = &bytes[16..];
    if body.len() != count * 4 {
        return Err(Error::VolumeGrid(format!(
            "expected {} bytes of voxel data, found {}",
            count * 4,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, data))
}

pub fn write_volume_grid(path: &Path, dims: [usize; 3], data: &[f32]) -> Result<()> {
    let mut out = Vec::with_capacity(16 + 4 * data.len());
    out.extend_from_slice(VOLG_MAGIC);
    for d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}
