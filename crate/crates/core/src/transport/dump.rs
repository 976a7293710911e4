//! `VPGR` path-record dump.
//!
//! Layout (all little endian):
//!
//! ```text
//! "VPGR"  u32 version  u64 record_count
//! record_count × RECORD_BYTES shading-point records, in path order
//! u32 width  u32 height  u32 spp  u32 reserved  u64 path_count
//! path_count × PATH_BYTES path entries
//! ```
//!
//! The path table after the records carries the per-path camera data the
//! graph solver needs to write an image.

use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scene::PhaseHG;
use crate::spectrum::Spectrum;
use crate::transport::record::{PathRecord, ScatterKind, ShadingPointRecord};
use crate::transport::RecordSet;

const MAGIC: &[u8; 4] = b"VPGR";
pub const VERSION: u32 = 1;
pub const RECORD_BYTES: usize = 8 * 34 + 4 * 6;
pub const PATH_BYTES: usize = 4 * 2 + 8 * 2 + 8 * 13;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn vec(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }
    fn spec(&mut self, s: Spectrum) {
        s.0.iter().for_each(|&c| self.f64(c));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::RecordDump(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn vec(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    fn spec(&mut self) -> Result<Spectrum> {
        Ok(Spectrum::new(self.f64()?, self.f64()?, self.f64()?))
    }
}

fn write_record(w: &mut Writer, r: &ShadingPointRecord) {
    w.vec(r.position);
    w.vec(r.wo);
    match r.kind {
        ScatterKind::Volume { medium, sigma_s, phase } => {
            w.u32(0);
            w.u32(medium);
            w.spec(sigma_s);
            w.f64(phase.g);
            w.vec(Vec3::ZERO);
        }
        ScatterKind::Surface { surface, albedo, normal } => {
            w.u32(1);
            w.u32(surface);
            w.spec(albedo);
            w.f64(0.0);
            w.vec(normal);
        }
    }
    w.vec(r.phase_dir);
    w.f64(r.phase_pdf);
    w.f64(r.phase_emitter_pdf);
    w.vec(r.emitter_dir);
    w.f64(r.emitter_pdf);
    w.u32(r.emitter_delta as u32);
    w.spec(r.direct_emitter);
    w.spec(r.direct_phase);
    w.spec(r.indirect);
    w.spec(r.w_cont);
    w.u32(r.path);
    w.u32(r.depth);
    w.u32(r.pixel);
}

fn read_record(r: &mut Reader) -> Result<ShadingPointRecord> {
    let position = r.vec()?;
    let wo = r.vec()?;
    let tag = r.u32()?;
    let id = r.u32()?;
    let params = r.spec()?;
    let g = r.f64()?;
    let normal = r.vec()?;
    let kind = match tag {
        0 => ScatterKind::Volume { medium: id, sigma_s: params, phase: PhaseHG::new(g) },
        1 => ScatterKind::Surface { surface: id, albedo: params, normal },
        t => return Err(Error::RecordDump(format!("unknown point kind {t}"))),
    };
    Ok(ShadingPointRecord {
        position,
        wo,
        kind,
        phase_dir: r.vec()?,
        phase_pdf: r.f64()?,
        phase_emitter_pdf: r.f64()?,
        emitter_dir: r.vec()?,
        emitter_pdf: r.f64()?,
        emitter_delta: r.u32()? != 0,
        direct_emitter: r.spec()?,
        direct_phase: r.spec()?,
        indirect: r.spec()?,
        w_cont: r.spec()?,
        path: r.u32()?,
        depth: r.u32()?,
        pixel: r.u32()?,
    })
}

pub fn encode_records(set: &RecordSet) -> Vec<u8> {
    let count: usize = set.paths.iter().map(|p| p.records.len()).sum();
    let mut w = Writer(Vec::with_capacity(16 + count * RECORD_BYTES + set.paths.len() * PATH_BYTES + 24));
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u64(count as u64);
    for p in &set.paths {
        for r in &p.records {
            write_record(&mut w, r);
        }
    }
    w.u32(set.width as u32);
    w.u32(set.height as u32);
    w.u32(set.spp);
    w.u32(0);
    w.u64(set.paths.len() as u64);
    let mut start = 0u64;
    for p in &set.paths {
        w.u32(p.pixel);
        w.u32(p.sample);
        w.u64(start);
        w.u64(p.records.len() as u64);
        w.spec(p.emission);
        w.spec(p.camera_weight);
        w.spec(p.pt_estimate);
        match p.first_bounce_direct {
            Some(d) => {
                w.f64(1.0);
                w.f64(d[0]);
                w.f64(d[1]);
                w.f64(d[2]);
            }
            None => {
                w.f64(0.0);
                w.spec(Spectrum::ZERO);
            }
        }
        start += p.records.len() as u64;
    }
    w.0
}

pub fn decode_records(bytes: &[u8]) -> Result<RecordSet> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::RecordDump("bad magic, expected VPGR".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::RecordDump(format!("unsupported version {version}")));
    }
    let count = r.u64()? as usize;
    if count.saturating_mul(RECORD_BYTES) > bytes.len() {
        return Err(Error::RecordDump("record count exceeds file size".into()));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        records.push(read_record(&mut r)?);
    }
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let spp = r.u32()?;
    r.u32()?;
    let path_count = r.u64()? as usize;
    if path_count.saturating_mul(PATH_BYTES) > bytes.len() {
        return Err(Error::RecordDump("path count exceeds file size".into()));
    }
    let mut paths = Vec::with_capacity(path_count);
    for _ in 0..path_count {
        let pixel = r.u32()?;
        let sample = r.u32()?;
        let start = r.u64()? as usize;
        let len = r.u64()? as usize;
        let emission = r.spec()?;
        let camera_weight = r.spec()?;
        let pt_estimate = r.spec()?;
        let has = r.f64()? != 0.0;
        let fbd = r.spec()?;
        let slice = records
            .get(start..start + len)
            .ok_or_else(|| Error::RecordDump(format!("path record range {start}+{len} out of bounds")))?;
        paths.push(PathRecord {
            pixel,
            sample,
            emission,
            camera_weight,
            records: slice.to_vec(),
            pt_estimate,
            first_bounce_direct: has.then_some(fbd),
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::RecordDump("trailing bytes after path table".into()));
    }
    Ok(RecordSet { width, height, spp, paths })
}

pub fn write_records(set: &RecordSet, path: &Path) -> Result<()> {
    std::fs::write(path, encode_records(set)).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<RecordSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_records(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::transport::tracer::{render_pt, RenderSettings, TraceConfig};
    use crate::transport::extra_direct::record_extra_direct;

    fn sample_set() -> RecordSet {
        let scene = presets::gridpuff(6, 5);
        let settings = RenderSettings { spp: 2, seed: 8, keep_records: true, trace: TraceConfig::default() };
        let mut paths = render_pt(&scene, &settings).unwrap().paths;
        record_extra_direct(&scene, &mut paths[..10], 2, 1);
        RecordSet { width: 6, height: 5, spp: 2, paths }
    }

    #[test]
    fn round_trip_is_exact() {
        let set = sample_set();
        let bytes = encode_records(&set);
        let n = set.record_count();
        assert_eq!(&bytes[..4], b"VPGR");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), VERSION);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), n as u64);
        assert_eq!(bytes.len(), 16 + n * RECORD_BYTES + 24 + set.paths.len() * PATH_BYTES);
        assert_eq!(decode_records(&bytes).unwrap(), set);
    }

    #[test]
    fn surface_records_round_trip() {
        let mut set = sample_set();
        let r = set.paths.iter_mut().find(|p| !p.records.is_empty()).unwrap();
        r.records[0].kind = ScatterKind::Surface {
            surface: 3,
            albedo: Spectrum::new(0.1, 0.2, 0.3),
            normal: Vec3::new(0.0, 1.0, 0.0),
        };
        assert_eq!(decode_records(&encode_records(&set)).unwrap(), set);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = encode_records(&sample_set());
        assert!(decode_records(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_records(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode_records(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode_records(&extra).is_err());
    }

    #[test]
    fn file_round_trip() {
        let set = sample_set();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("paths.vpgr");
        write_records(&set, &path).unwrap();
        assert_eq!(read_records(&path).unwrap(), set);
    }
}
