//! RGB float images and PFM I/O.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top.
    pub pixels: Vec<[f32; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![[0.0; 3]; width * height] }
    }

    pub fn from_spectra(width: usize, height: usize, values: &[Spectrum]) -> Self {
        assert_eq!(values.len(), width * height);
        let pixels = values
            .iter()
            .map(|s| [s[0] as f32, s[1] as f32, s[2] as f32])
            .collect();
        Self { width, height, pixels }
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> [f64; 3] {
        let mut acc = [0.0f64; 3];
        for p in &self.pixels {
            for c in 0..3 {
                acc[c] += p[c] as f64;
            }
        }
        acc.map(|v| v / self.pixels.len().max(1) as f64)
    }

    /// PFM colour image: `PF`, dimensions, scale `-1.0` (little endian), rows bottom to top.
    pub fn write_pfm_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "PF\n{} {}\n-1.0\n", self.width, self.height)?;
        let mut buf = Vec::with_capacity(self.width * self.height * 12);
        for row in (0..self.height).rev() {
            for p in &self.pixels[row * self.width..(row + 1) * self.width] {
                for c in p {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        w.write_all(&buf)
    }

    pub fn write_pfm(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_pfm_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_pfm_from<R: Read>(r: R) -> Result<Image> {
        let mut r = BufReader::new(r);
        let mut line = |what: &str| -> Result<String> {
            let mut s = String::new();
            let n = r
                .read_line(&mut s)
                .map_err(|e| Error::Pfm(format!("reading {what}: {e}")))?;
            if n == 0 || !s.ends_with('\n') {
                return Err(Error::Pfm(format!("missing {what} line")));
            }
            Ok(s.trim_end().to_string())
        };
        let magic = line("magic")?;
        if magic != "PF" {
            return Err(Error::Pfm(format!("unsupported magic {magic:?}, expected PF")));
        }
        let dims = line("dimensions")?;
        let mut it = dims.split_whitespace().map(|v| v.parse::<usize>());
        let (width, height) = match (it.next(), it.next(), it.next()) {
            (Some(Ok(w)), Some(Ok(h)), None) => (w, h),
            _ => return Err(Error::Pfm(format!("bad dimensions line {dims:?}"))),
        };
        let scale: f64 = line("scale")?
            .parse()
            .map_err(|_| Error::Pfm("bad scale line".into()))?;
        if scale > 0.0 {
            return Err(Error::Pfm("big-endian PFM is not supported".into()));
        }
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Pfm("scale must be non-zero".into()));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body).map_err(|e| Error::Pfm(e.to_string()))?;
        if body.len() != width * height * 12 {
            return Err(Error::Pfm(format!(
                "expected {} bytes of pixel data, found {}",
                width * height * 12,
                body.len()
            )));
        }
        let mut pixels = vec![[0.0f32; 3]; width * height];
        for (i, chunk) in body.chunks_exact(12).enumerate() {
            let (row_from_bottom, x) = (i / width, i % width);
            let row = height - 1 - row_from_bottom;
            let px = &mut pixels[row * width + x];
            for c in 0..3 {
                px[c] = f32::from_le_bytes(chunk[4 * c..4 * c + 4].try_into().unwrap());
            }
        }
        Ok(Image { width, height, pixels })
    }

    pub fn read_pfm(path: &Path) -> Result<Image> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_pfm_from(f)
    }
}

pub fn write_pfm(image: &Image, path: &Path) -> Result<()> {
    image.write_pfm(path)
}

pub fn read_pfm(path: &Path) -> Result<Image> {
    Image::read_pfm(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_pixel_round_trip() {
        let img = Image { width: 1, height: 1, pixels: vec![[0.5, 0.25, 0.125]] };
        let mut buf = Vec::new();
        img.write_pfm_to(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"PF\n1 1\n-1.0");
        let back = Image::read_pfm_from(&buf[..]).unwrap();
        assert_eq!(back.pixels[0].map(f32::to_bits), img.pixels[0].map(f32::to_bits));
    }

    #[test]
    fn header_for_full_resolution() {
        let img = Image::new(1440, 960);
        let mut buf = Vec::new();
        img.write_pfm_to(&mut buf).unwrap();
        assert!(buf.starts_with(b"PF\n1440 960\n-1.0\n"));
    }

    #[test]
    fn rows_are_stored_bottom_up() {
        let img = Image { width: 1, height: 2, pixels: vec![[1.0; 3], [2.0; 3]] };
        let mut buf = Vec::new();
        img.write_pfm_to(&mut buf).unwrap();
        let body = &buf[buf.len() - 24..];
        assert_eq!(f32::from_le_bytes(body[0..4].try_into().unwrap()), 2.0);
    }

    #[test]
    fn big_endian_is_rejected() {
        let mut data = b"PF\n1 1\n1.0\n".to_vec();
        data.extend_from_slice(&[0u8; 12]);
        match Image::read_pfm_from(&data[..]) {
            Err(Error::Pfm(msg)) => assert!(msg.contains("big-endian")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_headers() {
        assert!(Image::read_pfm_from(&b"Pf\n1 1\n-1.0\n"[..]).is_err());
        assert!(Image::read_pfm_from(&b"PF\n1\n-1.0\n"[..]).is_err());
        assert!(Image::read_pfm_from(&b"PF\n1 1\n-1.0\n\x00\x00"[..]).is_err());
    }

    proptest! {
        #[test]
        fn pfm_round_trip_is_bitwise(
            w in 1usize..6,
            h in 1usize..6,
            seed in proptest::collection::vec(0.0f32..1e30, 108),
        ) {
            let pixels: Vec<[f32; 3]> = (0..w * h)
                .map(|i| [seed[3 * i % 108], seed[(3 * i + 1) % 108], seed[(3 * i + 2) % 108]])
                .collect();
            let img = Image { width: w, height: h, pixels };
            let mut buf = Vec::new();
            img.write_pfm_to(&mut buf).unwrap();
            let back = Image::read_pfm_from(&buf[..]).unwrap();
            prop_assert_eq!(back.width, w);
            prop_assert_eq!(back.height, h);
            for (a, b) in img.pixels.iter().zip(&back.pixels) {
                prop_assert_eq!(a.map(f32::to_bits), b.map(f32::to_bits));
            }
        }
    }
}
