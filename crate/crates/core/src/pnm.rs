//! Raster I/O: PGM (P2/P5), grayscale PNG, and the `LLSF` float dump.
//!
//! Sample values are read as-is; no rescaling to `[0, 1]`.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::scalar::Real;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";
const LLSF_MAGIC: &[u8] = b"LLSF";

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        let mut value: u64 = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value * 10 + u64::from(self.bytes[self.pos] - b'0');
            if value > u64::from(u32::MAX) {
                return Err(Error::format(start, format!("{what} is too large")));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::format(start, format!("expected {what}")));
        }
        Ok(value as u32)
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::format(0, "not a PNM file"));
    }
    let binary = match bytes[1] {
        b'2' => false,
        b'5' => true,
        m => return Err(Error::format(1, format!("unsupported magic P{}", m as char))),
    };
    let mut s = Scanner { bytes, pos: 2 };
    let width = s.number("width")? as usize;
    let height = s.number("height")? as usize;
    let max_at = s.pos;
    let maxval = s.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(max_at, format!("unsupported maxval {maxval}")));
    }
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if s.pos >= bytes.len() || !bytes[s.pos].is_ascii_whitespace() {
            return Err(Error::format(s.pos, "missing whitespace after maxval"));
        }
        s.pos += 1;
    }
    Ok(Header { binary, width, height, maxval, data_start: s.pos })
}

/// Decodes a P2 or P5 graymap.
pub fn decode_pgm<T: Real>(bytes: &[u8]) -> Result<ImageGrid<T>> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let mut samples = Vec::with_capacity(n);
    if h.binary {
        let depth = if h.maxval < 256 { 1 } else { 2 };
        let need = n * depth;
        let data = &bytes[h.data_start..];
        if data.len() < need {
            return Err(Error::format(
                h.data_start + data.len(),
                format!("raster truncated: need {need} bytes, found {}", data.len()),
            ));
        }
        for i in 0..n {
            let v = if depth == 1 { u32::from(data[i]) } else { u32::from(data[2 * i]) << 8 | u32::from(data[2 * i + 1]) };
            if v > h.maxval {
                return Err(Error::format(h.data_start + i * depth, format!("sample {v} exceeds maxval {}", h.maxval)));
            }
            samples.push(T::lit(f64::from(v)));
        }
    } else {
        let mut s = Scanner { bytes, pos: h.data_start };
        for _ in 0..n {
            s.skip_space();
            let at = s.pos;
            let v = s.number("sample")?;
            if v > h.maxval {
                return Err(Error::format(at, format!("sample {v} exceeds maxval {}", h.maxval)));
            }
            samples.push(T::lit(f64::from(v)));
        }
    }
    ImageGrid::new(h.width, h.height, samples)
}

fn quantize<T: Real>(v: T, maxval: u32) -> u32 {
    v.round().max(T::zero()).min(T::lit(f64::from(maxval))).to_u32().unwrap_or(0)
}

/// Encodes as PGM with values rounded to the nearest integer and clamped to
/// `[0, maxval]`.
pub fn encode_pgm<T: Real>(grid: &ImageGrid<T>, maxval: u32, binary: bool) -> Result<Vec<u8>> {
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parameter(format!("maxval must be in 1..=65535, got {maxval}")));
    }
    let magic = if binary { "P5" } else { "P2" };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", grid.width(), grid.height()).into_bytes();
    if binary {
        for &v in grid.samples() {
            let q = quantize(v, maxval);
            if maxval < 256 {
                out.push(q as u8);
            } else {
                out.extend_from_slice(&(q as u16).to_be_bytes());
            }
        }
    } else {
        for row in grid.samples().chunks(grid.width()) {
            let line: Vec<String> = row.iter().map(|&v| quantize(v, maxval).to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// `"LLSF"`, width and height as little-endian `u16`, then row-major
/// little-endian `f32` samples.
pub fn encode_llsf<T: Real>(grid: &ImageGrid<T>) -> Result<Vec<u8>> {
    let (w, h) = (grid.width(), grid.height());
    if w > usize::from(u16::MAX) || h > usize::from(u16::MAX) {
        return Err(Error::Parameter(format!("{w}x{h} does not fit the float dump header")));
    }
    let mut out = Vec::with_capacity(8 + 4 * w * h);
    out.extend_from_slice(LLSF_MAGIC);
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    for &v in grid.samples() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_llsf<T: Real>(bytes: &[u8]) -> Result<ImageGrid<T>> {
    if bytes.len() < 8 || &bytes[..4] != LLSF_MAGIC {
        return Err(Error::format(0, "not an LLSF float dump"));
    }
    let w = usize::from(u16::from_le_bytes([bytes[4], bytes[5]]));
    let h = usize::from(u16::from_le_bytes([bytes[6], bytes[7]]));
    let need = 8 + 4 * w * h;
    if bytes.len() < need {
        return Err(Error::format(bytes.len(), format!("float raster truncated: need {need} bytes")));
    }
    let samples =
        bytes[8..need].chunks_exact(4).map(|c| T::lit(f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))).collect();
    ImageGrid::new(w, h, samples)
}

fn decode_png<T: Real>(bytes: &[u8]) -> Result<ImageGrid<T>> {
    use image::{DynamicImage, ImageFormat};
    let img = image::load(Cursor::new(bytes), ImageFormat::Png).map_err(|e| Error::format(0, e.to_string()))?;
    let (w, h, samples): (u32, u32, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (b.width(), b.height(), b.into_raw().into_iter().map(f64::from).collect()),
        DynamicImage::ImageLuma16(b) => (b.width(), b.height(), b.into_raw().into_iter().map(f64::from).collect()),
        other => return Err(Error::format(0, format!("only grayscale PNG is supported, got {:?}", other.color()))),
    };
    ImageGrid::new(w as usize, h as usize, samples.into_iter().map(T::lit).collect())
}

fn encode_png<T: Real>(grid: &ImageGrid<T>, maxval: u32) -> Result<Vec<u8>> {
    use image::{ImageBuffer, ImageFormat, Luma};
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let mut out = Cursor::new(Vec::new());
    let res = if maxval < 256 {
        let raw: Vec<u8> = grid.samples().iter().map(|&v| quantize(v, maxval) as u8).collect();
        ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).unwrap().write_to(&mut out, ImageFormat::Png)
    } else {
        let raw: Vec<u16> = grid.samples().iter().map(|&v| quantize(v, maxval) as u16).collect();
        ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).unwrap().write_to(&mut out, ImageFormat::Png)
    };
    res.map_err(|e| Error::Parameter(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Decodes PGM, grayscale PNG or LLSF by content signature.
pub fn decode_image<T: Real>(bytes: &[u8]) -> Result<ImageGrid<T>> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(LLSF_MAGIC) {
        decode_llsf(bytes)
    } else {
        decode_pgm(bytes)
    }
}

pub fn load_image<T: Real>(path: &Path) -> Result<ImageGrid<T>> {
    let bytes = fs::read(path).map_err(|e| Error::format(0, format!("cannot read {}: {e}", path.display())))?;
    decode_image(&bytes)
}

/// Writes by extension: `.png`, `.llsf`, `.pgm` (binary) or `.ascii.pgm`.
pub fn save_image<T: Real>(path: &Path, grid: &ImageGrid<T>, maxval: u32) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_ascii_lowercase();
    let bytes = if name.ends_with(".png") {
        encode_png(grid, maxval)?
    } else if name.ends_with(".llsf") {
        encode_llsf(grid)?
    } else {
        encode_pgm(grid, maxval, !name.ends_with(".ascii.pgm"))?
    };
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_ascii() {
        let g: ImageGrid<f64> = decode_pgm(b"P2\n# tiny\n2 2\n255\n0 0\n0 0\n").unwrap();
        assert_eq!(g.samples(), &[0.0; 4]);
        assert_eq!(g.value_range(), (0.0, 0.0));
    }

    #[test]
    fn binary_sixteen_bit() {
        let mut bytes = b"P5 2 2 1000\n".to_vec();
        for v in [0u16, 999, 1000, 258] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        let g: ImageGrid<f64> = decode_pgm(&bytes).unwrap();
        assert_eq!(g.samples(), &[0.0, 999.0, 1000.0, 258.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        match decode_pgm::<f64>(b"P7\n2 2\n255\n") {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, 1);
                assert!(message.contains("P7"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode_pgm::<f64>(b"P5 2 2 255\n\x01\x02"), Err(Error::Format { offset: 13, .. })));
        assert!(matches!(decode_pgm::<f64>(b"P2 2 2 70000\n"), Err(Error::Format { .. })));
        assert!(matches!(decode_pgm::<f64>(b"P2 2 2 9\n1 2 3 10\n"), Err(Error::Format { offset: 15, .. })));
        assert!(matches!(decode_pgm::<f64>(b"P2 x"), Err(Error::Format { offset: 3, .. })));
    }

    #[test]
    fn write_rounds_and_clamps() {
        let g = ImageGrid::new(2, 2, vec![-3.0, 1.4, 1.6, 300.0]).unwrap();
        let bytes = encode_pgm(&g, 255, true).unwrap();
        let back: ImageGrid<f64> = decode_pgm(&bytes).unwrap();
        assert_eq!(back.samples(), &[0.0, 1.0, 2.0, 255.0]);
        let ascii = encode_pgm(&g, 255, false).unwrap();
        assert_eq!(decode_pgm::<f64>(&ascii).unwrap(), back);
    }

    #[test]
    fn float_dump_header() {
        let g = ImageGrid::new(3, 2, vec![0.5, -1.25, 2.0, 3.0, 4.0, 1e6]).unwrap();
        let bytes = encode_llsf(&g).unwrap();
        assert_eq!(&bytes[..8], b"LLSF\x03\x00\x02\x00");
        assert_eq!(bytes.len(), 8 + 24);
        assert_eq!(decode_image::<f64>(&bytes).unwrap(), g);
    }

    #[test]
    fn png_round_trip() {
        let g = ImageGrid::from_fn(5, 3, |x, y| (x * 40 + y) as f64).unwrap();
        let bytes = encode_png(&g, 255).unwrap();
        assert_eq!(decode_image::<f64>(&bytes).unwrap(), g);
        let bytes = encode_png(&g.map(|v| v * 200.0).unwrap(), 65535).unwrap();
        assert_eq!(decode_image::<f64>(&bytes).unwrap().get(4, 2), 162.0 * 200.0);
    }
}
