//! 16-bit binary PGM (P5) frames, linear map [0, 1] → [0, 65535].

use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gray16 {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u16>,
}

pub fn quantize(v: f64) -> u16 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

pub fn dequantize(v: u16) -> f64 {
    v as f64 / 65535.0
}

/// `pixels` is row-major, `height × width`.
pub fn encode(width: usize, height: usize, pixels: &[f64]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for &v in pixels {
        out.extend_from_slice(&quantize(v).to_be_bytes());
    }
    out
}

pub fn write(path: &Path, width: usize, height: usize, pixels: &[f64]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(width, height, pixels))
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err("truncated PGM header".into());
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<usize, String> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad PGM header field at byte {pos}"))
}

pub fn decode(bytes: &[u8]) -> Result<Gray16, String> {
    let mut pos = 0;
    if token(bytes, &mut pos)? != b"P5" {
        return Err("not a binary PGM".into());
    }
    let width = number(bytes, &mut pos)?;
    let height = number(bytes, &mut pos)?;
    let maxval = number(bytes, &mut pos)?;
    if maxval != 65535 {
        return Err(format!("expected 16-bit PGM, maxval {maxval}"));
    }
    // exactly one whitespace byte separates header and raster
    pos += 1;
    let need = width * height * 2;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| format!("PGM raster truncated: need {need} bytes at offset {pos}"))?;
    let pixels = raster
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok(Gray16 {
        width,
        height,
        pixels,
    })
}

pub fn read(path: &Path) -> Result<Gray16, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact_on_quantized_values() {
        let px: Vec<f64> = (0..12).map(|i| i as f64 / 11.0 - 0.1).collect();
        let img = decode(&encode(4, 3, &px)).unwrap();
        assert_eq!((img.width, img.height), (4, 3));
        let want: Vec<u16> = px.iter().map(|&v| quantize(v)).collect();
        assert_eq!(img.pixels, want);
        assert_eq!(img.pixels[0], 0);
        let again: Vec<f64> = img.pixels.iter().map(|&v| dequantize(v)).collect();
        assert_eq!(decode(&encode(4, 3, &again)).unwrap(), img);
    }

    #[test]
    fn endpoints_and_truncation() {
        assert_eq!(quantize(1.0), 65535);
        assert_eq!(quantize(2.0), 65535);
        assert_eq!(quantize(0.5), 32768);
        let mut b = encode(2, 2, &[0.0; 4]);
        b.pop();
        assert!(decode(&b).is_err());
        assert!(decode(b"P2\n1 1\n65535\n\0\0").is_err());
    }
}
