//! PFM codec (color "PF" only). The scale line's sign encodes payload
//! endianness (negative = little-endian); its magnitude is not applied.
//! Rows are stored bottom-first and flipped to top-first in memory.

use crate::error::{Error, Result};
use crate::panorama::Panorama;

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::parse(start, "unexpected end of header"));
    }
    std::str::from_utf8(&bytes[start..*pos]).map_err(|_| Error::parse(start, "non-ASCII header"))
}

/// Decodes a color PFM file.
pub fn read_pfm(bytes: &[u8]) -> Result<Panorama> {
    let mut pos = 0usize;
    let magic = token(bytes, &mut pos)?;
    match magic {
        "PF" => {}
        "Pf" => {
            return Err(Error::UnsupportedFormat(
                "grayscale PFM (\"Pf\") is not supported".into(),
            ))
        }
        other => return Err(Error::parse(0, format!("bad magic {other:?}"))),
    }
    let width: usize = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::parse(pos, "bad width"))?;
    let height: usize = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::parse(pos, "bad height"))?;
    let scale: f64 = token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::parse(pos, "bad scale"))?;
    if width == 0 || height == 0 {
        return Err(Error::parse(pos, "zero image dimension"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::parse(pos, "scale must be finite and nonzero"));
    }
    let little_endian = scale < 0.0;
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::parse(pos, "missing separator before payload"));
    }
    pos += 1;

    let need = width * height * 3 * 4;
    if bytes.len() - pos < need {
        return Err(Error::parse(bytes.len(), "truncated payload"));
    }
    let payload = &bytes[pos..pos + need];
    let mut pixels = vec![[0.0f64; 3]; width * height];
    for raster_row in 0..height {
        let row = height - 1 - raster_row; // bottom-first on disk
        for col in 0..width {
            let mut px = [0.0f64; 3];
            for (c, v) in px.iter_mut().enumerate() {
                let at = (raster_row * width + col) * 12 + c * 4;
                let raw: [u8; 4] = payload[at..at + 4].try_into().unwrap();
                let bits = if little_endian {
                    u32::from_le_bytes(raw)
                } else {
                    u32::from_be_bytes(raw)
                };
                let value = f32::from_bits(bits);
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::parse(
                        pos + at,
                        format!("payload value {value} is not finite nonnegative radiance"),
                    ));
                }
                *v = value as f64;
            }
            pixels[row * width + col] = px;
        }
    }
    Panorama::new(width, height, pixels)
}

/// Encodes a color PFM file (little-endian payload, scale -1.0).
pub fn write_pfm(p: &Panorama) -> Result<Vec<u8>> {
    let (width, height) = (p.width(), p.height());
    let mut out = Vec::with_capacity(width * height * 12 + 32);
    out.extend_from_slice(format!("PF\n{width} {height}\n-1.0\n").as_bytes());
    for raster_row in 0..height {
        let row = height - 1 - raster_row;
        for col in 0..width {
            for v in p.get(row, col) {
                let f = v as f32;
                if !f.is_finite() {
                    return Err(Error::invalid(format!("value {v} does not fit in an f32")));
                }
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
    }
    Ok(out)
}
