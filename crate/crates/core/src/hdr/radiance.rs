//! Radiance RGBE codec. A pixel is stored as four bytes (r, g, b, e) and
//! decodes to channel = (mantissa/256) * 2^(e-128). Scanlines are either
//! flat RGBE quadruples (with old-style repeat markers) or the new-style
//! per-component run-length encoding.

use crate::error::{Error, Result};
use crate::panorama::Panorama;

const MIN_RLE_WIDTH: usize = 8;
const MAX_RLE_WIDTH: usize = 32767;

fn decode_rgbe(q: [u8; 4]) -> [f64; 3] {
    let scale = ((q[3] as i32) - 128) as f64;
    let f = scale.exp2() / 256.0;
    [q[0] as f64 * f, q[1] as f64 * f, q[2] as f64 * f]
}

fn encode_rgbe(p: [f64; 3]) -> Result<[u8; 4]> {
    let max = p[0].max(p[1]).max(p[2]);
    if max <= 0.0 {
        return Ok([0, 0, 0, 0]);
    }
    let mut e = max.log2().floor() as i32 + 1;
    let mantissas = loop {
        let denom = (e as f64).exp2();
        let m: Vec<f64> = p.iter().map(|v| (v * 256.0 / denom).round()).collect();
        if m.iter().any(|&x| x > 255.0) {
            e += 1;
        } else {
            break m;
        }
    };
    let biased = e + 128;
    if biased > 255 {
        return Err(Error::invalid(format!(
            "radiance value {max} too large for RGBE encoding"
        )));
    }
    if biased < 0 {
        return Ok([0, 0, 0, 0]);
    }
    Ok([
        mantissas[0] as u8,
        mantissas[1] as u8,
        mantissas[2] as u8,
        biased as u8,
    ])
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        let rest = &self.data[start..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(start, "unterminated header line"))?;
        self.pos = start + end + 1;
        std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::parse(start, "header line is not valid UTF-8"))
    }

    fn byte(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::parse(self.pos, "truncated scanline"))?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::parse(self.pos, "truncated scanline"));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Decodes a Radiance HDR file.
pub fn read_radiance_hdr(bytes: &[u8]) -> Result<Panorama> {
    let mut r = Reader {
        data: bytes,
        pos: 0,
    };
    let magic = r.line()?;
    if magic != "#?RADIANCE" && magic != "#?RGBE" {
        return Err(Error::parse(0, format!("bad magic line {magic:?}")));
    }
    let mut format_seen = false;
    loop {
        let at = r.pos;
        let line = r.line()?;
        if line.is_empty() {
            break;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(value) = line.strip_prefix("FORMAT=") {
            if value != "32-bit_rle_rgbe" {
                return Err(Error::parse(at, format!("unsupported FORMAT {value:?}")));
            }
            format_seen = true;
        }
        // other header variables (EXPOSURE, ...) are ignored
    }
    if !format_seen {
        return Err(Error::parse(r.pos, "missing FORMAT=32-bit_rle_rgbe"));
    }
    let res_at = r.pos;
    let res = r.line()?;
    let parts: Vec<&str> = res.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "-Y" || parts[2] != "+X" {
        return Err(Error::parse(
            res_at,
            format!("unsupported pixel order {res:?} (only \"-Y h +X w\")"),
        ));
    }
    let height: usize = parts[1]
        .parse()
        .map_err(|_| Error::parse(res_at, "bad height"))?;
    let width: usize = parts[3]
        .parse()
        .map_err(|_| Error::parse(res_at, "bad width"))?;
    if width == 0 || height == 0 {
        return Err(Error::parse(res_at, "zero image dimension"));
    }

    let mut pixels = Vec::with_capacity(width * height);
    let mut scanline = vec![[0u8; 4]; width];
    for _ in 0..height {
        read_scanline(&mut r, width, &mut scanline)?;
        pixels.extend(scanline.iter().map(|&q| decode_rgbe(q)));
    }
    Panorama::new(width, height, pixels)
}

fn read_scanline(r: &mut Reader, width: usize, out: &mut [[u8; 4]]) -> Result<()> {
    let at = r.pos;
    let head = r.take(4)?;
    let new_style = head[0] == 2
        && head[1] == 2
        && ((head[2] as usize) << 8 | head[3] as usize) == width
        && head[2] < 128;
    if new_style {
        if !(MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&width) {
            return Err(Error::parse(at, "RLE scanline width out of range"));
        }
        for comp in 0..4 {
            let mut filled = 0usize;
            while filled < width {
                let code = r.byte()?;
                if code > 128 {
                    let run = (code - 128) as usize;
                    if filled + run > width {
                        return Err(Error::parse(r.pos - 1, "RLE run overflows scanline"));
                    }
                    let value = r.byte()?;
                    for q in &mut out[filled..filled + run] {
                        q[comp] = value;
                    }
                    filled += run;
                } else {
                    let count = code as usize;
                    if count == 0 {
                        return Err(Error::parse(r.pos - 1, "zero-length RLE literal"));
                    }
                    if filled + count > width {
                        return Err(Error::parse(r.pos - 1, "RLE literal overflows scanline"));
                    }
                    let bytes = r.take(count)?;
                    for (q, &b) in out[filled..filled + count].iter_mut().zip(bytes) {
                        q[comp] = b;
                    }
                    filled += count;
                }
            }
        }
        Ok(())
    } else {
        // flat quadruples; (1,1,1,n) repeats the previous pixel n times,
        // consecutive markers shift the count by 8 bits each
        let mut quad = [head[0], head[1], head[2], head[3]];
        let mut filled = 0usize;
        let mut shift = 0u32;
        loop {
            if quad[0] == 1 && quad[1] == 1 && quad[2] == 1 {
                if filled == 0 {
                    return Err(Error::parse(r.pos - 4, "repeat marker before any pixel"));
                }
                let run = (quad[3] as usize) << shift;
                if filled + run > width {
                    return Err(Error::parse(r.pos - 4, "repeat run overflows scanline"));
                }
                let prev = out[filled - 1];
                for q in &mut out[filled..filled + run] {
                    *q = prev;
                }
                filled += run;
                shift += 8;
            } else {
                out[filled] = quad;
                filled += 1;
                shift = 0;
            }
            if filled == width {
                return Ok(());
            }
            let next = r.take(4)?;
            quad = [next[0], next[1], next[2], next[3]];
        }
    }
}

/// Encodes a Radiance HDR file (new-style RLE when the width allows it).
pub fn write_radiance_hdr(p: &Panorama) -> Result<Vec<u8>> {
    let (width, height) = (p.width(), p.height());
    let mut out = Vec::with_capacity(width * height * 4 + 64);
    out.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {height} +X {width}\n").as_bytes());

    let rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&width);
    let mut quads = vec![[0u8; 4]; width];
    for row in 0..height {
        for col in 0..width {
            quads[col] = encode_rgbe(p.get(row, col))?;
        }
        if rle {
            out.extend_from_slice(&[2, 2, (width >> 8) as u8, (width & 0xff) as u8]);
            for comp in 0..4 {
                write_rle_component(&quads, comp, &mut out);
            }
        } else {
            for q in &quads {
                out.extend_from_slice(q);
            }
        }
    }
    Ok(out)
}

fn write_rle_component(quads: &[[u8; 4]], comp: usize, out: &mut Vec<u8>) {
    const MIN_RUN: usize = 4;
    let w = quads.len();
    let byte_at = |i: usize| quads[i][comp];
    let mut pos = 0usize;
    while pos < w {
        // locate the next run of at least MIN_RUN equal bytes
        let mut run_start = pos;
        let mut run_len = 0usize;
        while run_start < w {
            run_len = 1;
            while run_start + run_len < w
                && run_len < 127
                && byte_at(run_start + run_len) == byte_at(run_start)
            {
                run_len += 1;
            }
            if run_len >= MIN_RUN {
                break;
            }
            run_start += run_len;
        }
        if run_start >= w {
            run_len = 0;
        }
        // literals up to the run
        let mut lit = pos;
        while lit < run_start.min(w) {
            let chunk = (run_start.min(w) - lit).min(128);
            out.push(chunk as u8);
            for i in lit..lit + chunk {
                out.push(byte_at(i));
            }
            lit += chunk;
        }
        pos = run_start.min(w);
        if run_len >= MIN_RUN {
            out.push(128 + run_len as u8);
            out.push(byte_at(run_start));
            pos += run_len;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_unit_white() {
        assert_eq!(decode_rgbe([128, 128, 128, 129]), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn decode_zero() {
        assert_eq!(decode_rgbe([0, 0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn encode_unit_white() {
        assert_eq!(encode_rgbe([1.0, 1.0, 1.0]).unwrap(), [128, 128, 128, 129]);
    }

    #[test]
    fn encode_black() {
        assert_eq!(encode_rgbe([0.0, 0.0, 0.0]).unwrap(), [0, 0, 0, 0]);
    }

    #[test]
    fn quantization_bounded_by_pixel_max() {
        // per-channel absolute error is at most max_channel/256
        let cases = [
            [1.0, 0.25, 0.003],
            [1e4, 1.0, 1e-4],
            [7.3, 7.2, 7.1],
            [1e-4, 2e-4, 1.7e-4],
        ];
        for p in cases {
            let d = decode_rgbe(encode_rgbe(p).unwrap());
            let max = p[0].max(p[1]).max(p[2]);
            for c in 0..3 {
                assert!(
                    (d[c] - p[c]).abs() <= max / 256.0 * (1.0 + 1e-12),
                    "{p:?} -> {d:?}"
                );
            }
        }
    }

    #[test]
    fn roundtrip_small_image() {
        let pixels = vec![
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [123.0, 0.5, 1e-3],
            [9.0, 9.0, 9.0],
            [1e4, 1e4, 1e4],
            [0.1, 0.2, 0.3],
        ];
        let p = Panorama::new(3, 2, pixels).unwrap();
        let bytes = write_radiance_hdr(&p).unwrap();
        let q = read_radiance_hdr(&bytes).unwrap();
        assert_eq!(q.width(), 3);
        assert_eq!(q.height(), 2);
        for (a, b) in p.pixels().iter().zip(q.pixels()) {
            let max = a[0].max(a[1]).max(a[2]);
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= max / 256.0 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn roundtrip_rle_width() {
        // width 16 triggers the RLE path; constant rows compress to runs
        let mut pixels = vec![[2.0, 4.0, 8.0]; 16 * 4];
        pixels[20] = [100.0, 0.0, 1.0];
        let p = Panorama::new(16, 4, pixels).unwrap();
        let bytes = write_radiance_hdr(&p).unwrap();
        let q = read_radiance_hdr(&bytes).unwrap();
        for (a, b) in p.pixels().iter().zip(q.pixels()) {
            let max = a[0].max(a[1]).max(a[2]);
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= max / 256.0 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let err = read_radiance_hdr(b"#?NOPE\n\n-Y 1 +X 1\n\0\0\0\0").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 0),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn unsupported_pixel_order_rejected() {
        let bytes = b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n+Y 1 +X 1\n\0\0\0\0";
        assert!(matches!(
            read_radiance_hdr(bytes),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn truncated_scanline_rejected() {
        let bytes = b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 2 +X 2\n\0\0\0\0";
        assert!(matches!(
            read_radiance_hdr(bytes),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn old_style_repeat_marker() {
        // flat 4x1 scanline: one pixel then (1,1,1,3) repeating it 3 times
        let mut bytes = b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 4\n".to_vec();
        bytes.extend_from_slice(&[128, 64, 32, 129, 1, 1, 1, 3]);
        let p = read_radiance_hdr(&bytes).unwrap();
        for col in 0..4 {
            assert_eq!(p.get(0, col), decode_rgbe([128, 64, 32, 129]));
        }
    }
}
