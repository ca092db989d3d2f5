//! Distortion-aware convolution sampling on equirectangular images: kernel
//! taps live on the tangent (gnomonic) plane of each pixel's direction, so a
//! filter covers the same solid angle at every latitude instead of shrinking
//! toward the poles.

use crate::error::{Error, Result};
use crate::panorama::Panorama;
use crate::sphere::check_panoramic_dims;
use std::f64::consts::PI;

/// Per-pixel k x k source coordinates for spherical convolution.
///
/// Grids at equal latitude are column translations of each other, so only
/// the reference grids at column 0 are stored; `sample` translates.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    width: usize,
    height: usize,
    k: usize,
    /// height * k * k reference (row, col) pairs, built at column 0.
    reference: Vec<(f64, f64)>,
}

impl KernelGrid {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Source coordinates of kernel tap (a, b) for output pixel (row, col).
    pub fn sample(&self, row: usize, col: usize, a: usize, b: usize) -> (f64, f64) {
        let (r, c) = self.reference[(row * self.k + a) * self.k + b];
        let mut c = (c + col as f64).rem_euclid(self.width as f64);
        if c >= self.width as f64 {
            c = 0.0;
        }
        (r, c)
    }

    fn reference_sample(&self, row: usize, a: usize, b: usize) -> (f64, f64) {
        self.reference[(row * self.k + a) * self.k + b]
    }
}

/// Builds the gnomonic sampling grid: tangent offsets are tan of multiples
/// of the equator pixel pitch 2*pi/width, projected back to the sphere.
pub fn kernel_sample_grid(width: usize, height: usize, k: usize) -> Result<KernelGrid> {
    check_panoramic_dims(width, height)?;
    if k == 0 || k % 2 == 0 {
        return Err(Error::invalid(format!("kernel size must be odd, got {k}")));
    }
    let step = 2.0 * PI / width as f64;
    let h = k / 2;
    if h as f64 * step >= PI / 2.0 {
        return Err(Error::invalid(format!(
            "kernel size {k} spans beyond the tangent hemisphere at width {width}"
        )));
    }
    let mut reference = Vec::with_capacity(height * k * k);
    for row in 0..height {
        let lat = PI / 2.0 - PI * (row as f64 + 0.5) / height as f64;
        let lon = 2.0 * PI * 0.5 / width as f64 - PI;
        let u = [lat.cos() * lon.sin(), lat.sin(), lat.cos() * lon.cos()];
        let east = [lon.cos(), 0.0, -lon.sin()];
        let north = [
            -lat.sin() * lon.sin(),
            lat.cos(),
            -lat.sin() * lon.cos(),
        ];
        for a in 0..k {
            for b in 0..k {
                if a == h && b == h {
                    reference.push((row as f64, 0.0));
                    continue;
                }
                let x_t = ((b as f64 - h as f64) * step).tan();
                let y_t = ((h as f64 - a as f64) * step).tan();
                let p = [
                    u[0] + x_t * east[0] + y_t * north[0],
                    u[1] + x_t * east[1] + y_t * north[1],
                    u[2] + x_t * east[2] + y_t * north[2],
                ];
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let lat_s = (p[1] / norm).asin();
                let lon_s = (p[0] / norm).atan2(p[2] / norm);
                let r = ((PI / 2.0 - lat_s) * height as f64 / PI - 0.5)
                    .clamp(0.0, (height - 1) as f64);
                let c = ((lon_s + PI) * width as f64 / (2.0 * PI) - 0.5)
                    .rem_euclid(width as f64);
                reference.push((r, c));
            }
        }
    }
    Ok(KernelGrid {
        width,
        height,
        k,
        reference,
    })
}

/// Bilinear lookup with row clamping and longitude wrapping.
pub fn sample_bilinear(p: &Panorama, row: f64, col: f64) -> [f64; 3] {
    let h = p.height();
    let w = p.width();
    let r = row.clamp(0.0, (h - 1) as f64);
    let mut c = col.rem_euclid(w as f64);
    if c >= w as f64 {
        c = 0.0;
    }
    let r0 = r.floor();
    let c0 = c.floor();
    let fr = r - r0;
    let fc = c - c0;
    let r0 = r0 as usize;
    let c0 = (c0 as usize).min(w - 1);
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1) % w;
    blend(p, r0, r1, c0, c1, fr, fc)
}

fn blend(
    p: &Panorama,
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
    fr: f64,
    fc: f64,
) -> [f64; 3] {
    // exact passthrough on integer coordinates
    if fr == 0.0 && fc == 0.0 {
        return p.get(r0, c0);
    }
    let p00 = p.get(r0, c0);
    let p01 = p.get(r0, c1);
    let p10 = p.get(r1, c0);
    let p11 = p.get(r1, c1);
    let mut out = [0.0; 3];
    for ch in 0..3 {
        out[ch] = (1.0 - fr) * ((1.0 - fc) * p00[ch] + fc * p01[ch])
            + fr * ((1.0 - fc) * p10[ch] + fc * p11[ch]);
    }
    out
}

/// Convolves all three channels: output[r][c] = sum over taps of
/// weights[a][b] * bilinear(p, grid sample). Outputs may be negative, so the
/// result is a raw pixel buffer rather than a Panorama.
///
/// Column translation happens on integer indices so that an integer
/// longitude roll of the input rolls the output bit-for-bit.
pub fn spherical_convolve(
    p: &Panorama,
    weights: &[f64],
    grid: &KernelGrid,
) -> Result<Vec<[f64; 3]>> {
    if grid.width != p.width() || grid.height != p.height() {
        return Err(Error::invalid(format!(
            "grid is {}x{}, image is {}x{}",
            grid.width,
            grid.height,
            p.width(),
            p.height()
        )));
    }
    let k = grid.k;
    if weights.len() != k * k {
        return Err(Error::invalid(format!(
            "kernel of size {k} needs {} weights, got {}",
            k * k,
            weights.len()
        )));
    }
    let (w, h) = (p.width(), p.height());

    struct Tap {
        weight: f64,
        r0: usize,
        r1: usize,
        c_lo: usize,
        fr: f64,
        fc: f64,
    }
    // per row, the taps with nonzero weight, pre-resolved at column 0
    let mut row_taps: Vec<Vec<Tap>> = Vec::with_capacity(h);
    for row in 0..h {
        let mut taps = Vec::new();
        for a in 0..k {
            for b in 0..k {
                let weight = weights[a * k + b];
                if weight == 0.0 {
                    continue;
                }
                let (r, c) = grid.reference_sample(row, a, b);
                let r0f = r.floor();
                let c0f = c.floor();
                taps.push(Tap {
                    weight,
                    r0: r0f as usize,
                    r1: ((r0f as usize) + 1).min(h - 1),
                    c_lo: (c0f as usize).min(w - 1),
                    fr: r - r0f,
                    fc: c - c0f,
                });
            }
        }
        row_taps.push(taps);
    }

    let mut out = vec![[0.0; 3]; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = [0.0; 3];
            for tap in &row_taps[row] {
                let c0 = (tap.c_lo + col) % w;
                let c1 = (c0 + 1) % w;
                let v = blend(p, tap.r0, tap.r1, c0, c1, tap.fr, tap.fc);
                for ch in 0..3 {
                    acc[ch] += tap.weight * v[ch];
                }
            }
            out[row * w + col] = acc;
        }
    }
    Ok(out)
}
