//! Decomposition of an HDR panorama into a light distribution over anchor
//! directions, per-channel light intensity, and an ambient term.

use crate::error::{Error, Result};
use crate::panorama::Panorama;
use crate::sphere::{pixel_to_direction, solid_angle_weights, AnchorSet};

/// Rec. 709 luminance weights used to rank pixels for the light mask.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

pub fn luminance(px: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2]
}

/// Boolean selection of the brightest pixels of a panorama.
#[derive(Debug, Clone)]
pub struct LightMask {
    width: usize,
    height: usize,
    selected: Vec<bool>,
}

impl LightMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_selected(&self, row: usize, col: usize) -> bool {
        self.selected[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }
}

/// Marks the ceil(fraction * pixels) brightest pixels by luminance; ties are
/// broken toward the earliest (row, col) in scan order.
pub fn light_mask(p: &Panorama, fraction: f64) -> Result<LightMask> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "fraction must be in (0, 1), got {fraction}"
        )));
    }
    let total = p.width() * p.height();
    let count = (fraction * total as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..total).collect();
    let lumas: Vec<f64> = p.pixels().iter().map(|&px| luminance(px)).collect();
    order.sort_by(|&a, &b| lumas[b].total_cmp(&lumas[a]).then(a.cmp(&b)));
    let mut selected = vec![false; total];
    for &i in order.iter().take(count) {
        selected[i] = true;
    }
    Ok(LightMask {
        width: p.width(),
        height: p.height(),
        selected,
    })
}

/// Light distribution, intensity, and ambient term of a panorama.
#[derive(Debug, Clone)]
pub struct IlluminationParams {
    pub n: usize,
    /// Per channel, N nonnegative weights summing to 1.
    pub distribution: [Vec<f64>; 3],
    pub intensity: [f64; 3],
    pub ambient: [f64; 3],
}

impl IlluminationParams {
    /// Validates the simplex and nonnegativity invariants.
    pub fn validate(&self) -> Result<()> {
        for c in 0..3 {
            if self.distribution[c].len() != self.n {
                return Err(Error::invalid(format!(
                    "channel {c} distribution has {} entries, expected {}",
                    self.distribution[c].len(),
                    self.n
                )));
            }
            if !self.intensity[c].is_finite()
                || self.intensity[c] < 0.0
                || !self.ambient[c].is_finite()
                || self.ambient[c] < 0.0
            {
                return Err(Error::invalid("intensity and ambient must be finite and nonnegative"));
            }
            let mut sum = 0.0;
            for &w in &self.distribution[c] {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::invalid("distribution weights must be finite and nonnegative"));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "channel {c} distribution sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

fn nearest_anchor_indices(p: &Panorama, mask: &LightMask, anchors: &AnchorSet) -> Result<Vec<(usize, usize)>> {
    // (pixel index, anchor index) for every masked pixel, in scan order;
    // minimal geodesic distance = maximal dot product, ties to lowest index
    let mut assignment = Vec::new();
    for row in 0..p.height() {
        for col in 0..p.width() {
            if !mask.is_selected(row, col) {
                continue;
            }
            let dir = pixel_to_direction(row as f64, col as f64, p.width(), p.height())?;
            let mut best = 0usize;
            let mut best_dot = f64::NEG_INFINITY;
            for (i, a) in anchors.directions().iter().enumerate() {
                let d = dir.dot(a);
                if d > best_dot {
                    best_dot = d;
                    best = i;
                }
            }
            assignment.push((row * p.width() + col, best));
        }
    }
    Ok(assignment)
}

fn bin_energy(
    p: &Panorama,
    mask: &LightMask,
    anchors: &AnchorSet,
    pixel_weights: Option<&[f64]>,
) -> Result<[Vec<f64>; 3]> {
    if mask.width() != p.width() || mask.height() != p.height() {
        return Err(Error::invalid("mask dimensions do not match the panorama"));
    }
    let n = anchors.n();
    let mut bins = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (pixel, anchor) in nearest_anchor_indices(p, mask, anchors)? {
        let px = p.pixels()[pixel];
        let w = pixel_weights.map_or(1.0, |ws| ws[pixel / p.width()]);
        for c in 0..3 {
            bins[c][anchor] += px[c] * w;
        }
    }
    Ok(bins)
}

/// Sums masked pixel values onto their nearest anchors (unweighted).
pub fn bin_to_anchors(p: &Panorama, mask: &LightMask, anchors: &AnchorSet) -> Result<[Vec<f64>; 3]> {
    bin_energy(p, mask, anchors, None)
}

/// Decomposes a 2:1 panorama into distribution, intensity, and ambient.
/// With `weighted`, masked pixel values are multiplied by their solid angle.
pub fn decompose(
    p: &Panorama,
    anchors: &AnchorSet,
    fraction: f64,
    weighted: bool,
) -> Result<IlluminationParams> {
    if !p.is_panoramic() {
        return Err(Error::invalid(format!(
            "decompose requires a 2:1 panorama, got {}x{}",
            p.width(),
            p.height()
        )));
    }
    let mask = light_mask(p, fraction)?;
    let weights;
    let bins = if weighted {
        weights = solid_angle_weights(p.width(), p.height())?;
        bin_energy(p, &mask, anchors, Some(&weights))?
    } else {
        bin_energy(p, &mask, anchors, None)?
    };

    let n = anchors.n();
    let mut distribution = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut intensity = [0.0; 3];
    for c in 0..3 {
        // intensity is the bin sum itself so the energy-conservation
        // identity holds exactly, not just to roundoff
        intensity[c] = bins[c].iter().sum();
        if intensity[c] > 0.0 {
            for (d, &b) in distribution[c].iter_mut().zip(&bins[c]) {
                *d = b / intensity[c];
            }
        } else {
            distribution[c] = vec![1.0 / n as f64; n];
        }
    }

    let mut ambient = [0.0; 3];
    let mut unmasked = 0usize;
    for row in 0..p.height() {
        for col in 0..p.width() {
            if mask.is_selected(row, col) {
                continue;
            }
            let px = p.get(row, col);
            for c in 0..3 {
                ambient[c] += px[c];
            }
            unmasked += 1;
        }
    }
    if unmasked > 0 {
        for a in &mut ambient {
            *a /= unmasked as f64;
        }
    }

    Ok(IlluminationParams {
        n,
        distribution,
        intensity,
        ambient,
    })
}
