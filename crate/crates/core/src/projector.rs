//! Renders illumination parameters back onto a panorama as a sum of
//! spherical Gaussian lobes over the anchor directions plus ambient.

use crate::decompose::{decompose, IlluminationParams};
use crate::error::{Error, Result};
use crate::panorama::Panorama;
use crate::sphere::{pixel_to_direction, AnchorSet, Direction};

#[derive(Debug, Clone, Copy)]
pub struct GaussianMapConfig {
    /// Lobe angular size; smaller is tighter.
    pub angular_size: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for GaussianMapConfig {
    fn default() -> Self {
        GaussianMapConfig {
            angular_size: 0.0025,
            width: 256,
            height: 128,
        }
    }
}

impl GaussianMapConfig {
    fn validate(&self) -> Result<()> {
        if !(self.angular_size > 0.0) || !self.angular_size.is_finite() {
            return Err(Error::invalid(format!(
                "angular size must be positive and finite, got {}",
                self.angular_size
            )));
        }
        if self.width != 2 * self.height || self.height == 0 {
            return Err(Error::invalid(format!(
                "output must be a 2:1 panorama, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Evaluates the Gaussian map at one direction:
/// per channel, sum_i P[c][i] * I_c * exp((d_i . u - 1) / s) + A_c.
pub fn gaussian_value(
    params: &IlluminationParams,
    anchors: &AnchorSet,
    angular_size: f64,
    u: &Direction,
) -> [f64; 3] {
    let mut out = params.ambient;
    for (i, d) in anchors.directions().iter().enumerate() {
        let lobe = ((d.dot(u) - 1.0) / angular_size).exp();
        for c in 0..3 {
            let coeff = params.distribution[c][i] * params.intensity[c];
            if coeff != 0.0 {
                out[c] += coeff * lobe;
            }
        }
    }
    out
}

pub fn render_gaussian_map(
    params: &IlluminationParams,
    anchors: &AnchorSet,
    cfg: &GaussianMapConfig,
) -> Result<Panorama> {
    cfg.validate()?;
    params.validate()?;
    if params.n != anchors.n() {
        return Err(Error::invalid(format!(
            "params describe {} anchors, set has {}",
            params.n,
            anchors.n()
        )));
    }
    let mut pixels = Vec::with_capacity(cfg.width * cfg.height);
    for row in 0..cfg.height {
        for col in 0..cfg.width {
            let u = pixel_to_direction(row as f64, col as f64, cfg.width, cfg.height)?;
            pixels.push(gaussian_value(params, anchors, cfg.angular_size, &u));
        }
    }
    Panorama::new(cfg.width, cfg.height, pixels)
}

/// Recovers illumination parameters from a rendered map. Solid-angle
/// weighting is always on here: without it, equirect oversampling near the
/// poles inflates polar lobes by roughly 1/cos(latitude).
pub fn reconstruct_params(
    p: &Panorama,
    anchors: &AnchorSet,
    fraction: f64,
) -> Result<IlluminationParams> {
    decompose(p, anchors, fraction, true)
}
