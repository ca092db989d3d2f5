use crate::error::{Error, Result};

/// Linear-RGB radiance image, row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Panorama {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl Panorama {
    /// Builds an image from row-major pixels; any dimensions are accepted
    /// (codecs handle general images), values must be finite and nonnegative.
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Panorama> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        for p in &pixels {
            for &v in p {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "pixel values must be finite and nonnegative, got {v}"
                    )));
                }
            }
        }
        Ok(Panorama {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Panorama> {
        Panorama::new(width, height, vec![[0.0; 3]; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_panoramic(&self) -> bool {
        self.width == 2 * self.height
    }

    pub fn get(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}
