//! Direction algebra, the golden-spiral anchor lattice, geodesic cost
//! matrices, and the equirectangular pixel mapping.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Unit vector in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Direction {
    /// Builds a direction from components, tolerating up to 1e-6 deviation
    /// from unit norm (the stored vector is renormalized).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Direction> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "direction ({x}, {y}, {z}) is not unit length (norm {norm})"
            )));
        }
        Ok(Direction {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Geodesic (great-circle) distance in radians, in [0, pi].
pub fn geodesic_distance(a: &Direction, b: &Direction) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// N quasi-uniform anchor directions on the unit sphere.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    directions: Vec<Direction>,
}

impl AnchorSet {
    pub fn n(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn get(&self, i: usize) -> &Direction {
        &self.directions[i]
    }
}

#[cfg(test)]
pub(crate) fn anchor_set_from_directions(directions: Vec<Direction>) -> AnchorSet {
    AnchorSet { directions }
}

/// Generates `n` anchors on the golden-spiral lattice:
/// z_k = 1 - (2k+1)/n, azimuth_k = k * pi * (3 - sqrt(5)).
pub fn generate_anchors(n: usize) -> Result<AnchorSet> {
    if n == 0 {
        return Err(Error::invalid("anchor count must be at least 1"));
    }
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    let mut directions = Vec::with_capacity(n);
    for k in 0..n {
        let z = 1.0 - (2 * k + 1) as f64 / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let az = k as f64 * golden;
        directions.push(Direction {
            x: r * az.cos(),
            y: r * az.sin(),
            z,
        });
    }
    Ok(AnchorSet { directions })
}

/// Pairwise geodesic distances between anchors, in radians.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row-major backing slice.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Builds a matrix from explicit row-major entries.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<CostMatrix> {
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "cost matrix needs {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("cost matrix entries must be finite and nonnegative"));
        }
        Ok(CostMatrix { n, values })
    }

    /// Extracts the submatrix with the given row and column index sets.
    pub(crate) fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

pub fn cost_matrix(anchors: &AnchorSet) -> CostMatrix {
    let n = anchors.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = geodesic_distance(anchors.get(i), anchors.get(j));
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    CostMatrix { n, values }
}

pub(crate) fn check_panoramic_dims(width: usize, height: usize) -> Result<()> {
    if height == 0 || width != 2 * height {
        return Err(Error::invalid(format!(
            "equirectangular image must be 2:1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Direction of the (possibly fractional) pixel coordinate under the
/// equirectangular convention: row 0 at the north pole edge, longitude 0 at
/// the image center, y axis up.
pub fn pixel_to_direction(row: f64, col: f64, width: usize, height: usize) -> Result<Direction> {
    check_panoramic_dims(width, height)?;
    if !(0.0..height as f64).contains(&row) || !(0.0..width as f64).contains(&col) {
        return Err(Error::invalid(format!(
            "pixel ({row}, {col}) outside {width}x{height} image"
        )));
    }
    let lat = PI / 2.0 - PI * (row + 0.5) / height as f64;
    let lon = 2.0 * PI * (col + 0.5) / width as f64 - PI;
    Ok(Direction {
        x: lat.cos() * lon.sin(),
        y: lat.sin(),
        z: lat.cos() * lon.cos(),
    })
}

/// Inverse of `pixel_to_direction`; the column wraps modulo width.
pub fn direction_to_pixel(d: &Direction, width: usize, height: usize) -> Result<(f64, f64)> {
    check_panoramic_dims(width, height)?;
    let lat = d.y.clamp(-1.0, 1.0).asin();
    let lon = d.x.atan2(d.z);
    let row = (PI / 2.0 - lat) * height as f64 / PI - 0.5;
    // rem_euclid of a value just below zero can round up to exactly `width`
    let mut col = ((lon + PI) * width as f64 / (2.0 * PI) - 0.5).rem_euclid(width as f64);
    if col >= width as f64 {
        col = 0.0;
    }
    Ok((row, col))
}

/// Per-row pixel solid angles in steradians, proportional to the cosine of
/// the row's latitude and normalized so all pixels sum to 4*pi.
pub fn solid_angle_weights(width: usize, height: usize) -> Result<Vec<f64>> {
    check_panoramic_dims(width, height)?;
    let mut weights: Vec<f64> = (0..height)
        .map(|r| (PI / 2.0 - PI * (r as f64 + 0.5) / height as f64).cos())
        .collect();
    let total: f64 = weights.iter().sum();
    let scale = 4.0 * PI / (width as f64 * total);
    for w in &mut weights {
        *w *= scale;
    }
    Ok(weights)
}
