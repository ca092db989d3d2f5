//! Image comparison metrics: RMSE, scale-invariant RMSE, per-pixel RGB
//! angular error, and a whole-image cosine loss.

use crate::error::{Error, Result};
use crate::panorama::Panorama;
use std::f64::consts::PI;

fn check_dims(x: &Panorama, y: &Panorama) -> Result<()> {
    if x.width() != y.width() || x.height() != y.height() {
        return Err(Error::invalid(format!(
            "image sizes differ: {}x{} vs {}x{}",
            x.width(),
            y.width(),
            x.height(),
            y.height()
        )));
    }
    Ok(())
}

pub fn rmse(x: &Panorama, y: &Panorama) -> Result<f64> {
    check_dims(x, y)?;
    let mut acc = 0.0;
    for (a, b) in x.pixels().iter().zip(y.pixels()) {
        for c in 0..3 {
            let d = a[c] - b[c];
            acc += d * d;
        }
    }
    Ok((acc / (3 * x.pixels().len()) as f64).sqrt())
}

/// RMSE after fitting one global least-squares scale to the first argument:
/// alpha = <x,y>/<x,x>, then rmse(alpha*x, y).
pub fn si_rmse(x: &Panorama, y: &Panorama) -> Result<f64> {
    check_dims(x, y)?;
    let mut xx = 0.0;
    let mut xy = 0.0;
    for (a, b) in x.pixels().iter().zip(y.pixels()) {
        for c in 0..3 {
            xx += a[c] * a[c];
            xy += a[c] * b[c];
        }
    }
    if xx <= 0.0 {
        return Err(Error::DegenerateInput(
            "si_rmse needs a nonzero first image to fit a scale".into(),
        ));
    }
    let alpha = xy / xx;
    let mut acc = 0.0;
    for (a, b) in x.pixels().iter().zip(y.pixels()) {
        for c in 0..3 {
            let d = alpha * a[c] - b[c];
            acc += d * d;
        }
    }
    Ok((acc / (3 * x.pixels().len()) as f64).sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct AngularError {
    /// Mean per-pixel RGB angle, degrees.
    pub degrees: f64,
    /// Pixels excluded because either RGB vector was zero.
    pub skipped: usize,
}

pub fn angular_error(x: &Panorama, y: &Panorama) -> Result<AngularError> {
    check_dims(x, y)?;
    let mut acc = 0.0;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for (a, b) in x.pixels().iter().zip(y.pixels()) {
        // the angle is scale-free; dividing by the largest channel first
        // keeps the squares away from denormal range on HDR tails
        let ma = a[0].abs().max(a[1].abs()).max(a[2].abs());
        let mb = b[0].abs().max(b[1].abs()).max(b[2].abs());
        if ma == 0.0 || mb == 0.0 {
            skipped += 1;
            continue;
        }
        if a == b {
            counted += 1;
            continue;
        }
        let a = [a[0] / ma, a[1] / ma, a[2] / ma];
        let b = [b[0] / mb, b[1] / mb, b[2] / mb];
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        let cos = ((a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb)).clamp(-1.0, 1.0);
        acc += cos.acos();
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::DegenerateInput(
            "angular error undefined: every pixel has a zero RGB vector".into(),
        ));
    }
    Ok(AngularError {
        degrees: acc / counted as f64 * 180.0 / PI,
        skipped,
    })
}

/// (1 - cosine similarity of the flattened images) * lambda.
pub fn cosine_loss(x: &Panorama, y: &Panorama, lambda: f64) -> Result<f64> {
    check_dims(x, y)?;
    let mut xx = 0.0;
    let mut yy = 0.0;
    let mut xy = 0.0;
    for (a, b) in x.pixels().iter().zip(y.pixels()) {
        for c in 0..3 {
            xx += a[c] * a[c];
            yy += b[c] * b[c];
            xy += a[c] * b[c];
        }
    }
    if xx <= 0.0 || yy <= 0.0 {
        return Err(Error::DegenerateInput(
            "cosine loss undefined for an all-zero image".into(),
        ));
    }
    let cos = (xy / (xx.sqrt() * yy.sqrt())).min(1.0);
    Ok((1.0 - cos) * lambda)
}

#[derive(Debug, Clone, Copy)]
pub struct MetricReport {
    pub rmse: f64,
    pub si_rmse: f64,
    pub angular_error_deg: f64,
    pub angular_skipped: usize,
    pub cosine_loss: f64,
}

/// All metrics at once, with unit cosine weight.
pub fn metric_report(pred: &Panorama, truth: &Panorama) -> Result<MetricReport> {
    let ang = angular_error(pred, truth)?;
    Ok(MetricReport {
        rmse: rmse(pred, truth)?,
        si_rmse: si_rmse(pred, truth)?,
        angular_error_deg: ang.degrees,
        angular_skipped: ang.skipped,
        cosine_loss: cosine_loss(pred, truth, 1.0)?,
    })
}
