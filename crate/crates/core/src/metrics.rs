//! MSE, SSIM, and mainlobe-width measurements on magnitude images.
//!
//! Both MSE and SSIM are computed on magnitudes normalized by the ground
//! truth's peak (first argument), so comparisons across methods share one
//! scale and joint rescaling of both images leaves the metrics unchanged.

use crate::image::ComplexImage;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("image grids do not match")]
    GridMismatch,
    #[error("image smaller than the SSIM window")]
    TooSmall,
    #[error("magnitude never falls 3 dB below the peak along axis {axis}")]
    NoCrossing { axis: char },
    #[error("peak pixel ({0}, {1}) is not a local maximum")]
    NotAPeak(usize, usize),
}

/// Per-method metric table, the shape of the comparison reports.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: BTreeMap<String, f64>,
    pub ssim: BTreeMap<String, f64>,
}

fn normalized_magnitudes(
    truth: &ComplexImage,
    other: &ComplexImage,
) -> Result<(Array2<f64>, Array2<f64>), MetricsError> {
    if truth.grid != other.grid {
        return Err(MetricsError::GridMismatch);
    }
    let peak = truth.peak_magnitude().max(f64::MIN_POSITIVE);
    Ok((
        truth.data.mapv(|c| c.norm() / peak),
        other.data.mapv(|c| c.norm() / peak),
    ))
}

/// Mean squared error between magnitude images, normalized by the peak of
/// the first argument (the ground truth by convention).
pub fn mse(truth: &ComplexImage, other: &ComplexImage) -> Result<f64, MetricsError> {
    let (a, b) = normalized_magnitudes(truth, other)?;
    let n = a.len() as f64;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

/// Mean local SSIM over Gaussian-windowed magnitude images; dynamic range
/// is the ground-truth peak (1 after normalization). Local statistics are
/// taken only where the full window fits.
pub fn ssim(
    truth: &ComplexImage,
    other: &ComplexImage,
    cfg: &SsimConfig,
) -> Result<f64, MetricsError> {
    let (a, b) = normalized_magnitudes(truth, other)?;
    let (ny, nx) = a.dim();
    let w = cfg.window;
    if nx < w || ny < w {
        return Err(MetricsError::TooSmall);
    }
    // normalized Gaussian window
    let half = (w / 2) as isize;
    let mut kernel = vec![0.0f64; w];
    for (i, k) in kernel.iter_mut().enumerate() {
        let d = i as isize - half;
        *k = (-(d * d) as f64 / (2.0 * cfg.sigma * cfg.sigma)).exp();
    }
    let ksum: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= ksum;
    }
    let c1 = (cfg.k1) * (cfg.k1);
    let c2 = (cfg.k2) * (cfg.k2);

    // separable weighted sums via horizontal pass then vertical pass
    let filt = |img: &Array2<f64>| -> Array2<f64> {
        let mut tmp = Array2::zeros((ny, nx - w + 1));
        for iy in 0..ny {
            for ox in 0..nx - w + 1 {
                let mut s = 0.0;
                for (j, k) in kernel.iter().enumerate() {
                    s += k * img[(iy, ox + j)];
                }
                tmp[(iy, ox)] = s;
            }
        }
        let mut out = Array2::zeros((ny - w + 1, nx - w + 1));
        for oy in 0..ny - w + 1 {
            for ox in 0..nx - w + 1 {
                let mut s = 0.0;
                for (j, k) in kernel.iter().enumerate() {
                    s += k * tmp[(oy + j, ox)];
                }
                out[(oy, ox)] = s;
            }
        }
        out
    };

    let mu_a = filt(&a);
    let mu_b = filt(&b);
    let aa = filt(&(&a * &a));
    let bb = filt(&(&b * &b));
    let ab = filt(&(&a * &b));

    let mut total = 0.0;
    let mut count = 0usize;
    for ((oy, ox), &ma) in mu_a.indexed_iter() {
        let mb = mu_b[(oy, ox)];
        let va = aa[(oy, ox)] - ma * ma;
        let vb = bb[(oy, ox)] - mb * mb;
        let cov = ab[(oy, ox)] - ma * mb;
        let s = ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        total += s;
        count += 1;
    }
    Ok(total / count as f64)
}

/// -3 dB full widths of the mainlobe through `peak` = (ix, iy), in meters,
/// with linear interpolation between samples.
pub fn mainlobe_width(
    img: &ComplexImage,
    peak: (usize, usize),
) -> Result<(f64, f64), MetricsError> {
    let mag = img.magnitude();
    let (px, py) = peak;
    let (ny, nx) = mag.dim();
    let pv = mag[(py, px)];
    for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
        let jx = px as i64 + dx;
        let jy = py as i64 + dy;
        if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny
            && mag[(jy as usize, jx as usize)] > pv
        {
            return Err(MetricsError::NotAPeak(px, py));
        }
    }
    let level = pv * 10f64.powf(-3.0 / 20.0);

    let cross = |line: &dyn Fn(usize) -> f64, n: usize, p: usize, axis: char| -> Result<f64, MetricsError> {
        // walk outward from the peak until the profile drops below level
        let mut right = None;
        for i in p..n - 1 {
            let (v0, v1) = (line(i), line(i + 1));
            if v0 >= level && v1 < level {
                right = Some(i as f64 + (v0 - level) / (v0 - v1));
                break;
            }
        }
        let mut left = None;
        for i in (1..=p).rev() {
            let (v0, v1) = (line(i), line(i - 1));
            if v0 >= level && v1 < level {
                left = Some(i as f64 - (v0 - level) / (v0 - v1));
                break;
            }
        }
        match (left, right) {
            (Some(l), Some(r)) => Ok(r - l),
            _ => Err(MetricsError::NoCrossing { axis }),
        }
    };

    let wx = cross(&|i| mag[(py, i)], nx, px, 'x')? * img.grid.dx_m;
    let wy = cross(&|i| mag[(i, px)], ny, py, 'y')? * img.grid.dy_m;
    Ok((wx, wy))
}
