//! Stepped-frequency echo simulation and time-domain backprojection.
//!
//! This is the physics-level path: point scatterers produce two-way
//! phase-only echoes over a linear aperture and a stepped frequency band;
//! backprojection correlates the echoes with each pixel's phase history and
//! demodulates the carrier so images are baseband-compatible with the
//! mask-domain operator.

use crate::geometry::SceneGeometry;
use crate::image::{ComplexImage, ImageGrid};
use crate::scenes::ScattererSet;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EchoError {
    #[error("scatterer set is empty")]
    EmptyScatterers,
    #[error("scatterer at ({x}, {y}) is not in front of the aperture")]
    BadScatterer { x: f64, y: f64 },
    #[error("echo matrix dimensions are inconsistent with the geometry")]
    GridMismatch,
    #[error(
        "aperture spacing {spacing} m exceeds lambda_min/4 * (1+margin) = {limit} m; increase aperture_samples"
    )]
    ApertureUndersampled { spacing: f64, limit: f64 },
    #[error(
        "unambiguous range {unambiguous} m is below twice the scene depth {required} m; increase frequency_samples"
    )]
    RangeAmbiguous { unambiguous: f64, required: f64 },
}

/// Complex echo samples indexed [aperture position][frequency].
#[derive(Debug, Clone, PartialEq)]
pub struct EchoMatrix {
    pub samples: Array2<Complex64>,
    pub aperture_positions_m: Vec<f64>,
    pub frequencies_hz: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Check the sampling rules against a concrete scene raster.
pub fn validate_sampling(geom: &SceneGeometry, grid: &ImageGrid, margin: f64) -> Result<(), EchoError> {
    let spacing = geom.aperture_length_m / (geom.aperture_samples - 1) as f64;
    let lambda_min = geom.propagation_speed_m_s / geom.max_frequency_hz();
    let limit = lambda_min / 4.0 * (1.0 + margin);
    if spacing > limit {
        return Err(EchoError::ApertureUndersampled { spacing, limit });
    }
    let df = geom.bandwidth_hz / (geom.frequency_samples - 1) as f64;
    let unambiguous = geom.propagation_speed_m_s / (2.0 * df);
    let depth = grid.ny as f64 * grid.dy_m;
    if unambiguous < 2.0 * depth {
        return Err(EchoError::RangeAmbiguous {
            unambiguous,
            required: 2.0 * depth,
        });
    }
    Ok(())
}

/// Monostatic two-way phase-only echoes of a point-scatterer set:
/// s[a][f] = sum_i a_i exp(-j 2 (2 pi f / c) R_a(i)).
pub fn simulate_echo(
    scatterers: &ScattererSet,
    geom: &SceneGeometry,
) -> Result<EchoMatrix, EchoError> {
    if scatterers.points.is_empty() {
        return Err(EchoError::EmptyScatterers);
    }
    for p in &scatterers.points {
        if !(p.y_m > 0.0) {
            return Err(EchoError::BadScatterer { x: p.x_m, y: p.y_m });
        }
    }
    let half = 0.5 * geom.aperture_length_m;
    let positions = linspace(-half, half, geom.aperture_samples);
    let freqs = linspace(
        geom.min_frequency_hz(),
        geom.max_frequency_hz(),
        geom.frequency_samples,
    );
    let c = geom.propagation_speed_m_s;
    let mut samples = Array2::zeros((positions.len(), freqs.len()));
    for (ia, &xa) in positions.iter().enumerate() {
        for p in &scatterers.points {
            let dx = p.x_m - xa;
            let r = (dx * dx + p.y_m * p.y_m).sqrt();
            // incremental phasor across the stepped frequencies
            let phase0 = -2.0 * (2.0 * PI * freqs[0] / c) * r;
            let dphase = -2.0 * (2.0 * PI * (freqs[1] - freqs[0]) / c) * r;
            let step = Complex64::from_polar(1.0, dphase);
            let mut ph = Complex64::from_polar(1.0, phase0);
            for ifq in 0..freqs.len() {
                samples[(ia, ifq)] += p.amplitude * ph;
                ph *= step;
            }
        }
    }
    Ok(EchoMatrix {
        samples,
        aperture_positions_m: positions,
        frequencies_hz: freqs,
    })
}

/// Matched-filter backprojection with carrier demodulation:
/// I(p) = (1/(Na Nf)) sum_a sum_f s[a][f] exp(+j 2 k_f R_a(p)) exp(-j 2 k_c y_p).
pub fn backproject(
    echo: &EchoMatrix,
    geom: &SceneGeometry,
    grid: &ImageGrid,
) -> Result<ComplexImage, EchoError> {
    let na = echo.aperture_positions_m.len();
    let nf = echo.frequencies_hz.len();
    if echo.samples.dim() != (na, nf) || na != geom.aperture_samples || nf != geom.frequency_samples
    {
        return Err(EchoError::GridMismatch);
    }
    let c = geom.propagation_speed_m_s;
    let f0 = echo.frequencies_hz[0];
    let df = echo.frequencies_hz[1] - echo.frequencies_hz[0];
    let k2c = geom.carrier_wavenumber_two_way();
    let scale = 1.0 / (na * nf) as f64;

    let rows: Vec<Vec<Complex64>> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| {
            let mut row = vec![Complex64::default(); grid.nx];
            for (ix, out) in row.iter_mut().enumerate() {
                let (x, y) = grid.pixel_to_scene(ix, iy);
                let mut acc = Complex64::default();
                for (ia, &xa) in echo.aperture_positions_m.iter().enumerate() {
                    let dx = x - xa;
                    let r = (dx * dx + y * y).sqrt();
                    let phase0 = 2.0 * (2.0 * PI * f0 / c) * r;
                    let dphase = 2.0 * (2.0 * PI * df / c) * r;
                    let step = Complex64::from_polar(1.0, dphase);
                    let mut ph = Complex64::from_polar(1.0, phase0);
                    for ifq in 0..nf {
                        acc += echo.samples[(ia, ifq)] * ph;
                        ph *= step;
                    }
                }
                *out = acc * scale * Complex64::from_polar(1.0, -k2c * y);
            }
            row
        })
        .collect();

    let mut data = Array2::zeros((grid.ny, grid.nx));
    for (iy, row) in rows.into_iter().enumerate() {
        for (ix, v) in row.into_iter().enumerate() {
            data[(iy, ix)] = v;
        }
    }
    Ok(ComplexImage { grid: *grid, data })
}
