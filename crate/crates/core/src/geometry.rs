//! Scene coordinate conventions and spatially-variant resolution formulas.
//!
//! The linear aperture lies on the x axis at y = 0, spanning [-L/2, +L/2];
//! the scene sits in front of it, centered at (0, R). All angles are radians.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("bandwidth must satisfy 0 < B < 2 f_c (got B={bandwidth_hz}, f_c={center_frequency_hz})")]
    InvalidBand {
        bandwidth_hz: f64,
        center_frequency_hz: f64,
    },
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be at least 2 (got {value})")]
    TooFewSamples { name: &'static str, value: usize },
}

/// Radar and aperture parameters of a stepped-frequency near-field scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGeometry {
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub aperture_length_m: f64,
    pub center_range_m: f64,
    pub propagation_speed_m_s: f64,
    pub aperture_samples: usize,
    pub frequency_samples: usize,
}

impl SceneGeometry {
    pub fn new(
        center_frequency_hz: f64,
        bandwidth_hz: f64,
        aperture_length_m: f64,
        center_range_m: f64,
        aperture_samples: usize,
        frequency_samples: usize,
    ) -> Result<Self, GeometryError> {
        let geom = Self {
            center_frequency_hz,
            bandwidth_hz,
            aperture_length_m,
            center_range_m,
            propagation_speed_m_s: SPEED_OF_LIGHT,
            aperture_samples,
            frequency_samples,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz < 2.0 * self.center_frequency_hz) {
            return Err(GeometryError::InvalidBand {
                bandwidth_hz: self.bandwidth_hz,
                center_frequency_hz: self.center_frequency_hz,
            });
        }
        for (name, value) in [
            ("aperture_length_m", self.aperture_length_m),
            ("center_range_m", self.center_range_m),
            ("center_frequency_hz", self.center_frequency_hz),
            ("propagation_speed_m_s", self.propagation_speed_m_s),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GeometryError::NonPositive { name, value });
            }
        }
        if self.aperture_samples < 2 {
            return Err(GeometryError::TooFewSamples {
                name: "aperture_samples",
                value: self.aperture_samples,
            });
        }
        if self.frequency_samples < 2 {
            return Err(GeometryError::TooFewSamples {
                name: "frequency_samples",
                value: self.frequency_samples,
            });
        }
        Ok(())
    }

    /// Wavelength at the center frequency.
    pub fn wavelength_m(&self) -> f64 {
        self.propagation_speed_m_s / self.center_frequency_hz
    }

    pub fn min_frequency_hz(&self) -> f64 {
        self.center_frequency_hz - 0.5 * self.bandwidth_hz
    }

    pub fn max_frequency_hz(&self) -> f64 {
        self.center_frequency_hz + 0.5 * self.bandwidth_hz
    }

    /// Two-way wavenumber 2 k_c = 4 pi f_c / c, the baseband demodulation offset.
    pub fn carrier_wavenumber_two_way(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.center_frequency_hz / self.propagation_speed_m_s
    }
}

/// Boresight resolutions d_x (azimuth) and d_y (range).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionEstimate {
    pub azimuth_resolution_m: f64,
    pub range_resolution_m: f64,
}

/// A point in scene coordinates; the scene lies strictly in front of the
/// aperture, so y must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenePoint {
    pub x_m: f64,
    pub y_m: f64,
}

impl ScenePoint {
    pub fn new(x_m: f64, y_m: f64) -> Result<Self, GeometryError> {
        if !(y_m > 0.0 && y_m.is_finite()) {
            return Err(GeometryError::NonPositive {
                name: "y_m",
                value: y_m,
            });
        }
        Ok(Self { x_m, y_m })
    }
}

/// d_x = lambda R / 2L, d_y = c / 2B at the boresight point.
pub fn boresight_resolution(geom: &SceneGeometry) -> ResolutionEstimate {
    ResolutionEstimate {
        azimuth_resolution_m: geom.wavelength_m() * geom.center_range_m
            / (2.0 * geom.aperture_length_m),
        range_resolution_m: geom.propagation_speed_m_s / (2.0 * geom.bandwidth_hz),
    }
}

/// Angle subtended by the aperture endpoints at `p`; closer points see a
/// larger synthetic angle.
pub fn synthetic_angle(geom: &SceneGeometry, p: ScenePoint) -> f64 {
    let half = 0.5 * geom.aperture_length_m;
    (p.x_m + half).atan2(p.y_m) - (p.x_m - half).atan2(p.y_m)
}

/// Angle of the line from the aperture center (0, 0) to `p`, measured from
/// the +x axis; boresight maps to pi/2.
pub fn view_angle(_geom: &SceneGeometry, p: ScenePoint) -> f64 {
    p.y_m.atan2(p.x_m)
}

/// Azimuth resolution away from boresight, lambda / (4 sin(dtheta/2)).
/// Diagnostic generalization; `boresight_resolution` is the reference at
/// the scene center.
pub fn azimuth_resolution_at(geom: &SceneGeometry, p: ScenePoint) -> f64 {
    let dtheta = synthetic_angle(geom, p);
    geom.wavelength_m() / (4.0 * (0.5 * dtheta).sin())
}
