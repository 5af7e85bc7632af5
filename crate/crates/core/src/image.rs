//! Complex images on a physical grid, wavenumber grids, and 2-D FFTs.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageError {
    #[error("grid dimension {value} must be a power of two and >= 16")]
    BadDimension { value: usize },
    #[error("pixel spacing must be positive (got {value})")]
    BadSpacing { value: f64 },
    #[error("image grids do not match")]
    GridMismatch,
    #[error("non-finite sample in image")]
    NonFinite,
}

/// Pixel raster tied to scene coordinates. Pixel (ix, iy) sits at
/// (origin.0 + ix*dx, origin.1 + iy*dy); data arrays are indexed [iy, ix].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx_m: f64,
    pub dy_m: f64,
    pub origin_m: (f64, f64),
}

impl ImageGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        dx_m: f64,
        dy_m: f64,
        origin_m: (f64, f64),
    ) -> Result<Self, ImageError> {
        for n in [nx, ny] {
            if n < 16 || !n.is_power_of_two() {
                return Err(ImageError::BadDimension { value: n });
            }
        }
        for d in [dx_m, dy_m] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ImageError::BadSpacing { value: d });
            }
        }
        Ok(Self {
            nx,
            ny,
            dx_m,
            dy_m,
            origin_m,
        })
    }

    /// Grid centered on `center` in scene coordinates, so that pixel
    /// (nx/2, ny/2) lands exactly on the center point.
    pub fn centered(
        nx: usize,
        ny: usize,
        dx_m: f64,
        dy_m: f64,
        center: (f64, f64),
    ) -> Result<Self, ImageError> {
        let origin = (
            center.0 - (nx / 2) as f64 * dx_m,
            center.1 - (ny / 2) as f64 * dy_m,
        );
        Self::new(nx, ny, dx_m, dy_m, origin)
    }

    pub fn pixel_to_scene(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_m.0 + ix as f64 * self.dx_m,
            self.origin_m.1 + iy as f64 * self.dy_m,
        )
    }

    /// Nearest pixel for a scene coordinate, if inside the raster.
    pub fn scene_to_pixel(&self, x_m: f64, y_m: f64) -> Option<(usize, usize)> {
        let fx = (x_m - self.origin_m.0) / self.dx_m;
        let fy = (y_m - self.origin_m.1) / self.dy_m;
        let ix = fx.round();
        let iy = fy.round();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < self.nx && (iy as usize) < self.ny {
            Some((ix as usize, iy as usize))
        } else {
            None
        }
    }

    pub fn kgrid(&self) -> KGrid {
        KGrid::from_grid(self)
    }
}

/// Per-axis wavenumber sample vectors in rad/m, standard DFT ordering
/// (bin 0 is DC, negative frequencies in the upper half).
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
}

impl KGrid {
    pub fn from_grid(grid: &ImageGrid) -> Self {
        Self {
            kx: fft_wavenumbers(grid.nx, grid.dx_m),
            ky: fft_wavenumbers(grid.ny, grid.dy_m),
        }
    }

    /// Nyquist limits (half-extent of the covered interval) per axis.
    pub fn nyquist(&self) -> (f64, f64) {
        let half = |k: &[f64]| k.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        // spacing * n/2 rather than max sample, so both signs are covered
        let dkx = self.kx[1] - self.kx[0];
        let dky = self.ky[1] - self.ky[0];
        (
            half(&self.kx).max(dkx * self.kx.len() as f64 / 2.0),
            half(&self.ky).max(dky * self.ky.len() as f64 / 2.0),
        )
    }
}

/// DFT angular frequencies 2 pi m / (n d) with negative bins folded.
pub fn fft_wavenumbers(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let m = if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            };
            2.0 * PI * m / (n as f64 * d)
        })
        .collect()
}

/// Complex-valued image bound to its grid. Data layout is [iy, ix].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    pub grid: ImageGrid,
    pub data: Array2<Complex64>,
}

impl ComplexImage {
    pub fn zeros(grid: ImageGrid) -> Self {
        Self {
            grid,
            data: Array2::zeros((grid.ny, grid.nx)),
        }
    }

    pub fn from_data(grid: ImageGrid, data: Array2<Complex64>) -> Result<Self, ImageError> {
        if data.dim() != (grid.ny, grid.nx) {
            return Err(ImageError::GridMismatch);
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ImageError::NonFinite);
        }
        Ok(Self { grid, data })
    }

    pub fn same_grid(&self, other: &ComplexImage) -> bool {
        self.grid == other.grid
    }

    /// Complex inner product sum(conj(a) * b).
    pub fn inner(&self, other: &ComplexImage) -> Complex64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn magnitude(&self) -> Array2<f64> {
        self.data.mapv(|c| c.norm())
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Pixel index of the magnitude peak, (ix, iy).
    pub fn peak_pixel(&self) -> (usize, usize) {
        let mut best = (0usize, 0usize);
        let mut best_v = -1.0;
        for ((iy, ix), c) in self.data.indexed_iter() {
            let v = c.norm();
            if v > best_v {
                best_v = v;
                best = (ix, iy);
            }
        }
        best
    }

    /// Circularly shift by (sx, sy) pixels: output(ix, iy) = input(ix-sx, iy-sy).
    pub fn circular_shift(&self, sx: isize, sy: isize) -> ComplexImage {
        let (ny, nx) = self.data.dim();
        let mut out = Array2::zeros((ny, nx));
        for iy in 0..ny {
            let src_y = (iy as isize - sy).rem_euclid(ny as isize) as usize;
            for ix in 0..nx {
                let src_x = (ix as isize - sx).rem_euclid(nx as isize) as usize;
                out[(iy, ix)] = self.data[(src_y, src_x)];
            }
        }
        ComplexImage {
            grid: self.grid,
            data: out,
        }
    }
}

/// Cached FFT plans for one image size. Forward is the plain DFT; inverse
/// carries the 1/(nx*ny) factor so forward∘inverse is the identity.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn rustfft::Fft<f64>>,
    fwd_y: Arc<dyn rustfft::Fft<f64>>,
    inv_x: Arc<dyn rustfft::Fft<f64>>,
    inv_y: Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    fn transform(&self, data: &mut Array2<Complex64>, forward: bool) {
        assert_eq!(data.dim(), (self.ny, self.nx));
        let (fx, fy) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        // rows (x axis)
        for mut row in data.rows_mut() {
            let slice = row.as_slice_mut().expect("contiguous row");
            fx.process(slice);
        }
        // columns (y axis), via a scratch column buffer
        let mut col = vec![Complex64::default(); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                col[iy] = data[(iy, ix)];
            }
            fy.process(&mut col);
            for iy in 0..self.ny {
                data[(iy, ix)] = col[iy];
            }
        }
        if !forward {
            let scale = 1.0 / (self.nx * self.ny) as f64;
            data.mapv_inplace(|c| c * scale);
        }
    }

    pub fn forward(&self, data: &mut Array2<Complex64>) {
        self.transform(data, true);
    }

    pub fn inverse(&self, data: &mut Array2<Complex64>) {
        self.transform(data, false);
    }
}

/// Swap quadrants so bin (0,0) moves to the center pixel (nx/2, ny/2).
pub fn fftshift(data: &Array2<Complex64>) -> Array2<Complex64> {
    let (ny, nx) = data.dim();
    let mut out = Array2::zeros((ny, nx));
    for iy in 0..ny {
        for ix in 0..nx {
            out[((iy + ny / 2) % ny, (ix + nx / 2) % nx)] = data[(iy, ix)];
        }
    }
    out
}
