//! Annular-sector wavenumber supports and blockwise PSF mask banks.
//!
//! A scatterer's observed spectrum is an annular sector: radius set by the
//! transmitted band (two-way, 2 k_r), angular extent set by the directions
//! from the aperture to the scatterer. Images are stored demodulated, so
//! every support is shifted by -(0, 2 k_c) before sampling onto the grid.

use crate::geometry::{SceneGeometry, ScenePoint};
use crate::image::{fftshift, ComplexImage, Fft2, ImageGrid, KGrid};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("in-support baseband wavenumber ({kx}, {ky}) rad/m exceeds grid Nyquist ({nyq_x}, {nyq_y}); grid spacing too coarse{block}", block = block_index.map(|b| format!(" (block {b})")).unwrap_or_default())]
    NyquistViolation {
        kx: f64,
        ky: f64,
        nyq_x: f64,
        nyq_y: f64,
        block_index: Option<usize>,
    },
    #[error("block size {block_size_px} does not tile a {nx}x{ny} grid")]
    BadBlockSize {
        block_size_px: usize,
        nx: usize,
        ny: usize,
    },
    #[error("mask has no positive samples{block}", block = block_index.map(|b| format!(" (block {b})")).unwrap_or_default())]
    EmptyMask { block_index: Option<usize> },
    #[error("mask dimensions do not match grid")]
    MaskMismatch,
}

/// Optional raised-cosine softening of the support edges, as a fraction of
/// the sector's radial / angular span. Hard 0/1 masks when zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperConfig {
    pub edge_fraction: f64,
}

impl Default for TaperConfig {
    fn default() -> Self {
        Self { edge_fraction: 0.0 }
    }
}

/// Wavenumber support of the point `p`: weight per KGrid sample in [0, 1].
pub fn spectral_support(
    geom: &SceneGeometry,
    p: ScenePoint,
    kgrid: &KGrid,
    taper: TaperConfig,
) -> Result<Array2<f64>, SpectralError> {
    check_nyquist(geom, p, kgrid, None)?;
    let k2c = geom.carrier_wavenumber_two_way();
    let r_lo = 4.0 * PI * geom.min_frequency_hz() / geom.propagation_speed_m_s;
    let r_hi = 4.0 * PI * geom.max_frequency_hz() / geom.propagation_speed_m_s;
    let half = 0.5 * geom.aperture_length_m;
    // angle from aperture position to p grows as the position moves right
    let phi_lo = p.y_m.atan2(p.x_m + half);
    let phi_hi = p.y_m.atan2(p.x_m - half);

    let ny = kgrid.ky.len();
    let nx = kgrid.kx.len();
    let mut mask = Array2::zeros((ny, nx));
    let edge_r = taper.edge_fraction * (r_hi - r_lo);
    let edge_phi = taper.edge_fraction * (phi_hi - phi_lo);
    for (iy, &ky_b) in kgrid.ky.iter().enumerate() {
        let ky = ky_b + k2c; // undo baseband shift
        for (ix, &kx) in kgrid.kx.iter().enumerate() {
            let r = (kx * kx + ky * ky).sqrt();
            let phi = ky.atan2(kx);
            let w = edge_weight(r, r_lo, r_hi, edge_r) * edge_weight(phi, phi_lo, phi_hi, edge_phi);
            mask[(iy, ix)] = w;
        }
    }
    if mask.iter().all(|&w| w <= 0.0) {
        return Err(SpectralError::EmptyMask { block_index: None });
    }
    Ok(mask)
}

/// 1 inside [lo, hi], raised-cosine roll-off of width `edge` at both ends
/// (hard edge when `edge` is zero).
fn edge_weight(v: f64, lo: f64, hi: f64, edge: f64) -> f64 {
    if v < lo || v > hi {
        return 0.0;
    }
    if edge <= 0.0 {
        return 1.0;
    }
    let d = (v - lo).min(hi - v);
    if d >= edge {
        1.0
    } else {
        0.5 * (1.0 - (PI * (1.0 - d / edge)).cos())
    }
}

fn check_nyquist(
    geom: &SceneGeometry,
    p: ScenePoint,
    kgrid: &KGrid,
    block_index: Option<usize>,
) -> Result<(), SpectralError> {
    let k2c = geom.carrier_wavenumber_two_way();
    let r_lo = 4.0 * PI * geom.min_frequency_hz() / geom.propagation_speed_m_s;
    let r_hi = 4.0 * PI * geom.max_frequency_hz() / geom.propagation_speed_m_s;
    let half = 0.5 * geom.aperture_length_m;
    let phi_lo = p.y_m.atan2(p.x_m + half);
    let phi_hi = p.y_m.atan2(p.x_m - half);
    let (nyq_x, nyq_y) = kgrid.nyquist();
    // Extremes of the baseband support lie on the sector boundary; sample it.
    const BOUNDARY_SAMPLES: usize = 512;
    let mut check = |kx: f64, ky_phys: f64| -> Result<(), SpectralError> {
        let ky = ky_phys - k2c;
        if kx.abs() > nyq_x || ky.abs() > nyq_y {
            Err(SpectralError::NyquistViolation {
                kx,
                ky,
                nyq_x,
                nyq_y,
                block_index,
            })
        } else {
            Ok(())
        }
    };
    for i in 0..=BOUNDARY_SAMPLES {
        let t = i as f64 / BOUNDARY_SAMPLES as f64;
        let phi = phi_lo + t * (phi_hi - phi_lo);
        for r in [r_lo, r_hi] {
            check(r * phi.cos(), r * phi.sin())?;
        }
        let r = r_lo + t * (r_hi - r_lo);
        for phi in [phi_lo, phi_hi] {
            check(r * phi.cos(), r * phi.sin())?;
        }
    }
    Ok(())
}

/// One mask per image block; the spatially-variant operator applies block
/// b's mask to the pixels of block b.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMaskBank {
    pub grid: ImageGrid,
    pub geometry: SceneGeometry,
    pub block_size_px: usize,
    /// Row-major over blocks: index = by * blocks_x + bx.
    pub masks: Vec<Array2<f64>>,
}

impl BlockMaskBank {
    pub fn blocks_x(&self) -> usize {
        self.grid.nx / self.block_size_px
    }

    pub fn blocks_y(&self) -> usize {
        self.grid.ny / self.block_size_px
    }

    pub fn n_blocks(&self) -> usize {
        self.masks.len()
    }

    /// Pixel rectangle of block `b` as (x0, y0, size).
    pub fn block_rect(&self, b: usize) -> (usize, usize, usize) {
        let bx = b % self.blocks_x();
        let by = b / self.blocks_x();
        (
            bx * self.block_size_px,
            by * self.block_size_px,
            self.block_size_px,
        )
    }

    /// Representative pixel of block `b` (offset B/2 into the rectangle),
    /// the pixel whose scene coordinates define the block's mask.
    pub fn block_center_pixel(&self, b: usize) -> (usize, usize) {
        let (x0, y0, s) = self.block_rect(b);
        (x0 + s / 2, y0 + s / 2)
    }

    pub fn block_of_pixel(&self, ix: usize, iy: usize) -> usize {
        (iy / self.block_size_px) * self.blocks_x() + ix / self.block_size_px
    }
}

/// Build the per-block mask bank at the block-center pixels' scene
/// coordinates.
pub fn build_bank(
    geom: &SceneGeometry,
    grid: &ImageGrid,
    block_size_px: usize,
    taper: TaperConfig,
) -> Result<BlockMaskBank, SpectralError> {
    if block_size_px == 0 || grid.nx % block_size_px != 0 || grid.ny % block_size_px != 0 {
        return Err(SpectralError::BadBlockSize {
            block_size_px,
            nx: grid.nx,
            ny: grid.ny,
        });
    }
    let kgrid = grid.kgrid();
    let blocks_x = grid.nx / block_size_px;
    let blocks_y = grid.ny / block_size_px;
    let mut masks = Vec::with_capacity(blocks_x * blocks_y);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let b = by * blocks_x + bx;
            let cx = bx * block_size_px + block_size_px / 2;
            let cy = by * block_size_px + block_size_px / 2;
            let (x, y) = grid.pixel_to_scene(cx, cy);
            let p = ScenePoint::new(x, y).map_err(|_| SpectralError::EmptyMask {
                block_index: Some(b),
            })?;
            check_nyquist(geom, p, &kgrid, Some(b))?;
            let mask = spectral_support(geom, p, &kgrid, taper).map_err(|e| match e {
                SpectralError::EmptyMask { .. } => SpectralError::EmptyMask {
                    block_index: Some(b),
                },
                other => other,
            })?;
            masks.push(mask);
        }
    }
    Ok(BlockMaskBank {
        grid: *grid,
        geometry: geom.clone(),
        block_size_px,
        masks,
    })
}

/// Centered spatial response of one mask: inverse transform, shifted so the
/// peak lands on the center pixel, peak magnitude normalized to 1.
pub fn psf_image(mask: &Array2<f64>, grid: &ImageGrid) -> Result<ComplexImage, SpectralError> {
    if mask.dim() != (grid.ny, grid.nx) {
        return Err(SpectralError::MaskMismatch);
    }
    if mask.iter().all(|&w| w == 0.0) {
        return Err(SpectralError::EmptyMask { block_index: None });
    }
    let mut data: Array2<Complex64> = mask.mapv(|w| Complex64::new(w, 0.0));
    let fft = Fft2::new(grid.nx, grid.ny);
    fft.inverse(&mut data);
    let mut data = fftshift(&data);
    let peak = data.iter().map(|c| c.norm()).fold(0.0, f64::max);
    data.mapv_inplace(|c| c / peak);
    Ok(ComplexImage { grid: *grid, data })
}

/// Angular width of a support mask, measured from the in-support samples'
/// physical directions. Diagnostic used by spatial-variation checks.
pub fn mask_angular_width(geom: &SceneGeometry, kgrid: &KGrid, mask: &Array2<f64>) -> f64 {
    let k2c = geom.carrier_wavenumber_two_way();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (iy, &ky_b) in kgrid.ky.iter().enumerate() {
        for (ix, &kx) in kgrid.kx.iter().enumerate() {
            if mask[(iy, ix)] > 0.0 {
                let phi = (ky_b + k2c).atan2(kx);
                lo = lo.min(phi);
                hi = hi.max(phi);
            }
        }
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SceneGeometry;
    use approx::assert_relative_eq;

    fn table1() -> SceneGeometry {
        SceneGeometry::new(10e9, 2e9, 2.0, 3.0, 256, 64).unwrap()
    }

    fn desk_grid() -> ImageGrid {
        ImageGrid::centered(64, 64, 0.02, 0.02, (0.0, 3.0)).unwrap()
    }

    #[test]
    fn radial_band_table1() {
        let g = table1();
        let r_lo = 4.0 * PI * g.min_frequency_hz() / g.propagation_speed_m_s;
        let r_hi = 4.0 * PI * g.max_frequency_hz() / g.propagation_speed_m_s;
        assert_relative_eq!(r_lo, 376.99, max_relative = 1e-4);
        assert_relative_eq!(r_hi, 460.77, max_relative = 1e-4);
    }

    #[test]
    fn boresight_mask_mirror_symmetric() {
        let g = table1();
        let grid = desk_grid();
        let kg = grid.kgrid();
        let p = ScenePoint::new(0.0, 3.0).unwrap();
        let mask = spectral_support(&g, p, &kg, TaperConfig::default()).unwrap();
        // kx -> -kx maps bin ix to (nx - ix) % nx
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let jx = (grid.nx - ix) % grid.nx;
                assert_eq!(mask[(iy, ix)], mask[(iy, jx)], "asymmetry at ({ix},{iy})");
            }
        }
    }

    #[test]
    fn off_axis_masks_are_mirror_images() {
        let g = table1();
        let grid = desk_grid();
        let kg = grid.kgrid();
        let pa = ScenePoint::new(0.4, 3.0).unwrap();
        let pb = ScenePoint::new(-0.4, 3.0).unwrap();
        let ma = spectral_support(&g, pa, &kg, TaperConfig::default()).unwrap();
        let mb = spectral_support(&g, pb, &kg, TaperConfig::default()).unwrap();
        let mut differ = false;
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let jx = (grid.nx - ix) % grid.nx;
                assert_eq!(ma[(iy, ix)], mb[(iy, jx)]);
                if ma[(iy, ix)] != mb[(iy, ix)] {
                    differ = true;
                }
            }
        }
        // angular centers differ, so the two masks are not identical
        assert!(differ);
    }

    #[test]
    fn bank_block_counts() {
        let g = table1();
        let grid = desk_grid();
        let bank = build_bank(&g, &grid, 8, TaperConfig::default()).unwrap();
        assert_eq!(bank.n_blocks(), 64);
        assert!(bank
            .masks
            .iter()
            .all(|m| m.iter().any(|&w| w > 0.0)));
        let single = build_bank(&g, &grid, 64, TaperConfig::default()).unwrap();
        assert_eq!(single.n_blocks(), 1);
        assert!(build_bank(&g, &grid, 7, TaperConfig::default()).is_err());
    }

    #[test]
    fn paper_scale_block_count() {
        let g = table1();
        // 256x256 with a finer spacing keeps azimuth extents within Nyquist
        let grid = ImageGrid::centered(256, 256, 0.01, 0.01, (0.0, 3.0)).unwrap();
        let bank = build_bank(&g, &grid, 8, TaperConfig::default()).unwrap();
        assert_eq!(bank.n_blocks(), 1024);
    }

    #[test]
    fn nyquist_violation_detected() {
        let g = table1();
        // very coarse grid: Nyquist ~ pi/0.1 = 31.4 rad/m, far below the
        // support's azimuth extent
        let grid = ImageGrid::centered(16, 16, 0.1, 0.1, (0.0, 3.0)).unwrap();
        let err = spectral_support(
            &g,
            ScenePoint::new(0.0, 3.0).unwrap(),
            &grid.kgrid(),
            TaperConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SpectralError::NyquistViolation { .. }));
    }

    #[test]
    fn psf_of_all_ones_mask_is_delta() {
        let grid = ImageGrid::new(32, 32, 0.02, 0.02, (0.0, 0.0)).unwrap();
        let mask = Array2::from_elem((32, 32), 1.0);
        let psf = psf_image(&mask, &grid).unwrap();
        assert_eq!(psf.peak_pixel(), (16, 16));
        assert_relative_eq!(psf.data[(16, 16)].norm(), 1.0, epsilon = 1e-12);
        let off_peak: f64 = psf
            .data
            .indexed_iter()
            .filter(|((iy, ix), _)| !(*ix == 16 && *iy == 16))
            .map(|(_, c)| c.norm())
            .sum();
        assert!(off_peak < 1e-10);
    }

    #[test]
    fn psf_empty_mask_rejected() {
        let grid = ImageGrid::new(32, 32, 0.02, 0.02, (0.0, 0.0)).unwrap();
        let mask = Array2::zeros((32, 32));
        assert!(matches!(
            psf_image(&mask, &grid),
            Err(SpectralError::EmptyMask { .. })
        ));
    }

    #[test]
    fn psf_energy_parseval() {
        let g = table1();
        let grid = desk_grid();
        let kg = grid.kgrid();
        let p = ScenePoint::new(0.0, 3.0).unwrap();
        let mask = spectral_support(&g, p, &kg, TaperConfig::default()).unwrap();
        let n = (grid.nx * grid.ny) as f64;
        let count: f64 = mask.iter().filter(|&&w| w > 0.0).count() as f64;
        // pre-normalization: peak of ifft = count/n, energy = count/n
        let psf = psf_image(&mask, &grid).unwrap();
        let peak = count / n;
        let energy = psf.norm_sq() * peak * peak;
        assert_relative_eq!(energy, count / n, max_relative = 1e-10);
    }

    #[test]
    fn boresight_psf_mainlobe_width() {
        let g = table1();
        // fine grid so the 0.0225 m mainlobe is well sampled
        let grid = ImageGrid::centered(128, 128, 0.005, 0.005, (0.0, 3.0)).unwrap();
        let kg = grid.kgrid();
        let mask =
            spectral_support(&g, ScenePoint::new(0.0, 3.0).unwrap(), &kg, TaperConfig::default())
                .unwrap();
        let psf = psf_image(&mask, &grid).unwrap();
        let (wx, _wy) = crate::metrics::mainlobe_width(&psf, psf.peak_pixel()).unwrap();
        assert!(
            (wx - 0.0225).abs() / 0.0225 < 0.20,
            "azimuth -3 dB width {wx} vs 0.0225"
        );
    }

    #[test]
    fn near_range_psf_sidelobes_off_axis() {
        let g = table1();
        let grid = ImageGrid::centered(128, 128, 0.005, 0.005, (0.0, 2.0)).unwrap();
        let kg = grid.kgrid();
        let mask =
            spectral_support(&g, ScenePoint::new(0.0, 2.0).unwrap(), &kg, TaperConfig::default())
                .unwrap();
        let psf = psf_image(&mask, &grid).unwrap();
        // find the two strongest local maxima away from the mainlobe
        let mag = psf.magnitude();
        let (cx, cy) = (64usize, 64usize);
        let mut peaks: Vec<(f64, usize, usize)> = Vec::new();
        for iy in 1..127 {
            for ix in 1..127 {
                let v = mag[(iy, ix)];
                let dx = ix as isize - cx as isize;
                let dy = iy as isize - cy as isize;
                if dx.abs() < 4 && dy.abs() < 4 {
                    continue; // mainlobe
                }
                if v > mag[(iy, ix - 1)]
                    && v >= mag[(iy, ix + 1)]
                    && v > mag[(iy - 1, ix)]
                    && v >= mag[(iy + 1, ix)]
                {
                    peaks.push((v, ix, iy));
                }
            }
        }
        peaks.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for &(_, ix, iy) in peaks.iter().take(2) {
            let on_axis = ix == cx || iy == cy;
            assert!(!on_axis, "sidelobe peak at ({ix},{iy}) lies on an image axis");
        }
    }

    #[test]
    fn closer_blocks_have_wider_angular_extent() {
        let g = table1();
        let grid = desk_grid();
        let kg = grid.kgrid();
        let near = spectral_support(
            &g,
            ScenePoint::new(0.0, 2.5).unwrap(),
            &kg,
            TaperConfig::default(),
        )
        .unwrap();
        let far = spectral_support(
            &g,
            ScenePoint::new(0.0, 3.5).unwrap(),
            &kg,
            TaperConfig::default(),
        )
        .unwrap();
        assert!(mask_angular_width(&g, &kg, &near) > mask_angular_width(&g, &kg, &far));
    }

    #[test]
    fn taper_weights_stay_in_unit_interval() {
        let g = table1();
        let grid = desk_grid();
        let kg = grid.kgrid();
        let mask = spectral_support(
            &g,
            ScenePoint::new(0.0, 3.0).unwrap(),
            &kg,
            TaperConfig { edge_fraction: 0.2 },
        )
        .unwrap();
        assert!(mask.iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert!(mask.iter().any(|&w| w > 0.0 && w < 1.0));
    }
}
