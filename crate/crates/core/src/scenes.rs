//! Procedural aircraft-like targets, clean-image rasterization, and the
//! clean/degraded dataset builder.
//!
//! Targets are laid out in a unit model frame, jittered with an
//! angle-independent RNG stream, rotated by the view angle, and placed at
//! the scene center. Strong point-type scatterers sit at part junctions and
//! engines; weak distributed-type scatterers trace the edges.

use crate::echo::{backproject, simulate_echo};
use crate::geometry::SceneGeometry;
use crate::image::{ComplexImage, ImageGrid};
use crate::operator::{add_noise, forward_with, NoiseModel};
use crate::spectral::BlockMaskBank;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Pixels of zeros kept clear at every image border to suppress circular
/// wraparound of the FFT-based operator.
pub const GUARD_MARGIN_PX: usize = 8;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("rotated target leaves the usable scene area (scatterer at ({x}, {y}))")]
    OutOfBounds { x: f64, y: f64 },
    #[error("scatterer set is empty")]
    Empty,
    #[error("unknown target model id {0} (builtin models are 0..10)")]
    UnknownModel(usize),
    #[error("dataset entry {index}: {source}")]
    Entry {
        index: usize,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub x_m: f64,
    pub y_m: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScattererSet {
    pub points: Vec<Scatterer>,
}

impl ScattererSet {
    /// Check non-emptiness and the guard-margin bound on a raster.
    pub fn validate(&self, grid: &ImageGrid) -> Result<(), SceneError> {
        if self.points.is_empty() {
            return Err(SceneError::Empty);
        }
        let x_lo = grid.origin_m.0 + GUARD_MARGIN_PX as f64 * grid.dx_m;
        let x_hi = grid.origin_m.0 + (grid.nx - 1 - GUARD_MARGIN_PX) as f64 * grid.dx_m;
        let y_lo = grid.origin_m.1 + GUARD_MARGIN_PX as f64 * grid.dy_m;
        let y_hi = grid.origin_m.1 + (grid.ny - 1 - GUARD_MARGIN_PX) as f64 * grid.dy_m;
        for p in &self.points {
            if p.x_m < x_lo || p.x_m > x_hi || p.y_m < y_lo || p.y_m > y_hi {
                return Err(SceneError::OutOfBounds { x: p.x_m, y: p.y_m });
            }
        }
        Ok(())
    }
}

/// Edge of the target in the unit model frame, populated with weak
/// distributed scatterers at `density` points per unit length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentPart {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub density: f64,
}

/// Parametric aircraft layout plus the scene placement it was built for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetModel {
    pub model_id: usize,
    pub grid: ImageGrid,
    pub segments: Vec<SegmentPart>,
    pub strong_points: Vec<(f64, f64)>,
    /// Meters per unit-frame coordinate; sized so any rotation stays inside
    /// the guard margin.
    pub scale_m: f64,
    pub strong_amplitude: (f64, f64),
    pub weak_amplitude: (f64, f64),
}

impl TargetModel {
    /// One of the ten built-in aircraft, differing in wingspan, sweep,
    /// engine count, and tail geometry.
    pub fn builtin(model_id: usize, grid: &ImageGrid) -> Result<Self, SceneError> {
        if model_id >= 10 {
            return Err(SceneError::UnknownModel(model_id));
        }
        let i = model_id as f64;
        let wingspan = 0.75 + 0.06 * i; // half-span in unit frame
        let sweep = 0.15 + 0.05 * (model_id % 4) as f64;
        let wing_root = 0.25 - 0.05 * (model_id % 3) as f64;
        let tail_span = 0.30 + 0.03 * i;
        let engines = match model_id % 3 {
            0 => vec![0.45],
            1 => vec![0.35, 0.65],
            _ => vec![0.5],
        };

        let mut segments = vec![
            // fuselage
            SegmentPart {
                from: (0.0, -0.95),
                to: (0.0, 1.0),
                density: 26.0,
            },
        ];
        let mut strong_points = vec![(0.0, 1.0), (0.0, -0.95)]; // nose, tail cone
        for side in [-1.0, 1.0] {
            // wings
            segments.push(SegmentPart {
                from: (0.0, wing_root),
                to: (side * wingspan, wing_root - sweep * wingspan),
                density: 22.0,
            });
            // tailplane
            segments.push(SegmentPart {
                from: (0.0, -0.85),
                to: (side * tail_span, -0.95),
                density: 18.0,
            });
            strong_points.push((side * wingspan, wing_root - sweep * wingspan)); // wingtips
            strong_points.push((side * tail_span, -0.95));
            for &e in &engines {
                strong_points.push((side * e * wingspan, wing_root - sweep * e * wingspan - 0.05));
            }
        }
        strong_points.push((0.0, wing_root)); // wing-fuselage junction

        // circumradius of the unit layout, used to size scale_m so any
        // rotation keeps the target inside the guard margin
        let circum = segments
            .iter()
            .flat_map(|s| [s.from, s.to])
            .chain(strong_points.iter().cloned())
            .map(|(x, y)| (x * x + y * y).sqrt())
            .fold(0.0f64, f64::max);
        let usable_x = (grid.nx / 2 - GUARD_MARGIN_PX - 1) as f64 * grid.dx_m;
        let usable_y = (grid.ny / 2 - GUARD_MARGIN_PX - 1) as f64 * grid.dy_m;
        let scale_m = 0.95 * usable_x.min(usable_y) / circum;

        Ok(Self {
            model_id,
            grid: *grid,
            segments,
            strong_points,
            scale_m,
            strong_amplitude: (0.7, 1.0),
            weak_amplitude: (0.05, 0.3),
        })
    }
}

/// Deterministic scatterer generation: jitter is drawn before rotation so
/// the same (model, seed) at different angles yields rotated copies.
pub fn generate_target(
    model: &TargetModel,
    view_angle_deg: f64,
    rng_seed: u64,
) -> Result<ScattererSet, SceneError> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        rng_seed ^ (model.model_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let mut unit_points: Vec<(f64, f64, Complex64)> = Vec::new();

    for s in &model.segments {
        let len = ((s.to.0 - s.from.0).powi(2) + (s.to.1 - s.from.1).powi(2)).sqrt();
        let n = (len * s.density).ceil().max(1.0) as usize;
        for i in 0..n {
            let t = (i as f64 + 0.5 + rng.gen_range(-0.3..0.3)) / n as f64;
            let x = s.from.0 + t * (s.to.0 - s.from.0) + rng.gen_range(-0.01..0.01);
            let y = s.from.1 + t * (s.to.1 - s.from.1) + rng.gen_range(-0.01..0.01);
            let mag = rng.gen_range(model.weak_amplitude.0..model.weak_amplitude.1);
            let phase = rng.gen_range(0.0..2.0 * PI);
            unit_points.push((x, y, Complex64::from_polar(mag, phase)));
        }
    }
    for &(x, y) in &model.strong_points {
        let mag = rng.gen_range(model.strong_amplitude.0..model.strong_amplitude.1);
        let phase = rng.gen_range(0.0..2.0 * PI);
        unit_points.push((x, y, Complex64::from_polar(mag, phase)));
    }

    let theta = view_angle_deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    let center = model
        .grid
        .pixel_to_scene(model.grid.nx / 2, model.grid.ny / 2);
    let points: Vec<Scatterer> = unit_points
        .into_iter()
        .map(|(x, y, a)| {
            let rx = x * cos_t - y * sin_t;
            let ry = x * sin_t + y * cos_t;
            Scatterer {
                x_m: center.0 + model.scale_m * rx,
                y_m: center.1 + model.scale_m * ry,
                amplitude: a,
            }
        })
        .collect();
    let set = ScattererSet { points };
    set.validate(&model.grid)?;
    Ok(set)
}

/// Deposit each scatterer on its nearest pixel; collisions sum coherently.
pub fn rasterize_clean(set: &ScattererSet, grid: &ImageGrid) -> Result<ComplexImage, SceneError> {
    let mut img = ComplexImage::zeros(*grid);
    for p in &set.points {
        let (ix, iy) = grid
            .scene_to_pixel(p.x_m, p.y_m)
            .ok_or(SceneError::OutOfBounds { x: p.x_m, y: p.y_m })?;
        img.data[(iy, ix)] += p.amplitude;
    }
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationPath {
    /// Degrade with the blockwise mask operator (fast, default).
    Operator,
    /// Degrade through echo simulation and backprojection.
    Echo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clean_image_path: PathBuf,
    pub degraded_image_path: PathBuf,
    pub model_id: usize,
    pub view_angle_deg: f64,
    pub split: Split,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub geometry: SceneGeometry,
    pub grid: ImageGrid,
    pub block_size_px: usize,
    pub n_models: usize,
    pub angles_deg: Vec<f64>,
    pub n_test: usize,
    pub snr_db: Option<f64>,
    pub generation_path: GenerationPath,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub config: DatasetConfig,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn split_entries(&self, split: Split) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.split == split).collect()
    }
}

fn entry_seed(master: u64, index: usize) -> u64 {
    master
        .wrapping_mul(0x5851_F42D_4C95_7F2D)
        .wrapping_add(index as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Build the clean/degraded pairs under `out_dir` and write manifest.json.
/// Fully reproducible from the config seed.
pub fn build_dataset(
    config: &DatasetConfig,
    bank: &BlockMaskBank,
    out_dir: &Path,
) -> Result<DatasetManifest, SceneError> {
    std::fs::create_dir_all(out_dir)?;
    let n_entries = config.n_models * config.angles_deg.len();
    // deterministic test-split selection
    let mut order: Vec<usize> = (0..n_entries).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7E57);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let test_set: std::collections::HashSet<usize> =
        order.into_iter().take(config.n_test).collect();

    let results: Vec<Result<ManifestEntry, SceneError>> = (0..n_entries)
        .into_par_iter()
        .map(|index| {
            let model_id = index / config.angles_deg.len();
            let angle = config.angles_deg[index % config.angles_deg.len()];
            build_entry(config, bank, out_dir, index, model_id, angle, &test_set)
                .map_err(|e| SceneError::Entry {
                    index,
                    source: e.into(),
                })
        })
        .collect();

    let mut entries = Vec::with_capacity(n_entries);
    for r in results {
        entries.push(r?);
    }
    let manifest = DatasetManifest {
        entries,
        config: config.clone(),
        seed: config.seed,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

fn build_entry(
    config: &DatasetConfig,
    bank: &BlockMaskBank,
    out_dir: &Path,
    index: usize,
    model_id: usize,
    angle: f64,
    test_set: &std::collections::HashSet<usize>,
) -> Result<ManifestEntry, Box<dyn std::error::Error + Send + Sync>> {
    let seed = entry_seed(config.seed, index);
    let model = TargetModel::builtin(model_id, &config.grid)?;
    let set = generate_target(&model, angle, seed)?;
    let clean = rasterize_clean(&set, &config.grid)?;
    let fft = crate::image::Fft2::new(config.grid.nx, config.grid.ny);
    let degraded_clean = match config.generation_path {
        GenerationPath::Operator => forward_with(&clean, bank, &fft)?,
        GenerationPath::Echo => {
            let echo = simulate_echo(&set, &config.geometry)?;
            backproject(&echo, &config.geometry, &config.grid)?
        }
    };
    let degraded = add_noise(
        &degraded_clean,
        &NoiseModel {
            snr_db: config.snr_db,
            seed: seed ^ 0x0A15E,
        },
    )?;
    let clean_path = out_dir.join(format!("clean_{index:03}.nfsi"));
    let degraded_path = out_dir.join(format!("degraded_{index:03}.nfsi"));
    crate::container::write_image(&clean_path, &clean)?;
    crate::container::write_image(&degraded_path, &degraded)?;
    Ok(ManifestEntry {
        clean_image_path: clean_path,
        degraded_image_path: degraded_path,
        model_id,
        view_angle_deg: angle,
        split: if test_set.contains(&index) {
            Split::Test
        } else {
            Split::Train
        },
    })
}
