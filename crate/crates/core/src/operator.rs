//! Spatially-variant degradation operator, its exact adjoint, and noise.
//!
//! Forward:  Y = sum_b IFFT2( M_b . FFT2( X . 1_b ) )
//! Adjoint:  f†(A) = sum_b 1_b . IFFT2( conj(M_b) . FFT2(A) )
//! With the unnormalized-forward / 1/N-inverse FFT pair these are exact
//! algebraic adjoints under the complex inner product.

use crate::image::{ComplexImage, Fft2};
use crate::spectral::BlockMaskBank;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OperatorError {
    #[error("image grid does not match the mask bank grid")]
    GridMismatch,
    #[error("cannot target a finite SNR on an identically zero image")]
    ZeroSignal,
    #[error("power iteration needs at least 10 iterations (got {0})")]
    TooFewIterations(usize),
}

/// Additive white circular complex Gaussian noise at a target SNR.
/// `snr_db: None` means no noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

/// Apply the degradation operator f.
pub fn forward(x: &ComplexImage, bank: &BlockMaskBank) -> Result<ComplexImage, OperatorError> {
    if x.grid != bank.grid {
        return Err(OperatorError::GridMismatch);
    }
    let fft = Fft2::new(bank.grid.nx, bank.grid.ny);
    forward_with(x, bank, &fft)
}

/// Apply the adjoint f†.
pub fn adjoint(a: &ComplexImage, bank: &BlockMaskBank) -> Result<ComplexImage, OperatorError> {
    if a.grid != bank.grid {
        return Err(OperatorError::GridMismatch);
    }
    let fft = Fft2::new(bank.grid.nx, bank.grid.ny);
    adjoint_with(a, bank, &fft)
}

/// Forward with caller-provided FFT plans (hot path for solvers/training).
pub fn forward_with(
    x: &ComplexImage,
    bank: &BlockMaskBank,
    fft: &Fft2,
) -> Result<ComplexImage, OperatorError> {
    if x.grid != bank.grid {
        return Err(OperatorError::GridMismatch);
    }
    let (ny, nx) = x.data.dim();
    let mut out: Array2<Complex64> = Array2::zeros((ny, nx));
    let mut scratch: Array2<Complex64> = Array2::zeros((ny, nx));
    for b in 0..bank.n_blocks() {
        let (x0, y0, s) = bank.block_rect(b);
        scratch.fill(Complex64::default());
        let mut any = false;
        for iy in y0..y0 + s {
            for ix in x0..x0 + s {
                let v = x.data[(iy, ix)];
                if v != Complex64::default() {
                    any = true;
                }
                scratch[(iy, ix)] = v;
            }
        }
        if !any {
            continue; // block contributes nothing
        }
        fft.forward(&mut scratch);
        let mask = &bank.masks[b];
        for (c, &w) in scratch.iter_mut().zip(mask.iter()) {
            *c *= w;
        }
        fft.inverse(&mut scratch);
        out += &scratch;
    }
    Ok(ComplexImage {
        grid: x.grid,
        data: out,
    })
}

/// Adjoint with caller-provided FFT plans.
pub fn adjoint_with(
    a: &ComplexImage,
    bank: &BlockMaskBank,
    fft: &Fft2,
) -> Result<ComplexImage, OperatorError> {
    if a.grid != bank.grid {
        return Err(OperatorError::GridMismatch);
    }
    let (ny, nx) = a.data.dim();
    // one spectrum of the input, reused for every block
    let mut spectrum = a.data.clone();
    fft.forward(&mut spectrum);
    let mut out: Array2<Complex64> = Array2::zeros((ny, nx));
    let mut scratch: Array2<Complex64> = Array2::zeros((ny, nx));
    for b in 0..bank.n_blocks() {
        let (x0, y0, s) = bank.block_rect(b);
        scratch.assign(&spectrum);
        let mask = &bank.masks[b];
        for (c, &w) in scratch.iter_mut().zip(mask.iter()) {
            *c *= w; // masks are real, conj is a no-op
        }
        fft.inverse(&mut scratch);
        for iy in y0..y0 + s {
            for ix in x0..x0 + s {
                out[(iy, ix)] = scratch[(iy, ix)];
            }
        }
    }
    Ok(ComplexImage {
        grid: a.grid,
        data: out,
    })
}

/// Add circular complex Gaussian noise scaled to the target SNR.
pub fn add_noise(y: &ComplexImage, model: &NoiseModel) -> Result<ComplexImage, OperatorError> {
    let Some(snr_db) = model.snr_db else {
        return Ok(y.clone());
    };
    let signal = y.norm_sq();
    if signal == 0.0 {
        return Err(OperatorError::ZeroSignal);
    }
    let n_px = (y.grid.nx * y.grid.ny) as f64;
    // per-sample noise power so that 10 log10(||Y||^2 / ||noise||^2) = snr
    let sigma_sq = signal / (n_px * 10f64.powf(snr_db / 10.0));
    let component = Normal::new(0.0, (0.5 * sigma_sq).sqrt()).expect("valid sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut out = y.clone();
    for c in out.data.iter_mut() {
        let re: f64 = component.sample(&mut rng);
        let im: f64 = component.sample(&mut rng);
        *c += Complex64::new(re, im);
    }
    Ok(out)
}

/// Largest eigenvalue of f†f via power iteration, deterministic given seed.
pub fn power_iteration_norm(
    bank: &BlockMaskBank,
    iterations: usize,
    seed: u64,
) -> Result<f64, OperatorError> {
    if iterations < 10 {
        return Err(OperatorError::TooFewIterations(iterations));
    }
    let fft = Fft2::new(bank.grid.nx, bank.grid.ny);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut v = ComplexImage::zeros(bank.grid);
    for c in v.data.iter_mut() {
        *c = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
    }
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let fv = forward_with(&v, bank, &fft)?;
        let w = adjoint_with(&fv, bank, &fft)?;
        lambda = w.norm_sq().sqrt() / v.norm_sq().sqrt().max(f64::MIN_POSITIVE);
        let scale = 1.0 / w.norm_sq().sqrt().max(f64::MIN_POSITIVE);
        v = ComplexImage {
            grid: w.grid,
            data: w.data.mapv(|c| c * scale),
        };
    }
    Ok(lambda)
}
