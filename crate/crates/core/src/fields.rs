//! Deformation-map generators.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::SequenceSpec;
use crate::raster::DisplacementField;

/// Horizontal sinusoidal deformation
/// `dx = A·sin(2π·f_s·y/height + φ_s)·cos(2π·f_t·t + φ_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidParams {
    pub amplitude_cm: f64,
    /// Cycles per image height.
    pub spatial_freq: f64,
    pub spatial_phase: f64,
    /// Hz.
    pub temporal_freq: f64,
    pub temporal_phase: f64,
}

impl SinusoidParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amplitude_cm", self.amplitude_cm),
            ("spatial_freq", self.spatial_freq),
            ("temporal_freq", self.temporal_freq),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be finite and non-negative"),
                });
            }
        }
        for (name, v) in [
            ("spatial_phase", self.spatial_phase),
            ("temporal_phase", self.temporal_phase),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} must be finite"),
                });
            }
        }
        Ok(())
    }

    /// Horizontal displacement in cm at normalized height `y_norm` and time `t`.
    #[inline]
    pub fn displacement(&self, y_norm: f64, t: f64) -> f64 {
        self.amplitude_cm
            * (2.0 * PI * self.spatial_freq * y_norm + self.spatial_phase).sin()
            * (2.0 * PI * self.temporal_freq * t + self.temporal_phase).cos()
    }
}

/// One frame of the sinusoidal deformation at time `t` seconds. `dy` is zero.
pub fn sinusoidal_field(
    params: &SinusoidParams,
    t: f64,
    width: usize,
    height: usize,
) -> Result<DisplacementField> {
    params.validate()?;
    let mut dx = Vec::with_capacity(width * height);
    for y in 0..height {
        let d = params.displacement(y as f64 / height as f64, t);
        dx.extend(std::iter::repeat_n(d, width));
    }
    DisplacementField::new(width, height, dx, vec![0.0; width * height])
}

/// Sinusoidal field for every frame of `spec`.
pub fn sinusoidal_sequence(
    params: &SinusoidParams,
    spec: &SequenceSpec,
    width: usize,
    height: usize,
) -> Result<Vec<DisplacementField>> {
    (0..spec.frame_count())
        .map(|k| sinusoidal_field(params, spec.time_of(k), width, height))
        .collect()
}

/// Band-limited random deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFieldParams {
    pub rms_cm: f64,
    /// Radial spatial band in cycles per image, inclusive.
    pub spatial_band: (f64, f64),
    /// Temporal band in Hz, inclusive.
    pub temporal_band: (f64, f64),
    pub seed: u64,
}

impl NoiseFieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rms_cm.is_finite() && self.rms_cm >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rms_cm",
                reason: format!("{} must be non-negative", self.rms_cm),
            });
        }
        for (name, (lo, hi)) in [
            ("spatial_band", self.spatial_band),
            ("temporal_band", self.temporal_band),
        ] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("({lo}, {hi}) must satisfy 0 <= low < high"),
                });
            }
        }
        Ok(())
    }
}

/// Signed frequency of DFT bin `k` on an axis of length `n`, in cycles per axis.
#[inline]
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Whether spectral bin `(kt, ky, kx)` of a `frames×height×width` volume
/// falls in the requested band.
pub fn in_band(
    params: &NoiseFieldParams,
    fps: f64,
    (frames, height, width): (usize, usize, usize),
    (kt, ky, kx): (usize, usize, usize),
) -> bool {
    let fs = bin_frequency(kx, width).hypot(bin_frequency(ky, height));
    let ft = bin_frequency(kt, frames).abs() * fps / frames as f64;
    let (sl, sh) = params.spatial_band;
    let (tl, th) = params.temporal_band;
    (sl..=sh).contains(&fs) && (tl..=th).contains(&ft)
}

fn gaussian_frame(seed: u64, stream: u64, len: usize) -> Vec<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len)
        .map(|_| Complex::new(StandardNormal.sample(&mut rng), 0.0))
        .collect()
}

/// In-place 3D FFT of a row-major `(frames, height, width)` volume.
fn fft3(volume: &mut [Complex<f64>], dims: (usize, usize, usize), inverse: bool) {
    let (nt, ny, nx) = dims;
    let mut planner = FftPlanner::new();
    let mut plan = |n| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    let (fx, fy, ft) = (plan(nx), plan(ny), plan(nt));

    fx.process(volume);

    let mut column = vec![Complex::default(); ny];
    for t in 0..nt {
        for x in 0..nx {
            for y in 0..ny {
                column[y] = volume[(t * ny + y) * nx + x];
            }
            fy.process(&mut column);
            for y in 0..ny {
                volume[(t * ny + y) * nx + x] = column[y];
            }
        }
    }

    if nt > 1 {
        let mut tube = vec![Complex::default(); nt];
        let plane = ny * nx;
        for i in 0..plane {
            for t in 0..nt {
                tube[t] = volume[t * plane + i];
            }
            ft.process(&mut tube);
            for t in 0..nt {
                volume[t * plane + i] = tube[t];
            }
        }
    }
}

/// Independent band-pass Gaussian noise volumes for `dx` and `dy`, each
/// rescaled to `rms_cm`. Deterministic in `seed`; frame `k` of plane `p`
/// draws from ChaCha stream `p·frames + k`.
pub fn noise_field_sequence(
    params: &NoiseFieldParams,
    spec: &SequenceSpec,
    width: usize,
    height: usize,
) -> Result<Vec<DisplacementField>> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter {
            name: "dimensions",
            reason: format!("{width}x{height} must be at least 1x1"),
        });
    }
    let spatial_nyquist = width.min(height) as f64 / 2.0;
    if params.spatial_band.1 > spatial_nyquist {
        return Err(Error::BandExceedsNyquist {
            axis: "spatial",
            high: params.spatial_band.1,
            nyquist: spatial_nyquist,
        });
    }
    let temporal_nyquist = spec.fps() / 2.0;
    if params.temporal_band.1 > temporal_nyquist {
        return Err(Error::BandExceedsNyquist {
            axis: "temporal",
            high: params.temporal_band.1,
            nyquist: temporal_nyquist,
        });
    }

    let frames = spec.frame_count();
    let dims = (frames, height, width);
    let plane_len = width * height;
    let any_bin = (0..frames).any(|kt| {
        (0..height).any(|ky| (0..width).any(|kx| in_band(params, spec.fps(), dims, (kt, ky, kx))))
    });
    if !any_bin {
        return Err(Error::EmptyBand);
    }
    if params.rms_cm == 0.0 {
        return (0..frames)
            .map(|_| DisplacementField::zeros(width, height))
            .collect();
    }

    let planes: Vec<Vec<f64>> = (0..2u64)
        .into_par_iter()
        .map(|p| {
            let mut volume: Vec<Complex<f64>> = (0..frames)
                .flat_map(|k| gaussian_frame(params.seed, p * frames as u64 + k as u64, plane_len))
                .collect();
            fft3(&mut volume, dims, false);
            for kt in 0..frames {
                for ky in 0..height {
                    for kx in 0..width {
                        if !in_band(params, spec.fps(), dims, (kt, ky, kx)) {
                            volume[(kt * height + ky) * width + kx] = Complex::default();
                        }
                    }
                }
            }
            fft3(&mut volume, dims, true);
            let real: Vec<f64> = volume.iter().map(|c| c.re).collect();
            let rms = (real.iter().map(|v| v * v).sum::<f64>() / real.len() as f64).sqrt();
            let scale = if rms > 0.0 { params.rms_cm / rms } else { 0.0 };
            real.into_iter().map(|v| v * scale).collect()
        })
        .collect();

    (0..frames)
        .map(|k| {
            let range = k * plane_len..(k + 1) * plane_len;
            DisplacementField::new(
                width,
                height,
                planes[0][range.clone()].to_vec(),
                planes[1][range].to_vec(),
            )
        })
        .collect()
}
