//! Projection-signal synthesis: movie decomposition, luminance residuals,
//! the gray-offset projection signal and keyframe selection.

use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::geometry::ViewingGeometry;
use crate::raster::{ColorRaster, DisplacementField, Raster, SignedColorFrame, SignedFrame};
use crate::warp::{warp_image, WarpOptions};

/// What to do with projection values that fall outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ClipPolicy {
    /// Clamp and record the clipped fraction in the report.
    #[default]
    ClampAndReport,
    /// Fail when the clipped fraction of a frame exceeds the threshold.
    ErrorIfOver(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Compensation {
    #[default]
    Off,
    /// Divide the weight by the surface luminance reflectance, floored at `k_min`.
    Reflectance { k_min: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    pub weight: f64,
    pub background: f64,
    pub clip_policy: ClipPolicy,
    pub compensation: Compensation,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            weight: 0.4,
            background: 0.5,
            clip_policy: ClipPolicy::default(),
            compensation: Compensation::default(),
        }
    }
}

impl ProjectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("{} must be non-negative", self.weight),
            });
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::InvalidParameter {
                name: "background",
                reason: format!("{} must lie in [0, 1]", self.background),
            });
        }
        if let ClipPolicy::ErrorIfOver(t) = self.clip_policy {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter {
                    name: "clip_threshold",
                    reason: format!("{t} must lie in [0, 1]"),
                });
            }
        }
        if let Compensation::Reflectance { k_min } = self.compensation {
            if !(k_min > 0.0 && k_min <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "k_min",
                    reason: format!("{k_min} must lie in (0, 1]"),
                });
            }
        }
        Ok(())
    }
}

/// Per-frame clipping statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisReport {
    pub clipped_fraction: f64,
    pub min_pre_clip: f64,
    pub max_pre_clip: f64,
}

/// Temporal mean plus signed per-frame deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieDecomposition {
    pub static_image: ColorRaster,
    pub dynamic: Vec<SignedColorFrame>,
}

impl MovieDecomposition {
    /// `static + dynamic[t]`, without clamping beyond the `[0, 1]` guard.
    pub fn recompose(&self, t: usize) -> Result<ColorRaster> {
        let planes: Vec<Raster> = (0..3)
            .map(|c| {
                let s = self.static_image.plane(c);
                let d = self.dynamic[t].plane(c);
                let data = s.data().iter().zip(d.data()).map(|(a, b)| a + b).collect();
                Raster::from_clamped(s.width(), s.height(), data)
            })
            .collect();
        let [r, g, b]: [Raster; 3] = planes.try_into().expect("three planes");
        ColorRaster::new(r, g, b)
    }
}

fn temporal_mean(movie: &[ColorRaster]) -> Result<ColorRaster> {
    let first = movie.first().ok_or(Error::EmptySequence)?;
    for (i, f) in movie.iter().enumerate() {
        check_dims(first.dims(), f.dims()).map_err(Error::at_frame(i))?;
    }
    let (w, h) = first.dims();
    // incremental mean: exact for constant sequences
    let planes: Vec<Raster> = (0..3)
        .map(|c| {
            let mut mean = vec![0.0; w * h];
            for (k, f) in movie.iter().enumerate() {
                let n = (k + 1) as f64;
                for (m, v) in mean.iter_mut().zip(f.plane(c).data()) {
                    *m += (v - *m) / n;
                }
            }
            Raster::from_clamped(w, h, mean)
        })
        .collect();
    let [r, g, b]: [Raster; 3] = planes.try_into().expect("three planes");
    ColorRaster::new(r, g, b)
}

/// Splits a movie into its per-pixel temporal mean and signed residual frames.
pub fn decompose_movie(movie: &[ColorRaster]) -> Result<MovieDecomposition> {
    let static_image = temporal_mean(movie)?;
    let dynamic = movie
        .iter()
        .map(|f| SignedColorFrame::difference(f, &static_image))
        .collect::<Result<_>>()?;
    Ok(MovieDecomposition {
        static_image,
        dynamic,
    })
}

/// `frame - static`, pixelwise.
pub fn luminance_residual(lum_frame: &Raster, lum_static: &Raster) -> Result<SignedFrame> {
    SignedFrame::difference(lum_frame, lum_static)
}

/// Unclipped projection values `w_eff·residual + B`.
pub fn projection_values(
    residual: &SignedFrame,
    params: &ProjectionParams,
    k_lum: Option<&Raster>,
) -> Result<Vec<f64>> {
    params.validate()?;
    let b = params.background;
    match params.compensation {
        Compensation::Off => Ok(residual
            .data()
            .iter()
            .map(|r| params.weight * r + b)
            .collect()),
        Compensation::Reflectance { k_min } => {
            let k = k_lum.ok_or(Error::MissingReflectance)?;
            check_dims(residual.dims(), k.dims())?;
            Ok(residual
                .data()
                .iter()
                .zip(k.data())
                .map(|(r, k)| params.weight / k.max(k_min) * r + b)
                .collect())
        }
    }
}

/// Projector image for one residual frame, clipped per `params.clip_policy`.
pub fn projection_signal(
    residual: &SignedFrame,
    params: &ProjectionParams,
    k_lum: Option<&Raster>,
) -> Result<(Raster, SynthesisReport)> {
    let raw = projection_values(residual, params, k_lum)?;
    let clipped = raw.iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
    let report = SynthesisReport {
        clipped_fraction: clipped as f64 / raw.len() as f64,
        min_pre_clip: raw.iter().copied().fold(f64::INFINITY, f64::min),
        max_pre_clip: raw.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    if let ClipPolicy::ErrorIfOver(threshold) = params.clip_policy {
        if report.clipped_fraction > threshold {
            return Err(Error::ClipThresholdExceeded {
                fraction: report.clipped_fraction,
                threshold,
            });
        }
    }
    let (w, h) = residual.dims();
    Ok((Raster::from_clamped(w, h, raw), report))
}

/// Index of the frame closest (RMS over all channels) to the temporal mean.
/// Ties go to the lowest index.
pub fn select_keyframe(movie: &[ColorRaster]) -> Result<usize> {
    let mean = temporal_mean(movie)?;
    let mut best = (0, f64::INFINITY);
    for (i, frame) in movie.iter().enumerate() {
        let mut sq = 0.0;
        let mut n = 0usize;
        for c in 0..3 {
            for (a, b) in frame.plane(c).data().iter().zip(mean.plane(c).data()) {
                sq += (a - b) * (a - b);
                n += 1;
            }
        }
        let rms = (sq / n as f64).sqrt();
        if rms < best.1 {
            best = (i, rms);
        }
    }
    Ok(best.0)
}

/// Projector frames and their clipping reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSequence {
    pub frames: Vec<Raster>,
    pub reports: Vec<SynthesisReport>,
}

/// Warp the target luminance by each field, subtract the target and map the
/// residual to a projector frame.
pub fn build_projection_sequence(
    target_lum: &Raster,
    fields: &[DisplacementField],
    geom: &ViewingGeometry,
    warp_opts: &WarpOptions,
    params: &ProjectionParams,
    k_lum: Option<&Raster>,
) -> Result<ProjectionSequence> {
    params.validate()?;
    let results: Vec<(Raster, SynthesisReport)> = fields
        .par_iter()
        .enumerate()
        .map(|(i, field)| {
            let frame = || {
                let warped = warp_image(target_lum, field, geom, warp_opts)?;
                let residual = luminance_residual(&warped, target_lum)?;
                projection_signal(&residual, params, k_lum)
            };
            frame().map_err(Error::at_frame(i))
        })
        .collect::<Result<_>>()?;
    let (frames, reports) = results.into_iter().unzip();
    Ok(ProjectionSequence { frames, reports })
}
