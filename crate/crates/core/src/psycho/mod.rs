//! Stimulus grids for the two deformation experiments and psychometric analysis.

pub mod fit;
pub mod trials;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{sinusoidal_field, SinusoidParams};
use crate::geometry::{SequenceSpec, ViewingGeometry};
use crate::optics::{simulate_perceived_sequence, SceneSetup};
use crate::raster::{to_luminance, ColorRaster, DisplacementField, Raster};
use crate::synth::{build_projection_sequence, ProjectionParams, SynthesisReport};
use crate::warp::{warp_color, WarpOptions};

pub use fit::{
    critical_amplitude, fit_cumulative_gaussian, fit_cumulative_gaussian_from, log_likelihood,
    normal_cdf, pse, sample_observer, Orientation, PsychometricDataset, PsychometricFit, Trial,
};

pub const EXP1_AMPLITUDES_CM: [f64; 6] = [0.1, 0.2, 0.4, 0.8, 1.7, 3.3];
pub const EXP1_SPATIAL_FREQS: [u32; 3] = [1, 2, 4];
pub const EXP1_DISTANCES_CM: [f64; 2] = [110.0, 220.0];
pub const EXP1_TEMPORAL_FREQ_HZ: f64 = 1.0;

pub const EXP2_REFERENCE_CM: f64 = 0.21;
pub const EXP2_LEFT_LEVELS_CM: [f64; 8] = [0.05, 0.1, 0.15, 0.21, 0.26, 0.31, 0.36, 0.40];
pub const EXP2_DISTANCE_CM: f64 = 110.0;

const LEVEL_EPS: f64 = 1e-9;

fn on_grid(v: f64, grid: &[f64]) -> bool {
    grid.iter().any(|g| (g - v).abs() < LEVEL_EPS)
}

/// One cell of the visibility experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp1Condition {
    amplitude_cm: f64,
    spatial_freq: u32,
    distance_cm: f64,
}

impl Exp1Condition {
    pub fn new(amplitude_cm: f64, spatial_freq: u32, distance_cm: f64) -> Result<Self> {
        if !on_grid(amplitude_cm, &EXP1_AMPLITUDES_CM) {
            return Err(Error::InvalidLevel(amplitude_cm));
        }
        if !EXP1_SPATIAL_FREQS.contains(&spatial_freq) {
            return Err(Error::InvalidParameter {
                name: "spatial_freq",
                reason: format!("{spatial_freq} not in {EXP1_SPATIAL_FREQS:?}"),
            });
        }
        if !on_grid(distance_cm, &EXP1_DISTANCES_CM) {
            return Err(Error::InvalidParameter {
                name: "distance_cm",
                reason: format!("{distance_cm} not in {EXP1_DISTANCES_CM:?}"),
            });
        }
        Ok(Self {
            amplitude_cm,
            spatial_freq,
            distance_cm,
        })
    }

    /// All 3 × 6 conditions at one viewing distance, frequency-major.
    pub fn grid(distance_cm: f64) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(18);
        for fs in EXP1_SPATIAL_FREQS {
            for a in EXP1_AMPLITUDES_CM {
                out.push(Self::new(a, fs, distance_cm)?);
            }
        }
        Ok(out)
    }

    pub fn amplitude_cm(&self) -> f64 {
        self.amplitude_cm
    }

    pub fn spatial_freq(&self) -> u32 {
        self.spatial_freq
    }

    pub fn distance_cm(&self) -> f64 {
        self.distance_cm
    }

    /// Directory-safe identifier, e.g. `d110_fs2_a0.40`.
    pub fn key(&self) -> String {
        format!(
            "d{}_fs{}_a{:.2}",
            self.distance_cm, self.spatial_freq, self.amplitude_cm
        )
    }

    pub fn sinusoid(&self, spatial_phase: f64) -> SinusoidParams {
        SinusoidParams {
            amplitude_cm: self.amplitude_cm,
            spatial_freq: self.spatial_freq as f64,
            spatial_phase,
            temporal_freq: EXP1_TEMPORAL_FREQ_HZ,
            temporal_phase: 0.0,
        }
    }
}

/// Spatial phase drawn uniformly from `[0, 2π)`.
pub fn random_spatial_phase(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random::<f64>() * TAU
}

/// Fields for the one-second motion segment: frame `k` at `t = k / fps`.
pub fn exp1_fields(
    cond: &Exp1Condition,
    spatial_phase: f64,
    spec: &SequenceSpec,
    width: usize,
    height: usize,
) -> Result<Vec<DisplacementField>> {
    let fps = spec.frames_per_second()?;
    let params = cond.sinusoid(spatial_phase);
    (0..fps)
        .map(|k| sinusoidal_field(&params, k as f64 / spec.fps(), width, height))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp1Stimulus {
    /// One second of motion followed by one second of uniform background.
    pub frames: Vec<Raster>,
    pub spatial_phase: f64,
    pub reports: Vec<SynthesisReport>,
}

/// Projector frames for one visibility-experiment trial. Only `spec.fps`
/// is consulted; the layout is always 1 s of motion then 1 s of uniform `B`.
pub fn exp1_stimulus(
    target_lum: &Raster,
    cond: &Exp1Condition,
    geom: &ViewingGeometry,
    spec: &SequenceSpec,
    params: &ProjectionParams,
    warp_opts: &WarpOptions,
    seed: u64,
) -> Result<Exp1Stimulus> {
    let spatial_phase = random_spatial_phase(seed);
    let (w, h) = target_lum.dims();
    let fields = exp1_fields(cond, spatial_phase, spec, w, h)?;
    let motion = build_projection_sequence(target_lum, &fields, geom, warp_opts, params, None)?;
    let uniform = Raster::filled(w, h, params.background)?;
    let mut frames = motion.frames;
    frames.extend(std::iter::repeat_n(uniform, fields.len()));
    Ok(Exp1Stimulus {
        frames,
        spatial_phase,
        reports: motion.reports,
    })
}

/// How the right-hand (reference) movie is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exp2Mode {
    PixelWarp,
    DeformationLamps,
}

/// Shared inputs for the magnitude-matching experiment.
#[derive(Debug, Clone)]
pub struct Exp2Assets {
    pub picture: ColorRaster,
    /// Scene for the projected side; its reflectance is normally `picture`.
    pub scene: SceneSetup,
    pub geom: ViewingGeometry,
    pub spec: SequenceSpec,
    pub spatial_freq: f64,
    pub spatial_phase: f64,
    pub params: ProjectionParams,
    pub warp: WarpOptions,
}

impl Exp2Assets {
    fn sinusoid(&self, amplitude_cm: f64) -> SinusoidParams {
        SinusoidParams {
            amplitude_cm,
            spatial_freq: self.spatial_freq,
            spatial_phase: self.spatial_phase,
            temporal_freq: EXP1_TEMPORAL_FREQ_HZ,
            temporal_phase: 0.0,
        }
    }

    pub fn fields(&self, amplitude_cm: f64) -> Result<Vec<DisplacementField>> {
        let (w, h) = self.picture.dims();
        let fps = self.spec.frames_per_second()?;
        let p = self.sinusoid(amplitude_cm);
        (0..fps)
            .map(|k| sinusoidal_field(&p, k as f64 / self.spec.fps(), w, h))
            .collect()
    }

    fn pixel_warp_movie(&self, amplitude_cm: f64) -> Result<Vec<ColorRaster>> {
        self.fields(amplitude_cm)?
            .iter()
            .map(|f| warp_color(&self.picture, f, &self.geom, &self.warp))
            .collect()
    }

    fn lamps_movie(&self, amplitude_cm: f64) -> Result<Vec<ColorRaster>> {
        let target = to_luminance(&self.picture);
        let fields = self.fields(amplitude_cm)?;
        let p = build_projection_sequence(&target, &fields, &self.geom, &self.warp, &self.params, None)?;
        simulate_perceived_sequence(&self.scene, &p.frames)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Pair {
    pub left: Vec<ColorRaster>,
    pub right: Vec<ColorRaster>,
}

/// Left: full-color pixel warp at `left_amp_cm`. Right: the 0.21 cm
/// reference rendered per `mode`.
pub fn exp2_stimulus_pair(left_amp_cm: f64, mode: Exp2Mode, assets: &Exp2Assets) -> Result<Exp2Pair> {
    if !on_grid(left_amp_cm, &EXP2_LEFT_LEVELS_CM) {
        return Err(Error::InvalidLevel(left_amp_cm));
    }
    let left = assets.pixel_warp_movie(left_amp_cm)?;
    let right = match mode {
        Exp2Mode::PixelWarp => assets.pixel_warp_movie(EXP2_REFERENCE_CM)?,
        Exp2Mode::DeformationLamps => assets.lamps_movie(EXP2_REFERENCE_CM)?,
    };
    Ok(Exp2Pair { left, right })
}
