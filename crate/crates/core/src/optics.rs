//! Observer-side image formation: projector light on a Lambertian print,
//! projector blur, and viewing through a transmissive LCD.

use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::raster::{ColorRaster, Raster};
use crate::warp::{resolve_index, Boundary};

/// Ambient illuminance in normalized units (may exceed 1).
#[derive(Debug, Clone, PartialEq)]
pub enum Ambient {
    Uniform(f64),
    Map(ColorRaster),
}

impl Ambient {
    #[inline]
    fn at(&self, channel: usize, index: usize) -> f64 {
        match self {
            Ambient::Uniform(v) => *v,
            Ambient::Map(m) => m.plane(channel).data()[index],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSetup {
    /// Per-channel albedo of the projection target.
    pub reflectance: ColorRaster,
    pub ambient: Ambient,
    /// Gaussian blur of the projected image in pixels; 0 disables it.
    pub blur_sigma: f64,
    pub blur_boundary: Boundary,
}

impl SceneSetup {
    /// Scene with no ambient light and sharp projection.
    pub fn new(reflectance: ColorRaster) -> Self {
        Self {
            reflectance,
            ambient: Ambient::Uniform(0.0),
            blur_sigma: 0.0,
            blur_boundary: Boundary::Clamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "blur_sigma",
                reason: format!("{} must be non-negative", self.blur_sigma),
            });
        }
        match &self.ambient {
            Ambient::Uniform(v) if !(v.is_finite() && *v >= 0.0) => Err(Error::InvalidParameter {
                name: "ambient",
                reason: format!("{v} must be non-negative"),
            }),
            Ambient::Map(m) => check_dims(self.reflectance.dims(), m.dims()),
            _ => Ok(()),
        }
    }
}

/// Normalized 1D Gaussian taps with radius `ceil(3σ)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian blur. `sigma == 0` returns the input unchanged.
pub fn gaussian_blur(src: &Raster, sigma: f64, boundary: Boundary) -> Raster {
    if sigma <= 0.0 {
        return src.clone();
    }
    let (w, h) = src.dims();
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;

    let mut horiz = vec![0.0; w * h];
    horiz.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = kernel
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let sx = resolve_index(x as isize + k as isize - radius, w, boundary);
                    t * src.get(sx, y)
                })
                .sum();
        }
    });

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            *v = kernel
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let sy = resolve_index(y as isize + k as isize - radius, h, boundary);
                    t * horiz[sy * w + x]
                })
                .sum();
        }
    });
    Raster::from_clamped(w, h, out)
}

/// Unclamped `K_c·(Env_c + blur(P))` for each channel.
pub fn composite_values(scene: &SceneSetup, projection: &Raster) -> Result<[Vec<f64>; 3]> {
    scene.validate()?;
    check_dims(scene.reflectance.dims(), projection.dims())?;
    let p = gaussian_blur(projection, scene.blur_sigma, scene.blur_boundary);
    let channel = |c: usize| -> Vec<f64> {
        scene
            .reflectance
            .plane(c)
            .data()
            .iter()
            .zip(p.data())
            .enumerate()
            .map(|(i, (k, p))| k * (scene.ambient.at(c, i) + p))
            .collect()
    };
    Ok([channel(0), channel(1), channel(2)])
}

/// Appearance of the target under ambient light plus an achromatic
/// projection, clamped to `[0, 1]`.
pub fn lambertian_composite(scene: &SceneSetup, projection: &Raster) -> Result<ColorRaster> {
    let (w, h) = projection.dims();
    let [r, g, b] = composite_values(scene, projection)?;
    ColorRaster::new(
        Raster::from_clamped(w, h, r),
        Raster::from_clamped(w, h, g),
        Raster::from_clamped(w, h, b),
    )
}

/// Frame-wise [`lambertian_composite`].
pub fn simulate_perceived_sequence(
    scene: &SceneSetup,
    projections: &[Raster],
) -> Result<Vec<ColorRaster>> {
    projections
        .par_iter()
        .enumerate()
        .map(|(i, p)| lambertian_composite(scene, p).map_err(Error::at_frame(i)))
        .collect()
}

/// Static appearance under a uniform projection at `background`.
pub fn baseline_appearance(scene: &SceneSetup, background: f64) -> Result<ColorRaster> {
    let (w, h) = scene.reflectance.dims();
    lambertian_composite(scene, &Raster::filled(w, h, background)?)
}

/// Object seen through a transmissive display: `object_c · transmittance`.
pub fn lcd_composite(object: &ColorRaster, transmittance: &Raster) -> Result<ColorRaster> {
    check_dims(object.dims(), transmittance.dims())?;
    let (w, h) = object.dims();
    let plane = |c: usize| {
        let data = object
            .plane(c)
            .data()
            .iter()
            .zip(transmittance.data())
            .map(|(o, t)| o * t)
            .collect();
        Raster::from_clamped(w, h, data)
    };
    ColorRaster::new(plane(0), plane(1), plane(2))
}
