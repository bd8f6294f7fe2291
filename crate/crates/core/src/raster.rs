//! Image and field containers shared by every stage of the pipeline.
//!
//! All intensities are normalized `f64` values. Displayable images ([`Raster`],
//! [`ColorRaster`]) live in `[0, 1]`; differences between images
//! ([`SignedFrame`]) live in `[-1, 1]`.

use crate::error::{check_dims, Error, Result};

/// Rec. 709 luma weights applied to (R, G, B).
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

fn check_shape(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter {
            name: "dimensions",
            reason: format!("{width}x{height} must be at least 1x1"),
        });
    }
    if width * height != len {
        return Err(Error::InvalidParameter {
            name: "data",
            reason: format!("length {len} does not match {width}x{height}"),
        });
    }
    Ok(())
}

fn check_range(data: &[f64], lo: f64, hi: f64, name: &'static str) -> Result<()> {
    if let Some((i, v)) = data
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < lo || **v > hi)
    {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("value {v} at index {i} outside [{lo}, {hi}]"),
        });
    }
    Ok(())
}

/// Single-plane image with intensities in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, data.len())?;
        check_range(&data, 0.0, 1.0, "raster")?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a raster by evaluating `f(x, y)` at every pixel; results are
    /// clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_shape(width, height, width * height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        check_range(&data, f64::NEG_INFINITY, f64::INFINITY, "raster")?;
        Ok(Self::from_clamped(width, height, data))
    }

    /// Clamps every value into `[0, 1]`. NaN maps to 0.
    pub(crate) fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Signed single-plane frame with values in `[-1, 1]`, e.g. a luminance residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedFrame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SignedFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, data.len())?;
        check_range(&data, -1.0, 1.0, "signed frame")?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    /// Pixelwise `a - b`.
    pub fn difference(a: &Raster, b: &Raster) -> Result<Self> {
        check_dims(a.dims(), b.dims())?;
        let data = a.data.iter().zip(&b.data).map(|(p, q)| p - q).collect();
        Ok(Self {
            width: a.width,
            height: a.height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Three-plane (R, G, B) image with values in `[0, 1]`.
///
/// Used for movie frames as well as for per-channel reflectance maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorRaster {
    planes: [Raster; 3],
}

impl ColorRaster {
    pub fn new(r: Raster, g: Raster, b: Raster) -> Result<Self> {
        check_dims(r.dims(), g.dims())?;
        check_dims(r.dims(), b.dims())?;
        Ok(Self { planes: [r, g, b] })
    }

    pub fn from_planes(planes: [Raster; 3]) -> Result<Self> {
        let [r, g, b] = planes;
        Self::new(r, g, b)
    }

    /// Gray image replicated on all three channels.
    pub fn from_gray(gray: &Raster) -> Self {
        Self {
            planes: [gray.clone(), gray.clone(), gray.clone()],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(
            Raster::filled(width, height, rgb[0])?,
            Raster::filled(width, height, rgb[1])?,
            Raster::filled(width, height, rgb[2])?,
        )
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    #[inline]
    pub fn plane(&self, channel: usize) -> &Raster {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Raster; 3] {
        &self.planes
    }

    pub fn into_planes(self) -> [Raster; 3] {
        self.planes
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        [
            self.planes[0].get(x, y),
            self.planes[1].get(x, y),
            self.planes[2].get(x, y),
        ]
    }
}

/// Signed three-plane frame, the per-channel dynamic component of a movie.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedColorFrame {
    planes: [SignedFrame; 3],
}

impl SignedColorFrame {
    pub fn difference(a: &ColorRaster, b: &ColorRaster) -> Result<Self> {
        Ok(Self {
            planes: [
                SignedFrame::difference(a.plane(0), b.plane(0))?,
                SignedFrame::difference(a.plane(1), b.plane(1))?,
                SignedFrame::difference(a.plane(2), b.plane(2))?,
            ],
        })
    }

    #[inline]
    pub fn plane(&self, channel: usize) -> &SignedFrame {
        &self.planes[channel]
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }
}

/// Converts a color image to luminance using [`LUMA_WEIGHTS`].
pub fn to_luminance(image: &ColorRaster) -> Raster {
    let [r, g, b] = image.planes();
    let data = r
        .data
        .iter()
        .zip(&g.data)
        .zip(&b.data)
        .map(|((r, g), b)| LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b)
        .collect();
    Raster::from_clamped(image.width(), image.height(), data)
}

/// Per-pixel displacement in centimeters. `dx` is positive to the right,
/// `dy` positive downwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    width: usize,
    height: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl DisplacementField {
    pub fn new(width: usize, height: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        check_shape(width, height, dx.len())?;
        check_shape(width, height, dy.len())?;
        check_range(&dx, f64::MIN, f64::MAX, "dx")?;
        check_range(&dy, f64::MIN, f64::MAX, "dy")?;
        Ok(Self {
            width,
            height,
            dx,
            dy,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height], vec![0.0; width * height])
    }

    /// Same displacement at every pixel.
    pub fn uniform(width: usize, height: usize, dx_cm: f64, dy_cm: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![dx_cm; width * height],
            vec![dy_cm; width * height],
        )
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    #[inline]
    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    /// Field with every displacement negated.
    pub fn negated(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            dx: self.dx.iter().map(|v| -v).collect(),
            dy: self.dy.iter().map(|v| -v).collect(),
        }
    }

    /// Largest displacement magnitude in cm.
    pub fn max_abs(&self) -> f64 {
        self.dx
            .iter()
            .zip(&self.dy)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luminance_of_gray_is_fixed_point() {
        for v in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let img = ColorRaster::filled(3, 2, [v, v, v]).unwrap();
            let lum = to_luminance(&img);
            assert!(lum.data().iter().all(|l| (l - v).abs() < 1e-12));
        }
    }

    #[test]
    fn luminance_of_red() {
        let img = ColorRaster::filled(1, 1, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(to_luminance(&img).get(0, 0), 0.2126);
        let white = ColorRaster::filled(1, 1, [1.0; 3]).unwrap();
        assert!((to_luminance(&white).get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Raster::new(0, 1, vec![]).is_err());
        assert!(Raster::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Raster::new(1, 1, vec![1.5]).is_err());
        assert!(Raster::new(1, 1, vec![f64::NAN]).is_err());
        assert!(SignedFrame::new(1, 1, vec![-1.0]).is_ok());
        assert!(SignedFrame::new(1, 1, vec![-1.01]).is_err());
        assert!(DisplacementField::new(1, 1, vec![f64::INFINITY], vec![0.0]).is_err());
        let a = Raster::filled(2, 2, 0.0).unwrap();
        let b = Raster::filled(2, 3, 0.0).unwrap();
        assert!(ColorRaster::new(a.clone(), a.clone(), b).is_err());
    }

    #[test]
    fn from_fn_clamps() {
        let r = Raster::from_fn(2, 1, |x, _| if x == 0 { -0.5 } else { 1.5 }).unwrap();
        assert_eq!(r.data(), &[0.0, 1.0]);
    }
}
