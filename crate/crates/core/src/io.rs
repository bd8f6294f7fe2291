//! PNG raster I/O and the `DLF1` displacement-field container.
//!
//! A `DLF1` file is a concatenation of frames. Each frame is the magic bytes
//! `DLF1`, width and height as little-endian `u32`, then the `dx` plane and
//! the `dy` plane as little-endian `f32`, row-major. Displacements are in cm.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::raster::{to_luminance, ColorRaster, DisplacementField, Raster};

pub const FIELD_MAGIC: &[u8; 4] = b"DLF1";

/// Sample depth used when writing PNG files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    Eight,
    #[default]
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// Round-half-up quantization of a `[0, 1]` value.
#[inline]
pub fn quantize(value: f64, depth: BitDepth) -> u16 {
    let max = depth.max_value();
    (value.clamp(0.0, 1.0) * max + 0.5).floor().min(max) as u16
}

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(image_err(path))
}

fn planes_from_rgb16(img: &ImageBuffer<Rgb<u16>, Vec<u16>>) -> Result<ColorRaster> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut planes = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for px in img.pixels() {
        for (c, plane) in planes.iter_mut().enumerate() {
            plane.push(px.0[c] as f64 / 65535.0);
        }
    }
    let [r, g, b] = planes;
    ColorRaster::new(Raster::new(w, h, r)?, Raster::new(w, h, g)?, Raster::new(w, h, b)?)
}

/// Reads a PNG as a color image. Grayscale files are replicated on all
/// channels; alpha is discarded.
pub fn read_color(path: impl AsRef<Path>) -> Result<ColorRaster> {
    let path = path.as_ref();
    let img = decode(path)?;
    match img {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_) => Ok(ColorRaster::from_gray(&gray_from(&img)?)),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => {
            let rgb = img.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let mut planes = [vec![], vec![], vec![]];
            for px in rgb.pixels() {
                for (c, plane) in planes.iter_mut().enumerate() {
                    plane.push(px.0[c] as f64 / 255.0);
                }
            }
            let [r, g, b] = planes;
            ColorRaster::new(Raster::new(w, h, r)?, Raster::new(w, h, g)?, Raster::new(w, h, b)?)
        }
        other => planes_from_rgb16(&other.to_rgb16()),
    }
}

fn gray_from(img: &DynamicImage) -> Result<Raster> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => img
            .to_luma8()
            .pixels()
            .map(|p| p.0[0] as f64 / 255.0)
            .collect(),
        _ => img
            .to_luma16()
            .pixels()
            .map(|p| p.0[0] as f64 / 65535.0)
            .collect(),
    };
    Raster::new(w, h, data)
}

/// Reads a PNG as a single plane. Color files are converted with
/// [`to_luminance`].
pub fn read_gray(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let img = decode(path)?;
    match img {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_) => gray_from(&img),
        _ => Ok(to_luminance(&read_color(path)?)),
    }
}

pub fn write_gray(path: impl AsRef<Path>, raster: &Raster, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (raster.width() as u32, raster.height() as u32);
    let result = match depth {
        BitDepth::Eight => {
            let buf: Vec<u8> = raster.data().iter().map(|&v| quantize(v, depth) as u8).collect();
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, buf)
                .expect("buffer sized from raster")
                .save(path)
        }
        BitDepth::Sixteen => {
            let buf: Vec<u16> = raster.data().iter().map(|&v| quantize(v, depth)).collect();
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, buf)
                .expect("buffer sized from raster")
                .save(path)
        }
    };
    result.map_err(image_err(path))
}

pub fn write_color(path: impl AsRef<Path>, image: &ColorRaster, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let [r, g, b] = image.planes();
    let interleaved = r
        .data()
        .iter()
        .zip(g.data())
        .zip(b.data())
        .flat_map(|((r, g), b)| [*r, *g, *b]);
    let result = match depth {
        BitDepth::Eight => {
            let buf: Vec<u8> = interleaved.map(|v| quantize(v, depth) as u8).collect();
            ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, buf)
                .expect("buffer sized from raster")
                .save(path)
        }
        BitDepth::Sixteen => {
            let buf: Vec<u16> = interleaved.map(|v| quantize(v, depth)).collect();
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, buf)
                .expect("buffer sized from raster")
                .save(path)
        }
    };
    result.map_err(image_err(path))
}

/// Serializes a field sequence. Values are stored as `f32`.
pub fn encode_fields<W: Write>(mut out: W, fields: &[DisplacementField]) -> Result<()> {
    for field in fields {
        out.write_all(FIELD_MAGIC)?;
        out.write_all(&(field.width() as u32).to_le_bytes())?;
        out.write_all(&(field.height() as u32).to_le_bytes())?;
        for plane in [field.dx(), field.dy()] {
            for v in plane {
                out.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses a field sequence; every frame must share the first frame's size.
pub fn decode_fields(bytes: &[u8]) -> Result<Vec<DisplacementField>> {
    if bytes.is_empty() {
        return Err(Error::MalformedHeader("file is empty".into()));
    }
    let mut fields = Vec::new();
    let mut pos = 0usize;
    let mut first_dims = None;
    while pos < bytes.len() {
        let frame = fields.len();
        let header = bytes
            .get(pos..pos + 12)
            .ok_or_else(|| Error::MalformedHeader(format!("frame {frame}: truncated header")))?;
        if &header[..4] != FIELD_MAGIC {
            return Err(Error::MalformedHeader(format!("frame {frame}: bad magic")));
        }
        let w = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let h = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        if w == 0 || h == 0 {
            return Err(Error::MalformedHeader(format!("frame {frame}: zero dimension")));
        }
        match first_dims {
            None => first_dims = Some((w, h)),
            Some((fw, fh)) if (fw, fh) != (w, h) => {
                return Err(Error::FrameDimensionMismatch {
                    frame,
                    expected_w: fw,
                    expected_h: fh,
                    got_w: w,
                    got_h: h,
                })
            }
            _ => {}
        }
        pos += 12;
        let n = w
            .checked_mul(h)
            .ok_or_else(|| Error::MalformedHeader(format!("frame {frame}: size overflow")))?;
        let body = bytes.get(pos..pos + 8 * n).ok_or_else(|| {
            Error::MalformedHeader(format!("frame {frame}: payload shorter than {w}x{h}"))
        })?;
        let values: Vec<f64> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let (dx, dy) = values.split_at(n);
        fields.push(
            DisplacementField::new(w, h, dx.to_vec(), dy.to_vec())
                .map_err(|e| Error::MalformedHeader(format!("frame {frame}: {e}")))?,
        );
        pos += 8 * n;
    }
    Ok(fields)
}

pub fn save_field_sequence(path: impl AsRef<Path>, fields: &[DisplacementField]) -> Result<()> {
    let file = fs::File::create(path)?;
    encode_fields(BufWriter::new(file), fields)
}

pub fn load_field_sequence(path: impl AsRef<Path>) -> Result<Vec<DisplacementField>> {
    decode_fields(&fs::read(path)?)
}
