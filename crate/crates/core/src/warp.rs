//! Inverse-mapping image warps driven by displacement fields.
//!
//! For a field `d` (content displacement in cm) the output pixel `(x, y)`
//! samples the source at `(x - dx_px, y - dy_px)`.

use rayon::prelude::*;

use crate::error::{check_dims, Result};
use crate::geometry::ViewingGeometry;
use crate::raster::{ColorRaster, DisplacementField, Raster};

/// How samples outside the image are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Repeat the edge pixel.
    #[default]
    Clamp,
    /// Wrap around.
    Periodic,
    /// Reflect about the image edge, repeating the edge pixel.
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Bilinear,
    /// Keys cubic convolution, `a = -0.5`.
    Bicubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WarpOptions {
    pub boundary: Boundary,
    pub interpolation: Interpolation,
}

/// Maps a possibly out-of-range index into `0..n`.
#[inline]
pub fn resolve_index(i: isize, n: usize, boundary: Boundary) -> usize {
    let n_i = n as isize;
    match boundary {
        Boundary::Clamp => i.clamp(0, n_i - 1) as usize,
        Boundary::Periodic => i.rem_euclid(n_i) as usize,
        Boundary::Mirror => {
            let m = i.rem_euclid(2 * n_i);
            (if m < n_i { m } else { 2 * n_i - 1 - m }) as usize
        }
    }
}

// Coordinates this close to an integer are treated as integral, so that
// integer pixel shifts expressed in cm survive the cm -> px division.
const SNAP_EPS: f64 = 1e-9;

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP_EPS {
        r
    } else {
        v
    }
}

#[inline]
fn cubic_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * t * t * t - 5.0 * A * t * t + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

/// Samples `src` at fractional position `(sx, sy)`.
pub fn sample(src: &Raster, sx: f64, sy: f64, opts: &WarpOptions) -> f64 {
    let (w, h) = src.dims();
    let (sx, sy) = (snap(sx), snap(sy));
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let (x0, y0) = (x0 as isize, y0 as isize);
    let at = |x: isize, y: isize| {
        src.get(
            resolve_index(x, w, opts.boundary),
            resolve_index(y, h, opts.boundary),
        )
    };
    match opts.interpolation {
        Interpolation::Bilinear => {
            let top = (1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0);
            let bottom = (1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1);
            (1.0 - fy) * top + fy * bottom
        }
        Interpolation::Bicubic => {
            let wx = [
                cubic_weight(1.0 + fx),
                cubic_weight(fx),
                cubic_weight(1.0 - fx),
                cubic_weight(2.0 - fx),
            ];
            let wy = [
                cubic_weight(1.0 + fy),
                cubic_weight(fy),
                cubic_weight(1.0 - fy),
                cubic_weight(2.0 - fy),
            ];
            let mut acc = 0.0;
            for (j, wyj) in wy.iter().enumerate() {
                let mut row = 0.0;
                for (i, wxi) in wx.iter().enumerate() {
                    row += wxi * at(x0 - 1 + i as isize, y0 - 1 + j as isize);
                }
                acc += wyj * row;
            }
            acc
        }
    }
}

/// Warps a single plane. The output is clamped to `[0, 1]`.
pub fn warp_image(
    src: &Raster,
    field: &DisplacementField,
    geom: &ViewingGeometry,
    opts: &WarpOptions,
) -> Result<Raster> {
    check_dims(src.dims(), field.dims())?;
    let (w, h) = src.dims();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let (dx, dy) = field.at(x, y);
            let sx = x as f64 - geom.cm_to_px(dx);
            let sy = y as f64 - geom.cm_to_px(dy);
            *v = sample(src, sx, sy, opts);
        }
    });
    Ok(Raster::from_clamped(w, h, out))
}

/// Plane-wise [`warp_image`].
pub fn warp_color(
    src: &ColorRaster,
    field: &DisplacementField,
    geom: &ViewingGeometry,
    opts: &WarpOptions,
) -> Result<ColorRaster> {
    let [r, g, b] = src.planes();
    ColorRaster::new(
        warp_image(r, field, geom, opts)?,
        warp_image(g, field, geom, opts)?,
        warp_image(b, field, geom, opts)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_geom() -> ViewingGeometry {
        ViewingGeometry::new(110.0, 1.0).unwrap()
    }

    #[test]
    fn resolve_modes() {
        assert_eq!(resolve_index(-1, 4, Boundary::Clamp), 0);
        assert_eq!(resolve_index(5, 4, Boundary::Clamp), 3);
        assert_eq!(resolve_index(-1, 4, Boundary::Periodic), 3);
        assert_eq!(resolve_index(9, 4, Boundary::Periodic), 1);
        assert_eq!(resolve_index(-1, 4, Boundary::Mirror), 0);
        assert_eq!(resolve_index(-2, 4, Boundary::Mirror), 1);
        assert_eq!(resolve_index(4, 4, Boundary::Mirror), 3);
        assert_eq!(resolve_index(5, 4, Boundary::Mirror), 2);
        assert_eq!(resolve_index(8, 4, Boundary::Mirror), 0);
        assert_eq!(resolve_index(0, 1, Boundary::Mirror), 0);
        assert_eq!(resolve_index(-3, 1, Boundary::Mirror), 0);
    }

    #[test]
    fn zero_field_is_identity() {
        let src = Raster::from_fn(7, 5, |x, y| ((x * 3 + y * 7) % 11) as f64 / 10.0).unwrap();
        let zero = DisplacementField::zeros(7, 5).unwrap();
        for interpolation in [Interpolation::Bilinear, Interpolation::Bicubic] {
            for boundary in [Boundary::Clamp, Boundary::Periodic, Boundary::Mirror] {
                let opts = WarpOptions {
                    boundary,
                    interpolation,
                };
                assert_eq!(warp_image(&src, &zero, &unit_geom(), &opts).unwrap(), src);
            }
        }
    }

    #[test]
    fn integer_shift_periodic_is_circular() {
        let src = Raster::from_fn(6, 3, |x, y| (x + 6 * y) as f64 / 17.0).unwrap();
        // 3 px expressed through a non-dyadic pitch
        let geom = ViewingGeometry::for_print(110.0, 13.2, 512).unwrap();
        let field = DisplacementField::uniform(6, 3, geom.px_to_cm(3.0), 0.0).unwrap();
        let opts = WarpOptions {
            boundary: Boundary::Periodic,
            ..Default::default()
        };
        let out = warp_image(&src, &field, &geom, &opts).unwrap();
        for y in 0..3 {
            for x in 0..6 {
                assert_eq!(out.get(x, y), src.get((x + 3) % 6, y));
            }
        }
    }

    #[test]
    fn half_pixel_bilinear() {
        let src = Raster::new(2, 1, vec![0.0, 1.0]).unwrap();
        let field = DisplacementField::uniform(2, 1, 0.5, 0.0).unwrap();
        let out = warp_image(&src, &field, &unit_geom(), &WarpOptions::default()).unwrap();
        assert_eq!(out.get(1, 0), 0.5);
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn bicubic_output_clamped() {
        let src = Raster::from_fn(8, 1, |x, _| if x < 4 { 0.0 } else { 1.0 }).unwrap();
        let field = DisplacementField::uniform(8, 1, 0.3, 0.0).unwrap();
        let opts = WarpOptions {
            interpolation: Interpolation::Bicubic,
            ..Default::default()
        };
        let out = warp_image(&src, &field, &unit_geom(), &opts).unwrap();
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        // unclamped kernel overshoots on a step edge
        let raw = sample(&src, 4.3, 0.0, &opts);
        assert!(raw > 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let src = Raster::filled(4, 4, 0.5).unwrap();
        let field = DisplacementField::zeros(4, 3).unwrap();
        assert!(warp_image(&src, &field, &unit_geom(), &WarpOptions::default()).is_err());
    }

    #[test]
    fn gray_color_matches_plane_warp() {
        let gray = Raster::from_fn(6, 6, |x, y| ((x * y) % 5) as f64 / 4.0).unwrap();
        let color = ColorRaster::from_gray(&gray);
        let field = DisplacementField::new(
            6,
            6,
            (0..36).map(|i| (i % 5) as f64 * 0.3 - 0.6).collect(),
            (0..36).map(|i| (i % 3) as f64 * 0.2).collect(),
        )
        .unwrap();
        let opts = WarpOptions::default();
        let plane = warp_image(&gray, &field, &unit_geom(), &opts).unwrap();
        let warped = warp_color(&color, &field, &unit_geom(), &opts).unwrap();
        for c in 0..3 {
            assert_eq!(warped.plane(c), &plane);
        }
    }
}
