// Straight-line reference for the projection chain: pixel warp by inverse
// bilinear sampling with edge clamping, residual against the target, gray
// offset, then Lambertian reflection. Plain loops over flat arrays; shares no
// code with the library.
#![allow(dead_code)]

pub struct Plane {
    pub w: usize,
    pub h: usize,
    pub v: Vec<f64>,
}

fn px(p: &Plane, x: isize, y: isize) -> f64 {
    let xc = x.max(0).min(p.w as isize - 1) as usize;
    let yc = y.max(0).min(p.h as isize - 1) as usize;
    p.v[yc * p.w + xc]
}

/// Warped target minus target, then `weight * r + background`, clamped.
pub fn projection_frame(
    target: &Plane,
    dx_cm: &[f64],
    dy_cm: &[f64],
    pitch_cm: f64,
    weight: f64,
    background: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; target.w * target.h];
    for y in 0..target.h {
        for x in 0..target.w {
            let i = y * target.w + x;
            let sx = x as f64 - dx_cm[i] / pitch_cm;
            let sy = y as f64 - dy_cm[i] / pitch_cm;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let ax = sx - x0;
            let ay = sy - y0;
            let (x0, y0) = (x0 as isize, y0 as isize);
            let v00 = px(target, x0, y0);
            let v10 = px(target, x0 + 1, y0);
            let v01 = px(target, x0, y0 + 1);
            let v11 = px(target, x0 + 1, y0 + 1);
            let warped = v00 * (1.0 - ax) * (1.0 - ay)
                + v10 * ax * (1.0 - ay)
                + v01 * (1.0 - ax) * ay
                + v11 * ax * ay;
            let warped = warped.clamp(0.0, 1.0);
            let r = warped - target.v[i];
            out[i] = (weight * r + background).clamp(0.0, 1.0);
        }
    }
    out
}

/// `K_c * (env + P)` clamped, for each of the three reflectance planes.
pub fn composite(reflectance: &[Vec<f64>; 3], env: f64, projection: &[f64]) -> [Vec<f64>; 3] {
    let ch = |c: usize| {
        reflectance[c]
            .iter()
            .zip(projection)
            .map(|(k, p)| (k * (env + p)).clamp(0.0, 1.0))
            .collect::<Vec<f64>>()
    };
    [ch(0), ch(1), ch(2)]
}

/// `A sin(2π fs y/h + φs) cos(2π ft t + φt)` for every pixel.
#[allow(clippy::too_many_arguments)]
pub fn sinusoid_dx(w: usize, h: usize, a: f64, fs: f64, phs: f64, ft: f64, pht: f64, t: f64) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut dx = Vec::with_capacity(w * h);
    for y in 0..h {
        let v = a * (tau * fs * y as f64 / h as f64 + phs).sin() * (tau * ft * t + pht).cos();
        for _ in 0..w {
            dx.push(v);
        }
    }
    dx
}

/// 64×64 diagonal gradient used by the demo configuration.
pub fn gradient(w: usize, h: usize) -> Plane {
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            v.push(0.1 + 0.8 * (x + y) as f64 / (w + h - 2) as f64);
        }
    }
    Plane { w, h, v }
}
