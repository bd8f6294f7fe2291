//! Python bindings. Images cross the boundary as row-major lists of floats.

use deflamps_core as core;
use deflamps_core::fields::{NoiseFieldParams, SinusoidParams};
use deflamps_core::optics::{Ambient, SceneSetup};
use deflamps_core::psycho::{Orientation, PsychometricDataset};
use deflamps_core::synth::{ClipPolicy, Compensation, ProjectionParams};
use deflamps_core::warp::{Boundary, Interpolation, WarpOptions};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Io(_) | core::Error::Image { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn boundary(name: &str) -> PyResult<Boundary> {
    match name {
        "clamp" => Ok(Boundary::Clamp),
        "periodic" => Ok(Boundary::Periodic),
        "mirror" => Ok(Boundary::Mirror),
        other => Err(PyValueError::new_err(format!("unknown boundary {other:?}"))),
    }
}

fn warp_options(boundary_name: &str, interpolation: &str) -> PyResult<WarpOptions> {
    let interpolation = match interpolation {
        "bilinear" => Interpolation::Bilinear,
        "bicubic" => Interpolation::Bicubic,
        other => return Err(PyValueError::new_err(format!("unknown interpolation {other:?}"))),
    };
    Ok(WarpOptions {
        boundary: boundary(boundary_name)?,
        interpolation,
    })
}

/// Single-channel image with values in [0, 1].
#[pyclass(name = "Raster", module = "deflamps", from_py_object)]
#[derive(Clone)]
pub struct PyRaster(pub core::Raster);

#[pymethods]
impl PyRaster {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        core::Raster::new(width, height, data).map(Self).map_err(err)
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, value: f64) -> PyResult<Self> {
        core::Raster::filled(width, height, value).map(Self).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn data(&self) -> Vec<f64> {
        self.0.data().to_vec()
    }

    fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn __repr__(&self) -> String {
        format!("Raster({}x{})", self.0.width(), self.0.height())
    }
}

/// Three-plane RGB image.
#[pyclass(name = "ColorRaster", module = "deflamps", from_py_object)]
#[derive(Clone)]
pub struct PyColorRaster(pub core::ColorRaster);

#[pymethods]
impl PyColorRaster {
    #[new]
    fn new(r: PyRaster, g: PyRaster, b: PyRaster) -> PyResult<Self> {
        core::ColorRaster::new(r.0, g.0, b.0).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_gray(gray: &PyRaster) -> Self {
        Self(core::ColorRaster::from_gray(&gray.0))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.dims().0
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.dims().1
    }

    fn plane(&self, channel: usize) -> PyResult<PyRaster> {
        if channel > 2 {
            return Err(PyValueError::new_err("channel must be 0, 1 or 2"));
        }
        Ok(PyRaster(self.0.plane(channel).clone()))
    }

    fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.0.get(x, y)
    }

    fn luminance(&self) -> PyRaster {
        PyRaster(core::to_luminance(&self.0))
    }

    fn __repr__(&self) -> String {
        let (w, h) = self.0.dims();
        format!("ColorRaster({w}x{h})")
    }
}

/// Per-pixel displacement in centimetres.
#[pyclass(name = "DisplacementField", module = "deflamps", from_py_object)]
#[derive(Clone)]
pub struct PyDisplacementField(pub core::DisplacementField);

#[pymethods]
impl PyDisplacementField {
    #[new]
    fn new(width: usize, height: usize, dx: Vec<f64>, dy: Vec<f64>) -> PyResult<Self> {
        core::DisplacementField::new(width, height, dx, dy).map(Self).map_err(err)
    }

    #[staticmethod]
    fn uniform(width: usize, height: usize, dx: f64, dy: f64) -> PyResult<Self> {
        core::DisplacementField::uniform(width, height, dx, dy).map(Self).map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.dims().0
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.dims().1
    }

    fn dx(&self) -> Vec<f64> {
        self.0.dx().to_vec()
    }

    fn dy(&self) -> Vec<f64> {
        self.0.dy().to_vec()
    }

    fn at(&self, x: usize, y: usize) -> (f64, f64) {
        self.0.at(x, y)
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
}

#[pyclass(name = "ViewingGeometry", module = "deflamps", from_py_object)]
#[derive(Clone, Copy)]
pub struct PyViewingGeometry(pub core::ViewingGeometry);

#[pymethods]
impl PyViewingGeometry {
    #[new]
    fn new(distance_cm: f64, pixel_pitch_cm: f64) -> PyResult<Self> {
        core::ViewingGeometry::new(distance_cm, pixel_pitch_cm).map(Self).map_err(err)
    }

    /// Geometry for an image printed `size_cm` wide across `pixels` columns.
    #[staticmethod]
    fn for_print(distance_cm: f64, size_cm: f64, pixels: usize) -> PyResult<Self> {
        core::ViewingGeometry::for_print(distance_cm, size_cm, pixels).map(Self).map_err(err)
    }

    #[getter]
    fn distance_cm(&self) -> f64 {
        self.0.distance_cm()
    }

    #[getter]
    fn pixel_pitch_cm(&self) -> f64 {
        self.0.pixel_pitch_cm()
    }

    fn cm_to_px(&self, length_cm: f64) -> f64 {
        self.0.cm_to_px(length_cm)
    }

    fn px_to_cm(&self, length_px: f64) -> f64 {
        self.0.px_to_cm(length_px)
    }

    fn visual_angle_deg(&self, extent_cm: f64) -> f64 {
        self.0.visual_angle_deg(extent_cm)
    }
}

#[pyclass(name = "PsychometricFit", module = "deflamps")]
pub struct PyPsychometricFit(core::psycho::PsychometricFit);

#[pymethods]
impl PyPsychometricFit {
    /// 50% point: critical amplitude or PSE.
    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    #[getter]
    fn log_likelihood(&self) -> f64 {
        self.0.log_likelihood
    }

    fn probability(&self, level: f64) -> f64 {
        self.0.probability(level)
    }

    fn __repr__(&self) -> String {
        format!("PsychometricFit(mu={:.4}, sigma={:.4})", self.0.mu, self.0.sigma)
    }
}

#[pyfunction]
fn visual_angle_deg(extent_cm: f64, distance_cm: f64) -> f64 {
    core::visual_angle_deg(extent_cm, distance_cm)
}

#[pyfunction]
fn to_luminance(image: &PyColorRaster) -> PyRaster {
    PyRaster(core::to_luminance(&image.0))
}

/// Horizontal sinusoidal shear at time `t` seconds.
#[pyfunction]
#[pyo3(signature = (amplitude_cm, spatial_freq, t, width, height, spatial_phase=0.0, temporal_freq=1.0, temporal_phase=0.0))]
#[allow(clippy::too_many_arguments)]
fn sinusoidal_field(
    amplitude_cm: f64,
    spatial_freq: f64,
    t: f64,
    width: usize,
    height: usize,
    spatial_phase: f64,
    temporal_freq: f64,
    temporal_phase: f64,
) -> PyResult<PyDisplacementField> {
    let p = SinusoidParams {
        amplitude_cm,
        spatial_freq,
        spatial_phase,
        temporal_freq,
        temporal_phase,
    };
    core::fields::sinusoidal_field(&p, t, width, height)
        .map(PyDisplacementField)
        .map_err(err)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn noise_field_sequence(
    rms_cm: f64,
    spatial_band: (f64, f64),
    temporal_band: (f64, f64),
    seed: u64,
    frame_count: usize,
    fps: f64,
    width: usize,
    height: usize,
) -> PyResult<Vec<PyDisplacementField>> {
    let p = NoiseFieldParams {
        rms_cm,
        spatial_band,
        temporal_band,
        seed,
    };
    let spec = core::SequenceSpec::new(frame_count, fps).map_err(err)?;
    let fields = core::fields::noise_field_sequence(&p, &spec, width, height).map_err(err)?;
    Ok(fields.into_iter().map(PyDisplacementField).collect())
}

#[pyfunction]
#[pyo3(signature = (src, field, geometry, boundary="clamp", interpolation="bilinear"))]
fn warp_image(
    src: &PyRaster,
    field: &PyDisplacementField,
    geometry: &PyViewingGeometry,
    boundary: &str,
    interpolation: &str,
) -> PyResult<PyRaster> {
    let opts = warp_options(boundary, interpolation)?;
    core::warp::warp_image(&src.0, &field.0, &geometry.0, &opts)
        .map(PyRaster)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (src, field, geometry, boundary="clamp", interpolation="bilinear"))]
fn warp_color(
    src: &PyColorRaster,
    field: &PyDisplacementField,
    geometry: &PyViewingGeometry,
    boundary: &str,
    interpolation: &str,
) -> PyResult<PyColorRaster> {
    let opts = warp_options(boundary, interpolation)?;
    core::warp::warp_color(&src.0, &field.0, &geometry.0, &opts)
        .map(PyColorRaster)
        .map_err(err)
}

/// `(clipped_fraction, min_pre_clip, max_pre_clip)`
type Report = (f64, f64, f64);

/// Returns `(frames, reports)`.
#[pyfunction]
#[pyo3(signature = (
    target, fields, geometry, weight=0.4, background=0.5, reflectance=None, k_min=0.1,
    clip_threshold=None, boundary="clamp", interpolation="bilinear"
))]
#[allow(clippy::too_many_arguments)]
fn build_projection_sequence(
    target: &PyRaster,
    fields: Vec<PyDisplacementField>,
    geometry: &PyViewingGeometry,
    weight: f64,
    background: f64,
    reflectance: Option<PyRaster>,
    k_min: f64,
    clip_threshold: Option<f64>,
    boundary: &str,
    interpolation: &str,
) -> PyResult<(Vec<PyRaster>, Vec<Report>)> {
    let opts = warp_options(boundary, interpolation)?;
    let params = ProjectionParams {
        weight,
        background,
        clip_policy: clip_threshold.map_or(ClipPolicy::ClampAndReport, ClipPolicy::ErrorIfOver),
        compensation: if reflectance.is_some() {
            Compensation::Reflectance { k_min }
        } else {
            Compensation::Off
        },
    };
    let fields: Vec<_> = fields.into_iter().map(|f| f.0).collect();
    let seq = core::synth::build_projection_sequence(
        &target.0,
        &fields,
        &geometry.0,
        &opts,
        &params,
        reflectance.as_ref().map(|k| &k.0),
    )
    .map_err(err)?;
    Ok((
        seq.frames.into_iter().map(PyRaster).collect(),
        seq.reports
            .iter()
            .map(|r| (r.clipped_fraction, r.min_pre_clip, r.max_pre_clip))
            .collect(),
    ))
}

/// `K·(ambient + blur(P))` per channel, clamped to [0, 1].
#[pyfunction]
#[pyo3(signature = (reflectance, projection, ambient=0.0, blur_sigma=0.0))]
fn lambertian_composite(
    reflectance: &PyColorRaster,
    projection: &PyRaster,
    ambient: f64,
    blur_sigma: f64,
) -> PyResult<PyColorRaster> {
    let mut scene = SceneSetup::new(reflectance.0.clone());
    scene.ambient = Ambient::Uniform(ambient);
    scene.blur_sigma = blur_sigma;
    core::optics::lambertian_composite(&scene, &projection.0)
        .map(PyColorRaster)
        .map_err(err)
}

/// Returns the static image and, per frame, the three signed residual planes.
#[pyfunction]
fn decompose_movie(movie: Vec<PyColorRaster>) -> PyResult<(PyColorRaster, Vec<[Vec<f64>; 3]>)> {
    let movie: Vec<_> = movie.into_iter().map(|f| f.0).collect();
    let dec = core::synth::decompose_movie(&movie).map_err(err)?;
    let dynamic = dec
        .dynamic
        .iter()
        .map(|f| [0, 1, 2].map(|c| f.plane(c).data().to_vec()))
        .collect();
    Ok((PyColorRaster(dec.static_image), dynamic))
}

#[pyfunction]
fn select_keyframe(movie: Vec<PyColorRaster>) -> PyResult<usize> {
    let movie: Vec<_> = movie.into_iter().map(|f| f.0).collect();
    core::synth::select_keyframe(&movie).map_err(err)
}

/// Maximum-likelihood cumulative Gaussian through `(level, response)` trials.
#[pyfunction]
#[pyo3(signature = (levels, responses, orientation="increasing"))]
fn fit_cumulative_gaussian(levels: Vec<f64>, responses: Vec<bool>, orientation: &str) -> PyResult<PyPsychometricFit> {
    if levels.len() != responses.len() {
        return Err(PyValueError::new_err("levels and responses differ in length"));
    }
    let orientation = match orientation {
        "increasing" => Orientation::Increasing,
        "decreasing" => Orientation::Decreasing,
        other => return Err(PyValueError::new_err(format!("unknown orientation {other:?}"))),
    };
    let mut data = PsychometricDataset::default();
    for (l, r) in levels.into_iter().zip(responses) {
        data.push(l, r);
    }
    let fit = core::psycho::fit_cumulative_gaussian(&data, orientation).map_err(err)?;
    Ok(PyPsychometricFit(fit))
}

#[pyfunction]
fn read_color(path: &str) -> PyResult<PyColorRaster> {
    core::io::read_color(path).map(PyColorRaster).map_err(err)
}

#[pyfunction]
fn read_gray(path: &str) -> PyResult<PyRaster> {
    core::io::read_gray(path).map(PyRaster).map_err(err)
}

fn depth(bits: u8) -> PyResult<core::io::BitDepth> {
    match bits {
        8 => Ok(core::io::BitDepth::Eight),
        16 => Ok(core::io::BitDepth::Sixteen),
        _ => Err(PyValueError::new_err("bit depth must be 8 or 16")),
    }
}

#[pyfunction]
#[pyo3(signature = (path, image, bits=16))]
fn write_gray(path: &str, image: &PyRaster, bits: u8) -> PyResult<()> {
    core::io::write_gray(path, &image.0, depth(bits)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (path, image, bits=16))]
fn write_color(path: &str, image: &PyColorRaster, bits: u8) -> PyResult<()> {
    core::io::write_color(path, &image.0, depth(bits)?).map_err(err)
}

#[pyfunction]
fn save_fields(path: &str, fields: Vec<PyDisplacementField>) -> PyResult<()> {
    let fields: Vec<_> = fields.into_iter().map(|f| f.0).collect();
    core::io::save_field_sequence(path, &fields).map_err(err)
}

#[pyfunction]
fn load_fields(path: &str) -> PyResult<Vec<PyDisplacementField>> {
    let fields = core::io::load_field_sequence(path).map_err(err)?;
    Ok(fields.into_iter().map(PyDisplacementField).collect())
}

#[pymodule]
fn deflamps(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRaster>()?;
    m.add_class::<PyColorRaster>()?;
    m.add_class::<PyDisplacementField>()?;
    m.add_class::<PyViewingGeometry>()?;
    m.add_class::<PyPsychometricFit>()?;
    m.add_function(wrap_pyfunction!(visual_angle_deg, m)?)?;
    m.add_function(wrap_pyfunction!(to_luminance, m)?)?;
    m.add_function(wrap_pyfunction!(sinusoidal_field, m)?)?;
    m.add_function(wrap_pyfunction!(noise_field_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(warp_image, m)?)?;
    m.add_function(wrap_pyfunction!(warp_color, m)?)?;
    m.add_function(wrap_pyfunction!(build_projection_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(lambertian_composite, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_movie, m)?)?;
    m.add_function(wrap_pyfunction!(select_keyframe, m)?)?;
    m.add_function(wrap_pyfunction!(fit_cumulative_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(read_color, m)?)?;
    m.add_function(wrap_pyfunction!(read_gray, m)?)?;
    m.add_function(wrap_pyfunction!(write_gray, m)?)?;
    m.add_function(wrap_pyfunction!(write_color, m)?)?;
    m.add_function(wrap_pyfunction!(save_fields, m)?)?;
    m.add_function(wrap_pyfunction!(load_fields, m)?)?;
    Ok(())
}
