//! Run configuration: one TOML file per run, with `--set key=value` overrides.

use std::fs;
use std::path::{Path, PathBuf};

use deflamps_core::fields::{NoiseFieldParams, SinusoidParams};
use deflamps_core::io::BitDepth;
use deflamps_core::optics::{Ambient, SceneSetup};
use deflamps_core::psycho::Orientation;
use deflamps_core::synth::{ClipPolicy, Compensation, ProjectionParams};
use deflamps_core::warp::{Boundary, Interpolation, WarpOptions};
use deflamps_core::{io, SequenceSpec, ViewingGeometry};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// Merged configuration text plus its hash.
pub struct Loaded<T> {
    pub config: T,
    pub canonical: String,
    pub sha256: String,
}

fn parse_override_value(raw: &str) -> Value {
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn apply_override(table: &mut Table, spec: &str) -> CliResult<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{spec}` is not KEY=VALUE")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("override key `{key}` is malformed")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("key `{key}`: `{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> CliResult<Loaded<T>> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str::<Table>(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let canonical = toml::to_string(&table).map_err(|e| CliError::config(e.to_string()))?;
    let de = toml::Deserializer::parse(&canonical).map_err(|e| CliError::config(e.to_string()))?;
    let config = serde_path_to_error::deserialize::<_, T>(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.into_inner().message().to_string();
        if path == "." || msg.starts_with("key `") {
            CliError::config(msg)
        } else {
            CliError::config(format!("key `{path}`: {msg}"))
        }
    })?;
    let sha256 = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok(Loaded {
        config,
        canonical,
        sha256,
    })
}

/// Fails with a config error naming `key` if `path` does not exist.
pub fn require_exists(key: &str, path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "key `{key}`: path {} does not exist",
            path.display()
        )))
    }
}

fn default_bit_depth() -> u8 {
    16
}

pub fn bit_depth(key: &str, bits: u8) -> CliResult<BitDepth> {
    match bits {
        8 => Ok(BitDepth::Eight),
        16 => Ok(BitDepth::Sixteen),
        other => Err(CliError::config(format!("key `{key}`: bit depth {other} is not 8 or 16"))),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "GeometryConfig::default_distance")]
    pub distance_cm: f64,
    pub pixel_pitch_cm: Option<f64>,
    /// Physical width of the image; pitch = print_width_cm / width_px.
    pub print_width_cm: Option<f64>,
}

impl GeometryConfig {
    fn default_distance() -> f64 {
        110.0
    }

    pub fn resolve(&self, width_px: usize) -> CliResult<ViewingGeometry> {
        let pitch = match (self.pixel_pitch_cm, self.print_width_cm) {
            (Some(p), None) => p,
            (None, Some(size)) => size / width_px as f64,
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "keys `geometry.pixel_pitch_cm` and `geometry.print_width_cm` are mutually exclusive",
                ))
            }
            (None, None) => {
                return Err(CliError::config(
                    "missing key `geometry.pixel_pitch_cm` (or `geometry.print_width_cm`)",
                ))
            }
        };
        ViewingGeometry::new(self.distance_cm, pitch).map_err(|e| CliError::config(format!("geometry: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WarpConfig {
    pub boundary: BoundaryName,
    pub interpolation: InterpolationName,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    #[default]
    Clamp,
    Periodic,
    Mirror,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Clamp => Boundary::Clamp,
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::Mirror => Boundary::Mirror,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationName {
    #[default]
    Bilinear,
    Bicubic,
}

impl WarpConfig {
    pub fn options(&self) -> WarpOptions {
        WarpOptions {
            boundary: self.boundary.into(),
            interpolation: match self.interpolation {
                InterpolationName::Bilinear => Interpolation::Bilinear,
                InterpolationName::Bicubic => Interpolation::Bicubic,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicyName {
    #[default]
    ClampAndReport,
    ErrorIfOver,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CompensationName {
    #[default]
    Off,
    Reflectance,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionConfig {
    pub weight: f64,
    pub background: f64,
    pub clip_policy: ClipPolicyName,
    pub clip_threshold: f64,
    pub compensation: CompensationName,
    pub k_min: f64,
    /// Reflectance image used for compensation (luminance is taken).
    pub reflectance: Option<PathBuf>,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        let d = ProjectionParams::default();
        Self {
            weight: d.weight,
            background: d.background,
            clip_policy: ClipPolicyName::default(),
            clip_threshold: 0.0,
            compensation: CompensationName::default(),
            k_min: 0.1,
            reflectance: None,
        }
    }
}

impl ProjectionConfig {
    pub fn params(&self) -> CliResult<ProjectionParams> {
        let p = ProjectionParams {
            weight: self.weight,
            background: self.background,
            clip_policy: match self.clip_policy {
                ClipPolicyName::ClampAndReport => ClipPolicy::ClampAndReport,
                ClipPolicyName::ErrorIfOver => ClipPolicy::ErrorIfOver(self.clip_threshold),
            },
            compensation: match self.compensation {
                CompensationName::Off => Compensation::Off,
                CompensationName::Reflectance => Compensation::Reflectance { k_min: self.k_min },
            },
        };
        p.validate()
            .map_err(|e| CliError::config(format!("projection: {e}")))?;
        if self.compensation == CompensationName::Reflectance && self.reflectance.is_none() {
            return Err(CliError::config(
                "key `projection.reflectance` is required when compensation = \"reflectance\"",
            ));
        }
        Ok(p)
    }

    pub fn check_paths(&self) -> CliResult<()> {
        if let Some(p) = &self.reflectance {
            require_exists("projection.reflectance", p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Color image of the surface albedo; required except where a
    /// subcommand supplies its own picture.
    pub reflectance: Option<PathBuf>,
    #[serde(default)]
    pub ambient: f64,
    pub ambient_image: Option<PathBuf>,
    #[serde(default)]
    pub blur_sigma: f64,
    #[serde(default)]
    pub blur_boundary: BoundaryName,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            reflectance: None,
            ambient: 0.0,
            ambient_image: None,
            blur_sigma: 0.0,
            blur_boundary: BoundaryName::Clamp,
        }
    }
}

impl SceneConfig {
    pub fn check_paths(&self) -> CliResult<()> {
        if let Some(p) = &self.reflectance {
            require_exists("scene.reflectance", p)?;
        }
        if let Some(p) = &self.ambient_image {
            require_exists("scene.ambient_image", p)?;
        }
        Ok(())
    }

    pub fn build(&self, reflectance: deflamps_core::ColorRaster) -> CliResult<SceneSetup> {
        let ambient = match &self.ambient_image {
            Some(p) => Ambient::Map(io::read_color(p)?),
            None => Ambient::Uniform(self.ambient),
        };
        let scene = SceneSetup {
            reflectance,
            ambient,
            blur_sigma: self.blur_sigma,
            blur_boundary: self.blur_boundary.into(),
        };
        scene.validate().map_err(|e| CliError::config(format!("scene: {e}")))?;
        Ok(scene)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub fps: f64,
    pub frame_count: usize,
}

impl SequenceConfig {
    pub fn spec(&self) -> CliResult<SequenceSpec> {
        SequenceSpec::new(self.frame_count, self.fps).map_err(|e| CliError::config(format!("sequence: {e}")))
    }
}

#[derive(Debug, Clone)]
pub enum FieldConfig {
    Sinusoid(SinusoidFieldConfig),
    Noise(NoiseFieldConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidFieldConfig {
    pub amplitude_cm: f64,
    pub spatial_freq: f64,
    #[serde(default)]
    pub spatial_phase: f64,
    #[serde(default = "one")]
    pub temporal_freq: f64,
    #[serde(default)]
    pub temporal_phase: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFieldConfig {
    pub rms_cm: f64,
    pub spatial_band: [f64; 2],
    pub temporal_band: [f64; 2],
}

// Dispatch on `kind` by hand so that errors keep the offending key.
impl<'de> Deserialize<'de> for FieldConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut table = Table::deserialize(d)?;
        let kind = match table.remove("kind") {
            Some(toml::Value::String(k)) => k,
            Some(other) => return Err(D::Error::custom(format!("key `field.kind`: expected a string, got {other}"))),
            None => return Err(D::Error::custom("key `field.kind` is missing")),
        };
        let value = toml::Value::Table(table);
        let keyed = |e: serde_path_to_error::Error<toml::de::Error>| {
            D::Error::custom(format!("key `field.{}`: {}", e.path(), e.inner().message()))
        };
        match kind.as_str() {
            "sinusoid" => serde_path_to_error::deserialize(value).map(FieldConfig::Sinusoid).map_err(keyed),
            "noise" => serde_path_to_error::deserialize(value).map(FieldConfig::Noise).map_err(keyed),
            other => Err(D::Error::custom(format!(
                "key `field.kind`: unknown kind `{other}`, expected `sinusoid` or `noise`"
            ))),
        }
    }
}

fn one() -> f64 {
    1.0
}

pub enum FieldKind {
    Sinusoid(SinusoidParams),
    Noise(NoiseFieldParams),
}

impl FieldConfig {
    pub fn kind(&self, seed: u64) -> FieldKind {
        match *self {
            FieldConfig::Sinusoid(SinusoidFieldConfig {
                amplitude_cm,
                spatial_freq,
                spatial_phase,
                temporal_freq,
                temporal_phase,
            }) => FieldKind::Sinusoid(SinusoidParams {
                amplitude_cm,
                spatial_freq,
                spatial_phase,
                temporal_freq,
                temporal_phase,
            }),
            FieldConfig::Noise(NoiseFieldConfig {
                rms_cm,
                spatial_band,
                temporal_band,
            }) => FieldKind::Noise(NoiseFieldParams {
                rms_cm,
                spatial_band: (spatial_band[0], spatial_band[1]),
                temporal_band: (temporal_band[0], temporal_band[1]),
                seed,
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenMapConfig {
    pub output_dir: PathBuf,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub seed: u64,
    pub sequence: SequenceConfig,
    pub field: FieldConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpRunConfig {
    pub input: PathBuf,
    pub fields: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "yes")]
    pub color: bool,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub warp: WarpConfig,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub target: PathBuf,
    pub fields: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub warp: WarpConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    pub scene: SceneConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exp1Config {
    pub target: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "Exp1Config::default_distances")]
    pub distances_cm: Vec<f64>,
    #[serde(default = "Exp1Config::default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub warp: WarpConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
}

impl Exp1Config {
    fn default_distances() -> Vec<f64> {
        vec![110.0, 220.0]
    }

    fn default_fps() -> f64 {
        30.0
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Exp2ModeName {
    PixelWarp,
    DeformationLamps,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exp2Config {
    pub picture: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "Exp2Config::default_modes")]
    pub modes: Vec<Exp2ModeName>,
    #[serde(default = "Exp1Config::default_fps")]
    pub fps: f64,
    #[serde(default = "one")]
    pub spatial_freq: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub warp: WarpConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default)]
    pub scene: SceneConfig,
}

impl Exp2Config {
    fn default_modes() -> Vec<Exp2ModeName> {
        vec![Exp2ModeName::PixelWarp, Exp2ModeName::DeformationLamps]
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationName {
    Increasing,
    #[default]
    Decreasing,
}

impl From<OrientationName> for Orientation {
    fn from(o: OrientationName) -> Self {
        match o {
            OrientationName::Increasing => Orientation::Increasing,
            OrientationName::Decreasing => Orientation::Decreasing,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub trials: PathBuf,
    pub output_dir: PathBuf,
    /// Decreasing for "deformation seen" data, increasing for comparisons.
    #[serde(default)]
    pub orientation: OrientationName,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_keys() {
        let mut t = Table::new();
        apply_override(&mut t, "geometry.distance_cm=220").unwrap();
        apply_override(&mut t, "output_dir=out dir").unwrap();
        apply_override(&mut t, "field.spatial_band=[1.0, 2.0]").unwrap();
        assert_eq!(t["geometry"]["distance_cm"].as_integer(), Some(220));
        assert_eq!(t["output_dir"].as_str(), Some("out dir"));
        assert!(t["field"]["spatial_band"].is_array());
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "output_dir.x=1").is_err());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = match load::<KeyframeConfig>(None, &["input_dir=a".into(), "output_dir=b".into(), "bogus=1".into()]) {
            Err(CliError::Config(m)) => m,
            _ => panic!("expected config error"),
        };
        assert!(err.contains("bogus"), "{err}");
        let err = match load::<KeyframeConfig>(None, &["input_dir=a".into()]) {
            Err(CliError::Config(m)) => m,
            _ => panic!("expected config error"),
        };
        assert!(err.contains("output_dir"), "{err}");
    }

    #[test]
    fn field_kinds_parse() {
        let loaded = load::<GenMapConfig>(
            None,
            &[
                "output_dir=o".into(),
                "width=8".into(),
                "height=8".into(),
                "sequence.fps=30".into(),
                "sequence.frame_count=4".into(),
                "field.kind=\"sinusoid\"".into(),
                "field.amplitude_cm=0.4".into(),
                "field.spatial_freq=1".into(),
            ],
        )
        .unwrap();
        assert!(matches!(loaded.config.field, FieldConfig::Sinusoid(ref s) if s.temporal_freq == 1.0));
        assert_eq!(loaded.sha256.len(), 64);
        let bad = load::<GenMapConfig>(
            None,
            &[
                "output_dir=o".into(),
                "width=8".into(),
                "height=8".into(),
                "sequence.fps=30".into(),
                "sequence.frame_count=4".into(),
                "field.kind=\"sinusoid\"".into(),
                "field.amplitude_cm=0.4".into(),
                "field.spatial_freq=1".into(),
                "field.rms_cm=1".into(),
            ],
        );
        assert!(matches!(bad, Err(CliError::Config(m)) if m.contains("rms_cm")));
    }
}
