use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use deflamps_core::fields::{noise_field_sequence, sinusoidal_sequence};
use deflamps_core::io::{self, BitDepth};
use deflamps_core::optics::{simulate_perceived_sequence, SceneSetup};
use deflamps_core::psycho::trials::{fit_conditions, read_trials, write_fits};
use deflamps_core::psycho::{
    exp1_stimulus, exp2_stimulus_pair, random_spatial_phase, Exp1Condition, Exp2Assets, Exp2Mode,
    EXP2_LEFT_LEVELS_CM,
};
use deflamps_core::synth::{build_projection_sequence, select_keyframe, Compensation};
use deflamps_core::warp::{warp_color, warp_image};
use deflamps_core::{ColorRaster, Error, Raster, SequenceSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{self, *};
use crate::error::{CliError, CliResult};
use crate::manifest;

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn write_gray_frames(dir: &Path, frames: &[Raster], depth: BitDepth) -> CliResult<Vec<PathBuf>> {
    create_dir(dir)?;
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(frame_name(i));
            io::write_gray(&path, f, depth).map_err(Error::at_frame(i))?;
            Ok(path)
        })
        .collect()
}

fn write_color_frames(dir: &Path, frames: &[ColorRaster], depth: BitDepth) -> CliResult<Vec<PathBuf>> {
    create_dir(dir)?;
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(frame_name(i));
            io::write_color(&path, f, depth).map_err(Error::at_frame(i))?;
            Ok(path)
        })
        .collect()
}

/// `frame_NNNNNN.png` files in `dir`, in index order.
pub fn list_frames(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| {
                    n.len() == 16
                        && n.starts_with("frame_")
                        && n.ends_with(".png")
                        && n[6..12].bytes().all(|b| b.is_ascii_digit())
                })
        })
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(CliError::Data(format!("no frame_*.png files in {}", dir.display())));
    }
    Ok(frames)
}

fn load_fields(path: &Path, dims: (usize, usize)) -> CliResult<Vec<deflamps_core::DisplacementField>> {
    let fields = io::load_field_sequence(path)?;
    if let Some(f) = fields.first() {
        if f.dims() != dims {
            return Err(CliError::Data(format!(
                "fields are {}x{} but the image is {}x{}",
                f.width(),
                f.height(),
                dims.0,
                dims.1
            )));
        }
    }
    Ok(fields)
}

pub fn gen_map(cfg: Loaded<GenMapConfig>) -> CliResult<()> {
    let c = &cfg.config;
    let spec = c.sequence.spec()?;
    let fields = match c.field.kind(c.seed) {
        FieldKind::Sinusoid(p) => sinusoidal_sequence(&p, &spec, c.width, c.height)?,
        FieldKind::Noise(p) => noise_field_sequence(&p, &spec, c.width, c.height)?,
    };
    create_dir(&c.output_dir)?;
    let out = c.output_dir.join("fields.dlf");
    io::save_field_sequence(&out, &fields)?;
    manifest::write(
        &c.output_dir,
        "gen-map",
        &cfg,
        json!({ "frames": fields.len(), "width": c.width, "height": c.height }),
        vec![out],
    )
}

pub fn warp(cfg: Loaded<WarpRunConfig>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("input", &c.input)?;
    config::require_exists("fields", &c.fields)?;
    let depth = config::bit_depth("bit_depth", c.bit_depth)?;
    let opts = c.warp.options();
    let files = if c.color {
        let src = io::read_color(&c.input)?;
        let geom = c.geometry.resolve(src.width())?;
        let fields = load_fields(&c.fields, src.dims())?;
        let frames = fields
            .par_iter()
            .enumerate()
            .map(|(i, f)| warp_color(&src, f, &geom, &opts).map_err(Error::at_frame(i)))
            .collect::<Result<Vec<_>, _>>()?;
        write_color_frames(&c.output_dir, &frames, depth)?
    } else {
        let src = io::read_gray(&c.input)?;
        let geom = c.geometry.resolve(src.width())?;
        let fields = load_fields(&c.fields, src.dims())?;
        let frames = fields
            .par_iter()
            .enumerate()
            .map(|(i, f)| warp_image(&src, f, &geom, &opts).map_err(Error::at_frame(i)))
            .collect::<Result<Vec<_>, _>>()?;
        write_gray_frames(&c.output_dir, &frames, depth)?
    };
    manifest::write(&c.output_dir, "warp", &cfg, serde_json::Value::Null, files)
}

pub fn synth(cfg: Loaded<SynthConfig>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("target", &c.target)?;
    config::require_exists("fields", &c.fields)?;
    c.projection.check_paths()?;
    let depth = config::bit_depth("bit_depth", c.bit_depth)?;
    let params = c.projection.params()?;
    let target = io::read_gray(&c.target)?;
    let geom = c.geometry.resolve(target.width())?;
    let fields = load_fields(&c.fields, target.dims())?;
    let k_lum = match (params.compensation, &c.projection.reflectance) {
        (Compensation::Reflectance { .. }, Some(p)) => Some(io::read_gray(p)?),
        _ => None,
    };
    let seq = build_projection_sequence(&target, &fields, &geom, &c.warp.options(), &params, k_lum.as_ref())?;
    let mut files = write_gray_frames(&c.output_dir, &seq.frames, depth)?;

    let report_path = c.output_dir.join("report.csv");
    let mut report = fs::File::create(&report_path)?;
    writeln!(report, "frame,clipped_fraction,min,max")?;
    for (i, r) in seq.reports.iter().enumerate() {
        writeln!(
            report,
            "{i},{:.6},{:.6},{:.6}",
            r.clipped_fraction, r.min_pre_clip, r.max_pre_clip
        )?;
    }
    files.push(report_path);
    manifest::write(
        &c.output_dir,
        "synth",
        &cfg,
        json!({ "frames": seq.frames.len() }),
        files,
    )
}

pub fn simulate(cfg: Loaded<SimulateConfig>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("input_dir", &c.input_dir)?;
    c.scene.check_paths()?;
    let reflectance_path = c
        .scene
        .reflectance
        .as_ref()
        .ok_or_else(|| CliError::config("missing key `scene.reflectance`"))?;
    let depth = config::bit_depth("bit_depth", c.bit_depth)?;
    let scene = c.scene.build(io::read_color(reflectance_path)?)?;
    let projections = list_frames(&c.input_dir)?
        .iter()
        .enumerate()
        .map(|(i, p)| io::read_gray(p).map_err(Error::at_frame(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let perceived = simulate_perceived_sequence(&scene, &projections)?;
    let files = write_color_frames(&c.output_dir, &perceived, depth)?;
    manifest::write(
        &c.output_dir,
        "simulate",
        &cfg,
        json!({ "frames": perceived.len() }),
        files,
    )
}

pub fn keyframe(cfg: Loaded<KeyframeConfig>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("input_dir", &c.input_dir)?;
    let movie = list_frames(&c.input_dir)?
        .iter()
        .enumerate()
        .map(|(i, p)| io::read_color(p).map_err(Error::at_frame(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let index = select_keyframe(&movie)?;
    create_dir(&c.output_dir)?;
    let out = c.output_dir.join("keyframe.txt");
    fs::write(&out, format!("{index}\n"))?;
    println!("{index}");
    manifest::write(&c.output_dir, "keyframe", &cfg, json!({ "index": index }), vec![out])
}

pub fn exp1_stim(cfg: Loaded<Exp1Config>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("target", &c.target)?;
    let depth = config::bit_depth("bit_depth", c.bit_depth)?;
    let params = c.projection.params()?;
    let target = io::read_gray(&c.target)?;
    let spec = SequenceSpec::new(2 * (c.fps.max(1.0) as usize), c.fps)
        .map_err(|e| CliError::config(format!("fps: {e}")))?;
    spec.frames_per_second()
        .map_err(|e| CliError::config(format!("key `fps`: {e}")))?;

    let mut conditions = Vec::new();
    for &d in &c.distances_cm {
        let grid = Exp1Condition::grid(d).map_err(|e| CliError::config(format!("key `distances_cm`: {e}")))?;
        conditions.extend(grid);
    }
    let mut geom_cfg = c.geometry.clone();
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (i, cond) in conditions.iter().enumerate() {
        geom_cfg.distance_cm = cond.distance_cm();
        let geom = geom_cfg.resolve(target.width())?;
        let seed = c.seed.wrapping_add(i as u64);
        let stim = exp1_stimulus(&target, cond, &geom, &spec, &params, &c.warp.options(), seed)
            .map_err(|e| CliError::Data(format!("condition {}: {e}", cond.key())))?;
        files.extend(write_gray_frames(&c.output_dir.join(cond.key()), &stim.frames, depth)?);
        let max_clip = stim.reports.iter().map(|r| r.clipped_fraction).fold(0.0, f64::max);
        entries.push(json!({
            "dir": cond.key(),
            "amplitude_cm": cond.amplitude_cm(),
            "spatial_freq_cpi": cond.spatial_freq(),
            "distance_cm": cond.distance_cm(),
            "spatial_phase": stim.spatial_phase,
            "frames": stim.frames.len(),
            "max_clipped_fraction": max_clip,
        }));
    }
    manifest::write(
        &c.output_dir,
        "exp1-stim",
        &cfg,
        json!({ "fps": c.fps, "conditions": entries }),
        files,
    )
}

pub fn exp2_stim(cfg: Loaded<Exp2Config>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("picture", &c.picture)?;
    c.scene.check_paths()?;
    let depth = config::bit_depth("bit_depth", c.bit_depth)?;
    let params = c.projection.params()?;
    let picture = io::read_color(&c.picture)?;
    let reflectance = match &c.scene.reflectance {
        Some(p) => io::read_color(p)?,
        None => picture.clone(),
    };
    let scene: SceneSetup = c.scene.build(reflectance)?;
    let spec = SequenceSpec::new(c.fps.max(1.0) as usize, c.fps)
        .map_err(|e| CliError::config(format!("fps: {e}")))?;
    let assets = Exp2Assets {
        geom: c.geometry.resolve(picture.width())?,
        picture,
        scene,
        spec,
        spatial_freq: c.spatial_freq,
        spatial_phase: random_spatial_phase(c.seed),
        params,
        warp: c.warp.options(),
    };

    let mut files = Vec::new();
    for (mi, mode) in c.modes.iter().enumerate() {
        let (mode, name) = match mode {
            Exp2ModeName::PixelWarp => (Exp2Mode::PixelWarp, "pixel_warp"),
            Exp2ModeName::DeformationLamps => (Exp2Mode::DeformationLamps, "deformation_lamps"),
        };
        for (li, level) in EXP2_LEFT_LEVELS_CM.iter().enumerate() {
            let pair = exp2_stimulus_pair(*level, mode, &assets)?;
            // the left movie does not depend on the mode
            if mi == 0 {
                files.extend(write_color_frames(
                    &c.output_dir.join("left").join(format!("a{level:.2}")),
                    &pair.left,
                    depth,
                )?);
            }
            if li == 0 {
                files.extend(write_color_frames(&c.output_dir.join("right").join(name), &pair.right, depth)?);
            }
        }
    }
    manifest::write(
        &c.output_dir,
        "exp2-stim",
        &cfg,
        json!({
            "reference_cm": deflamps_core::psycho::EXP2_REFERENCE_CM,
            "left_levels_cm": EXP2_LEFT_LEVELS_CM,
            "spatial_phase": assets.spatial_phase,
        }),
        files,
    )
}

pub fn analyze(cfg: Loaded<AnalyzeConfig>) -> CliResult<()> {
    let c = &cfg.config;
    config::require_exists("trials", &c.trials)?;
    let file = fs::File::open(&c.trials)?;
    let rows = read_trials(file).map_err(|e| CliError::Data(e.to_string()))?;
    let fits = fit_conditions(&rows, c.orientation.into())?;
    create_dir(&c.output_dir)?;
    let out = c.output_dir.join("fits.csv");
    write_fits(fs::File::create(&out)?, &fits)?;
    manifest::write(
        &c.output_dir,
        "analyze",
        &cfg,
        json!({ "conditions": fits.len() }),
        vec![out],
    )
}
