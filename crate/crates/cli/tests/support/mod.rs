#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deflamps_core::io::{write_color, write_gray, BitDepth};
use deflamps_core::{ColorRaster, Raster};

#[path = "../../../core/tests/common/oracle.rs"]
pub mod oracle;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_deflamps")
}

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn run(subcommand: &str, config: Option<&Path>, sets: &[String]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.arg(subcommand);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    cmd.output().expect("binary runs")
}

pub fn run_ok(subcommand: &str, config: Option<&Path>, sets: &[String]) -> Output {
    let out = run(subcommand, config, sets);
    assert!(
        out.status.success(),
        "{subcommand} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// `key="path"` override with TOML string quoting.
pub fn set_path(key: &str, path: &Path) -> String {
    format!("{key}={:?}", path.to_string_lossy())
}

pub fn write_gradient_target(path: &Path, w: usize, h: usize) -> Raster {
    let g = oracle::gradient(w, h);
    let r = Raster::new(w, h, g.v).unwrap();
    write_gray(path, &r, BitDepth::Sixteen).unwrap();
    r
}

pub fn write_color_picture(path: &Path, w: usize, h: usize) -> ColorRaster {
    let c = ColorRaster::new(
        Raster::from_fn(w, h, |x, y| 0.2 + 0.6 * ((x + y) % 16) as f64 / 15.0).unwrap(),
        Raster::from_fn(w, h, |x, _| 0.1 + 0.8 * x as f64 / (w - 1) as f64).unwrap(),
        Raster::from_fn(w, h, |_, y| 0.9 - 0.7 * y as f64 / (h - 1) as f64).unwrap(),
    )
    .unwrap();
    write_color(path, &c, BitDepth::Sixteen).unwrap();
    c
}

/// Every file under `dir` keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Frame PNGs in `dir`, sorted.
pub fn frames(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("frame_"))
        .collect();
    v.sort();
    v
}
