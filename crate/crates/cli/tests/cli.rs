mod support;

use std::fs;

use deflamps_core::io::{load_field_sequence, read_color, read_gray};
use support::*;

fn demo_sets(dir: &std::path::Path) -> (Vec<String>, Vec<String>, Vec<String>) {
    let target = dir.join("target.png");
    let gen = vec![set_path("output_dir", &dir.join("map"))];
    let synth = vec![
        set_path("target", &target),
        set_path("fields", &dir.join("map/fields.dlf")),
        set_path("output_dir", &dir.join("projection")),
    ];
    let sim = vec![
        set_path("input_dir", &dir.join("projection")),
        set_path("output_dir", &dir.join("perceived")),
        set_path("scene.reflectance", &target),
    ];
    (gen, synth, sim)
}

#[test]
fn zero_amplitude_synth_gives_uniform_background() {
    let dir = tempfile::tempdir().unwrap();
    write_gradient_target(&dir.path().join("target.png"), 64, 64);
    let (mut gen, synth, _) = demo_sets(dir.path());
    gen.push("field.amplitude_cm=0.0".into());
    let cfg = configs_dir();
    run_ok("gen-map", Some(&cfg.join("demo-gen-map.toml")), &gen);
    run_ok("synth", Some(&cfg.join("demo-synth.toml")), &synth);
    let frames = frames(&dir.path().join("projection"));
    assert_eq!(frames.len(), 60);
    for f in frames {
        let r = read_gray(&f).unwrap();
        assert!(r.data().iter().all(|v| (v - 32768.0 / 65535.0).abs() < 1e-12));
    }
    let report = fs::read_to_string(dir.path().join("projection/report.csv")).unwrap();
    assert_eq!(report.lines().next(), Some("frame,clipped_fraction,min,max"));
    assert_eq!(report.lines().count(), 61);
    assert_eq!(report.lines().nth(1), Some("0,0.000000,0.500000,0.500000"));
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir();
    let out = run(
        "gen-map",
        Some(&cfg.join("demo-gen-map.toml")),
        &[set_path("output_dir", dir.path()), "field.amplitude_cm=\"big\"".into()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("amplitude_cm"));

    let out = run(
        "synth",
        Some(&cfg.join("demo-synth.toml")),
        &[set_path("target", &dir.path().join("missing.png"))],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`target`"));

    let out = run("keyframe", None, &["input_dir=\".\"".into()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("output_dir"));

    let out = run("gen-map", Some(&cfg.join("demo-gen-map.toml")), &[
        set_path("output_dir", dir.path()),
        "field.spatial_freq=-1".into(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spatial_freq"));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dlf");
    fs::write(&bad, b"DLF1\x02\x00").unwrap();
    write_gradient_target(&dir.path().join("target.png"), 64, 64);
    let out = run(
        "synth",
        Some(&configs_dir().join("demo-synth.toml")),
        &[
            set_path("target", &dir.path().join("target.png")),
            set_path("fields", &bad),
            set_path("output_dir", &dir.path().join("o")),
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));
}

#[test]
fn noise_map_and_warp() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map");
    run_ok(
        "gen-map",
        None,
        &[
            set_path("output_dir", &map),
            "width=32".into(),
            "height=24".into(),
            "seed=3".into(),
            "sequence.fps=10".into(),
            "sequence.frame_count=6".into(),
            "field.kind=\"noise\"".into(),
            "field.rms_cm=0.05".into(),
            "field.spatial_band=[1.0, 4.0]".into(),
            "field.temporal_band=[0.0, 3.0]".into(),
        ],
    );
    let fields = load_field_sequence(map.join("fields.dlf")).unwrap();
    assert_eq!(fields.len(), 6);
    assert_eq!(fields[0].dims(), (32, 24));

    let picture = dir.path().join("pic.png");
    write_color_picture(&picture, 32, 24);
    run_ok(
        "warp",
        None,
        &[
            set_path("input", &picture),
            set_path("fields", &map.join("fields.dlf")),
            set_path("output_dir", &dir.path().join("warped")),
            "geometry.pixel_pitch_cm=0.05".into(),
        ],
    );
    let out = frames(&dir.path().join("warped"));
    assert_eq!(out.len(), 6);
    assert_eq!(read_color(&out[0]).unwrap().dims(), (32, 24));

    // mismatched dims are a data error
    let small = dir.path().join("small.png");
    write_color_picture(&small, 16, 16);
    let out = run(
        "warp",
        None,
        &[
            set_path("input", &small),
            set_path("fields", &map.join("fields.dlf")),
            set_path("output_dir", &dir.path().join("w2")),
            "geometry.pixel_pitch_cm=0.05".into(),
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn keyframe_picks_mean_frame() {
    use deflamps_core::io::{write_color, BitDepth};
    use deflamps_core::ColorRaster;
    let dir = tempfile::tempdir().unwrap();
    let movie = dir.path().join("movie");
    fs::create_dir_all(&movie).unwrap();
    let levels = [[0.2, 0.2, 0.2], [0.6, 0.8, 0.4], [0.4, 0.5, 0.3]];
    for (i, l) in levels.iter().enumerate() {
        write_color(movie.join(format!("frame_{i:06}.png")), &ColorRaster::filled(4, 4, *l).unwrap(), BitDepth::Sixteen)
            .unwrap();
    }
    let out = run_ok(
        "keyframe",
        None,
        &[set_path("input_dir", &movie), set_path("output_dir", &dir.path().join("k"))],
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2");
    assert_eq!(fs::read_to_string(dir.path().join("k/keyframe.txt")).unwrap(), "2\n");
}

#[test]
fn analyze_writes_fit_table() {
    use deflamps_core::psycho::{normal_cdf, sample_observer, EXP1_AMPLITUDES_CM};
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("observer_id,image_id,distance_cm,spatial_freq_cpi,amplitude_cm,response\n");
    for (fs_i, fs) in [1, 2].iter().enumerate() {
        let data = sample_observer(&EXP1_AMPLITUDES_CM, 50, |x| 1.0 - normal_cdf((x - 0.4) / 0.15), fs_i as u64);
        for t in &data.trials {
            csv.push_str(&format!("s1,img,110,{fs},{},{}\n", t.level, t.response as u8));
        }
    }
    csv.push_str("s2,img,110,1,0.4,1\n");
    let trials = dir.path().join("trials.csv");
    fs::write(&trials, csv).unwrap();
    run_ok(
        "analyze",
        Some(&configs_dir().join("analyze.toml")),
        &[set_path("trials", &trials), set_path("output_dir", &dir.path().join("a"))],
    );
    let text = fs::read_to_string(dir.path().join("a/fits.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "observer_id,image_id,distance_cm,spatial_freq_cpi,mu_cm,sigma_cm,n_trials,flag");
    for l in &lines[1..3] {
        let cols: Vec<&str> = l.split(',').collect();
        let mu: f64 = cols[4].parse().unwrap();
        assert!((mu - 0.4).abs() < 0.1, "{l}");
        assert_eq!(cols[6], "300");
        assert_eq!(cols[7], "ok");
    }
    assert!(lines[3].ends_with("degenerate"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "analyze");
    assert_eq!(manifest["files"][0]["path"], "fits.csv");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exp2_stim_layout() {
    let dir = tempfile::tempdir().unwrap();
    let picture = dir.path().join("picture.png");
    write_color_picture(&picture, 24, 24);
    run_ok(
        "exp2-stim",
        Some(&configs_dir().join("exp2-stim.toml")),
        &[
            set_path("picture", &picture),
            set_path("output_dir", &dir.path().join("s")),
            "fps=6".into(),
        ],
    );
    let root = dir.path().join("s");
    let mut lefts: Vec<String> = fs::read_dir(root.join("left"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    lefts.sort();
    assert_eq!(lefts, ["a0.05", "a0.10", "a0.15", "a0.21", "a0.26", "a0.31", "a0.36", "a0.40"]);
    assert_eq!(frames(&root.join("right/pixel_warp")).len(), 6);
    assert_eq!(frames(&root.join("right/deformation_lamps")).len(), 6);
    // same amplitude, same mode: identical movies
    let a = snapshot(&root.join("left/a0.21"));
    let b = snapshot(&root.join("right/pixel_warp"));
    assert_eq!(a, b);
}
