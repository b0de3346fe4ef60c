use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use eventforge::filtering::{FilterSettings, KalmanFilter};
use eventforge::format::{decode_metadata, encode_events, encode_poses};
use eventforge::representations::{build_lnes, decode_images, encode_image};
use eventforge::window::{slide_windows, WindowSpan};
use eventforge::{Event, Micros, Polarity, PoseVector};
use eventforge_cli::{simulate_config, RunManifest, SimulationConfig};

const SMALL: &str = "[camera]\ngeometry = { width = 64, height = 48 }\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eventforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn eventforge")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "eventforge {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL).unwrap();
    path
}

fn simulate_small(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let config = small_config(dir);
    let out = dir.join(name);
    run_ok(&["simulate", "--config", p(&config), "--duration", "1", "--seed", seed, "-o", p(&out)]);
    out
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_small(dir.path(), "a", "7");
    let b = simulate_small(dir.path(), "b", "7");
    let c = simulate_small(dir.path(), "c", "8");
    for file in ["events.bin", "metadata.bin"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    assert_ne!(fs::read(a.join("events.bin")).unwrap(), fs::read(c.join("events.bin")).unwrap());

    let ma = RunManifest::parse(&fs::read_to_string(a.join("manifest.toml")).unwrap()).unwrap();
    let mb = RunManifest::parse(&fs::read_to_string(b.join("manifest.toml")).unwrap()).unwrap();
    assert_eq!(ma.seed, Some(7));
    assert_eq!(ma.settings, mb.settings);
    assert_eq!(ma.parameters, mb.parameters);
    assert_eq!(ma.subcommand, "simulate");
}

#[test]
fn default_simulation_writes_paired_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["simulate", "--duration", "0.2", "-o", p(dir.path())]);
    let info = run_ok(&[
        "info",
        p(&dir.path().join("events.bin")),
        "--metadata",
        p(&dir.path().join("metadata.bin")),
    ]);
    let text = String::from_utf8(info.stdout).unwrap();
    assert!(text.contains("steps       200"), "{text}");
    assert!(text.contains("200 frames x 12 fields (matches)"), "{text}");
    let meta = fs::read(dir.path().join("metadata.bin")).unwrap();
    assert_eq!(meta.len(), 4 + 200 * 98);
}

#[test]
fn one_second_stream_gives_901_full_windows() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = simulate_small(dir.path(), "run", "3");
    let out = dir.path().join("lnes.evrw");
    run_ok(&[
        "windows",
        p(&run_dir.join("events.bin")),
        "--repr",
        "lnes",
        "--length-ms",
        "100",
        "--stride-ms",
        "1",
        "--width",
        "64",
        "--height",
        "48",
        "-o",
        p(&out),
    ]);
    let images = decode_images(&fs::read(&out).unwrap()).unwrap();
    // starts 0, 1, ..., 900 ms keep [start, start + 100 ms) inside [0, 1 s)
    assert_eq!(images.len(), 1000 - 100 + 1);
    assert!(out.with_file_name("lnes.evrw.manifest.toml").exists());
}

#[test]
fn every_representation_is_available() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = simulate_small(dir.path(), "run", "4");
    for (repr, channels) in [("lnes", 2), ("eoi", 2), ("eci", 2), ("eci-s", 1)] {
        let out = run_ok(&[
            "windows",
            p(&run_dir.join("events.bin")),
            "--repr",
            repr,
            "--length-ms",
            "250",
            "--stride-ms",
            "250",
            "--width",
            "64",
            "--height",
            "48",
        ]);
        let images = decode_images(&out.stdout).unwrap();
        assert_eq!(images.len(), 4, "{repr}");
        assert!(images.iter().all(|i| i.channels() == channels), "{repr}");
    }
}

fn pipe(stages: &[Vec<String>]) -> Vec<u8> {
    let mut children = Vec::new();
    let mut previous: Option<std::process::ChildStdout> = None;
    for args in stages {
        let mut cmd = bin();
        cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::null());
        if let Some(out) = previous.take() {
            cmd.stdin(Stdio::from(out));
        }
        let mut child = cmd.spawn().unwrap();
        previous = child.stdout.take();
        children.push(child);
    }
    let mut bytes = Vec::new();
    std::io::Read::read_to_end(&mut previous.unwrap(), &mut bytes).unwrap();
    for mut c in children {
        assert!(c.wait().unwrap().success());
    }
    bytes
}

#[test]
fn piped_pipeline_matches_in_memory_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = small_config(dir.path());
    let meta = dir.path().join("m.bin");
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let piped = pipe(&[
        s(&[
            "simulate",
            "--config",
            p(&config_path),
            "--duration",
            "0.5",
            "--seed",
            "11",
            "--events",
            "-",
            "--metadata",
            p(&meta),
            "-o",
            p(dir.path()),
        ]),
        s(&["decode", "-"]),
        s(&["encode", "-"]),
        s(&["windows", "-", "--length-ms", "50", "--stride-ms", "5", "--width", "64", "--height", "48"]),
    ]);

    let config = SimulationConfig::parse(SMALL).unwrap();
    let sim = simulate_config(&config, 0.5, 11).unwrap();
    let g = config.camera.geometry;
    let end = sim.steps() as Micros * sim.step_micros;
    let mut expected = Vec::new();
    for w in slide_windows(&sim.events, 50_000, 5_000).unwrap().with_span(WindowSpan::FullWithin(end)) {
        encode_image(&build_lnes(&w, g).unwrap(), &mut expected);
    }
    assert_eq!(decode_images(&expected).unwrap().len(), 91);
    assert!(piped == expected, "piped output differs from the in-memory pipeline");
}

#[test]
fn csv_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = simulate_small(dir.path(), "run", "5");
    let events = run_dir.join("events.bin");
    let csv = dir.path().join("events.csv");
    let back = dir.path().join("back.bin");
    run_ok(&["decode", p(&events), "-o", p(&csv)]);
    run_ok(&["encode", p(&csv), "-o", p(&back)]);
    assert_eq!(fs::read(&events).unwrap(), fs::read(&back).unwrap());
    assert!(dir.path().join("back.bin.manifest.toml").exists());
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["windows", "x.bin", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["windows", "missing.bin"]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.bin");
    fs::write(&garbage, [1u8, 2, 3, 4, 5, 6, 7]).unwrap();
    let out = run(&["info", p(&garbage)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte offset 4"));

    let valid = dir.path().join("valid.bin");
    fs::write(&valid, encode_events(&[], 3, 1000).unwrap().bytes).unwrap();
    let out = run(&["windows", p(&valid), "--stride-ms", "200", "--length-ms", "100"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));

    let bad_config = dir.path().join("bad.toml");
    fs::write(&bad_config, "[camera]\nthreshold = -2.0\n").unwrap();
    assert_eq!(run(&["simulate", "--config", p(&bad_config), "-o", p(dir.path())]).status.code(), Some(1));

    let out = bin()
        .args(["info", p(&valid)])
        .env(eventforge_cli::THREADS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let events = simulate_small(dir.path(), "run", "6").join("events.bin");
    let args = [
        "windows",
        p(&events),
        "--repr",
        "eci",
        "--length-ms",
        "20",
        "--stride-ms",
        "2",
        "--width",
        "64",
        "--height",
        "48",
    ];
    let one = bin().args(args).env(eventforge_cli::THREADS_ENV, "1").output().unwrap();
    let four = bin().args(args).env(eventforge_cli::THREADS_ENV, "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert!(one.stdout == four.stdout);
}

#[test]
fn fixed_mode_filter_matches_library_filter() {
    let dir = tempfile::tempdir().unwrap();
    let poses: Vec<PoseVector> = (0..50)
        .map(|k| PoseVector(std::array::from_fn(|i| (k as f64 * 0.1 + i as f64).sin())))
        .collect();
    let input = dir.path().join("raw.bin");
    let output = dir.path().join("filtered.bin");
    fs::write(&input, encode_poses(&poses)).unwrap();
    run_ok(&["filter", p(&input), "-o", p(&output), "--mode", "fast", "--sigma2", "2.0"]);

    let mut kf = KalmanFilter::new(FilterSettings::new(2.0, 1.0, 1.0).unwrap()).unwrap();
    let expected: Vec<PoseVector> = poses.iter().map(|p| kf.step(p).unwrap().pose).collect();
    let got = decode_metadata(&fs::read(&output).unwrap()).unwrap().poses().unwrap();
    assert_eq!(got, expected);
    assert!(dir.path().join("filtered.bin.manifest.toml").exists());
}

#[test]
fn gated_filter_keeps_one_pose_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = simulate_small(dir.path(), "run", "9");
    let output = dir.path().join("filtered.bin");
    let trace = dir.path().join("trace.csv");
    run_ok(&[
        "filter",
        p(&run_dir.join("metadata.bin")),
        "-o",
        p(&output),
        "--events",
        p(&run_dir.join("events.bin")),
        "--width",
        "64",
        "--height",
        "48",
        "--trace",
        p(&trace),
    ]);
    let got = decode_metadata(&fs::read(&output).unwrap()).unwrap();
    assert_eq!(got.frames(), 1000);
    let trace = fs::read_to_string(&trace).unwrap();
    assert_eq!(trace.lines().count(), 1001);
    assert!(trace.lines().nth(1).unwrap().starts_with("0,emit,"));
}

fn keypoint_csv(frames: usize, offset: f64) -> String {
    let mut s = String::from("frame,joint,x,y,z\n");
    for f in 0..frames {
        for j in 0..21 {
            let base = (f * 21 + j) as f64;
            let shift = if j == 0 { 0.0 } else { offset };
            s.push_str(&format!("{f},{j},{},{},{}\n", base + shift, base * 0.5, 10.0));
        }
    }
    s
}

#[test]
fn eval_writes_curve_auc_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.csv");
    let pred = dir.path().join("pred.csv");
    fs::write(&gt, keypoint_csv(3, 0.0)).unwrap();
    // every non-wrist joint is off by 50 mm after root alignment
    fs::write(&pred, keypoint_csv(3, 50.0)).unwrap();
    let curve = dir.path().join("curve.csv");
    let plot = dir.path().join("curve.png");
    let out = run_ok(&["eval", "--pred", p(&pred), "--gt", p(&gt), "-o", p(&curve), "--plot", p(&plot)]);
    let text = fs::read_to_string(&curve).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    let wrist_only = 1.0 / 21.0;
    assert!((rows[49].1 - wrist_only).abs() < 1e-12);
    assert_eq!(rows[50].1, 1.0);
    // trapezoid: wrist_only on [0, 49], ramp over [49, 50], 1 on [50, 100]
    let expected = (49.0 * wrist_only + 0.5 * (wrist_only + 1.0) + 50.0) / 100.0;
    let stderr = String::from_utf8(out.stderr).unwrap();
    let auc: f64 = stderr.trim().strip_prefix("auc = ").unwrap().parse().unwrap();
    assert!((auc - expected).abs() < 1e-6, "{auc} vs {expected}");
    assert_eq!(image::image_dimensions(&plot).unwrap(), (640, 480));

    fs::write(&pred, keypoint_csv(2, 0.0)).unwrap();
    assert_eq!(run(&["eval", "--pred", p(&pred), "--gt", p(&gt)]).status.code(), Some(2));
}

fn write_pgm(path: &Path, w: usize, h: usize, value: u8) {
    let mut f = fs::File::create(path).unwrap();
    write!(f, "P5\n{w} {h}\n255\n").unwrap();
    f.write_all(&vec![value; w * h]).unwrap();
}

#[test]
fn calibrate_threshold_from_frames() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("f0.pgm"), 4, 4, 20);
    write_pgm(&dir.path().join("f1.pgm"), 4, 4, 200);
    fs::write(dir.path().join("frames.txt"), "# t file\n0 f0.pgm\n10000 f1.pgm\n").unwrap();
    // 16 pixels each rising by ln 10; 4 events per pixel inside (0, 10 ms]
    let mut events = Vec::new();
    for step in 1..=4u64 {
        for y in 0..4 {
            for x in 0..4 {
                events.push(Event::new(x, y, step * 1000, Polarity::Positive));
            }
        }
    }
    let ev = dir.path().join("events.bin");
    fs::write(&ev, encode_events(&events, 12, 1000).unwrap().bytes).unwrap();
    let out = run_ok(&[
        "calibrate",
        "threshold",
        "--events",
        p(&ev),
        "--frames",
        p(&dir.path().join("frames.txt")),
    ]);
    let report: toml::Table = toml::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let c = report["threshold"].as_float().unwrap();
    assert!((c - 10f64.ln() / 4.0).abs() < 1e-12, "{c}");
    assert_eq!(report["events"].as_integer(), Some(64));
}

#[test]
fn calibrate_noise_rates() {
    let dir = tempfile::tempdir().unwrap();
    let events: Vec<Event> = (0..30u64)
        .map(|i| Event::new(1, 1, i * 1000, if i % 3 == 0 { Polarity::Negative } else { Polarity::Positive }))
        .collect();
    let ev = dir.path().join("static.bin");
    fs::write(&ev, encode_events(&events, 2000, 1000).unwrap().bytes).unwrap();
    let out = run_ok(&["calibrate", "noise", "--events", p(&ev)]);
    let report: toml::Table = toml::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let rate = |k: &str| report[k].as_float().unwrap();
    assert!((rate("noise_rate_positive") - 10.0).abs() < 1e-9);
    assert!((rate("noise_rate_negative") - 5.0).abs() < 1e-9);
}

#[test]
fn bench_reports_every_rate() {
    let out = run_ok(&["bench", "--events", "200000", "--frames", "150", "--repeat", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reference loader rate: 1.75e8 events/s"), "{text}");
    for key in ["loader:", "simulator:", "lnes:"] {
        assert!(text.contains(key), "{text}");
    }
    assert!(text.contains("(51 windows)"), "{text}");
}

#[test]
fn geometry_flags_are_checked_against_events() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = simulate_small(dir.path(), "run", "2");
    let out = run(&["windows", p(&run_dir.join("events.bin")), "--width", "16", "--height", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the 16x16 sensor"));
}

fn fuzz_seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn config_fuzz_seeds_parse_as_expected() {
    let valid: Vec<String> = fuzz_seeds("simulation_config")
        .into_iter()
        .filter(|(_, text)| SimulationConfig::parse_valid(text).is_ok())
        .map(|(name, _)| name)
        .collect();
    assert_eq!(valid, ["empty.toml", "full.toml", "small_disk.toml"]);
}

#[test]
fn event_csv_fuzz_seeds_parse_as_expected() {
    let valid: Vec<String> = fuzz_seeds("events_csv")
        .into_iter()
        .filter(|(_, text)| eventforge_cli::events_csv::parse_events_csv(text).is_ok())
        .map(|(name, _)| name)
        .collect();
    assert_eq!(valid, ["headerless.csv", "simulated.csv", "tiny_with_directive.csv"]);
}
