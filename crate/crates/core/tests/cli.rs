use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use svmark::imageio;
use tempfile::TempDir;

fn svmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svmark")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = svmark(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    svmark(args).status.code().expect("exit code")
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new(size: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let f = Self { dir };
        ok(&["gen-images", "--dir", &f.s(""), "--size", &size.to_string()]);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn load(path: &Path) -> Vec<svmark::ImageMatrix> {
    imageio::load(path).unwrap().channels
}

#[test]
fn embed_extract_round_trip_through_f64m() {
    let f = Fixture::new(64);
    let stdout = ok(&[
        "embed", "--host", &f.s("host.pgm"), "--mark", &f.s("mark.pgm"), "--lambda", "0.2",
        "--out", &f.s("marked.pgm"), "--float-out", &f.s("marked.f64m"), "--key", &f.s("key.svmk"),
    ]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("rmse,psnr,ncc"));
    assert_eq!(lines.next().unwrap().split(',').count(), 3);

    ok(&["extract", "--image", &f.s("marked.f64m"), "--key", &f.s("key.svmk"), "--out", &f.s("back.f64m")]);
    let back = load(&f.path("back.f64m"));
    let mark = load(&f.path("mark.pgm"));
    assert!(back[0].max_abs_diff(&mark[0]) < 1e-6);

    // The 8-bit path still yields a recognisable watermark.
    ok(&["extract", "--image", &f.s("marked.pgm"), "--key", &f.s("key.svmk"), "--out", &f.s("back8.pgm")]);
    let back8 = load(&f.path("back8.pgm"));
    assert!(svmark::metrics::ncc(&mark[0], &back8[0]).unwrap() > 0.95);
}

#[test]
fn color_images_round_trip() {
    let f = Fixture::new(32);
    ok(&[
        "embed", "--host", &f.s("host_color.ppm"), "--mark", &f.s("mark_color.ppm"), "--lambda", "0.02",
        "--out", &f.s("marked.f64m"), "--key", &f.s("key.svmk"),
    ]);
    ok(&["extract", "--image", &f.s("marked.f64m"), "--key", &f.s("key.svmk"), "--out", &f.s("back.f64m")]);
    let back = load(&f.path("back.f64m"));
    let mark = load(&f.path("mark_color.ppm"));
    assert_eq!(back.len(), 3);
    for (b, m) in back.iter().zip(&mark) {
        assert!(b.max_abs_diff(m) < 1e-6);
    }
}

#[test]
fn zero_lambda_is_a_usage_error() {
    let f = Fixture::new(16);
    let code = exit_code(&[
        "embed", "--host", &f.s("host.pgm"), "--mark", &f.s("mark.pgm"), "--lambda", "0",
        "--out", &f.s("o.pgm"), "--key", &f.s("k.svmk"),
    ]);
    assert_eq!(code, 2);
    assert!(!f.path("k.svmk").exists());
}

#[test]
fn mismatched_sizes_fail_unless_resized() {
    let f = Fixture::new(32);
    let small = tempfile::tempdir().unwrap();
    let small_dir = small.path().to_string_lossy().into_owned();
    ok(&["gen-images", "--dir", &small_dir, "--size", "16"]);
    let small_mark = small.path().join("mark.pgm").to_string_lossy().into_owned();
    let (host, out, key) = (f.s("host.pgm"), f.s("o.pgm"), f.s("k.svmk"));
    let args = ["embed", "--host", &host, "--mark", &small_mark, "--lambda", "0.2", "--out", &out, "--key", &key];
    assert_eq!(exit_code(&args), 3);
    let mut resized = args.to_vec();
    resized.push("--resize");
    ok(&resized);
}

#[test]
fn truncated_key_is_rejected() {
    let f = Fixture::new(16);
    ok(&[
        "embed", "--host", &f.s("host.pgm"), "--mark", &f.s("mark.pgm"), "--lambda", "0.2",
        "--out", &f.s("o.pgm"), "--key", &f.s("k.svmk"),
    ]);
    let bytes = std::fs::read(f.path("k.svmk")).unwrap();
    std::fs::write(f.path("k.svmk"), &bytes[..bytes.len() - 3]).unwrap();
    let out = svmark(&["extract", "--image", &f.s("o.pgm"), "--key", &f.s("k.svmk"), "--out", &f.s("w.pgm")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}

#[test]
fn noise_attack_is_byte_identical_across_runs() {
    let f = Fixture::new(32);
    for out in ["a.pgm", "b.pgm"] {
        ok(&["attack", "noise", "--sigma", "0.04", "--seed", "9", "-i", &f.s("host.pgm"), "-o", &f.s(out)]);
    }
    ok(&["attack", "noise", "--sigma", "0.04", "--seed", "10", "-i", &f.s("host.pgm"), "-o", &f.s("c.pgm")]);
    let a = std::fs::read(f.path("a.pgm")).unwrap();
    assert_eq!(a, std::fs::read(f.path("b.pgm")).unwrap());
    assert_ne!(a, std::fs::read(f.path("c.pgm")).unwrap());
    assert_eq!(exit_code(&["attack", "noise", "--sigma", "-1", "-i", &f.s("host.pgm"), "-o", &f.s("d.pgm")]), 2);
}

#[test]
fn crop_and_jpeg_attacks() {
    let f = Fixture::new(128);
    ok(&["attack", "crop", "--rect", "32,32,64,64", "-i", &f.s("host.pgm"), "-o", &f.s("crop.pgm")]);
    let crop = load(&f.path("crop.pgm"));
    assert_eq!(crop[0].get(64, 64), 0.0);
    assert_eq!(crop[0].get(0, 0), load(&f.path("host.pgm"))[0].get(0, 0));
    assert_ne!(exit_code(&["attack", "crop", "--rect", "100,100,64,64", "-i", &f.s("host.pgm"), "-o", &f.s("x.pgm")]), 0);

    ok(&["attack", "jpeg", "--quality", "50", "-i", &f.s("host.pgm"), "-o", &f.s("j.pgm")]);
    let stdout = ok(&["metrics", "--reference", &f.s("host.pgm"), "--test", &f.s("j.pgm")]);
    let row: Vec<f64> = stdout.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row[0] > 0.0 && row[1] > 15.0 && row[2] > 0.9, "{row:?}");
    assert_eq!(exit_code(&["attack", "jpeg", "--quality", "0", "-i", &f.s("host.pgm"), "-o", &f.s("y.pgm")]), 2);
}

#[test]
fn bench_writes_csv() {
    let f = Fixture::new(32);
    std::fs::write(
        f.path("bench.toml"),
        r#"
host = "host.pgm"
mark = "mark.pgm"
output = "results.csv"
lambdas = [0.1, 0.2]
sigmas = [0.02]
qualities = [90]
crops = ["8,8,16,16"]
seeds = [1, 2]
"#,
    )
    .unwrap();
    ok(&["bench", "--config", &f.s("bench.toml")]);
    let csv = std::fs::read_to_string(f.path("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(svmark::bench::CSV_HEADER));
    // 2 lambda rows, 2×1×2 noise rows, 2 jpeg rows, 2 crop rows.
    assert_eq!(lines.count(), 10);
}

#[test]
fn unknown_extension_is_rejected() {
    let f = Fixture::new(16);
    let code = exit_code(&[
        "embed", "--host", &f.s("host.pgm"), "--mark", &f.s("mark.pgm"), "--lambda", "0.2",
        "--out", &f.s("o.png"), "--key", &f.s("k.svmk"),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn wrong_size_suspect_is_rejected() {
    let f = Fixture::new(32);
    let small = tempfile::tempdir().unwrap();
    ok(&["gen-images", "--dir", &small.path().to_string_lossy(), "--size", "16"]);
    ok(&[
        "embed", "--host", &f.s("host.pgm"), "--mark", &f.s("mark.pgm"), "--lambda", "0.2",
        "--out", &f.s("o.pgm"), "--key", &f.s("k.svmk"),
    ]);
    let suspect = small.path().join("host.pgm").to_string_lossy().into_owned();
    let out = svmark(&["extract", "--image", &suspect, "--key", &f.s("k.svmk"), "--out", &f.s("w.pgm")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn bench_output_does_not_depend_on_thread_count() {
    let f = Fixture::new(32);
    std::fs::write(
        f.path("bench.toml"),
        r#"
host = "host.pgm"
mark = "mark.pgm"
output = "unused.csv"
lambdas = [0.1, 0.2, 0.4]
sigmas = [0.01, 0.04]
qualities = [30, 90]
crops = ["8,8,16,16", "0,0,32,8"]
seeds = [1, 2, 3]
"#,
    )
    .unwrap();
    let run = |threads: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_svmark"))
            .args(["bench", "--config", &f.s("bench.toml"), "--out", &f.s(out)])
            .env(svmark::bench::THREADS_ENV, threads)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(f.path(out)).unwrap()
    };
    assert_eq!(run("1", "one.csv"), run("4", "four.csv"));
}
