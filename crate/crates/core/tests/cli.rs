use std::path::Path;
use std::process::Command;

use sacx::audio::{load_audio, save_audio, AudioSignal, LoadOptions};
use sacx::corpus::multitone;
use sacx::metrics::similarity;

fn sacx(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sacx")).args(args).env_remove("SACX_SEED").output().unwrap()
}

fn write_input(dir: &Path) -> (String, AudioSignal) {
    let x = multitone(3000, 9).unwrap();
    let path = dir.join("in.wav");
    save_audio(&x, &path).unwrap();
    (path.to_string_lossy().into_owned(), x)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn sfft_compress_decompress_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let (input, x) = write_input(dir.path());
    let packed = s(&dir.path().join("a.sacx"));
    let out = s(&dir.path().join("a.wav"));
    let o = sacx(&["compress", &input, "-o", &packed, "--method", "sfft", "--k", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("bits/frame"));
    let o = sacx(&["decompress", &packed, "-o", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let y = load_audio(&out, LoadOptions::default()).unwrap();
    assert_eq!(y.len(), x.len());
    assert!(similarity(x.samples(), y.samples()).unwrap() < 1e-2);
    let o = sacx(&["inspect", &packed]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("SACX v1 method=SFFT"));
    assert_eq!(text.lines().filter(|l| l.starts_with("frame ")).count(), 3);
}

#[test]
fn cs_round_trip_with_bp() {
    let dir = tempfile::tempdir().unwrap();
    let (input, x) = write_input(dir.path());
    let packed = s(&dir.path().join("a.sacx"));
    let out = s(&dir.path().join("a.wav"));
    assert!(sacx(&["compress", &input, "-o", &packed, "--basis", "dct", "--cr", "50", "--frame-len", "256"]).status.success());
    let o = sacx(&["decompress", &packed, "-o", &out, "--solver", "bp", "--bp-max-iter", "500"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let y = load_audio(&out, LoadOptions::default()).unwrap();
    assert!(similarity(x.samples(), y.samples()).unwrap() < 0.1);
}

#[test]
fn seed_from_environment_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = write_input(dir.path());
    let run = |seed: &str, name: &str| {
        let p = s(&dir.path().join(name));
        let o = Command::new(env!("CARGO_BIN_EXE_sacx"))
            .args(["compress", &input, "-o", &p, "--cr", "75", "--threads", "2"])
            .env("SACX_SEED", seed)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("7", "a"), run("7", "b"));
    assert_ne!(run("7", "a"), run("8", "c"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = write_input(dir.path());
    let packed = s(&dir.path().join("a.sacx"));
    let out = s(&dir.path().join("o.wav"));

    assert_eq!(sacx(&["compress", &input, "-o", &packed]).status.code(), Some(2));
    assert_eq!(sacx(&["compress", &input, "-o", &packed, "--method", "cs", "--k", "4"]).status.code(), Some(2));
    assert_eq!(sacx(&["compress", "nope.wav", "-o", &packed, "--cr", "50"]).status.code(), Some(3));

    assert!(sacx(&["compress", &input, "-o", &packed, "--method", "sfft", "--k", "16"]).status.success());
    let bytes = std::fs::read(&packed).unwrap();
    let cut = s(&dir.path().join("cut.sacx"));
    std::fs::write(&cut, &bytes[..bytes.len() - 5]).unwrap();
    let o = sacx(&["decompress", &cut, "-o", &out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frame 2"));

    let mut bad = bytes.clone();
    bad[5] = 9;
    std::fs::write(&cut, &bad).unwrap();
    let o = sacx(&["inspect", &cut]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported method"));

    // Duplicate a bin index inside frame 0: output is still written, exit 4.
    let mut dup = bytes.clone();
    let first = 32 + 17;
    let word = dup[first..first + 4].to_vec();
    dup[first + 4..first + 8].copy_from_slice(&word);
    std::fs::write(&cut, &dup).unwrap();
    let o = sacx(&["decompress", &cut, "-o", &out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(Path::new(&out).exists());
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = write_input(dir.path());
    let csv = dir.path().join("r.csv");
    let o = sacx(&["bench", &input, "--mode", "bit-sweep", "-o", &s(&csv), "--frame-len", "1024", "--reps", "1", "--bp-max-iter", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("method,solver,basis,setting_kind,setting_value,similarity,encode_time_s,reconstruct_time_s,bits_per_frame\n"));
    assert_eq!(text.lines().count(), 1 + 21);
}
