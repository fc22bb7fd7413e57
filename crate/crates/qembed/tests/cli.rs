use std::path::Path;
use std::process::{Command, Output};

use qembed::formats::read_binary;

fn qembed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qembed"))
        .current_dir(dir)
        .env_remove("QEMBED_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qembed(dir, args);
    assert!(
        out.status.success(),
        "qembed {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..300 {
        let line: Vec<String> = (0..12)
            .map(|j| format!("w{}", (i * 7 + j * j) % 40))
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    text.push_str("rare\n");
    std::fs::write(dir.path().join("c.txt"), text).unwrap();
    std::fs::write(
        dir.path().join("ds.csv"),
        "w1,w2,1\nw3,w4,2\nw5,w6,3\nw1,w7,4\nmissing,w2,2\n",
    )
    .unwrap();
    dir
}

#[test]
fn min_count_one_keeps_every_token() {
    let dir = workspace();
    ok(
        dir.path(),
        &[
            "vocab",
            "--corpus",
            "c.txt",
            "--min-count",
            "1",
            "-o",
            "v.txt",
        ],
    );
    let v = std::fs::read_to_string(dir.path().join("v.txt")).unwrap();
    assert_eq!(v.lines().count(), 41);
    assert!(v.lines().any(|l| l.starts_with("rare\t")));

    ok(
        dir.path(),
        &[
            "vocab",
            "--corpus",
            "c.txt",
            "--min-count",
            "2",
            "-o",
            "v2.txt",
        ],
    );
    let v2 = std::fs::read_to_string(dir.path().join("v2.txt")).unwrap();
    assert_eq!(v2.lines().count(), 40);
}

#[test]
fn missing_input_exits_nonzero() {
    let dir = workspace();
    let out = qembed(
        dir.path(),
        &["vocab", "--corpus", "absent.txt", "-o", "v.txt"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("qembed:"));
    assert!(!dir.path().join("v.txt").exists());

    let out = qembed(
        dir.path(),
        &["eval", "--model", "absent.bin", "--dataset", "ds.csv"],
    );
    assert!(!out.status.success());
}

#[test]
fn training_is_deterministic_with_one_thread() {
    let dir = workspace();
    let args = [
        "train",
        "--corpus",
        "c.txt",
        "--min-count",
        "1",
        "--size",
        "8",
        "--iter",
        "2",
        "--threads",
        "1",
        "--seed",
        "3",
    ];
    ok(dir.path(), &[&args[..], &["-o", "a.bin"]].concat());
    ok(dir.path(), &[&args[..], &["-o", "b.bin"]].concat());
    let a = std::fs::read(dir.path().join("a.bin")).unwrap();
    let b = std::fs::read(dir.path().join("b.bin")).unwrap();
    assert_eq!(a, b);

    ok(
        dir.path(),
        &[&args[..11], &["--seed", "4", "-o", "c.bin"]].concat(),
    );
    assert_ne!(a, std::fs::read(dir.path().join("c.bin")).unwrap());
}

#[test]
fn manifest_replays_the_run() {
    let dir = workspace();
    ok(
        dir.path(),
        &[
            "train",
            "--corpus",
            "c.txt",
            "--min-count",
            "1",
            "--size",
            "8",
            "--iter",
            "1",
            "--threads",
            "1",
            "-o",
            "a.bin",
        ],
    );
    let manifest = dir.path().join("a.bin.manifest.json");
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "train");
    assert_eq!(m["config"]["loss"], "sigmoid");

    std::fs::rename(dir.path().join("a.bin"), dir.path().join("orig.bin")).unwrap();
    ok(dir.path(), &["--manifest", "a.bin.manifest.json"]);
    assert_eq!(
        std::fs::read(dir.path().join("a.bin")).unwrap(),
        std::fs::read(dir.path().join("orig.bin")).unwrap()
    );

    // flags override the manifest
    ok(
        dir.path(),
        &[
            "train",
            "--manifest",
            "a.bin.manifest.json",
            "--size",
            "4",
            "-o",
            "small.bin",
        ],
    );
    let small = read_binary(std::fs::File::open(dir.path().join("small.bin")).unwrap()).unwrap();
    assert_eq!(small.table.dim(), 4);
}

#[test]
fn eval_writes_a_row_per_model_and_dataset() {
    let dir = workspace();
    let common = [
        "--corpus",
        "c.txt",
        "--min-count",
        "1",
        "--size",
        "8",
        "--iter",
        "1",
        "--threads",
        "1",
    ];
    ok(
        dir.path(),
        &[&["train"][..], &common, &["-o", "m1.bin"]].concat(),
    );
    ok(
        dir.path(),
        &[&["train", "--mode", "real"][..], &common, &["-o", "m2.bin"]].concat(),
    );
    std::fs::copy(dir.path().join("ds.csv"), dir.path().join("other.csv")).unwrap();
    let table = ok(
        dir.path(),
        &[
            "eval",
            "--model",
            "m1.bin",
            "--model",
            "m2.bin",
            "--dataset",
            "ds.csv",
            "--dataset",
            "other.csv",
        ],
    );
    assert!(table.contains("4/5"));
    let csv = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("m1.bin,ds,5,4,"));
}
