use std::path::Path;
use std::process::{Command, Output};

use rbe_lab::record::{parse_metric_csv, parse_sweep_csv};
use rbe_lab::transcript_io::read_transcript;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbe-lab")).args(args).env_remove("RBE_LAB_OUTPUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn selftest_exits_zero() {
    let o = lab(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("9 of 9 checks passed"));
}

#[test]
fn qkd_csv_row_echoes_seed_and_reference() {
    let o =
        lab(&["qkd", "--protocol", "bb84", "--attack", "wm", "--epsilon", "0.8", "--trials", "20000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_sweep_csv(&o.stdout[..]).unwrap();
    assert_eq!(rows.len(), 1);
    let r = rows[0];
    assert_eq!((r.seed, r.trials, r.epsilon), (7, 20000, 0.8));
    assert_eq!(r.success_analytic, Some(0.6));
    assert!((r.success - 0.6).abs() < 4.0 * r.stderr);
}

#[test]
fn output_bytes_do_not_depend_on_threads() {
    let base = [
        "sweep",
        "--protocol",
        "dl04",
        "--eps-from",
        "0.1",
        "--eps-to",
        "1.0",
        "--steps",
        "4",
        "--trials",
        "5000",
        "--seed",
        "3",
    ];
    let one = lab(&[&base[..], &["--threads", "1"]].concat());
    let many = lab(&[&base[..], &["--threads", "5"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let json1 = lab(&[&base[..], &["--threads", "1", "--format", "json"]].concat());
    let json5 = lab(&[&base[..], &["--threads", "5", "--format", "json"]].concat());
    assert_eq!(json1.stdout, json5.stdout);
    let rows = parse_sweep_csv(&one.stdout[..]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.success_analytic.is_some() && r.seed == 3));
}

#[test]
fn missing_seed_is_generated_and_echoed() {
    let o = lab(&["qkd", "--protocol", "dl04", "--epsilon", "0.5", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let echoed: u64 = err.trim().strip_prefix("seed: ").unwrap().parse().unwrap();
    assert_eq!(parse_sweep_csv(&o.stdout[..]).unwrap()[0].seed, echoed);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["qkd", "--protocol", "bb84", "--epsilon", "1.5", "--seed", "1"][..],
        &["qkd", "--protocol", "bb84", "--trials", "0", "--seed", "1"],
        &["qkd", "--protocol", "nope"],
        &["qkd", "--protocol", "bb84", "--informed-check", "--seed", "1"],
        &["qkd", "--protocol", "bb84", "--check-fraction", "2", "--seed", "1"],
        &["sweep", "--protocol", "dl04", "--eps-from", "0.9", "--eps-to", "0.1", "--seed", "1"],
        &["sweep", "--protocol", "dl04", "--attack", "none", "--seed", "1"],
        &["entangle", "--key-n", "0", "--seed", "1"],
        &["tree"],
        &["frobnicate"],
    ] {
        assert_eq!(lab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rbe-lab"))
        .args(["tree", "--epsilon", "0.5", "--key-n", "8"])
        .env("RBE_LAB_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rows = parse_metric_csv(std::fs::File::open(dir.path().join("tree-0.5.csv")).unwrap()).unwrap();
    let mass = rows.iter().find(|r| r.metric == "bb84_eve_correct_mass").unwrap();
    assert!((mass.value - 0.5625).abs() < 1e-12);
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("out.csv");
    let o = lab(&["tree", "--epsilon", "0.1", "--key-n", "4", "--output", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn transcript_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let out = dir.path().join("rec.json");
    let o = lab(&[
        "qkd",
        "--protocol",
        "rbe-qkd",
        "--epsilon",
        "0.3",
        "--n",
        "4",
        "--trials",
        "50",
        "--seed",
        "9",
        "--format",
        "json",
        "--transcript",
        path.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (t, seed) = read_transcript(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(seed, 9);
    assert_eq!(t.rounds.len(), 8);
    assert!(t.check_causality().is_ok());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(Path::new(&out)).unwrap()).unwrap();
    assert_eq!(json[0]["spec"]["seed"], 9);
    assert_eq!(json[0]["spec"]["n"], 4);
    assert!(json[0].get("wall_clock_ms").is_none());
}

#[test]
fn timing_flag_adds_wall_clock() {
    let o = lab(&[
        "qkd",
        "--protocol",
        "dl04",
        "--epsilon",
        "0.5",
        "--trials",
        "100",
        "--seed",
        "1",
        "--format",
        "json",
        "--timing",
    ]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json[0]["wall_clock_ms"].as_f64().unwrap() >= 0.0);
}
