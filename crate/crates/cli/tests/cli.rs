//! End-to-end tests of the `qk` binary. Outputs that must not drift are
//! compared with files under `tests/golden`; set `QK_BLESS=1` to rewrite them.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn kernel(name: &str) -> String {
    manifest().join("../core/kernels").join(name).display().to_string()
}

fn fixture(name: &str) -> String {
    manifest().join("tests/fixtures").join(name).display().to_string()
}

struct Qk {
    cache: tempfile::TempDir,
}

impl Qk {
    fn new() -> Self {
        Qk {
            cache: tempfile::tempdir().unwrap(),
        }
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_qk"))
            .args(args)
            .env("QK_CACHE_DIR", self.cache.path())
            .env_remove("RUST_LOG")
            .output()
            .expect("spawn qk")
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "qk {args:?} failed with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn code(&self, args: &[&str]) -> (i32, String) {
        let out = self.run(args);
        (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn golden(name: &str, actual: &str) {
    let path = manifest().join("tests/golden").join(name);
    if std::env::var_os("QK_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, want, "output differs from {}", path.display());
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

#[test]
fn compile_reports_one_line_per_kernel_then_hits() {
    let qk = Qk::new();
    let first = qk.ok(&["compile", &kernel("bell.qk")]);
    let lines: Vec<_> = first.lines().collect();
    assert_eq!(lines.len(), 1);
    let fields: Vec<_> = lines[0].split(' ').collect();
    assert_eq!(fields[0], "bell");
    assert_eq!(fields[1].len(), 64);
    assert_eq!(fields[2], "miss");

    let again = qk.ok(&["compile", &kernel("bell.qk")]);
    assert_eq!(again, first.replace("miss", "hit (disk)"));
    assert_eq!(qk.ok(&["compile", &kernel("bell.qk"), "--no-cache"]), first);
}

#[test]
fn compile_lists_dependencies_first() {
    let qk = Qk::new();
    let out = qk.ok(&["compile", &kernel("dag.qk")]);
    let names: Vec<_> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(names, ["a", "b", "c", "d"]);
}

#[test]
fn dependency_cycle_is_a_compile_error() {
    let (code, err) = Qk::new().code(&["compile", &fixture("cycle.qk")]);
    assert_eq!(code, 3);
    assert!(err.contains("cycl"), "{err}");
}

#[test]
fn bell_run_matches_golden() {
    let qk = Qk::new();
    let args = [
        "run",
        &kernel("bell.qk"),
        "--kernel",
        "bell",
        "--args",
        &fixture("bell.json"),
        "-qpu",
        "qpp",
        "--shots",
        "100",
        "--seed",
        "7",
        "--no-timing",
    ];
    let out = qk.ok(&args);
    golden("bell_run.json", &out);
    assert_eq!(qk.ok(&args), out);

    let doc = json(&out);
    let counts = doc["counts"].as_object().unwrap();
    assert!(counts.keys().all(|k| k == "00" || k == "11"));
    assert_eq!(counts.values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 100);
}

#[test]
fn results_document_carries_timing_and_schema() {
    let out = Qk::new().ok(&[
        "run",
        &kernel("bell.qk"),
        "--kernel",
        "bell",
        "--args",
        &fixture("bell.json"),
        "--shots",
        "10",
    ]);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["seed"], 0);
    assert_eq!(doc["backend"], "qpp");
    for k in ["parse_ns", "lower_ns", "execute_ns"] {
        assert!(doc["timing"][k].is_u64(), "{k}");
    }
    assert!(doc["timing"]["execute_ns"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_kernel_lists_the_available_ones() {
    let qk = Qk::new();
    let base = [
        "run",
        &kernel("qec.qk"),
        "--kernel",
        "probe",
        "--args",
        &fixture("probe.json"),
        "-qpu",
        "ftqc",
        "--mode",
        "ftqc",
        "--shots",
        "2",
        "--no-timing",
    ];
    let (code, err) = qk.code(&base);
    assert_eq!(code, 2);
    assert!(err.contains("qec_round"), "{err}");
}

#[test]
fn qec_round_logs_the_syndrome_in_ftqc_mode() {
    let qk = Qk::new();
    let dir = tempfile::tempdir().unwrap();
    for (error, syndrome) in [(-1, 0), (0, 1), (1, 3), (2, 2)] {
        let args = dir.path().join(format!("e{error}.json"));
        std::fs::write(
            &args,
            format!(r#"{{"q": {{"size": 4}}, "logical": 1, "error": {error}}}"#),
        )
        .unwrap();
        let out = qk.ok(&[
            "run",
            &kernel("qec.qk"),
            "--kernel",
            "qec_round",
            "--args",
            args.to_str().unwrap(),
            "-qpu",
            "ftqc",
            "--mode",
            "ftqc",
            "--shots",
            "2",
        ]);
        let doc = json(&out);
        let line = format!("Syndrome value= {syndrome}");
        assert_eq!(doc["log"], serde_json::json!([line, line]));
        assert_eq!(doc["mode"], "ftqc");
    }
}

#[test]
fn byref_slots_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.qk");
    std::fs::write(
        &src,
        std::fs::read_to_string(kernel("qec.qk")).unwrap()
            + "\ndef probe(q: qreg, flip: int, parity: IntRef):\n    if flip == 1:\n        X(q[0])\n    read_parity01(q, parity)\n",
    )
    .unwrap();
    let qk = Qk::new();
    let args = [
        "run",
        src.to_str().unwrap(),
        "--kernel",
        "probe",
        "--args",
        &fixture("probe.json"),
        "-qpu",
        "ftqc",
        "--mode",
        "ftqc",
        "--shots",
        "4",
        "--no-timing",
    ];
    let doc = json(&qk.ok(&args));
    assert_eq!(doc["byref"]["parity"], 1);
    assert_eq!(doc["seed"], 3, "taken from __seed__");
    let doc = json(&qk.ok(&[&args[..], &["--seed", "9"]].concat()));
    assert_eq!(doc["seed"], 9, "the flag wins");
}

#[test]
fn dynamic_kernel_in_circuit_mode_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let args = dir.path().join("a.json");
    std::fs::write(&args, r#"{"q": {"size": 4}, "logical": 0, "error": 0}"#).unwrap();
    let (code, err) = Qk::new().code(&[
        "run",
        &kernel("qec.qk"),
        "--kernel",
        "qec_round",
        "--args",
        args.to_str().unwrap(),
    ]);
    assert_eq!(code, 4);
    assert!(err.contains("ftqc"), "{err}");
}

#[test]
fn backend_errors_exit_with_five() {
    let qk = Qk::new();
    let base = ["run", &kernel("bell.qk"), "--kernel", "bell", "--args", &fixture("bell.json")];
    let (code, err) = qk.code(&[&base[..], &["-qpu", "nope"]].concat());
    assert_eq!(code, 5);
    assert!(err.contains("nope"), "{err}");
    let (code, _) = qk.code(&[&base[..], &["--mode", "ftqc"]].concat());
    assert_eq!(code, 5, "qpp has no mid-circuit measurement");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "no separator here\n").unwrap();
    let (code, _) = qk.code(&[&base[..], &["--qpu-config", cfg.to_str().unwrap()]].concat());
    assert_eq!(code, 5);
}

#[test]
fn input_problems_map_to_usage_compile_and_runtime_codes() {
    let qk = Qk::new();
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{not json").unwrap();
    let wrong_type = dir.path().join("wrong.json");
    std::fs::write(&wrong_type, r#"{"q": 2.5}"#).unwrap();
    let syntax = dir.path().join("syntax.qk");
    std::fs::write(&syntax, "def k(q: qreg)\n    H(q[0])\n").unwrap();

    let bell = kernel("bell.qk");
    assert_eq!(qk.code(&["run", &bell, "--kernel", "bell", "--args", bad_json.to_str().unwrap()]).0, 2);
    assert_eq!(qk.code(&["run", &bell, "--kernel", "nope"]).0, 2);
    assert_eq!(qk.code(&["run", "/nonexistent.qk", "--kernel", "k"]).0, 2);
    assert_eq!(qk.code(&["run", &bell]).0, 2, "missing --kernel");
    assert_eq!(qk.code(&["frobnicate"]).0, 2);
    assert_eq!(qk.code(&["compile", syntax.to_str().unwrap()]).0, 3);
    assert_eq!(qk.code(&["run", &bell, "--kernel", "bell"]).0, 4, "missing argument");
    assert_eq!(qk.code(&["run", &bell, "--kernel", "bell", "--args", wrong_type.to_str().unwrap()]).0, 4);
}

#[test]
fn print_of_controlled_ucc1_matches_golden() {
    let out = Qk::new().ok(&[
        "print",
        &kernel("ucc1.qk"),
        "--kernel",
        "kernel",
        "--args",
        &fixture("ucc1_kernel.json"),
    ]);
    golden("ucc1_kernel.txt", &out);
    assert_eq!(out.lines().count(), 15);
    assert_eq!(out.lines().filter(|l| l.contains("ctrl[")).count(), 1);
}

#[test]
fn print_of_dynamic_kernel_shows_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let args = dir.path().join("a.json");
    std::fs::write(&args, r#"{"q": {"size": 4}, "logical": 0, "error": -1}"#).unwrap();
    let out = Qk::new().ok(&["print", &kernel("qec.qk"), "--kernel", "qec_round", "--args", args.to_str().unwrap()]);
    golden("qec_round.txt", &out);
    assert!(out.contains("Measure"), "{out}");
}

#[test]
fn bell_exports_openqasm() {
    let out = Qk::new().ok(&["export-openqasm", &kernel("bell.qk"), "--kernel", "bell", "--args", &fixture("bell.json")]);
    golden("bell.qasm", &out);
    assert!(out.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
}

#[test]
fn unitary_goes_to_stdout_or_a_file() {
    let qk = Qk::new();
    let k = fixture("hadamard.qk");
    let out = qk.ok(&["unitary", &k, "--kernel", "hx", "--args", &fixture("bell.json")]);
    golden("hx_unitary.txt", &out);
    assert_eq!(out.lines().count(), 5);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("u.txt");
    let quiet = qk.ok(&["unitary", &k, "--kernel", "hx", "--args", &fixture("bell.json"), "-o", file.to_str().unwrap()]);
    assert_eq!(quiet, "");
    assert_eq!(std::fs::read_to_string(file).unwrap(), out);

    let (code, err) = qk.code(&["unitary", &kernel("bell.qk"), "--kernel", "bell", "--args", &fixture("bell.json")]);
    assert_eq!(code, 4);
    assert!(err.contains("Measure"), "{err}");
}

#[test]
fn deuteron_expectation_at_the_known_minimum() {
    let qk = Qk::new();
    for op in ["deuteron.op", "deuteron_fermion.op"] {
        let out = qk.ok(&[
            "observe",
            &kernel("deuteron.qk"),
            "--kernel",
            "ansatz",
            "--args",
            &fixture("deuteron.json"),
            "--operator",
            &kernel(op),
            "-qpu",
            "qpp-like",
        ]);
        let e: f64 = out.trim().parse().unwrap();
        assert!((e + 1.74886).abs() < 1e-3, "{op}: {e}");
    }
}

#[test]
fn run_can_attach_expectations() {
    let out = Qk::new().ok(&[
        "run",
        &kernel("deuteron.qk"),
        "--kernel",
        "ansatz",
        "--args",
        &fixture("deuteron.json"),
        "--shots",
        "0",
        "--observe",
        &kernel("deuteron.op"),
    ]);
    let e = json(&out)["expectations"]["deuteron"].as_f64().unwrap();
    assert!((e + 1.74886).abs() < 1e-3, "{e}");
}

fn bench(qk: &Qk, op: &str, steps: &str) -> Value {
    json(&qk.ok(&["bench", "trotter", "--operator", op, "--steps", steps, "--json"]))
}

#[test]
fn trotter_bench_counts() {
    let qk = Qk::new();
    let one = bench(&qk, &kernel("deuteron.op"), "1");
    let two = bench(&qk, &kernel("deuteron.op"), "2");
    assert_eq!(one["qubits"], 2);
    assert_eq!(one["terms"], 5);
    assert_eq!(one["instructions"], 16);
    assert_eq!(two["instructions"].as_u64(), one["instructions"].as_u64().map(|n| 2 * n));

    let h2 = bench(&qk, &kernel("h2.op"), "1");
    assert_eq!((h2["qubits"].as_u64(), h2["terms"].as_u64()), (Some(4), Some(15)));

    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.op");
    std::fs::write(&zero, "# no terms\n").unwrap();
    assert_eq!(bench(&qk, zero.to_str().unwrap(), "3")["instructions"], 0);

    let text = qk.ok(&["bench", "trotter", "--operator", &kernel("deuteron.op")]);
    let keys: Vec<_> = text.lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(keys, ["qubits", "terms", "steps", "instructions", "compose_ns"]);
}

#[test]
fn cache_stats_and_clear() {
    let qk = Qk::new();
    qk.ok(&["compile", &kernel("dag.qk")]);
    qk.ok(&["compile", &kernel("dag.qk")]);
    let stats = qk.ok(&["cache", "stats"]);
    assert!(stats.contains("entries: 4\n"), "{stats}");
    assert!(stats.contains("disk_hits: 4\n"), "{stats}");
    assert!(stats.contains("misses: 0\n"), "{stats}");

    let cleared = qk.ok(&["cache", "clear"]);
    assert!(cleared.starts_with("removed 4 entries"), "{cleared}");
    let stats = qk.ok(&["cache", "stats"]);
    assert!(stats.contains("entries: 0\nbytes: 0\n"), "{stats}");
    assert_eq!(qk.ok(&["compile", &kernel("dag.qk")]).matches("miss").count(), 4);
}

#[test]
fn cache_dir_flag_beats_the_environment() {
    let qk = Qk::new();
    let other = tempfile::tempdir().unwrap();
    let dir = other.path().to_str().unwrap();
    qk.ok(&["compile", &kernel("bell.qk"), "--cache-dir", dir]);
    assert!(qk.ok(&["cache", "stats", "--cache-dir", dir]).contains("entries: 1\n"));
    assert!(qk.ok(&["cache", "stats"]).contains("entries: 0\n"));
}
