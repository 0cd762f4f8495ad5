use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_te-shape"));
    cmd.env_remove("TE_SHAPE_THREADS").env_remove("RUST_LOG");
    cmd
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn solve_example1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let (code, stdout, stderr) = run(bin().arg("solve").arg(data("example1.json")).arg("--out").arg(&out));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("lambda_star=1.765\n"), "{stdout}");
    assert!(stderr.is_empty(), "{stderr}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["method"], "closed_form_quadratic");
    assert_eq!(json["agents"].as_array().unwrap().len(), 4);
    assert!((json["lambda_star"].as_f64().unwrap() - 1.7647058823529411).abs() < 1e-12);
}

#[test]
fn solve_trading_model_override() {
    let (code, stdout, _) = run(bin().arg("solve").arg(data("example1.json")).args(["--model", "mtes_st"]));
    assert_eq!(code, 0);
    assert!(stdout.contains("e_star=-0.118,3.353,1.588,-4.824"), "{stdout}");
}

#[test]
fn solve_corrupt_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"model\": \"mtes\", \"agents\": [").unwrap();
    let (code, stdout, stderr) = run(bin().arg("solve").arg(&bad));
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.starts_with("error:"), "{stderr}");

    let (code, _, _) = run(bin().arg("solve").arg(dir.path().join("missing.json")));
    assert_eq!(code, 2);
}

#[test]
fn solve_invalid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("zero.json");
    std::fs::write(&bad, r#"{"model":"mtes","agents":[{"a":0,"utility":{"kind":"quadratic","b":1,"m":1}}]}"#).unwrap();
    let (code, _, stderr) = run(bin().arg("solve").arg(&bad));
    assert_eq!(code, 2);
    assert!(stderr.contains("C>0 required"), "{stderr}");
}

#[test]
fn closed_form_on_mixed_instance() {
    let (code, _, stderr) = run(bin().arg("solve").arg(data("mixed.json")).args(["--method", "closed"]));
    assert_eq!(code, 2);
    assert!(stderr.contains("closed form requires homogeneous family"), "{stderr}");
    let (code, stdout, _) = run(bin().arg("solve").arg(data("mixed.json")).args(["--method", "auto"]));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("lambda_star=2.000"), "{stdout}");
}

#[test]
fn shape_check_exit_codes() {
    // b_max on the boundary n lambda / (n m_max - C) = 4 * 10 / (24 - 20).
    let (code, stdout, _) = run(bin().args([
        "shape-check", "--family", "quad", "--b-max", "10", "--m-max", "6", "--n", "4", "--C", "20",
        "--lambda-dagger", "10",
    ]));
    assert_eq!(code, 0);
    assert!(stdout.contains("admissible=true"));
    assert!(stdout.contains("worst_case_lambda=10\n"), "{stdout}");

    let (code, stdout, _) = run(bin().args([
        "shape-check", "--family", "pwl", "--beta-max", "30", "--phi-max", "6", "--n", "4", "--C", "20",
        "--lambda-dagger", "20",
    ]));
    assert_eq!(code, 1);
    assert!(stdout.contains("admissible=false"));

    let (code, _, _) = run(bin().args([
        "shape-check", "--family", "homog", "--b", "2", "--m", "7", "--n", "4", "--C", "20", "--lambda-dagger", "4",
    ]));
    assert_eq!(code, 0);
}

#[test]
fn shape_check_bad_flags() {
    let (code, _, stderr) = run(bin().args([
        "shape-check", "--family", "quad", "--b-max", "1", "--m-max", "6", "--n", "4", "--lambda-dagger", "10",
    ]));
    assert_eq!(code, 2);
    assert!(stderr.contains("--C"), "{stderr}");

    let (code, _, stderr) = run(bin().args([
        "shape-check", "--family", "pwl", "--beta-max", "1", "--n", "4", "--C", "20", "--lambda-dagger", "10",
    ]));
    assert_eq!(code, 2);
    assert!(stderr.contains("--phi-max"), "{stderr}");

    let (code, _, _) = run(bin().args([
        "shape-check", "--family", "quad", "--b-max", "-1", "--m-max", "6", "--n", "4", "--C", "20",
        "--lambda-dagger", "10",
    ]));
    assert_eq!(code, 2);
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"family":"quadratic","n":1000,"k":100,"lambda_dagger":[20,22,24,26,28,30],"seed":1}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "4"), (&b, "1")] {
        let (code, stdout, stderr) = run(bin()
            .arg("experiment")
            .arg(&spec)
            .args(["--seed", "99", "--threads", threads])
            .arg("--out")
            .arg(out));
        assert_eq!(code, 0, "{stderr}");
        assert_eq!(stdout.lines().count(), 6);
        assert!(stdout.lines().all(|l| l.ends_with("above_threshold=0/100")), "{stdout}");
    }
    for file in ["results.csv", "stats.csv", "metadata.json"] {
        let x = std::fs::read(a.join(file)).unwrap();
        assert_eq!(x, std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let stats = std::fs::read_to_string(a.join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 7);
    let meta = std::fs::read_to_string(a.join("metadata.json")).unwrap();
    assert!(meta.contains("\"seed\": 99"));
}

#[test]
fn threads_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(bin()
        .env("TE_SHAPE_THREADS", "many")
        .args(["--threads", "2", "sweep"])
        .arg(data("example1.json")));
    assert_eq!(code, 2);
    assert!(stderr.contains("TE_SHAPE_THREADS"));
    let (code, _, _) = run(bin().env("TE_SHAPE_THREADS", "1").arg("sweep").arg(data("example1.json")).arg("--out").arg(dir.path().join("s.csv")));
    assert_eq!(code, 0);
}

#[test]
fn sweep_table() {
    let (code, stdout, _) = run(bin().arg("sweep").arg(data("example1.json")));
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 27);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, stdout, _) = run(bin().arg("sweep").arg(data("example1.json")).arg("--out").arg(&out));
    assert_eq!(code, 0);
    assert!(stdout.contains("26 rows"), "{stdout}");
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 27);
    assert!(csv.lines().last().unwrap().starts_with("30.0,100.0"), "{csv}");
}

#[test]
fn consensus_flood_on_k4() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let (code, stdout, stderr) = run(bin()
        .arg("consensus")
        .arg(data("example1.json"))
        .arg("--graph")
        .arg(data("k4.json"))
        .args(["--mode", "flood", "--trace"])
        .arg(&trace));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("all agents agree: lambda_star=1.765\n"), "{stdout}");
    let csv = std::fs::read_to_string(trace).unwrap();
    assert!(csv.starts_with("round,agent,estimate,error\n"));
}

#[test]
fn consensus_errors() {
    // Graph size differs from the instance.
    let (code, _, stderr) =
        run(bin().arg("consensus").arg(data("example1.json")).arg("--graph").arg(data("path10.json")));
    assert_eq!(code, 2, "{stderr}");
    // Too few averaging rounds.
    let (code, _, stderr) = run(bin()
        .arg("consensus")
        .arg(data("example1.json"))
        .args(["--mode", "average", "--rounds", "0", "--tolerance", "1e-12"]));
    assert_eq!(code, 3, "{stderr}");
    let (code, _, _) = run(bin().arg("consensus").arg(data("example1.json")).args(["--mode", "gossip"]));
    assert_eq!(code, 2);
}
