use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circxi"))
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn rotated_four_rows_are_perfect() {
    let out = run_stdin(
        &["xi", "--unit", "turns", "--format", "json"],
        "0.1,0.15\n0.2,0.35\n0.3,0.55\n0.4,0.75\n",
    );
    let v = json(&out);
    assert_eq!(v["corrected"].as_f64(), Some(1.0));
    assert_eq!(v["n"].as_u64(), Some(4));
    assert_eq!(v["direction"], "x_to_y");
}

#[test]
fn duplicate_rows_are_rejected_with_line_numbers() {
    let data = "x,y\n0.1,0.2\n0.5,0.3\n0.1,0.9\n0.7,0.4\n";
    let out = run_stdin(&["xi", "--header", "--ties", "reject"], data);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("lines 2, 4"), "{msg}");
    assert!(out.stdout.is_empty());

    let out = run_stdin(
        &["xi", "--header", "--ties", "jitter", "--format", "json"],
        data,
    );
    let v = json(&out);
    assert_eq!(v["ties_applied"], true);
}

#[test]
fn parse_errors_name_the_line() {
    let out = run_stdin(&["xi"], "0.1,0.2\n0.3,abc\n0.5,0.6\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let out = run_stdin(&["xi"], "0.1,0.2\n0.3\n");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_for_size_and_io() {
    let out = run_stdin(&["xi"], "0.1,0.2\n");
    assert_eq!(out.status.code(), Some(4));
    let out = run_stdin(
        &["test", "--method", "normal"],
        "0.1,0.2\n0.3,0.1\n0.5,0.9\n",
    );
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["xi", "--input", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("/nonexistent/data.csv"));
    let out = run(&["xi", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn doubling_fixture_matches_published_mean() {
    let v = json(&run(&[
        "xi",
        "--input",
        &fixture("doubling_s0_n200.csv"),
        "--header",
        "--format",
        "json",
    ]));
    let raw = v["raw"].as_f64().unwrap();
    assert!((raw - 0.941).abs() <= 0.05, "{raw}");
}

#[test]
fn columns_by_name_and_unit_round_trip() {
    let path = fixture("bump_s02_n200.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let swapped: String = text
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            format!("{b},{a}\n")
        })
        .collect();
    let by_name = json(&run_stdin(
        &[
            "xi",
            "--header",
            "--x-column",
            "x",
            "--y-column",
            "y",
            "--format",
            "json",
        ],
        &swapped,
    ));
    let direct = json(&run(&[
        "xi", "--input", &path, "--header", "--format", "json",
    ]));
    assert_eq!(by_name["raw"], direct["raw"]);

    let turns: String = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            let t = |s: &str| s.parse::<f64>().unwrap() / std::f64::consts::TAU;
            format!("{:?},{:?}\n", t(a), t(b))
        })
        .collect();
    let in_turns = json(&run_stdin(
        &["xi", "--unit", "turns", "--format", "json"],
        &turns,
    ));
    assert_eq!(in_turns["raw"], direct["raw"]);
}

#[test]
fn symmetric_direction_is_the_larger() {
    let path = fixture("doubling_s0_n200.csv");
    let get = |d: &str| {
        json(&run(&[
            "xi",
            "--input",
            &path,
            "--header",
            "--direction",
            d,
            "--format",
            "json",
        ]))["raw"]
            .as_f64()
            .unwrap()
    };
    let (xy, yx, sym) = (get("xy"), get("yx"), get("sym"));
    assert_eq!(sym, xy.max(yx));
    assert!(xy > yx);
}

#[test]
fn tests_on_fixtures() {
    let indep = json(&run(&[
        "test",
        "--input",
        &fixture("independence_n200.csv"),
        "--header",
        "--format",
        "json",
    ]));
    let p = indep["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert!(indep["z"].is_number());

    let args = [
        "test",
        "--input",
        &fixture("rotation_s05_n200.csv"),
        "--header",
        "--method",
        "perm",
        "--permutations",
        "499",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let first = run(&args);
    let v = json(&first);
    assert!(v["p_value"].as_f64().unwrap() <= 0.002);
    assert_eq!(v["reject"], true);
    assert_eq!(run(&args).stdout, first.stdout);
}

#[test]
fn exact_test_for_tiny_samples() {
    let v = json(&run_stdin(
        &[
            "test", "--method", "exact", "--unit", "turns", "--format", "json",
        ],
        "0.1,0.15\n0.2,0.35\n0.3,0.55\n0.4,0.75\n0.6,0.8\n",
    ));
    assert_eq!(v["method"], "exact");
    assert!(v["p_value"].as_f64().unwrap() < 0.1);
}

#[test]
fn population_examples() {
    let value = |args: &[&str]| {
        let mut all = vec!["population", "--format", "json"];
        all.extend_from_slice(args);
        json(&run(&all))["result"]["value"].as_f64().unwrap()
    };
    assert!((value(&["--kind", "none", "--tol", "1e-6"]) - 1.0).abs() <= 1e-6);
    assert_eq!(value(&["--kind", "uniform-arc", "--a", "1.0"]), 0.0);
    assert!((value(&["--kind", "wrapped-normal", "--sigma-rad", "0.5"]) - 0.5373).abs() < 1e-4);
    assert!(value(&["--kind", "von-mises", "--kappa", "2"]) > 0.3);

    assert_eq!(
        run(&["population", "--kind", "von-mises"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["population", "--kind", "uniform-arc", "--a", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["population", "--kind", "none", "--tol", "0"])
            .status
            .code(),
        Some(2)
    );
    let plain = run(&["population", "--kind", "none", "--tol", "1e-6"]);
    assert!(String::from_utf8_lossy(&plain.stdout).starts_with("value\t"));
}

#[test]
fn cutscan_gap_average_is_the_coefficient() {
    for name in ["independence_n200.csv", "bump_s02_n200.csv"] {
        let v = json(&run(&[
            "cutscan",
            "--input",
            &fixture(name),
            "--header",
            "--grid",
            "gaps",
            "--format",
            "json",
        ]));
        let avg = v["cut_average"].as_f64().unwrap();
        let raw = v["xi_raw"].as_f64().unwrap();
        assert!((avg - raw).abs() <= 1e-12, "{name}: {avg} vs {raw}");
        assert_eq!(v["cuts"].as_u64(), Some(40_000));
    }
}

#[test]
fn cutscan_grids() {
    let one = json(&run(&[
        "cutscan",
        "--input",
        &fixture("rotation_s05_n200.csv"),
        "--header",
        "--grid",
        "1",
        "--format",
        "json",
    ]));
    assert_eq!(one["sd"].as_f64(), Some(0.0));
    let bump = json(&run(&[
        "cutscan",
        "--input",
        &fixture("bump_s02_n200.csv"),
        "--header",
        "--grid",
        "8",
        "--full",
        "--format",
        "json",
    ]));
    let spread = bump["max"].as_f64().unwrap() - bump["min"].as_f64().unwrap();
    assert!((0.1..=0.4).contains(&spread), "{spread}");
    assert_eq!(bump["grid"].as_array().unwrap().len(), 64);
    let bad = run(&[
        "cutscan",
        "--input",
        &fixture("bump_s02_n200.csv"),
        "--header",
        "--grid",
        "zero",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_smoke_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    for path in [&a, &b] {
        let out = run(&[
            "simulate",
            "--table",
            "1",
            "--replicates",
            "10",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(String::from_utf8_lossy(&out.stdout).contains("11 rows"));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 12);
}

#[test]
fn simulate_json_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.tsv");
    let out = run(&[
        "simulate",
        "--table",
        "4",
        "--replicates",
        "5",
        "--format",
        "json",
        "--curves",
        curves.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["seed"].as_u64(), Some(1));
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
    assert!(v.get("runtime").is_none());
    let text = std::fs::read_to_string(&curves).unwrap();
    assert!(text.contains("\"model\""));
}

#[test]
fn size_table_matches_published_rates() {
    let out = run(&["simulate", "--table", "3", "--seed", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let expected = [0.053, 0.053, 0.046, 0.044];
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (row, want) in rows.iter().zip(expected) {
        let normal: f64 = row.split('\t').nth(5).unwrap().parse().unwrap();
        assert!((normal - want).abs() <= 0.02, "{row}");
    }
}

#[test]
fn simulate_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"models":[{"kind":"rotation","sigma_rad":0.2}],"n":60,"replicates":8,"measures":["xi_circ","js"],"tests":["normal"]}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--plan", plan.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("model\tsigma\tn\txi\txi_sd\tjs\tnormal\nrotation\t0.200\t60\t"));

    std::fs::write(&plan, "{ not json").unwrap();
    assert_eq!(
        run(&["simulate", "--plan", plan.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(&plan, r#"{"models":[],"n":60,"replicates":8,"level":2.0}"#).unwrap();
    assert_eq!(
        run(&["simulate", "--plan", plan.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "simulate",
        "--table",
        "2",
        "--replicates",
        "2",
        "--out",
        "/nonexistent/dir/t.tsv",
    ]);
    assert_eq!(out.status.code(), Some(5));
}
