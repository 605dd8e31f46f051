use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use zipper_core::fibril::BuildRecipe;
use zipper_core::geomopt::{model_problem, Model};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture() -> PathBuf {
    workspace().join("crates/core/tests/data/zipper_template.pdb")
}

fn zipper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zipper"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn validate(schema: &str, doc: &Value) {
    let path = workspace().join("schemas").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

/// Asserts the exit code and that stderr carries a valid error document.
fn expect_error(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    validate("error", &doc);
    assert_eq!(doc["error"]["exit_code"], code);
    doc
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn solve_dg_model1_reaches_zero() {
    let doc = stdout_json(&zipper(&["solve-dg", "--builtin", "1", "--optimizer", "lbfgs"]));
    validate("solve-dg", &doc);
    assert!(f(&doc["objective"]) <= 1e-8);
    assert_eq!(doc["feasible"], true);
    for e in doc["edges"].as_array().unwrap() {
        assert!((f(&e["distance"]) - 3.4).abs() <= 1e-3);
    }
}

#[test]
fn solve_dg_model2_reports_gap() {
    let doc = stdout_json(&zipper(&["solve-dg", "--builtin", "2"]));
    validate("solve-dg", &doc);
    assert_eq!(doc["feasible"], false);
    let m = doc["triangle_margins"].as_array().unwrap().iter().find(|m| m["feasible"] == false).unwrap();
    assert!((f(&m["anchor_gap"]) - 6.85).abs() <= 0.01);
    let notes = doc["notes"].as_array().unwrap();
    assert!(notes[0].as_str().unwrap().contains("6.847 Å apart, more than twice the 3.400 Å contact"));
}

#[test]
fn solve_dg_model3_and_problem_files() {
    let doc = stdout_json(&zipper(&["solve-dg", "--builtin", "3", "--optimizer", "sdcg-sa-sdcg", "--seed", "3"]));
    validate("solve-dg", &doc);
    assert!((2.0..=2.4).contains(&f(&doc["objective"])));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let text = model_problem(Model::One).to_json().unwrap();
    validate("dg-problem", &serde_json::from_str(&text).unwrap());
    fs::write(&path, &text).unwrap();
    let doc = stdout_json(&zipper(&["solve-dg", "--problem", path.to_str().unwrap()]));
    assert!(f(&doc["objective"]) <= 1e-8);

    fs::write(&path, "{ not json").unwrap();
    expect_error(&zipper(&["solve-dg", "--problem", path.to_str().unwrap()]), 2);
    fs::write(&path, text.replace("\"schema_version\": 1", "\"schema_version\": 9")).unwrap();
    expect_error(&zipper(&["solve-dg", "--problem", path.to_str().unwrap()]), 2);
    expect_error(&zipper(&["solve-dg", "--problem", dir.path().join("missing.json").to_str().unwrap()]), 4);
}

#[test]
fn fit_axis_builtin_strands() {
    for (strand, w) in [("A", [-10.751, 6.428, 1.411]), ("B", [-7.960, 4.579, -2.256])] {
        let doc = stdout_json(&zipper(&["fit-axis", "--builtin-strand", strand]));
        validate("fit-axis", &doc);
        let axis = &doc["axes"][0];
        assert!(f(&axis["cosine"]) >= 1.0 - 1e-6);
        let reference: Vec<f64> = axis["reference"]["direction"].as_array().unwrap().iter().map(f).collect();
        assert_eq!(reference, w);
        assert!(axis["reference"]["cosine"].is_number());
    }
}

#[test]
fn fit_axis_on_a_structure() {
    let t = fixture();
    let doc = stdout_json(&zipper(&["fit-axis", "--pdb", t.to_str().unwrap(), "--chain", "A", "--chain", "G"]));
    validate("fit-axis", &doc);
    assert_eq!(doc["axes"].as_array().unwrap().len(), 2);
    expect_error(&zipper(&["fit-axis", "--pdb", t.to_str().unwrap(), "--chain", "Q"]), 4);
    expect_error(&zipper(&["fit-axis", "--pdb", t.to_str().unwrap()]), 2);
}

#[test]
fn lj_cluster_examples() {
    let doc = stdout_json(&zipper(&["lj", "--cluster", "4", "--optimizer", "sdcg-sa-sdcg", "--seed", "1"]));
    validate("lj-cluster", &doc);
    assert!(f(&doc["energy"]) <= -5.9);
    let doc = stdout_json(&zipper(&["lj", "--cluster", "2", "--optimizer", "lbfgs"]));
    validate("lj-cluster", &doc);
    assert!((f(&doc["energy"]) + 1.0).abs() <= 1e-6);
    expect_error(&zipper(&["lj", "--cluster", "1"]), 2);
}

#[test]
fn lj_curve_minimum_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let out = zipper(&["lj", "--curve", "--epsilon", "1", "--sigma", "1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,V"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (r, v) = l.split_once(',').unwrap();
            (r.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let step = rows[1].0 - rows[0].0;
    let min = rows.iter().copied().fold((0.0, f64::INFINITY), |m, row| if row.1 < m.1 { row } else { m });
    assert!((min.0 - 2f64.powf(1.0 / 6.0)).abs() <= step);
    expect_error(&zipper(&["lj", "--curve", "--epsilon", "-1"]), 2);
}

#[test]
fn check_grad_objectives() {
    for name in ["lj-cluster", "dg-model1", "dg-model2", "dg-model3", "axis-fit"] {
        let doc = stdout_json(&zipper(&["check-grad", "--objective", name, "--trials", "20"]));
        validate("check-grad", &doc);
        assert_eq!(doc["passed"], true, "{name}");
        assert!(f(&doc["max_relative_error"]) <= 1e-6);
    }
    expect_error(&zipper(&["check-grad", "--objective", "rosenbrock"]), 2);
    // A huge step ruins the difference quotient, so the check must fail.
    let out = zipper(&["check-grad", "--objective", "lj-cluster", "--step", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    validate("check-grad", &doc);
    assert_eq!(doc["passed"], false);
}

#[test]
fn build_writes_fibril_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let pdb = dir.path().join("m1.pdb");
    let report = dir.path().join("m1.json");
    let out = zipper(&[
        "build", "--template", fixture().to_str().unwrap(), "--model", "1",
        "--out", pdb.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("model-1 (AGAAAA)"));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    validate("contact-report", &doc);
    let s = zipper_core::structure::parse_pdb(&fs::read_to_string(&pdb).unwrap()).unwrap();
    assert_eq!(s.chain_ids(), "ABCDEFGHIJKL".chars().collect::<Vec<_>>());
}

#[test]
fn build_from_cache_is_deterministic() {
    // The cached template short-circuits the network; the archive URL is unreachable.
    let cache = tempfile::tempdir().unwrap();
    fs::copy(fixture(), cache.path().join("3NHD.pdb")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let pdb = dir.path().join(format!("{tag}.pdb"));
        let trace = dir.path().join(format!("{tag}.csv"));
        let out = zipper(&[
            "build", "--fetch", "3NHD", "--model", "1", "--optimizer", "saec", "--seed", "7",
            "--cache-dir", cache.path().to_str().unwrap(), "--archive-url", "http://127.0.0.1:1",
            "--out", pdb.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
        ]);
        let doc = stdout_json(&out);
        (out.stdout, fs::read(pdb).unwrap(), fs::read(trace).unwrap(), doc)
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    let doc = a.3;
    validate("contact-report", &doc);
    assert_eq!(doc["optimizer"]["method"], "saec");
    for c in doc["contacts"].as_array().unwrap() {
        assert!((f(&c["optimized"]) - 3.4).abs() < 1e-3);
    }
}

#[test]
fn build_from_recipe_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut recipe = BuildRecipe::builtin(Model::Three);
    recipe.template = Some(zipper_core::fibril::TemplateSource::File(fixture()));
    recipe.transform = zipper_core::fibril::TransformMode::Derived;
    let text = recipe.to_json().unwrap();
    validate("build-recipe", &serde_json::from_str(&text).unwrap());
    let path = dir.path().join("r.json");
    fs::write(&path, text).unwrap();
    let pdb = dir.path().join("m3.pdb");
    let doc = stdout_json(&zipper(&["build", "--recipe", path.to_str().unwrap(), "--out", pdb.to_str().unwrap()]));
    validate("contact-report", &doc);
    assert_eq!(doc["feasible"], false);
    assert_eq!(doc["sheet_transform"]["mode"], "derived");
    assert!((2.0..=2.4).contains(&f(&doc["optimizer"]["f_best"])));
}

#[test]
fn build_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pdb = dir.path().join("x.pdb");
    let pdb = pdb.to_str().unwrap();
    let t = fixture();
    let t = t.to_str().unwrap();
    expect_error(&zipper(&["build", "--model", "4", "--template", t, "--out", pdb]), 2);
    expect_error(&zipper(&["build", "--model", "1", "--out", pdb]), 2);
    expect_error(&zipper(&["build", "--model", "1", "--template", t, "--out", pdb, "--set", "sa.t_initial=hot"]), 2);
    expect_error(&zipper(&["build", "--model", "1", "--template", t, "--out", pdb, "--set", "no_such_key=1"]), 2);
    expect_error(&zipper(&["build", "--model", "1", "--template", "/nonexistent/t.pdb", "--out", pdb]), 4);
    let cache = tempfile::tempdir().unwrap();
    let doc = expect_error(
        &zipper(&[
            "build", "--model", "1", "--fetch", "3NHD", "--cache-dir", cache.path().to_str().unwrap(),
            "--archive-url", "http://127.0.0.1:1", "--out", pdb,
        ]),
        5,
    );
    assert!(doc["error"]["message"].as_str().unwrap().contains("--template"));
    let bad = dir.path().join("bad.pdb");
    fs::write(&bad, "ATOM      1  CA  GLY A   1      -1.000   2.000   3.000  1.00  0.00           C\n").unwrap();
    expect_error(&zipper(&["build", "--model", "1", "--template", bad.to_str().unwrap(), "--out", pdb]), 4);
}

#[test]
fn config_file_and_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("opt.cfg");
    fs::write(&cfg, "# short anneal\nsa.temperature_levels = 3\nseed = 5\n").unwrap();
    let doc = stdout_json(&zipper(&["solve-dg", "--builtin", "1", "--optimizer", "sa", "--config", cfg.to_str().unwrap()]));
    assert_eq!(doc["optimizer"]["seed"], 5);
    assert_eq!(doc["optimizer"]["iterations"], 3);
    let doc = stdout_json(&zipper(&[
        "solve-dg", "--builtin", "1", "--optimizer", "sa", "--config", cfg.to_str().unwrap(),
        "--set", "sa.temperature_levels=4", "--seed", "9",
    ]));
    assert_eq!(doc["optimizer"]["seed"], 9);
    assert_eq!(doc["optimizer"]["iterations"], 4);
}

#[test]
fn stochastic_commands_repeat_exactly() {
    for args in [
        &["lj", "--cluster", "5", "--optimizer", "saec", "--seed", "4"][..],
        &["solve-dg", "--builtin", "2", "--optimizer", "sa", "--seed", "11"][..],
    ] {
        let a = zipper(args);
        let b = zipper(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert!(zipper(&["--help"]).status.success());
    assert!(zipper(&["--version"]).status.success());
    expect_error(&zipper(&[]), 2);
    expect_error(&zipper(&["frobnicate"]), 2);
}
