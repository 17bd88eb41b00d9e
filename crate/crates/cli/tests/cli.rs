use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn contactfol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contactfol"))
        .args(args)
        .env_remove("CONTACTFOL_OUT_DIR")
        .output()
        .unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Required keys of the shipped schema for the report's command.
fn check_schema(r: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    for k in schema["required"].as_array().unwrap() {
        assert!(r.get(k.as_str().unwrap()).is_some(), "missing {k}");
    }
    assert_eq!(
        r["schema_version"],
        schema["properties"]["schema_version"]["const"]
    );
    let cmd = &r["command"];
    let rule = schema["allOf"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| &x["if"]["properties"]["command"]["const"] == cmd)
        .unwrap_or_else(|| panic!("no schema rule for {cmd}"));
    for part in ["input", "payload"] {
        if let Some(req) = rule["then"]["properties"][part]["required"].as_array() {
            for k in req {
                assert!(r[part].get(k.as_str().unwrap()).is_some(), "{part} lacks {k}");
            }
        }
    }
}

#[test]
fn standard_sphere_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = contactfol(&[
        "surface-report",
        "--model",
        "std_cyl",
        "--surface",
        "sphere:2",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    check_schema(&r);
    let p = &r["payload"];
    assert_eq!(p["convex"], true);
    assert_eq!(p["gamma_components"], 1);
    assert_eq!(p["tight_neighborhood"], true);
    assert_eq!(r["input"]["model"], "std_cyl");
    assert_eq!(r["input"]["surface"], "sphere:2");
    assert_eq!(p["analysis"]["singularities"].as_array().unwrap().len(), 2);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = contactfol(&[
            "surface-report",
            "--model",
            "ot",
            "--surface",
            "sphere:5",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(p).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    // 12 significant digits at most
    for num in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = num.split('e').next().unwrap();
        let digits = mantissa
            .trim_start_matches(['-', '0', '.'])
            .chars()
            .filter(|c| c.is_ascii_digit())
            .count();
        assert!(digits <= 12, "{num}");
    }
}

#[test]
fn degenerate_sphere_is_an_obstruction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let args = [
        "surface-report",
        "--model",
        "ot",
        "--surface",
        "sphere:3.14159",
        "-o",
        out.to_str().unwrap(),
    ];
    assert_eq!(contactfol(&args).status.code(), Some(0));
    let r = read_json(&out);
    assert_eq!(r["payload"]["convex"], false);
    assert_eq!(r["payload"]["obstructions"][0]["kind"], "degenerate_closed_leaf");
    assert_eq!(r["payload"]["gamma_components"], Value::Null);

    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(contactfol(&strict).status.code(), Some(1));
}

#[test]
fn unknown_ids_are_input_errors() {
    let o = contactfol(&["surface-report", "--model", "nope", "--surface", "sphere:2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("std_cyl") && err.contains("r2s1"), "{err}");

    let o = contactfol(&["surface-report", "--model", "ot", "--surface", "cube:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = contactfol(&[
        "movie-report",
        "--model",
        "ot",
        "--family",
        "cubes",
        "--t-start",
        "1",
        "--t-end",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(contactfol(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        contactfol(&["verify-trees", "--reading", "sideways"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_trees_has_no_counterexamples() {
    let o = contactfol(&["verify-trees", "--max-vertices", "5", "--strict"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    check_schema(&r);
    let p = &r["payload"];
    assert_eq!(p["passed"], true);
    assert_eq!(p["counterexamples"], Value::Array(vec![]));
    assert_eq!(p["mismatches"], 0);
    assert!(p["reversed_variant"]["corollary_failures"].as_u64().unwrap() > 0);
    assert_eq!(p["trees"], 1 + 1 + 1 + 2 + 3);
}

#[test]
fn config_file_supplies_inputs_and_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "model = \"std_cyl\"\nsurface = \"sphere:1.5\"\ndividing_grid = 64\n",
    )
    .unwrap();
    let o = contactfol(&["surface-report", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["input"]["surface"], "sphere:1.5");
    assert_eq!(r["input"]["cfg"]["dividing_grid"], 64);
    assert_eq!(r["payload"]["dividing_set"]["grid"], 64);

    std::fs::write(&cfg, "gird = 12\n").unwrap();
    let o = contactfol(&["catalog", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("absent.toml");
    assert_eq!(
        contactfol(&["catalog", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_contactfol"))
        .arg("catalog")
        .env("CONTACTFOL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success() && o.stdout.is_empty());
    let r = read_json(&dir.path().join("catalog.json"));
    check_schema(&r);
    let models = r["payload"]["models"].as_array().unwrap();
    assert_eq!(models.len(), 7);
    assert!(models
        .iter()
        .all(|m| m["min_contact_density_48"].as_f64().unwrap() > 0.0));
}

#[test]
fn quiet_movie_report() {
    let o = contactfol(&[
        "movie-report",
        "--model",
        "std_cyl",
        "--family",
        "spheres",
        "--t-start",
        "1",
        "--t-end",
        "2",
        "--t-steps",
        "3",
        "--strict",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    check_schema(&r);
    assert_eq!(r["payload"]["timeline"]["events"], Value::Array(vec![]));
    assert_eq!(r["payload"]["timeline"]["samples"].as_array().unwrap().len(), 3);
}

#[test]
fn render_writes_a_portrait() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.svg");
    let o = contactfol(&[
        "render",
        "--model",
        "ot",
        "--surface",
        "sphere:5",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains(r#"viewBox="0 0 1000 1000""#));
    // Γ has three dashed components, the two poles have opposite colors
    let gamma = svg
        .split(r#"<g id="dividing-set""#)
        .nth(1)
        .unwrap()
        .split("</g>")
        .next()
        .unwrap();
    assert!(gamma.contains("stroke-dasharray"));
    assert_eq!(gamma.matches("<path").count(), 3);
    let sings = svg.split(r#"<g id="singularities">"#).nth(1).unwrap();
    assert!(sings.contains("#c62828") && sings.contains("#1565c0"));
    assert_eq!(
        svg.split(r#"<g id="closed-leaves""#)
            .nth(1)
            .unwrap()
            .split("</g>")
            .next()
            .unwrap()
            .matches("<path")
            .count(),
        2
    );
}
