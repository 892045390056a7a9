use std::process::{Command, Output};

use serde_json::Value;

fn levilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levilab"))
        .args(args)
        .env_remove("LEVILAB_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn analyze_ball_is_strictly_pseudoconvex() {
    let out = levilab(&["analyze", "catalog:ball", "--point", "1,0,0,0"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["schema_version"], "1");
    assert_eq!(r["command"]["verb"], "analyze");
    assert_eq!(r["results"]["strictly_pseudoconvex"], true);
    assert_eq!(r["results"]["strictly_convex"], true);
    assert!(r["timing"].is_null());
    assert!(r["diagnostics"]["tolerances"]["tol_eig"].is_number());
}

#[test]
fn off_boundary_point_is_projected_with_a_warning() {
    let out = levilab(&["analyze", "catalog:ball", "--point", "1.01,0,0,0"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let warnings = r["diagnostics"]["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("projected")));
}

#[test]
fn type_reports_agreement_on_the_model() {
    let out = levilab(&["type", "catalog:model_type_2k?k=2", "--point", "0,0,0,0"]);
    assert_eq!(code(&out), 0);
    let r = report(&out)["results"].clone();
    assert_eq!(r["geometric_type"], 4);
    assert_eq!(r["commutator_type"], 4);
    assert_eq!(r["agree"], true);
    assert_eq!(r["comparison"], "theorem");
}

#[test]
fn saturated_types_are_strings() {
    let out = levilab(&[
        "type",
        "catalog:infinite_type",
        "--point",
        "1,0,0,0",
        "--cutoff",
        "10",
        "--commutator-cutoff",
        "6",
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["results"]["geometric_type"], "≥10");
    assert_eq!(r["results"]["commutator_type"], "≥6");
    assert_eq!(r["diagnostics"]["saturation"].as_array().unwrap().len(), 2);
}

#[test]
fn examples_pass() {
    for name in ["example1", "example2", "example3"] {
        let out = levilab(&["example", name, "--trials", "5000"]);
        assert_eq!(code(&out), 0, "{name}");
        let r = report(&out);
        assert_eq!(r["results"]["passed"], true, "{name}");
    }
}

#[test]
fn example3_centre_is_the_closed_form() {
    let r = report(&levilab(&["example", "example3"]));
    let check = r["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "harmonic_centre")
        .unwrap()
        .clone();
    let centre = &check["observed"]["value"];
    let want = [[1.99, 0.0], [0.7575, 0.7575]];
    for (i, w) in want.iter().enumerate() {
        for (j, v) in w.iter().enumerate() {
            assert!((centre[i][j].as_f64().unwrap() - v).abs() < 1e-6);
        }
    }
}

#[test]
fn counterexample_exits_one() {
    let out = levilab(&[
        "disc-test",
        "catalog:example2_nonpseudoconvex",
        "--delta0",
        "3",
        "--trials",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["results"]["verdict"], "counterexample");
    assert!(r["results"]["counterexample"]["disc"]["coeffs"].is_array());
}

#[test]
fn hartogs_violation_exits_one_and_ball_exits_zero() {
    let bad = levilab(&["hartogs", "catalog:example2_nonpseudoconvex", "--trials", "20000"]);
    assert_eq!(code(&bad), 1);
    assert!(report(&bad)["results"]["violations"].as_u64().unwrap() >= 1);
    let good = levilab(&["hartogs", "catalog:ball", "--trials", "2000"]);
    assert_eq!(code(&good), 0);
    assert_eq!(report(&good)["results"]["violations"], 0);
}

#[test]
fn lipschitz_square_root() {
    let out = levilab(&["lipschitz", "sqrt(sqrt(x1^2))"]);
    assert_eq!(code(&out), 0);
    let alpha = report(&out)["results"]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 0.05, "{alpha}");
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["bogus"],
        &["analyze", "catalog:ball"],
        &["analyze", "catalog:ball", "--point", "1,0"],
        &["analyze", "catalog:nope", "--point", "1,0,0,0"],
        &["disc-test", "catalog:ball", "--delta0", "-1"],
        &["lipschitz", "x1", "--interval", "0"],
        &["example", "example9"],
    ];
    for args in cases {
        let out = levilab(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn degenerate_gradient_exits_three() {
    let out = levilab(&["analyze", "catalog:ball", "--point", "0,0,0,0"]);
    assert_eq!(code(&out), 3);
    let r = report(&out);
    assert!(r["results"].is_null());
    assert_eq!(r["diagnostics"]["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["disc-test", "catalog:ball", "--trials", "300", "--seed", "5"];
    let a = levilab(&args);
    let b = levilab(&args);
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_levilab"))
        .args(args)
        .env("LEVILAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_levilab"))
        .args(["analyze", "catalog:ball", "--point", "1,0,0,0"])
        .env("LEVILAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("records.csv");
    let out = levilab(&[
        "--out",
        json.to_str().unwrap(),
        "sequence",
        "catalog:model_type_2k?k=2",
        "--point",
        "0,0,0,0",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r["command"]["verb"], "sequence");
    let m = r["results"]["fit"]["exponent"].as_f64().unwrap();
    assert!((m - 4.0).abs() < 0.2, "{m}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "j,radius,center_distance,diameter,hausdorff");
    assert_eq!(lines.count(), 20);
}

#[test]
fn sequence_accepts_a_disc_argument() {
    let disc = r#"{"degree":1,"coeffs":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
    let out = levilab(&["sequence", "catalog:ball", "--point", "1,0,0,0", "--disc", disc]);
    assert_eq!(code(&out), 0);
    let m = report(&out)["results"]["fit"]["exponent"].as_f64().unwrap();
    assert!((m - 2.0).abs() < 0.2, "{m}");
}

#[test]
fn timing_is_opt_in() {
    let out = levilab(&["--timing", "analyze", "catalog:ball", "--point", "1,0,0,0"]);
    let r = report(&out);
    assert!(r["timing"]["seconds"].is_number());
    assert!(r["timing"]["threads"].as_u64().unwrap() >= 1);
}

#[test]
fn domain_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("domain.json");
    let spec = levilab::domain::parse_catalog_uri("catalog:model_type_2k?k=3").unwrap();
    std::fs::write(&path, serde_json::to_string(&spec.to_json()).unwrap()).unwrap();
    let out = levilab(&["type", path.to_str().unwrap(), "--point", "0,0,0,0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["results"]["geometric_type"], 6);
}
