use std::path::PathBuf;
use std::process::{Command, Output};

fn ctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ctl-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn scalar_curvature_of_the_unit_sphere() {
    let o = ctl(&["eval", "--catalog", "sphere", "--quantity", "scalar"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "6.000000000000\n");
    let o = ctl(&["eval", "--catalog", "sphere", "--dim", "4", "--radius", "2", "--quantity", "scalar", "--point", "0.3,-0.2,0.1,0.4"]);
    assert_eq!(stdout(&o), "3.000000000000\n");
}

#[test]
fn weyl_vanishes_in_dimension_three() {
    let o = ctl(&["eval", "--catalog", "cigar_x_line", "--quantity", "weyl", "--point", "0.2,-0.4,0.1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 81);
    assert!(comps.iter().all(|c| c.as_f64().unwrap().abs() < 1e-10));
}

#[test]
fn eval_lists_quantities_and_residuals() {
    let o = ctl(&["eval", "--catalog", "euclidean", "--list"]);
    let names = stdout(&o);
    for q in ["scalar", "ricci", "weyl", "cotton", "bach"] {
        assert!(names.lines().any(|l| l == q), "{q} missing from\n{names}");
    }
    let o = ctl(&["eval", "--catalog", "euclidean", "--residual", "gradient_soliton", "--point", "0.3,0.1,-0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["components"].as_array().unwrap().iter().all(|c| c.as_f64().unwrap().abs() < 1e-13));
    let o = ctl(&["eval", "--catalog", "sphere", "--quantity", "scalar", "--point", "5,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn catalog_listing() {
    let o = ctl(&["catalog", "list", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 17);
    assert!(rows.iter().any(|r| r["name"] == "euclidean"));
    let cigar = rows.iter().find(|r| r["name"] == "cigar_x_line").unwrap();
    assert!(cigar["claims"].as_array().unwrap().iter().any(|c| c == "gradient_soliton(0)"));
}

#[test]
fn exported_spec_verifies_like_the_catalog_entry() {
    let path = scratch("conformal_gaussian.json");
    let o = ctl(&["catalog", "export", "conformal_gaussian", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let common = ["--suite", "CGRS", "--points", "3", "--format", "json"];
    let from_spec = ctl(&[&["verify", "--spec", path.to_str().unwrap()][..], &common[..]].concat());
    let from_catalog = ctl(&[&["verify", "--catalog", "conformal_gaussian"][..], &common[..]].concat());
    assert_eq!(from_spec.status.code(), Some(0));
    let (a, b) = (json(&from_spec), json(&from_catalog));
    assert_eq!(a["rows"], b["rows"]);
    assert_eq!(a["geometry_hash"], b["geometry_hash"]);
    assert_eq!(a["overall"], "pass");
}

#[test]
fn registry_listings() {
    let o = ctl(&["identities", "list", "--format", "json"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 99);
    let o = ctl(&["identities", "list", "--family", "HIGH"]);
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = ctl(&["identities", "list", "--requires-f", "true", "--format", "json"]);
    assert!(json(&o).as_array().unwrap().iter().all(|e| e["family"] != "CE"));
    let o = ctl(&["laws", "list", "--format", "json"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 27);
}

#[test]
fn exit_codes() {
    let ok = ctl(&["verify", "--catalog", "random", "--suite", "COMM", "--points", "2"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("overall: pass"));

    let tight = ctl(&["verify", "--catalog", "random", "--suite", "COMM", "--points", "2", "--tol-class", "A=1e-20,B=1e-20,C=1e-20"]);
    assert_eq!(tight.status.code(), Some(1));
    assert!(stdout(&tight).contains("overall: fail"));

    for bad in [
        &["verify", "--catalog", "nowhere", "--suite", "COMM"][..],
        &["verify", "--catalog", "random", "--suite", "NOPE"][..],
        &["verify", "--catalog", "random", "--id", "comm.nothing"][..],
        &["verify", "--catalog", "random", "--suite", "COMM", "--jet-order", "2"][..],
        &["verify", "--suite", "COMM"][..],
        &["frobnicate"][..],
    ] {
        let o = ctl(bad);
        assert_eq!(o.status.code(), Some(2), "{bad:?}");
    }

    let cert = ctl(&["verify", "--catalog", "random", "--eps", "3", "--suite", "COMM"]);
    assert_eq!(cert.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&cert.stderr).contains("certification"));
}

#[test]
fn unmet_hypotheses_are_skipped_not_failed() {
    let o = ctl(&["verify", "--catalog", "random", "--dim", "4", "--lambda", "0.5", "--suite", "HIGH", "--points", "2", "--format", "json"]);
    let v = json(&o);
    assert_eq!(o.status.code(), Some(0));
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["status"], "skipped");
        assert!(row["reason"].as_str().unwrap().starts_with("hypothesis unmet") || row["reason"] == "no lambda");
    }
}

#[test]
fn laws_run_from_the_command_line() {
    let o = ctl(&["verify", "--catalog", "conformal_gaussian", "--law", "all", "--points", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 27);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["status"] == "pass"));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let args = ["verify", "--catalog", "cigar_x_plane", "--suite", "SOL,HIGH", "--points", "3", "--seed", "4", "--format", "json"];
    let (a, b) = (ctl(&args), ctl(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let path = scratch("report.json");
    let c = ctl(&[&args[..], &["--out", path.to_str().unwrap()][..]].concat());
    assert_eq!(c.status.code(), Some(0));
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written.trim_ascii_end(), a.stdout.trim_ascii_end());
}
