use std::fs;
use std::path::Path;
use std::process::Command;

use flathilbert_lab::config::parse;
use flathilbert_lab::{exit, run_command, CommandName};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

fn fhlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fhlab")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn cfg(v: Value) -> flathilbert_lab::ExperimentConfig {
    parse(&v.to_string(), &Map::new()).unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn identical_configs_give_identical_csv_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(json!({ "seed": 11, "samples": 20, "z_points": 9, "k_max": 6 }));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run_command(CommandName::UpsilonSweep, &c, Some(&a)).exit_code, exit::PASS);
    let mut c4 = c.clone();
    c4.threads = Some(4);
    assert_eq!(run_command(CommandName::UpsilonSweep, &c4, Some(&b)).exit_code, exit::PASS);
    assert_eq!(csv_files(&a), csv_files(&b));

    let other = tmp.path().join("c");
    let c2 = cfg(json!({ "seed": 12, "samples": 20, "z_points": 9, "k_max": 6 }));
    run_command(CommandName::UpsilonSweep, &c2, Some(&other));
    assert_ne!(csv_files(&a), csv_files(&other));
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ek");
    let r = run_command(CommandName::EkMeasure, &cfg(json!({ "k_max": 8 })), Some(&dir));
    assert_eq!(r.exit_code, exit::PASS, "{}", r.message);
    let m: Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["library_version"], flathilbert::VERSION);
    assert_eq!(m["config"]["k_max"], 8);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    let files = m["files"].as_array().unwrap();
    let on_disk: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(files.len(), on_disk.len());
    for f in files {
        let bytes = fs::read(dir.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn negative_tolerance_is_a_config_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let (code, _, err) = fhlab(&["jr-bounds", "--tol", "-1e-9", "--out", out.to_str().unwrap()]);
    assert_eq!(code, exit::CONFIG);
    assert!(err.contains("'tol'"), "{err}");
    assert!(!out.exists());
}

#[test]
fn schema_is_strict() {
    let e = parse(r#"{"tolerance": 1e-9}"#, &Map::new()).unwrap_err();
    assert_eq!(e.field, "tolerance");
    let e = parse(r#"{"k_max": "ten"}"#, &Map::new()).unwrap_err();
    assert_eq!(e.field, "k_max");
    let e = parse(r#"{"curve": {"family": "power", "alpha": 2, "colour": 1}}"#, &Map::new()).unwrap_err();
    assert_eq!(e.field, "curve");
    let e = parse("[1, 2]", &Map::new()).unwrap_err();
    assert_eq!(e.field, "<root>");

    let seedless = cfg(json!({}));
    let r = run_command(CommandName::PlancherelCheck, &seedless, Some(Path::new("/nonexistent/never")));
    assert_eq!(r.exit_code, exit::CONFIG);
    assert!(r.message.contains("'seed'"));
    let r = run_command(CommandName::EkMeasure, &cfg(json!({ "command": "jr-bounds" })), None);
    assert_eq!(r.exit_code, exit::CONFIG);
    for bad in [json!({ "alpha": 1.5 }), json!({ "resolution": 0.0 }), json!({ "poly": "1,x" }), json!({ "poly": "3" })] {
        let r = run_command(CommandName::EkMeasure, &cfg(bad.clone()), None);
        assert_eq!(r.exit_code, exit::CONFIG, "{bad}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.json");
    fs::write(&path, r#"{"command": "upsilon-sweep", "seed": 3, "samples": 5, "z_points": 4, "k_max": 4}"#).unwrap();
    let out = tmp.path().join("run");
    let (code, _, err) =
        fhlab(&["upsilon-sweep", "--config", path.to_str().unwrap(), "--samples", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, exit::PASS, "{err}");
    let text = fs::read_to_string(out.join("upsilon.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn counterexample_classification_through_the_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cc");
    let (code, stdout, _) = fhlab(&["check-curve", "--curve", "counterexample", "--out", out.to_str().unwrap()]);
    assert_eq!(code, exit::PASS);
    assert!(stdout.contains("all checks passed"));
    let mut rdr = csv::Reader::from_path(out.join("conditions.csv")).unwrap();
    let rows: Vec<(String, String, String)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string(), r[2].to_string())
        })
        .collect();
    let status = |c: &str| rows.iter().find(|r| r.1 == c).unwrap().2.clone();
    for c in ["(i)", "(ii)", "(iii)", "(iv)"] {
        assert_eq!(status(c), "pass", "{c}");
    }
    assert_eq!(status("CWW"), "fail");
    assert_eq!(status("CZ"), "fail");
    assert!(rows.iter().all(|r| r.0 == "counterexample"));
}

#[test]
fn ek_measure_of_x2_plus_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ek");
    let (code, _, _) = fhlab(&["ek-measure", "--poly", "1,0,1", "--alpha", "0.5", "--k-max", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(code, exit::PASS);
    let mut rdr = csv::Reader::from_path(out.join("ek.csv")).unwrap();
    let measures: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(measures.len(), 21);
    // |E_0| = 2(√(8/7) − (4 − √15)).
    let e0 = 2.0 * ((8.0f64 / 7.0).sqrt() - (4.0 - 15f64.sqrt()));
    assert!((measures[0] - e0).abs() < 1e-5, "{}", measures[0]);
    assert!(measures.windows(2).all(|w| w[1] < w[0]));
    let sets: Value = serde_json::from_slice(&fs::read(out.join("ek.json")).unwrap()).unwrap();
    assert_eq!(sets["sets"].as_array().unwrap().len(), 21);
}

#[test]
fn small_opnorm_sweep_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(json!({
        "seed": 5, "degrees": [1, 2], "samples": 2, "u_values": [0.1, 10.0],
        "extent": 2.0, "step": 0.0625, "norm_method": "dense", "hilbert_tol": 0.2
    }));
    let r = run_command(CommandName::OpnormSweep, &c, Some(&tmp.path().join("op")));
    assert_eq!(r.exit_code, exit::PASS, "{}", r.message);
    let o = r.outcome.unwrap();
    assert_eq!(o.tables[0].rows.len(), 2 * 2 * 2);
    assert_eq!(o.tables[1].rows.len(), 2);
}

#[test]
fn too_few_converged_kernel_levels_is_a_numeric_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(json!({ "k_max": 2, "ys": [0.0], "row_geometric": 8, "row_uniform": 8, "row_d_min": 1e-3 }));
    let r = run_command(CommandName::KernelDecay, &c, Some(&tmp.path().join("kd")));
    assert_eq!(r.exit_code, exit::NUMERIC, "{}", r.message);
    assert!(r.message.contains("manifest.json"));
    let m: Value = serde_json::from_slice(&fs::read(tmp.path().join("kd/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "numeric-failure");
    let o = r.outcome.unwrap();
    assert!(o.check("phase-off-k-independent").unwrap().passed);
}

#[test]
fn explicit_jr_sweep_is_used_verbatim() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(json!({ "sweep": [
        { "k": 0, "x": 0.0, "y": 0.5, "r": 2.0 },
        { "k": 1, "x": 0.0, "y": 0.25, "r": 1.5 },
        { "k": 1, "x": -0.5, "y": 0.0, "r": 1.25 }
    ] }));
    let r = run_command(CommandName::JrBounds, &c, Some(&tmp.path().join("jr")));
    assert_eq!(r.exit_code, exit::PASS, "{}", r.message);
    let rows = &r.outcome.unwrap().tables[0].rows;
    let got: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(got, [("0", "0.5"), ("1", "0.25"), ("1", "0.5")]);
    assert!(rows.iter().all(|r| r[5] == "true"));

    let bad = cfg(json!({ "sweep": [{ "k": 0, "x": 0.0, "y": 0.5, "r": 2.5 }] }));
    let r = run_command(CommandName::JrBounds, &bad, None);
    assert_eq!(r.exit_code, exit::CONFIG);
    assert!(r.message.contains("'sweep'"));
    assert_eq!(parse(r#"{"sweep": [{"k": 0, "x": 0, "y": 1, "r": 2, "z": 0}]}"#, &Map::new()).unwrap_err().field, "sweep");
}
