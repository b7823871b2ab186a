//! End-to-end checks of the command surface and the exit-code contract:
//! 0 = checks pass, 1 = a mathematical check failed, 2 = input error.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bsigma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsigma"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bsigma-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gallery_bundles_validate_with_exit_zero() {
    let dir = workdir("gallery");
    for name in ["sys-triv", "sys-tw", "sys-m2", "mor-pair", "exel-const"] {
        let out = bsigma(&["gallery", name, "-o", "."], &dir);
        assert!(out.status.success(), "gallery {name}: {}", String::from_utf8_lossy(&out.stderr));
        let out = bsigma(&["validate", &format!("{name}.json")], &dir);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn unknown_gallery_name_is_usage_error() {
    let dir = workdir("unknown");
    let out = bsigma(&["gallery", "no-such-example"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pd_check_rejects_scaled_character_with_exit_one() {
    let dir = workdir("pdfail");
    assert!(bsigma(&["gallery", "sys-triv", "-o", "."], &dir).status.success());
    // T^f with f(e) = 1, f(s) = 2 over sys-triv
    let coeff = r#"{
        "coeffs": { "bad-f": { "system": "sys-triv", "per_g": [ [[[1.0,0.0]]], [[[2.0,0.0]]] ] } }
    }"#;
    std::fs::write(dir.join("bad.json"), coeff).unwrap();
    let out = bsigma(
        &["pd-check", "sys-triv.json", "bad.json", "--coeff", "bad-f", "--method", "choi"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("NOT positive definite"), "{stdout}");
    assert!(stdout.contains("counterexample"), "{stdout}");
}

#[test]
fn transfer_of_identity_gives_identity_table() {
    let dir = workdir("transfer");
    assert!(bsigma(&["gallery", "mor-pair", "-o", "."], &dir).status.success());
    let out = bsigma(
        &["transfer", "mor-pair.json", "--coeff", "id-sigma", "--mode", "full", "-o", "out.json"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out.json")).unwrap()).unwrap();
    let per_g = doc["result"]["per_g"].as_array().unwrap();
    for table in per_g {
        let rows = table.as_array().unwrap();
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.as_array().unwrap().iter().enumerate() {
                let re = entry[0].as_f64().unwrap();
                let im = entry[1].as_f64().unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((re - expect).abs() < 1e-9 && im.abs() < 1e-9);
            }
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = workdir("determinism");
    assert!(bsigma(&["gallery", "mor-pair", "-o", "."], &dir).status.success());
    let a = bsigma(&["validate", "mor-pair.json"], &dir);
    let b = bsigma(&["validate", "mor-pair.json"], &dir);
    assert_eq!(a.stdout, b.stdout);
    let c = bsigma(&["pd-check", "mor-pair.json", "--coeff", "id-theta", "--seed", "3"], &dir);
    let d = bsigma(&["pd-check", "mor-pair.json", "--coeff", "id-theta", "--seed", "3"], &dir);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn malformed_bundle_is_usage_error() {
    let dir = workdir("malformed");
    std::fs::write(dir.join("broken.json"), "{ definitely not json").unwrap();
    let out = bsigma(&["validate", "broken.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
    // shape error: 3-entry sigma row for |G| = 2
    let shaped = r#"{
        "systems": { "s": {
            "algebra": { "block_dims": [1] },
            "group": { "table": [[0,1],[1,0]] },
            "alpha": [ { "block_perm": [0], "unitary": [[[[1.0,0.0]]]] },
                       { "block_perm": [0], "unitary": [[[[1.0,0.0]]]] } ],
            "sigma": [ [ [[[1.0,0.0]]], [[[1.0,0.0]]], [[[1.0,0.0]]] ],
                       [ [[[1.0,0.0]]], [[[1.0,0.0]]] ] ]
        } }
    }"#;
    std::fs::write(dir.join("shape.json"), shaped).unwrap();
    let out = bsigma(&["validate", "shape.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_transfer_runs_across_gallery_pair() {
    let dir = workdir("witness");
    assert!(bsigma(&["gallery", "mor-pair", "-o", "."], &dir).status.success());
    assert!(bsigma(&["gallery", "exel-const", "-o", "."], &dir).status.success());
    let out = bsigma(
        &[
            "witness-transfer",
            "mor-pair.json",
            "exel-const.json",
            "--morita",
            "mor-pair",
            "--witness",
            "exel-const-witness",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("K = 4"), "{stdout}");
}
