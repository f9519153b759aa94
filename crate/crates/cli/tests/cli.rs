use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn scalar_doc(z: &[(f64, f64)]) -> String {
    let mats: Vec<String> = z.iter().map(|(re, im)| format!("[[[{re},{im}]]]")).collect();
    format!(r#"{{"n":{},"dim":1,"matrices":[{}]}}"#, z.len(), mats.join(","))
}

fn run(args: &[&str], files: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncball"));
    cmd.args(args).args(files);
    cmd.output().unwrap()
}

fn json_result(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["result"].clone()
}

#[test]
fn distance_to_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &scalar_doc(&[(0.3, -0.1), (0.2, 0.4)]));
    let out = run(&["--json", "distance"], &[&a, &a]);
    assert_eq!(out.status.code(), Some(0));
    let e = &json_result(&out)["enclosure"];
    assert!(e["lower"].as_f64().unwrap() <= 0.0 && e["upper"].as_f64().unwrap() >= 0.0);
}

#[test]
fn distance_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &scalar_doc(&[(0.6, 0.0), (0.0, 0.0)]));
    let b = write(&dir, "b.json", &scalar_doc(&[(0.0, 0.0), (0.0, 0.0)]));
    let out = run(&["--json", "distance"], &[&a, &b]);
    assert_eq!(out.status.code(), Some(0));
    let e = &json_result(&out)["enclosure"];
    let (lo, hi) = (e["lower"].as_f64().unwrap(), e["upper"].as_f64().unwrap());
    // δ((0.6, 0), 0) = atanh 0.6 = ln 2
    assert!(lo <= 2f64.ln() && 2f64.ln() <= hi, "[{lo}, {hi}]");
    assert!(hi - lo <= 1e-6);
}

#[test]
fn shallow_horizon_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &scalar_doc(&[(0.6, 0.0)]));
    let b = write(&dir, "b.json", &scalar_doc(&[(0.0, 0.0)]));
    let out = run(&["--mmax", "20", "distance"], &[&a, &b]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged=false"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &scalar_doc(&[(0.6, 0.0)]));
    let bad = write(&dir, "bad.json", r#"{"n":2,"dim":1,"matrices":[[[[0.1,0]]]]}"#);
    let junk = write(&dir, "junk.json", "not json");
    let pair = write(&dir, "pair.json", &scalar_doc(&[(0.1, 0.0), (0.1, 0.0)]));
    assert_eq!(run(&["distance"], &[&a, &bad]).status.code(), Some(2));
    assert_eq!(run(&["distance"], &[&a, &junk]).status.code(), Some(2));
    assert_eq!(run(&["distance"], &[&a, &pair]).status.code(), Some(2));
    assert_eq!(run(&["distance"], &[&a, Path::new("/nonexistent.json")]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nope"], &[]).status.code(), Some(2));
}

#[test]
fn harnack_verdicts_exit_0() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.json", &scalar_doc(&[(1.0, 0.0)]));
    let zero = write(&dir, "zero.json", &scalar_doc(&[(0.0, 0.0)]));
    let shallow = run(&["--json", "harnack", "--c", "10"], &[&one, &zero]);
    assert_eq!(shallow.status.code(), Some(0));
    assert_eq!(json_result(&shallow)["verdict"], "DominatedUpTo");
    let deep = run(&["--json", "harnack", "--c", "10", "--levels", "150", "--r", "0.999"], &[&one, &zero]);
    assert_eq!(deep.status.code(), Some(0));
    let res = json_result(&deep);
    assert_eq!(res["verdict"], "Refuted");
    assert!(res["value"].as_f64().unwrap() < 0.0);
    assert!(!res["witness"].as_array().unwrap().is_empty());
}

#[test]
fn identity_automorphism_roundtrips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let x_body = r#"{"n":2,"dim":2,"matrices":[[[[0.1,0.2],[0.3,-0.05]],[[0,0],[0.1,0.1]]],[[[0.2,0],[0,0.1]],[[-0.1,0.05],[0.02,0]]]],"label":"x"}"#;
    let x = write(&dir, "x.json", x_body);
    // Ψ_0 is X ↦ -X, so U = -I makes the composite the identity.
    let u = write(&dir, "u.json", r#"{"n":1,"dim":2,"matrices":[[[[-1,0],[0,0]],[[0,0],[-1,0]]]]}"#);
    let l = write(&dir, "l.json", r#"{"n":1,"dim":2,"matrices":[[[[0,0],[0,0]]]]}"#);
    let out = run(&["auto", "apply", "--unitary", u.to_str().unwrap(), "--lambda", l.to_str().unwrap()], &[&x]);
    assert_eq!(out.status.code(), Some(0));
    let image: Value = serde_json::from_slice(&out.stdout).unwrap();
    let original: Value = serde_json::from_str(x_body).unwrap();
    let flat = |v: &Value| -> Vec<u64> {
        let mut out = Vec::new();
        for m in v["matrices"].as_array().unwrap() {
            for row in m.as_array().unwrap() {
                for z in row.as_array().unwrap() {
                    out.extend(z.as_array().unwrap().iter().map(|p| p.as_f64().unwrap().to_bits()));
                }
            }
        }
        out
    };
    let (got, want) = (flat(&image), flat(&original));
    // Signed zeros may flip under the two negations; everything else must match bitwise.
    assert_eq!(got.iter().map(|b| if *b == (-0.0f64).to_bits() { 0 } else { *b }).collect::<Vec<_>>(), want);
    assert_eq!(image["label"], "psi(x)");
}

#[test]
fn automorphism_moves_lambda_to_origin() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", &scalar_doc(&[(0.2, 0.0), (0.0, 0.1)]));
    let u = write(&dir, "u.json", r#"{"n":1,"dim":2,"matrices":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#);
    let l = write(&dir, "l.json", &scalar_doc(&[(0.2, 0.0), (0.0, 0.1)]));
    let out = run(&["--json", "auto", "apply", "--unitary", u.to_str().unwrap(), "--lambda", l.to_str().unwrap()], &[&x]);
    assert_eq!(out.status.code(), Some(0));
    let mats = json_result(&out)["matrices"].clone();
    for m in mats.as_array().unwrap() {
        for part in m[0][0].as_array().unwrap() {
            assert!(part.as_f64().unwrap().abs() < 1e-15);
        }
    }
}

#[test]
fn schwarz_pick_on_a_contraction() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "f.json",
        r#"{"n_in":2,"q_out":2,"e":1,"terms":[{"component":1,"word":[1],"coeff":[[[0.5,0]]]},{"component":2,"word":[1,2],"coeff":[[[0.5,0]]]}]}"#,
    );
    let x = write(&dir, "x.json", &scalar_doc(&[(0.6, 0.0), (0.0, 0.0)]));
    let y = write(&dir, "y.json", &scalar_doc(&[(0.1, 0.2), (0.3, 0.0)]));
    let out = run(&["--json", "schwarz-pick"], &[&f, &x, &y]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_result(&out);
    assert_eq!(r["holds"], true);
    assert!(r["lhs"]["lower"].as_f64().unwrap() <= r["rhs"]["upper"].as_f64().unwrap());
}

/// `β(z, w) = atanh sqrt(1 - (1 - |z|²)(1 - |w|²) / |1 - ⟨w, z⟩|²)`
fn bergman(z: [(f64, f64); 2], w: [(f64, f64); 2]) -> f64 {
    let nz = z.iter().map(|(a, b)| a * a + b * b).sum::<f64>();
    let nw = w.iter().map(|(a, b)| a * a + b * b).sum::<f64>();
    // ⟨w, z⟩ = Σ w_i conj(z_i)
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..2 {
        re += w[i].0 * z[i].0 + w[i].1 * z[i].1;
        im += w[i].1 * z[i].0 - w[i].0 * z[i].1;
    }
    let denom = (1.0 - re).powi(2) + im * im;
    (1.0 - (1.0 - nz) * (1.0 - nw) / denom).sqrt().atanh()
}

#[test]
fn disk_points_sit_on_the_circle() {
    let dir = TempDir::new().unwrap();
    let z = [(0.1, 0.2), (-0.3, 0.05)];
    let c = write(&dir, "c.json", &scalar_doc(&z));
    let out = run(&["disk", "--center", c.to_str().unwrap(), "--radius", "1.25", "--samples", "12"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w_re1,w_im1,w_re2,w_im2,achieved_distance"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in rows {
        let w = [(r[0], r[1]), (r[2], r[3])];
        assert!((bergman(z, w) - 1.25).abs() <= 1e-8, "{r:?}");
        assert!((r[4] - 1.25).abs() <= 1e-8);
    }
}

#[test]
fn verify_is_reproducible() {
    let args = ["verify", "--suite", "tuples", "--seed", "7", "--trials", "4"];
    let (a, b) = (run(&args, &[]), run(&args, &[]));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("properties passed"));
}

#[test]
fn json_flag_wraps_a_single_object() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", &scalar_doc(&[(0.3, 0.0), (0.0, 0.4)]));
    let out = run(&["--json", "spectral-radius"], &[&x]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "spectral-radius");
    assert_eq!(v["exit_code"], 0);
    assert!((v["result"]["spectral_radius"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["result"]["membership"], "OpenBall");
}
