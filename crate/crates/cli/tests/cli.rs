use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sdot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdot")).args(args).output().expect("spawn sdot")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Unit square, const density, sites (0.25, 0.5) and (0.75, 0.5) with masses
/// 3/4 and 1/4: the optimal bisector is x = 3/4.
fn analytic(dir: &Path) -> (String, String) {
    let mesh = path(dir, "sq.dmesh");
    let o = sdot(&["make-mesh", "--square", "1", "--density", "const:1", "--out", &mesh]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sites = path(dir, "s.csv");
    std::fs::write(&sites, "x,y,nu\n0.25,0.5,0.75\n0.75,0.5,0.25\n").unwrap();
    (mesh, sites)
}

fn json(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn make_mesh_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "sq.dmesh");
    let o = sdot(&["make-mesh", "--square", "2", "--density", "const:1", "--out", &out]);
    assert!(o.status.success());
    let mesh = sdot::Mesh::load(&out).unwrap();
    assert_eq!(mesh.vertices().len(), 9);
    assert_eq!(mesh.triangle_count(), 8);
    assert!((mesh.total_mass() - 1.0).abs() <= 1e-15);
}

#[test]
fn solve_analytic_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, sites) = analytic(dir.path());
    let out = path(dir.path(), "r.json");
    let o = sdot(&["solve", "--mesh", &mesh, "--sites", &sites, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out);
    let psi: Vec<f64> = r["psi"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((psi[0] - 0.25).abs() <= 1e-12);
    assert_eq!(psi[1], 0.0);
    assert_eq!(r["converged"], Value::Bool(true));
    assert_eq!(r["iterations"], 1);
    assert_eq!(r["trace"].as_array().unwrap().len(), 1);
    for key in ["iter", "grad_norm", "tau", "k_value"] {
        assert!(r["trace"][0].get(key).is_some());
    }
}

#[test]
fn single_site_distance() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, _) = analytic(dir.path());
    let sites = path(dir.path(), "one.csv");
    std::fs::write(&sites, "x,y,nu\n0.5,0.5,1\n").unwrap();
    let out = path(dir.path(), "r.json");
    let o = sdot(&["distance", "--mesh", &mesh, "--sites", &sites, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    let expect = (1.0f64 / 6.0).sqrt();
    assert!((printed - expect).abs() <= 1e-12);
    let r = json(&out);
    assert_eq!(r["psi"], serde_json::json!([0]));
    assert!((r["w2"].as_f64().unwrap() - 0.4082483).abs() <= 1e-7);
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "m.dmesh");
    assert!(sdot(&["make-mesh", "--square", "3", "--density", "linear-y", "--out", &mesh]).status.success());
    let sites = path(dir.path(), "s.csv");
    std::fs::write(&sites, "x,y,nu\n0.1,0.2,1\n0.8,0.3,1\n0.4,0.6,1\n0.7,0.9,1\n0.2,0.85,1\n").unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let o = Command::new(env!("CARGO_BIN_EXE_sdot"))
            .args(["solve", "--mesh", &mesh, "--sites", &sites, "--normalize", "--out", out])
            .env("SDOT_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn diagram_svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, sites) = analytic(dir.path());
    let report = path(dir.path(), "r.json");
    assert!(sdot(&["solve", "--mesh", &mesh, "--sites", &sites, "--out", &report]).status.success());
    let (a, b) = (path(dir.path(), "a.svg"), path(dir.path(), "b.svg"));
    for svg in [&a, &b] {
        let o = sdot(&["diagram", "--mesh", &mesh, "--sites", &sites, "--psi", &report, "--svg", svg]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("<?xml"));
    assert!(text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<g class=\"cell\"").count(), 2);
    assert_eq!(text.matches("<circle").count(), 2);
    assert_eq!(text.matches("<g").count(), text.matches("</g>").count());
    // 2% margin around the unit square, y flipped
    assert!(text.contains("viewBox=\"-0.020000 -1.020000 1.040000 1.040000\""));
    // r = 0.5% of the diagonal
    assert!(text.contains("r=\"0.007071\""));

    // without --psi the diagram solves first and draws the same picture
    let c = path(dir.path(), "c.svg");
    assert!(sdot(&["diagram", "--mesh", &mesh, "--sites", &sites, "--svg", &c]).status.success());
    assert_eq!(text, std::fs::read_to_string(&c).unwrap());
}

#[test]
fn psi_round_trip_reproduces_masses() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "m.dmesh");
    assert!(sdot(&["make-mesh", "--square", "2", "--density", "linear-x", "--out", &mesh]).status.success());
    let sites = path(dir.path(), "s.csv");
    std::fs::write(&sites, "x,y,nu\n0.2,0.2,2\n0.8,0.3,1\n0.5,0.7,1\n0.1,0.9,1\n").unwrap();
    let report = path(dir.path(), "r.json");
    let o = sdot(&["solve", "--mesh", &mesh, "--sites", &sites, "--normalize", "--out", &report]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&report);

    let m = sdot::Mesh::load(&mesh).unwrap();
    let s = sdot::SiteSet::load(&sites, m.total_mass(), true).unwrap();
    let psi = sdot::WeightVector(r["psi"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect());
    let d = sdot::laguerre::build(&m, &s, &psi).unwrap();
    let emitted: Vec<f64> = r["masses"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(d.masses(), &emitted[..]);
}

#[test]
fn non_convergence_exits_two_with_full_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "m.dmesh");
    assert!(sdot(&["make-mesh", "--square", "2", "--out", &mesh]).status.success());
    let sites = path(dir.path(), "s.csv");
    std::fs::write(&sites, "x,y,nu\n0.1,0.1,0.05\n0.9,0.15,0.35\n0.4,0.8,0.3\n0.6,0.5,0.3\n").unwrap();
    let out = path(dir.path(), "r.json");
    let o = sdot(&[
        "solve", "--mesh", &mesh, "--sites", &sites, "--out", &out, "--max-iter", "1", "--tol", "1e-14",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: non-convergence: "));
    assert_eq!(stderr(&o).lines().count(), 1);
    let r = json(&out);
    assert_eq!(r["converged"], Value::Bool(false));
    assert_eq!(r["trace"].as_array().unwrap().len(), 1);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, _) = analytic(dir.path());
    let sites = path(dir.path(), "bad.csv");
    std::fs::write(&sites, "x,y,nu\n0.25,0.5,0.5\n0.75,0.5,0.25\n").unwrap();
    let out = path(dir.path(), "r.json");
    let o = sdot(&["solve", "--mesh", &mesh, "--sites", &sites, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: imbalance: "), "{}", stderr(&o));
    assert!(!Path::new(&out).exists());

    // --normalize fixes the imbalance
    let o = sdot(&["solve", "--mesh", &mesh, "--sites", &sites, "--normalize", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));

    let missing = path(dir.path(), "nope.dmesh");
    let o = sdot(&["solve", "--mesh", &missing, "--sites", &sites, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: io: "));

    let o = sdot(&["make-mesh", "--square", "0", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: validation: "));

    let o = sdot(&["make-mesh", "--square", "2", "--density", "quadratic", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);

    let o = sdot(&["solve", "--mesh", &mesh]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: validation: "));
}

#[test]
fn interpolation_frames() {
    let dir = tempfile::tempdir().unwrap();
    let (mesh, sites) = analytic(dir.path());
    let frames: PathBuf = dir.path().join("frames");
    let fdir = frames.to_str().unwrap();
    let args = [
        "interpolate", "--mesh", &mesh, "--sites", &sites, "--n", "200", "--times", "0,0.5,1", "--seed", "3",
        "--out-dir", fdir,
    ];
    assert!(sdot(&args).status.success());
    let first: Vec<Vec<u8>> = (0..3).map(|k| std::fs::read(frames.join(format!("frame_{k}.csv"))).unwrap()).collect();
    assert!(sdot(&args).status.success());
    for (k, bytes) in first.iter().enumerate() {
        assert_eq!(bytes, &std::fs::read(frames.join(format!("frame_{k}.csv"))).unwrap());
    }

    let last = String::from_utf8(first[2].clone()).unwrap();
    let mut lines = last.lines();
    assert_eq!(lines.next(), Some("t,x,y,site"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 200);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], "1");
        match f[3] {
            "0" => assert_eq!((f[1], f[2]), ("0.25", "0.5")),
            "1" => assert_eq!((f[1], f[2]), ("0.75", "0.5")),
            other => panic!("site {other}"),
        }
    }
}

#[test]
fn check_passes() {
    let o = sdot(&["check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 2);
}
