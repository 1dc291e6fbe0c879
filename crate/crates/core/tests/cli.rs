use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use greentrace::io;
use greentrace::profile::FluxProfile;
use greentrace::Complex64;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_greentrace"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

fn write_map(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn forward_disk() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "disk.json", r#"{"type":"polynomial","zeta_c":[0,0],"coeffs":[[1,0]]}"#);
    let out = dir.path().join("out");
    let o = run(&["forward", "--map", path(&map), "--n", "64", "--out", path(&out)], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = io::read_flux(&out.join("flux.csv"), None, 1e-12, false).unwrap();
    assert!((profile.perimeter() - TAU).abs() < 1e-13);
    assert!(profile.samples().iter().all(|v| (v - 1.0 / TAU).abs() < 1e-15));
    let anchors = io::read_anchors(&out.join("anchors.json")).unwrap();
    assert_eq!(anchors.zeta_b, Complex64::new(1.0, 0.0));
    let trace = io::read_trace_points(&out.join("trace.csv")).unwrap();
    assert_eq!(trace.len(), 64);
    assert!(trace.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
}

#[test]
fn forward_cusp_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "cusp.json", r#"{"type":"polynomial","zeta_c":[0,0],"coeffs":[[1,0],[0.5,0]]}"#);
    let o = run(&["forward", "--map", path(&map), "--out", path(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "DegenerateDerivative");
}

#[test]
fn bad_grid_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "disk.json", r#"{"type":"polynomial","zeta_c":[0,0],"coeffs":[[1,0]]}"#);
    let o = run(&["forward", "--map", path(&map), "--n", "32"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "InvalidArgument");
    let o = run(&["forward", "--map", path(&dir.path().join("nope.json"))], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "Io");
}

#[test]
fn forward_then_reconstruct_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "quad.json", r#"{"type":"polynomial","zeta_c":[0.5,-1],"coeffs":[[0,1],[0.2,0]]}"#);
    let fwd = dir.path().join("fwd");
    let o = run(&["forward", "--map", path(&map), "--out", path(&fwd)], &[("GREENTRACE_N", "256")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // reloads as a valid profile at the default tolerance
    let profile = io::read_flux(&fwd.join("flux.csv"), None, 1e-6, false).unwrap();
    assert_eq!(profile.n_samples(), 256);

    let rec = dir.path().join("rec");
    let o = run(
        &[
            "reconstruct",
            "--flux",
            path(&fwd.join("flux.csv")),
            "--config",
            path(&fwd.join("profile.json")),
            "--anchors",
            path(&fwd.join("anchors.json")),
            "--n",
            "256",
            "--levels",
            "0.5,0.9",
            "--out",
            path(&rec),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let want = io::read_trace_points(&fwd.join("trace.csv")).unwrap();
    let got = io::read_trace_points(&rec.join("trace.csv")).unwrap();
    let err = want.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");

    let report: io::ReconstructionReport = io::read_report(&rec.join("report.json")).unwrap();
    assert!(report.consistency_residual.unwrap() < 1e-10);
    assert!((report.gamma - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    assert_eq!(report.n, 256);

    let level = io::read_rows(&rec.join("level_0.5.csv"), &["theta", "x", "y"]).unwrap();
    assert_eq!(level.len(), 256);
    // image of |z| = 1/2 under 0.5 - i + i z + 0.2 z^2
    for row in level.iter().step_by(17) {
        let z = Complex64::from_polar(0.5, row[0]);
        let f = Complex64::new(0.5, -1.0) + Complex64::i() * z + 0.2 * z * z;
        assert!((f - Complex64::new(row[1], row[2])).norm() < 1e-10);
    }
    assert!(rec.join("level_0.9.csv").exists());
}

#[test]
fn reconstruct_with_gamma_only() {
    let dir = tempfile::tempdir().unwrap();
    let flux = dir.path().join("flux.csv");
    io::write_flux(&flux, &FluxProfile::from_fn(64, TAU, |_| 1.0 / TAU).unwrap()).unwrap();
    let o = run(
        &["reconstruct", "--flux", path(&flux), "--gamma", "1.5707963267948966", "--zeta-c", "-1,2", "--n", "64", "--out", path(dir.path())],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: io::ReconstructionReport = io::read_report(&dir.path().join("report.json")).unwrap();
    assert!(report.consistency_residual.is_none());
    assert!((report.zeta_b[0] + 1.0).abs() < 1e-14 && (report.zeta_b[1] - 3.0).abs() < 1e-14);
}

#[test]
fn inconsistent_anchors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let flux = dir.path().join("flux.csv");
    io::write_flux(&flux, &FluxProfile::from_fn(64, TAU, |_| 1.0 / TAU).unwrap()).unwrap();
    let anchors = dir.path().join("anchors.json");
    fs::write(&anchors, r#"{"zeta_c":[0,0],"zeta_b":[2,0]}"#).unwrap();
    let o = run(&["reconstruct", "--flux", path(&flux), "--anchors", path(&anchors), "--out", path(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr_json(&o);
    assert_eq!(err["error"], "InconsistentAnchors");
    assert!((err["residual"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    // the same data passes once the tolerance admits the mismatch
    let o = run(
        &["reconstruct", "--flux", path(&flux), "--anchors", path(&anchors), "--tol-residual", "0.6", "--out", path(dir.path())],
        &[],
    );
    assert!(o.status.success());
}

#[test]
fn unnormalized_flux_needs_renormalize() {
    let dir = tempfile::tempdir().unwrap();
    let flux = dir.path().join("flux.csv");
    let rows: String = (0..64).map(|j| format!("{},{}\n", j as f64 * TAU / 64.0, 1.0)).collect();
    fs::write(&flux, format!("s,phi\n{rows}")).unwrap();
    let o = run(&["analyze", "--flux", path(&flux), "--out", path(dir.path())], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "NormalizationViolation");
    let o = run(&["analyze", "--flux", path(&flux), "--renormalize", "--out", path(dir.path())], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn analyze_json(dir: &Path, profile: &FluxProfile) -> (serde_json::Value, serde_json::Value, Vec<Vec<f64>>) {
    let flux = dir.join("flux.csv");
    io::write_flux(&flux, profile).unwrap();
    let o = run(&["analyze", "--flux", path(&flux), "--out", path(dir)], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    (
        read("univalence.json"),
        read("symmetry.json"),
        io::read_rows(&dir.join("curvature.csv"), &["s", "kappa"]).unwrap(),
    )
}

#[test]
fn analyze_constant_flux() {
    let dir = tempfile::tempdir().unwrap();
    let (uni, sym, kappa) = analyze_json(dir.path(), &FluxProfile::from_fn(64, 2.0, |_| 0.5).unwrap());
    assert_eq!(uni["passes"], true);
    assert_eq!(uni["max_ratio"], 0.0);
    assert!(sym["rotational"].as_array().unwrap().iter().all(|r| r["residual"].as_f64().unwrap() < 1e-14));
    assert!(kappa.iter().all(|r| (r[1] - TAU / 2.0).abs() < 1e-12));
}

#[test]
fn analyze_four_fold_and_steep() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "four.json", r#"{"type":"polynomial","zeta_c":[0,0],"coeffs":[[1,0],[0,0],[0,0],[0,0],[0.1,0]]}"#);
    let fwd = dir.path().join("fwd");
    assert!(run(&["forward", "--map", path(&map), "--out", path(&fwd)], &[]).status.success());
    let o = run(&["analyze", "--flux", path(&fwd.join("flux.csv")), "--out", path(&fwd)], &[]);
    assert!(o.status.success());
    let sym: serde_json::Value = serde_json::from_str(&fs::read_to_string(fwd.join("symmetry.json")).unwrap()).unwrap();
    let orders: Vec<u64> = sym["detected_orders"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(orders.contains(&2) && orders.contains(&4), "{orders:?}");
    assert_eq!(sym["reflection_detected"], true);

    let steep = FluxProfile::from_fn(128, 1.0, |s| 1.0 + 0.8 * (TAU * s).cos()).unwrap();
    let (uni, _, _) = analyze_json(dir.path(), &steep);
    assert_eq!(uni["passes"], false);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "m.json", r#"{"type":"polynomial","zeta_c":[0,0],"coeffs":[[1,0],[0.1,0.05],[0.02,0]]}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(run(&["forward", "--map", path(&map), "--out", path(out)], &[]).status.success());
        assert!(run(
            &["reconstruct", "--flux", path(&out.join("flux.csv")), "--anchors", path(&out.join("anchors.json")), "--out", path(&out.join("rec"))],
            &[]
        )
        .status
        .success());
    }
    for name in ["flux.csv", "anchors.json", "trace.csv", "rec/trace.csv", "rec/report.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sampled_boundary_spec() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<String> = (0..128)
        .map(|j| {
            let t = TAU * j as f64 / 128.0;
            format!("[{},{}]", 2.0 * t.cos(), 2.0 * t.sin())
        })
        .collect();
    let map = write_map(dir.path(), "s.json", &format!(r#"{{"type":"boundary_samples","points":[{}]}}"#, pts.join(",")));
    let o = run(&["forward", "--map", path(&map), "--n", "128", "--out", path(dir.path())], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = io::read_flux(&dir.path().join("flux.csv"), None, 1e-12, false).unwrap();
    assert!(profile.samples().iter().all(|v| (v - 1.0 / (2.0 * TAU)).abs() < 1e-14));
}
