use std::process::Command;

fn acflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acflow"))
}

fn configs() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn validate_passes_for_cubic() {
    let out = acflow().args(["validate", "--config"]).arg(configs().join("cubic.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn unknown_flag_exits_with_usage() {
    let out = acflow().args(["validate", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"reaction": {"kind": "shifted-cubic", "coeffs": [0.1]}, "diffusivity": {"kind": "identity"}, "epsilon": 0.1}"#,
    )
    .unwrap();
    let out = acflow().args(["validate", "--config"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn profile_and_mobility_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("p.csv");
    let st = acflow()
        .args(["profile", "--e", "0,1", "--zmax", "10", "--hz", "0.01", "--config"])
        .arg(configs().join("diag12.json"))
        .arg("--out")
        .arg(&prof)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&prof).unwrap();
    assert!(text.starts_with("z,u0,u0z\n"));
    assert_eq!(text.lines().count(), 1 + 2001);

    let mob = dir.path().join("m.csv");
    let st = acflow()
        .args(["mobility", "--angles", "64", "--config"])
        .arg(configs().join("nonlinear.json"))
        .arg("--out")
        .arg(&mob)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&mob).unwrap();
    assert!(text.starts_with("theta,lambda,mu11,mu12,mu21,mu22\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn flow_front_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let st = acflow()
        .args(["flow", "--mode", "front", "--shape", "circle:R=0.2", "--tend", "0.005", "--config"])
        .arg(configs().join("cubic.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let (n, r2) = text.lines().skip(1).fold((0, 0.0), |(n, s), l| {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        (n + 1, s + (v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2))
    });
    let r = (r2 / n as f64).sqrt();
    assert!((r - (0.04f64 - 0.01).sqrt()).abs() < 1e-4, "{r}");
}

#[test]
fn simulate_dumps_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let st = acflow()
        .args(["simulate", "--grid", "64", "--eps", "0.05", "--tend", "0.002", "--snapshots", "0.001", "--config"])
        .arg(configs().join("cubic.json"))
        .arg("--out-prefix")
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(st.success());
    for t in ["0", "0.001", "0.002"] {
        let (u, meta) = acflow::acsolver::read_field(&dir.path().join(format!("run_t{t}"))).unwrap();
        assert_eq!(meta.n, 64);
        assert_eq!(meta.epsilon, 0.05);
        assert!(u.is_finite());
        assert!(dir.path().join(format!("run_t{t}_contour.csv")).exists());
    }
}
