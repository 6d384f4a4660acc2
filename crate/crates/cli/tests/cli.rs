use std::path::Path;
use std::process::{Command, Output};

fn pinchlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinchlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn floats(v: &[String]) -> Vec<f64> {
    v.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn generate_icosphere_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["generate", "icosphere", "--subdiv", "5", "--out", "ico.off"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = String::from_utf8_lossy(&o.stdout);
    assert!(summary.contains("vertices 10242"), "{summary}");
    assert!(summary.contains("euler 2"), "{summary}");
    let text = std::fs::read_to_string(dir.path().join("ico.off")).unwrap();
    assert!(text.lines().any(|l| l.trim() == "10242 20480 0"));
}

#[test]
fn generate_glued_is_a_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["generate", "glued", "--eps", "0.1", "--nr", "64", "--ntheta", "32", "--out", "g.obj"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("euler 2"));
    let text = std::fs::read_to_string(dir.path().join("g.obj")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn glued_in_curved_ambient_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["--ambient-delta", "1", "generate", "glued", "--out", "g.off"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("g.off").exists());
}

#[test]
fn perturbed_generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.off", "b.off"] {
        let o = pinchlab(&["--seed", "11", "generate", "perturbed", "--subdiv", "3", "--amplitude", "0.05", "--out", name], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a.off")).unwrap();
    let b = std::fs::read(dir.path().join("b.off")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn analyze_writes_report_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pinchlab(&["generate", "icosphere", "--subdiv", "3", "--out", "s.off"], dir.path()).status.success());
    let o = pinchlab(&["analyze", "--mesh", "s.off", "--out", "r.json", "--fields", "f.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["schema"], "pinchlab-report/1");
    assert_eq!(r["n_vertices"], 642);
    assert!((r["R0"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert!(r["flags"].as_array().unwrap().is_empty());
    let fields = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(fields.lines().next().unwrap(), "vertex,H,B_norm,X_norm,psi,delta_r");
    assert_eq!(fields.lines().count(), 643);
}

#[test]
fn analyze_missing_mesh_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["analyze", "--mesh", "nope.off", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.off"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn analyze_open_mesh_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tri.off"), "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
    let o = pinchlab(&["analyze", "--mesh", "tri.off", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn rigidity_rows_and_focal_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["rigidity", "--profiles", "constant:0:1,constant:1:3.5", "--eps", "0,0.01", "--out", "rig.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("rig.csv")).unwrap();
    let status = column(&text, "status");
    assert_eq!(status.len(), 4);
    assert_eq!(&status[..2], ["ok", "ok"]);
    assert!(status[2].starts_with("focal failure at t = "));
    let t: f64 = status[2].trim_start_matches("focal failure at t = ").parse().unwrap();
    assert!((t - std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn rigidity_random_batch_all_certify() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["rigidity", "--profiles", "random:100", "--eps", "0", "--steps", "1000", "--out", "rig.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("rig.csv")).unwrap();
    let status = column(&text, "status");
    assert_eq!(status.len(), 100);
    assert!(status.iter().all(|s| s == "ok"));
    let ratio = floats(&column(&text, "max_ratio"));
    let bound = floats(&column(&text, "bound"));
    assert!(ratio.iter().zip(&bound).all(|(r, b)| r <= b));
}

#[test]
fn rigidity_solution_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["rigidity", "--profiles", "constant:1:1", "--eps", "0", "--solutions", "sol", "--out", "rig.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("sol").join("profile_0.csv")).unwrap();
    assert!(text.starts_with("t,rho,J,F_aux,s_delta,ratio"));
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["sweep", "--axis", "amplitude", "--out", "s.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn amplitude_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["sweep", "--axis", "amplitude", "--values", "0.02,0.05,0.1,0.2", "--subdiv", "4", "--out", "s.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(column(&text, "status").iter().all(|s| s == "ok"));
    for name in ["eps_spec", "hausdorff", "psi_infty"] {
        let v = floats(&column(&text, name));
        assert!(v.windows(2).all(|w| w[0] < w[1]), "{name}: {v:?}");
    }
    let plot = std::fs::read_to_string(dir.path().join("s.eps_spec.csv")).unwrap();
    assert_eq!(plot.lines().count(), 5);
}

#[test]
fn glued_sweep_lambda_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["sweep", "--axis", "eps", "--values", "0.1,0.05,0.02", "--nr", "64", "--ntheta", "48", "--out", "g.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let lambda = floats(&column(&text, "lambda1"));
    assert!(lambda.windows(2).all(|w| w[0] > w[1]), "{lambda:?}");
    let eps_spec = floats(&column(&text, "eps_spec"));
    assert!(eps_spec.iter().all(|&e| e > 1.0), "{eps_spec:?}");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "ambient_delta = -1.0\n\n[generate]\nfamily = \"icosphere\"\nradius = 0.5\nsubdiv = 2\n",
    )
    .unwrap();
    let o = pinchlab(&["--config", "run.toml", "generate", "--out", "h.off"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("h.off")).unwrap();
    assert!(text.contains("ambient-delta=-1"));

    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    let o = pinchlab(&["--config", "bad.toml", "generate", "icosphere"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn example_sphere_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = pinchlab(&["example", "sphere"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["eps_spec"].as_f64().unwrap().abs() < 0.02);
}
