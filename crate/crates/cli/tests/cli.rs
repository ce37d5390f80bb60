//! End-to-end runs of the binary: artifact layout, exit codes, error
//! wording, and byte-level determinism of the outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn helmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn forward_writes_artifacts_and_reports_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "fwd.cfg",
        "[grid]\nn = 33\n[problem]\nkappa = 1.0\nrefine = 17,33\n[potential]\nkind = zero\n[data]\nshape = planewave\namplitude = 1.0\n",
    );
    let out = dir.path().join("out");
    let res = helmlab(&["forward", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["solution.csv", "residual_report.json", "convergence.csv", "grid.json"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("residual_report.json")).unwrap())
            .unwrap();
    let order = report["observed_orders"][0].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "bad.cfg",
        "[grid]\nn = not_a_number\n[problem]\nkappa = 1.0\n",
    );
    let out = dir.path().join("out");
    let res = helmlab(&["forward", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("[grid]") && stderr.contains("'n'"), "{stderr}");
}

#[test]
fn near_eigenvalue_exits_3_with_mode_indices() {
    let dir = tempfile::tempdir().unwrap();
    let kappa = std::f64::consts::PI * 2.0_f64.sqrt();
    let cfg = write_cfg(
        dir.path(),
        "eig.cfg",
        &format!("[grid]\nn = 17\n[problem]\nkappa = {kappa}\n[data]\nshape = planewave\n"),
    );
    let out = dir.path().join("out");
    let res = helmlab(&["forward", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("stage assemble"), "{stderr}");
    assert!(stderr.contains("1^2 + 1^2"), "{stderr}");
}

#[test]
fn divergent_simulation_exits_3_with_probe_hint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "div.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 1.0\n[potential]\nkind = constant\nvalue = 10.0\n[plan]\nband_radius = 1.0\nlattice_step = 1.0\n[measurement]\nmethod = fd\neps = 1.0\n",
    );
    let out = dir.path().join("out");
    let res = helmlab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("diverged") && stderr.contains("smallness"), "{stderr}");
}

#[test]
fn simulate_then_reconstruct_roundtrip_with_mismatch_detection() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = write_cfg(
        dir.path(),
        "sim.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 2.0\n[potential]\nkind = gaussian\ncenter_x = 0.5\ncenter_y = 0.5\nwidth = 0.25\namplitude = 1.0\n[plan]\nband_radius = 2.0\nlattice_step = 1.0\n[measurement]\nmethod = analytic\n",
    );
    let sim_out = dir.path().join("sim");
    let res = helmlab(&["simulate", "--config", &sim_cfg, "--out", sim_out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let dataset = sim_out.join("dataset.json");
    assert!(dataset.exists());
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&dataset).unwrap()).unwrap();
    // lattice of step 1 inside |z| <= 2: 13 points
    assert_eq!(parsed["records"].as_array().unwrap().len(), 13);

    let rec_cfg = write_cfg(
        dir.path(),
        "rec.cfg",
        &format!(
            "[grid]\nn = 17\n[problem]\nkappa = 2.0\n[input]\ndataset = {}\n[truth]\nkind = gaussian\ncenter_x = 0.5\ncenter_y = 0.5\nwidth = 0.25\namplitude = 1.0\n",
            dataset.display()
        ),
    );
    let rec_out = dir.path().join("rec");
    let res = helmlab(&["reconstruct", "--config", &rec_cfg, "--out", rec_out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["moments.json", "q_rec.pgm", "q_rec.json", "error.csv", "error.json"] {
        assert!(rec_out.join(name).exists(), "missing {name}");
    }
    let pgm = fs::read(rec_out.join("q_rec.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n17 17\n65535\n"));
    assert_eq!(pgm.len(), b"P5\n17 17\n65535\n".len() + 17 * 17 * 2);

    // kappa mismatch is a data error (exit 4)
    let bad_cfg = write_cfg(
        dir.path(),
        "bad.cfg",
        &format!(
            "[grid]\nn = 17\n[problem]\nkappa = 3.0\n[input]\ndataset = {}\n",
            dataset.display()
        ),
    );
    let res = helmlab(&["reconstruct", "--config", &bad_cfg, "--out", rec_out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn identical_config_and_seed_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = write_cfg(
        dir.path(),
        "sim.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 2.0\n[potential]\nkind = gaussian\ncenter_x = 0.4\ncenter_y = 0.6\nwidth = 0.2\namplitude = 1.0\n[plan]\nband_radius = 2.0\nlattice_step = 1.0\n[measurement]\nmethod = fd\neps = 1e-3\n",
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for (out, threads) in [(&out1, "1"), (&out2, "2")] {
        let res = helmlab(&[
            "simulate",
            "--config",
            &sim_cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = fs::read(out1.join("dataset.json")).unwrap();
    let b = fs::read(out2.join("dataset.json")).unwrap();
    assert_eq!(a, b, "dataset bytes differ between runs/thread counts");

    let mx_cfg = write_cfg(
        dir.path(),
        "mx.cfg",
        "[maxwell]\nk = 1.0\nh = 0.3\nsamples = 25\nbox_n = 9\n",
    );
    let mx1 = dir.path().join("m1");
    let mx2 = dir.path().join("m2");
    for out in [&mx1, &mx2] {
        let res = helmlab(&[
            "maxwell-verify",
            "--config",
            &mx_cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = fs::read(mx1.join("maxwell_report.json")).unwrap();
    let b = fs::read(mx2.join("maxwell_report.json")).unwrap();
    assert_eq!(a, b, "maxwell report bytes differ for identical seeds");

    // the PGM path is deterministic too
    let rec_cfg = write_cfg(
        dir.path(),
        "rec.cfg",
        &format!(
            "[grid]\nn = 17\n[problem]\nkappa = 2.0\n[input]\ndataset = {}\n",
            out1.join("dataset.json").display()
        ),
    );
    let r1 = dir.path().join("r1");
    let r2 = dir.path().join("r2");
    for out in [&r1, &r2] {
        let res = helmlab(&["reconstruct", "--config", &rec_cfg, "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(
        fs::read(r1.join("q_rec.pgm")).unwrap(),
        fs::read(r2.join("q_rec.pgm")).unwrap(),
        "pgm bytes differ between identical runs"
    );
}

#[test]
fn partial_data_simulation_records_the_partition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "sim.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 2.0\n[potential]\nkind = gaussian\ncenter_x = 0.4\ncenter_y = 0.4\nwidth = 0.2\namplitude = 1.0\n[plan]\nband_radius = 1.0\nlattice_step = 1.0\n[measurement]\nmethod = analytic\n[partition]\ngamma1 = 3.0:4.0\ngamma2 = 0.0:1.0\n",
    );
    let out = dir.path().join("out");
    let res = helmlab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("dataset.json")).unwrap()).unwrap();
    assert!(!parsed["partition"].is_null());
    // probe supports honor the arcs: f1 lives on the left edge only
    let support = parsed["records"][0]["f1"]["support"].as_array().unwrap();
    assert!(support.iter().any(|s| s.as_bool().unwrap()));
    let values = parsed["records"][0]["f0"]["values"].as_array().unwrap();
    // f0 is supported on the bottom edge (first quarter of the loop)
    let quarter = values.len() / 4;
    for (k, v) in values.iter().enumerate() {
        let mag = v[0].as_f64().unwrap().abs() + v[1].as_f64().unwrap().abs();
        if k >= quarter {
            assert_eq!(mag, 0.0, "f0 leaks outside gamma2 at node {k}");
        }
    }
}

#[test]
fn shg_degenerate_scale_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "mx.cfg", "[maxwell]\nk = 1.0\nh = 1.0\n");
    let out = dir.path().join("out");
    let res = helmlab(&["maxwell-verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("k*h < 1"), "{stderr}");
}

#[test]
fn decay_runge_and_cavity_commands_produce_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let decay_cfg = write_cfg(
        dir.path(),
        "decay.cfg",
        "[grid]\nn = 65\n[problem]\nkappa = 1.0\n[cgo]\ncutoff_c = 0.25\ncutoff_order = 5\nh_ladder = 0.4,0.2,0.1\n",
    );
    let out = dir.path().join("decay");
    let res = helmlab(&["cgo-decay", "--config", &decay_cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    assert!(report["slope"].as_f64().unwrap() < 0.0);
    assert!(out.join("decay.csv").exists());

    let runge_cfg = write_cfg(
        dir.path(),
        "runge.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 1.0\n[runge]\nmodes = 4,8\narcs = 0.0:1.0\n",
    );
    let out = dir.path().join("runge");
    let res = helmlab(&["runge", "--config", &runge_cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let ladder = fs::read_to_string(out.join("ladder.csv")).unwrap();
    assert!(ladder.starts_with("modes,residual\n"));
    assert_eq!(ladder.trim_end().lines().count(), 3);

    let cavity_cfg = write_cfg(
        dir.path(),
        "cavity.cfg",
        "[grid]\nn = 17\n[problem]\nkappa = 1.0\n[cavity]\nd1_center_x = 0.45\nd1_center_y = 0.5\nd1_radius = 0.15\nd2_center_x = 0.55\nd2_center_y = 0.5\nd2_radius = 0.15\nmodes = 4\n",
    );
    let out = dir.path().join("cavity");
    let res = helmlab(&["cavity", "--config", &cavity_cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("cavity.json")).unwrap()).unwrap();
    assert_eq!(report["baseline"].as_f64().unwrap(), 0.0);
    assert!(report["discrepancy"].as_f64().unwrap() > 0.0);
}
