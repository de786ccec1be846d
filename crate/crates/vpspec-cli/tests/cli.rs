use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn vpspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpspec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vpspec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, json: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, json).unwrap();
    p
}

/// Header plus data rows; `#` lines are dropped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(vpspec(&["--help"]).status.code(), Some(0));
    assert_eq!(vpspec(&["moments", "--help"]).status.code(), Some(0));
    assert_eq!(vpspec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(vpspec(&["moments", "--knum", "many"]).status.code(), Some(1));
    assert_eq!(vpspec(&["moments", "--profile", "kappa"]).status.code(), Some(1));
}

#[test]
fn missing_config_is_usage_error() {
    let o = vpspec(&["verify", "--config", "/nonexistent/vpspec.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read config"));
    let bad = write_config("bad.json", r#"{"profile": {"family": "cubic", "params": {}}}"#);
    assert_eq!(vpspec(&["moments", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn moments_compact_threshold() {
    let o = vpspec(&["moments"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    let v = col(&h, "value");
    let k0 = rows.iter().find(|r| r[0] == "kappa0").map(|r| f(&r[v])).unwrap();
    // κ₀² = 64√2π/315 in closed form
    let exact = (64.0 * 2f64.sqrt() * PI / 315.0).sqrt();
    assert!((k0 - exact).abs() < 1e-10 * exact, "{k0}");
    assert!((k0 - 0.9501).abs() < 1e-4);
    assert!(rows.iter().any(|r| r[0] == "identity_residual"));
}

#[test]
fn moments_gaussian_threshold_vanishes() {
    let o = vpspec(&["moments", "--profile", "maxwellian"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    let k0 = rows.iter().find(|r| r[0] == "kappa0").map(|r| f(&r[col(&h, "value")])).unwrap();
    assert_eq!(k0, 0.0);
    let tau0 = rows.iter().find(|r| r[0] == "tau_sq" && r[1] == "0").map(|r| f(&r[2])).unwrap();
    assert!((tau0 - 1.0).abs() < 1e-10);
}

#[test]
fn moments_rejects_invalid_profile() {
    let cfg = write_config(
        "neg.json",
        r#"{"profile": {"family": "compact_polynomial", "params": {"amplitude": -1, "e_max": 1, "order": 4}}}"#,
    );
    let o = vpspec(&["moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("negativity"), "{}", stderr(&o));
    let cfg = write_config(
        "rough.json",
        r#"{"profile": {"family": "compact_polynomial", "params": {"amplitude": 1, "e_max": 1, "order": 2}}}"#,
    );
    let o = vpspec(&["moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("below 4"), "{}", stderr(&o));
}

#[test]
fn branch_is_monotone_and_certified() {
    let o = vpspec(&["branch", "--knum", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (h, rows) = table(&text);
    assert_eq!(rows.len(), 60);
    let tau: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "tau_star")])).collect();
    let nu: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "nu_star")])).collect();
    assert!(tau.windows(2).all(|w| w[1] > w[0]));
    assert!(nu.windows(2).all(|w| w[1] < w[0]));
    assert!((nu[59] - 2f64.sqrt()).abs() < 1e-8);
    assert!(text.contains("certified=true"));
    assert!(rows.iter().all(|r| r[col(&h, "flag")] == "ok"));
}

#[test]
fn branch_rejects_empty_grid() {
    assert_eq!(vpspec(&["branch", "--knum", "0"]).status.code(), Some(1));
    assert_eq!(vpspec(&["branch", "--kmin", "0.5", "--kmax", "0.2"]).status.code(), Some(1));
    assert_eq!(vpspec(&["branch", "--profile", "maxwellian"]).status.code(), Some(1));
    assert_eq!(vpspec(&["branch", "--kmax", "1.5"]).status.code(), Some(1));
}

#[test]
fn landau_rows_are_damped_and_approach_the_law() {
    let o = vpspec(&["landau", "--kmin", "0.951", "--kmax", "0.99", "--knum", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    let re: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "re_lambda")])).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| f(&r[col(&h, "ratio")])).collect();
    assert!(re.iter().all(|&x| x < 0.0));
    // the ratio tends to 1 as k decreases to κ₀
    assert!((ratio[0] - 1.0).abs() < (ratio[3] - 1.0).abs());
    assert!((ratio[0] - 1.0).abs() < 5e-2);
}

#[test]
fn landau_rejects_k_below_threshold() {
    let o = vpspec(&["landau", "--kmin", "0.5", "--kmax", "1.2", "--knum", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not above"));
}

#[test]
fn green_matches_volterra() {
    let o = vpspec(&["green", "--tmax", "20", "--tnum", "801"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 801);
    let d = col(&h, "oracle_delta");
    assert!(rows.iter().all(|r| f(&r[d]) <= 1e-4 && r[h.len() - 1] == "ok"));
    assert!(!stderr(&o).contains("warning"));
}

#[test]
fn green_warns_on_coarse_grid() {
    let o = vpspec(&["green", "--tmax", "10", "--tnum", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning: t-grid step"));
}

#[test]
fn evolve_identity_and_synthesis_file() {
    let out = scratch("evolve.csv");
    let o = vpspec(&["evolve", "--tmax", "20", "--tnum", "801", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = table(&std::fs::read_to_string(&out).unwrap());
    let r = col(&h, "identity_residual");
    assert!(rows.iter().all(|row| f(&row[r]) <= 1e-6));
    let syn = std::fs::read_to_string(scratch("evolve.csv.synthesis.csv")).unwrap();
    let (sh, srows) = table(&syn);
    assert_eq!(sh[..3], ["t", "E_osc_value", "E_osc_point"]);
    assert_eq!(srows.len(), 40);
}

#[test]
fn evolve_klein_gordon_exponent() {
    let cfg = write_config("bump.json", r#"{"data": {"spatial": {"kind": "compact_bump", "radius": 2, "order": 4}}}"#);
    let out = scratch("kg.csv");
    let o = vpspec(&["evolve", "--config", cfg.to_str().unwrap(), "--tmax", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, rows) = table(&std::fs::read_to_string(scratch("kg.csv.synthesis.csv")).unwrap());
    let alpha = f(&rows[0][col(&h, "fitted_alpha")]);
    assert!((alpha - 1.5).abs() <= 0.1, "{alpha}");
}

#[test]
fn evolve_zero_data_gives_zero_output() {
    let cfg = write_config("zero.json", r#"{"data": {"spatial": {"kind": "gaussian", "width": 1}, "amplitude": 0}}"#);
    let o = vpspec(&["evolve", "--config", cfg.to_str().unwrap(), "--tmax", "5", "--tnum", "101"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let main = text.split("# synthesis\n").next().unwrap();
    let (h, rows) = table(main);
    for row in &rows {
        for name in ["re_S", "re_E", "im_E", "re_E_osc", "im_E_osc", "re_E_r", "im_E_r"] {
            assert_eq!(f(&row[col(&h, name)]), 0.0);
        }
    }
    assert!(text.contains("zero_field"));
}

#[test]
fn evolve_rejects_k_far_past_threshold() {
    assert_eq!(vpspec(&["evolve", "--kmin", "2.5", "--knum", "1"]).status.code(), Some(1));
}

#[test]
fn rows_carry_every_column() {
    for args in [vec!["branch", "--knum", "5"], vec!["landau", "--knum", "3"], vec!["moments"]] {
        let o = vpspec(&args);
        let (h, rows) = table(&stdout(&o));
        assert!(rows.iter().all(|r| r.len() == h.len()), "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let a = scratch("det_a.csv");
    let b = scratch("det_b.csv");
    for p in [&a, &b] {
        let o = vpspec(&["green", "--tmax", "8", "--tnum", "321", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn flags_override_config() {
    let cfg = write_config("grid.json", r#"{"k": {"min": 0.1, "max": 0.9, "num": 9}}"#);
    let c = cfg.to_str().unwrap();
    let (_, rows) = table(&stdout(&vpspec(&["branch", "--config", c])));
    assert_eq!(rows.len(), 9);
    let (_, rows) = table(&stdout(&vpspec(&["branch", "--config", c, "--knum", "3"])));
    assert_eq!(rows.len(), 3);
    assert_eq!(f(&rows[1][0]), 0.5);
}

#[test]
fn verify_default_suite_passes() {
    let o = vpspec(&["verify"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if let Some(s) = v.get("summary") {
            assert_eq!(s["failed"], 0);
        } else {
            assert_eq!(v["pass"], true, "{line}");
        }
    }
}

#[test]
fn verify_tampered_tolerance_names_the_invariant() {
    let cfg = write_config("tamper.json", r#"{"tolerances": {"green.oracle": 1e-30}}"#);
    let o = vpspec(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    let failed: Vec<String> =
        v["summary"]["failed_invariants"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().into()).collect();
    assert_eq!(failed, ["green.oracle[compact]", "green.oracle[maxwellian]"]);

    let cfg = write_config("unknown.json", r#"{"tolerances": {"green.nothing": 1e-3}}"#);
    assert_eq!(vpspec(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(vpspec(&["verify", "--tol", "-1"]).status.code(), Some(1));
}
