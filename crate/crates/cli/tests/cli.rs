use std::fs;
use std::process::{Command, Output};

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(args)
        .env_remove("SPINCHAIN_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn spectrum_json_lists_levels() {
    let o = spinchain(&["spectrum", "--spin", "1", "--sites", "2", "--coupling", "1", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let levels: Vec<(f64, u64)> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["energy"].as_f64().unwrap(), r["degeneracy"].as_u64().unwrap()))
        .collect();
    assert_eq!(levels.len(), 3);
    for ((e, d), (want_e, want_d)) in levels.iter().zip([(-4.0, 1), (-2.0, 3), (2.0, 5)]) {
        assert!((e - want_e).abs() < 1e-10);
        assert_eq!(*d, want_d);
    }
    assert_eq!(doc["eigenvalues"].as_array().unwrap().len(), 9);
    assert!(doc["provenance"]["convention"].as_str().unwrap().contains("counts the bond twice"));
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    for (args, field) in [
        (vec!["spectrum", "--spin", "0.3"], "spin:"),
        (vec!["witness", "--temperature", "-1"], "temperature:"),
        (vec!["witness"], "temperature:"),
        (vec!["tc", "--sites", "1"], "sites:"),
        (vec!["tc", "--format", "xml"], "format:"),
        (vec!["tc", "--tol", "abc"], "tol:"),
    ] {
        let o = spinchain(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(field), "{args:?}");
    }
}

#[test]
fn oversized_instances_exit_with_code_three() {
    let o = spinchain(&["spectrum", "--spin", "1/2", "--sites", "30"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    let o = spinchain(&["tc", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn second_run_hits_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["spectrum", "--spin", "1", "--sites", "4", "--cache-dir", cache.to_str().unwrap()];
    let first = spinchain(&args);
    let second = spinchain(&args);
    assert!(first.status.success() && second.status.success());
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cache hit"));
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_spinchain"))
            .args(["thermal", "--spin", "1/2", "--sites", "6", "--temperature", "1"])
            .env("SPINCHAIN_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    run();
    assert!(String::from_utf8_lossy(&run().stderr).contains("cache hit"));
}

#[test]
fn witness_changes_sign_at_the_closed_form_temperature() {
    let tc = 2.0 / 3f64.ln();
    let temps = format!("{tc},0.5,3");
    let o = spinchain(&["witness", "--spin", "1/2", "--sites", "2", "--temperature", &temps]);
    let rows = data_rows(&stdout(&o));
    let w: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(w[0].abs() < 1e-6);
    assert!(w[1] < 0.0 && rows[1][4] == "true");
    assert!(w[2] > 0.0 && rows[2][4] == "false");
}

#[test]
fn tc_scales_with_coupling() {
    let o = spinchain(&["tc", "--spin", "1", "--sites", "2", "--coupling", "2"]);
    let rows = data_rows(&stdout(&o));
    let t: f64 = rows[0][1].parse().unwrap();
    assert!((t - 2.0 * 6.0 / 10f64.ln()).abs() < 1e-5);
}

#[test]
fn length_scan_starts_at_the_pair() {
    let o = spinchain(&["scan", "fig2", "--spin", "1/2", "--sites", "2..10"]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][1], "2");
    assert!((rows[0][2].parse::<f64>().unwrap() - 1.8205).abs() < 1e-4);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "spin = 1\nsites = 2\ncoupling = 2\nformat = json\n").unwrap();
    let o = spinchain(&["tc", "--config", conf.to_str().unwrap(), "--coupling", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let t = doc["rows"][0]["t_c"].as_f64().unwrap();
    assert!((t - 6.0 / 10f64.ln()).abs() < 1e-6);

    fs::write(&conf, "spin = 0.3\n").unwrap();
    let o = spinchain(&["tc", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn svg_plot_writes_table_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = spinchain(&["scan", "fig1", "--spin", "1/2,1,3/2", "--format", "svg-plot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<circle"));
    assert_eq!(data_rows(&fs::read_to_string(&out).unwrap()).len(), 3);

    let o = spinchain(&["spectrum", "--format", "svg-plot", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let o = spinchain(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(data_rows(&stdout(&o)).iter().all(|r| r[1] == "true"));
}

#[test]
fn emin_reports_the_alternating_state() {
    let o = spinchain(&["emin", "--spin", "1", "--sites", "4", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc["diagnostics"]["e_min"].as_f64().unwrap() + 4.0).abs() < 1e-12);
    assert!((doc["diagnostics"]["numeric_minimum"].as_f64().unwrap() + 4.0).abs() < 1e-6);
    let sx: Vec<f64> = doc["rows"].as_array().unwrap().iter().map(|r| r["sx"].as_f64().unwrap()).collect();
    assert!(sx.iter().enumerate().all(|(k, x)| (x - if k % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-10));
}
