use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wpr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpr")).args(args).output().unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Header and numeric rows of a CSV written by the tool.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn misspelled_key_is_named_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "[beam]\nwavelenght_nm = 800\n");
    let out = dir.path().join("o");
    let o = wpr(&["radiate", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beam.wavelenght_nm"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn bad_overrides_and_subcommands_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "");
    let o = wpr(&["trajectory", &cfg, "--set", "electron.dt_over_period=0.01"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("electron.dt_over_period"), "{}", stderr(&o));
    let o = wpr(&["trajectory", &cfg, "--set", "nosuch.key=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wpr(&["radiat", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radiat"));
}

#[test]
fn thomson_scan_columns_follow_the_form_factor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let cfg = configs().join("fig2.cfg");
    let o = wpr(&["thomson-scan", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("thomson_scan.csv"));
    let perp = header.iter().position(|h| h == "ratio_perpendicular_y").unwrap();
    let fwd = header.iter().position(|h| h == "ratio_forward").unwrap();
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let want = (-(2.0 * PI * r[0]).powi(2)).exp();
        assert!((r[perp] - want).abs() <= 1e-12 * want.max(1e-300), "{} vs {want}", r[perp]);
        assert_eq!(r[fwd], 1.0);
    }
    let m = manifest(&out);
    assert_eq!(m["subcommand"], "thomson-scan");
    assert!(m["seed"].is_null());
    assert_eq!(m["outputs"][0], "thomson_scan.csv");
    assert!(m["versions"]["wavepacket_radiation"].is_string());
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn hash_tracks_resolved_values_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2.cfg");
    let hash = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["thomson-scan", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = wpr(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        manifest(&out)["config_hash"].as_str().unwrap().to_string()
    };
    let base = hash("a", &[]);
    // same value, other spelling and another output directory
    assert_eq!(base, hash("b", &["--set", "grids.n_r0=201", "--set", "grids.r0_over_lambda_max=2.0"]));
    assert_ne!(base, hash("c", &["--set", "grids.n_r0=11"]));
    assert_ne!(base, hash("d", &["--set", "beam.wavelength_nm=1030"]));
}

const SMALL_ENSEMBLE: &str = "\
[beam]
model = plane_pulsed
peak_intensity_W_cm2 = 5.35e15
fwhm_fs = 10

[electron]
dt_over_period = 0.005
margin_periods = 2

[grids]
directions = 0 0; 1.5707963267948966 1.5707963267948966
omega_min = 0.9
omega_max = 1.1
n_omega = 3
samples_per_period = 40

[wavepacket]
sigma_nm = 100

[ensemble]
n_samples = 24
batches = 8
";

#[test]
fn ensemble_runs_are_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), SMALL_ENSEMBLE);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["ensemble", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = wpr(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read(out.join("ensemble.csv")).unwrap(), manifest(&out))
    };
    let (a, ma) = run("a", &["--threads", "1"]);
    let (b, _) = run("b", &["--threads", "2"]);
    assert_eq!(a, b);
    assert_eq!(ma["seed"], 1);
    let (c, mc) = run("c", &["--seed", "77"]);
    assert_eq!(mc["seed"], 77);
    assert_eq!(mc["config"]["ensemble.seed"], "77");
    assert_ne!(ma["config_hash"], mc["config_hash"]);
    assert_ne!(a, c);
    let (header, rows) = read_csv(&dir.path().join("a/ensemble.csv"));
    assert_eq!(rows.len(), 2 * 3);
    let inc = header.iter().position(|h| h == "incoherent_eV").unwrap();
    let coh = header.iter().position(|h| h == "coherent_eV").unwrap();
    let se = header.iter().position(|h| h == "incoherent_se_eV").unwrap();
    for r in &rows {
        assert!(r[inc] > 0.0 && r[coh] >= 0.0 && r[se] >= 0.0);
    }
    assert!(String::from_utf8_lossy(&a).contains("# seed: 1"));
}

#[test]
fn negative_wigner_states_cannot_be_sampled() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_ENSEMBLE}\n[wavepacket]\ncomponents = 1 0 0 0 0; 1 0 0.01 0 0\n");
    let text = text.replacen("[wavepacket]\nsigma_nm = 100\n", "", 1);
    let cfg = write_cfg(dir.path(), &text);
    let o = wpr(&["ensemble", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).to_lowercase().contains("negativ"), "{}", stderr(&o));
}

#[test]
fn trajectory_table_is_physical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "[beam]\nmodel = plane_pulsed\npeak_intensity_W_cm2 = 1e18\nfwhm_fs = 10\n[electron]\nmargin_periods = 2\n",
    );
    let out = dir.path().join("t");
    let o = wpr(&["trajectory", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("trajectory.csv"));
    assert_eq!(header, ["t_fs", "x_um", "y_um", "z_um", "px_mec", "py_mec", "pz_mec", "gamma"]);
    assert!(rows.len() > 10);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
    }
    for r in &rows {
        let g = (1.0 + r[4] * r[4] + r[5] * r[5] + r[6] * r[6]).sqrt();
        assert!((r[7] - g).abs() < 1e-9 * g);
    }
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trajectory_summary.json")).unwrap()).unwrap();
    assert!(summary.is_object());
}
