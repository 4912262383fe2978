use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qwalk::harness::{run_experiment, validate_config, ExperimentConfig};
use qwalk::observables::intensity;
use qwalk::oracles::bessel_free_state;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn resolve(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap().resolve().unwrap()
}

/// Rows of a CSV with a header, label column dropped.
fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn ballistic_final_row_matches_bessel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve(
        "experiment = \"ballistic\"\n[lattice]\nn_sites = 101\ncoupling = 1.0\n[zgrid]\nstop = 10.0\nsteps = 20\n",
    );
    run_experiment(&cfg, dir.path()).unwrap();
    let rows = read_rows(&dir.path().join("intensity.csv"));
    assert_eq!(rows.len(), 21);
    let last = rows.last().unwrap();
    let oracle = intensity(&bessel_free_state(50, 1.0, 10.0, 101).unwrap());
    for (a, b) in last.iter().zip(oracle.probs()) {
        assert!((a - b).abs() < 1e-6);
    }
    for row in &rows {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }
    assert!(header(&dir.path().join("intensity.csv")).starts_with("z,site_0,site_1,"));
    assert_eq!(
        header(&dir.path().join("observables.csv")),
        "z,tau,variance,participation_ratio,norm_error"
    );
}

#[test]
fn boundary_sweep_carpet_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve(
        "experiment = \"boundary_sweep\"\n[zgrid]\nstop = 2.0\nsteps = 4\n[sweep]\nfirst_input = 0\nlast_input = 20\n",
    );
    run_experiment(&cfg, dir.path()).unwrap();
    let carpet = read_rows(&dir.path().join("carpet.csv"));
    assert_eq!(carpet.len(), 21);
    // input 20 is far from the wall at this length
    let row = &carpet[20];
    for k in 0..=20 {
        assert!((row[20 + k] - row[20 - k]).abs() < 1e-8, "k={k}");
    }
    // input 0 is not
    assert!((carpet[0][0] - carpet[0][2]).abs() > 1e-3);
    let labels: Vec<String> = fs::read_to_string(dir.path().join("carpet.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(labels.first().unwrap(), "0");
    assert_eq!(labels.last().unwrap(), "20");
}

#[test]
fn view_sites_truncates_carpet() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve(
        "experiment = \"boundary_sweep\"\n[sweep]\nlast_input = 5\nview_sites = 40\n[output]\nformats = [\"csv\", \"pgm\"]\n",
    );
    run_experiment(&cfg, dir.path()).unwrap();
    let carpet = read_rows(&dir.path().join("carpet.csv"));
    assert_eq!(carpet.len(), 6);
    assert!(carpet.iter().all(|r| r.len() == 40));
    let pgm = fs::read(dir.path().join("carpet.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    assert!(!dir.path().join("run.json").exists());
}

#[test]
fn golden_carpet_regression() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/carpet.csv");
    let cfg = validate_config(&configs().join("boundary_sweep.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path()).unwrap();
    let fresh = dir.path().join("carpet.csv");
    if std::env::var_os("QWALK_BLESS").is_some() {
        fs::copy(&fresh, &golden).unwrap();
    }
    let (a, b) = (read_rows(&fresh), read_rows(&golden));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.len(), rb.len());
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn disorder_participation_saturates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = validate_config(&configs().join("disorder.toml")).unwrap();
    assert_eq!(cfg.n_realizations, 1000);
    run_experiment(&cfg, dir.path()).unwrap();
    let obs = read_rows(&dir.path().join("observables.csv"));
    let pr: Vec<f64> = obs.iter().map(|r| r[2]).collect();
    let max = pr.iter().copied().fold(0.0, f64::max);
    assert!(pr.last().unwrap() / max >= 0.8);
    for row in read_rows(&dir.path().join("intensity.csv")) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }
    let sem = read_rows(&dir.path().join("intensity_sem.csv"));
    assert!(sem.last().unwrap().iter().any(|s| *s > 0.0));
}

#[test]
fn run_json_round_trips() {
    for name in ["ballistic", "boundary_sweep", "dephasing", "classical"] {
        let cfg = validate_config(&configs().join(format!("{name}.toml"))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut small = cfg.clone();
        small.n_realizations = small.n_realizations.min(4);
        run_experiment(&small, dir.path()).unwrap();
        let back = validate_config(&dir.path().join("run.json")).unwrap();
        assert_eq!(back, small, "{name}");
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
        assert_eq!(doc["library_version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(doc["master_seed"], small.master_seed);
    }
}

#[test]
fn classical_rows_are_ctrw() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = validate_config(&configs().join("classical.toml")).unwrap();
    let result = run_experiment(&cfg, dir.path()).unwrap();
    for (z, v) in result.zgrid.values().iter().zip(&result.variance) {
        assert!((v - 2.0 * z).abs() < 1e-8 * (1.0 + z));
    }
}

fn qwalk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "experiment = \"disorder\"\n").unwrap();
    let out = qwalk().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disorder"));

    fs::write(&bad, "experiment = \"disorder\"\n[disorder]\noffdiag_strength = 1.5\n").unwrap();
    let out = qwalk().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("w < 1"));

    let out = qwalk()
        .args(["oracle", "ctrw", "--site", "2", "--t", "5", "--sites", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = qwalk()
        .args(["oracle", "bessel", "--site", "10", "--z", "1", "--sites", "21"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 22);
    assert_eq!(text.lines().next().unwrap(), "site,re,im,intensity");
}

#[test]
fn binary_validate_prints_resolved_config() {
    let out = qwalk()
        .arg("validate")
        .arg(configs().join("ballistic.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let again = resolve(&text);
    assert_eq!(again, validate_config(&configs().join("ballistic.toml")).unwrap());
}

#[test]
fn binary_output_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.toml");
    fs::write(
        &cfg,
        "experiment = \"disorder\"\nn_realizations = 200\nmaster_seed = 3\n[disorder]\noffdiag_strength = 0.5\n[zgrid]\nstop = 5.0\nsteps = 5\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let status = qwalk()
            .env("QWALK_THREADS", threads)
            .arg("simulate")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out_dir.join("intensity.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
