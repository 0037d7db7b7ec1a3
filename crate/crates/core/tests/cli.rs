use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use std::f64::consts::PI;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wkbwave(cmd: &str, config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wkbwave"))
        .args([
            cmd,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env_remove("WKBWAVE_THREADS")
        .output()
        .unwrap()
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Numeric rows of a CSV file, header skipped.
fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|s| s.parse::<f64>().unwrap()).collect())
        .collect()
}

fn centroid(rows: &[Vec<f64>]) -> f64 {
    let weights: Vec<f64> = rows.iter().map(|r| r[1] * r[1] + r[2] * r[2]).collect();
    rows.iter().zip(&weights).map(|(r, w)| r[0] * w).sum::<f64>() / weights.iter().sum::<f64>()
}

fn relative_l2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2))
        .sum();
    let den: f64 = b.iter().map(|y| y[1] * y[1] + y[2] * y[2]).sum();
    (num / den).sqrt()
}

const SMOOTH_PACKET: &str = r#"
[medium.eps2]
kind = "lorentzian"
base = 1.0
a = 0.1
gamma = 5.0

[zgrid]
z_min = -40.0
z_max = 40.0
n = 1601

[omega_grid]
spacing = "uniform"
min = 0.5
max = 3.5
n = 300

[propagate]
method = "METHOD"
boundary = "dirichlet"
times = [0.0, 10.0]
initial = { kind = "gaussian", sigma = 4.0, z0 = -15.0, k0 = 1.5, direction = "right" }
"#;

#[test]
fn vacuum_periodic_eigenvalues_follow_the_mode_pattern() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&wkbwave(
        "eigen",
        &configs().join("eigen_vacuum_periodic.toml"),
        dir.path(),
    ));
    let rows = read_csv(&dir.path().join("eigenvalues.csv"));
    assert_eq!(rows.len(), 5);
    let (length, unknowns) = (2.0 * PI, 512.0);
    for row in &rows {
        let index = row[0] as usize;
        let m = index.div_ceil(2) as f64;
        let continuum = (2.0 * PI * m / length).powi(2);
        assert!(
            (row[1] - continuum).abs() <= (PI * m / unknowns).powi(2) * continuum.max(1e-12) + 1e-9,
            "{row:?}"
        );
    }
    for i in 0..5 {
        assert!(dir.path().join(format!("eigvec_{i}.csv")).exists());
    }
}

#[test]
fn missing_medium_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.toml",
        "[zgrid]\nz_min = 0.0\nz_max = 1.0\nn = 64\n\n[eigen]\nk = 2\n",
    );
    let output = wkbwave("eigen", &config, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("medium"));
}

#[test]
fn unknown_keys_and_missing_blocks_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(
        dir.path(),
        "typo.toml",
        "[medium]\nepsilon = 2.0\n\n[zgrid]\nz_min = 0.0\nz_max = 1.0\nn = 64\n",
    );
    let output = wkbwave("validate", &typo, &dir.path().join("a"));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("epsilon"));

    let no_eigen = write_config(
        dir.path(),
        "plain.toml",
        "[medium]\n\n[zgrid]\nz_min = 0.0\nz_max = 1.0\nn = 64\n",
    );
    let output = wkbwave("eigen", &no_eigen, &dir.path().join("b"));
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("[eigen]"));
}

#[test]
fn unwritable_output_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    let output = wkbwave("validate", &configs().join("validate_cauchy.toml"), &blocker);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn lorentzian_eigen_writes_the_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&wkbwave("eigen", &configs().join("eigen_lorentzian.toml"), dir.path()));
    let rows = read_csv(&dir.path().join("eigenvalues.csv"));
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert!((row[2] - 1.6).abs() < 0.1, "{row:?}");
        assert!(row[3] > 100.0);
        let vector = read_csv(&dir.path().join(format!("eigvec_{}.csv", row[0] as usize)));
        assert_eq!(vector.len(), 4096);
    }
}

#[test]
fn spectral_gaussian_moves_by_ct() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&wkbwave(
        "propagate",
        &configs().join("propagate_gaussian_spectral.toml"),
        dir.path(),
    ));
    let start = read_csv(&dir.path().join("field_t0.csv"));
    let later = read_csv(&dir.path().join("field_t10.csv"));
    for row in &start {
        let expected = (-((row[0] + 10.0) / 2.0).powi(2) / 2.0).exp();
        assert!((row[1] - expected).abs() < 1e-10 && row[2].abs() < 1e-10);
    }
    let shift = centroid(&later) - centroid(&start);
    assert!((shift - 10.0).abs() < 0.1, "shift {shift}");
    let energy = read_csv(&dir.path().join("energy.csv"));
    assert!((energy[1][1] - energy[0][1]).abs() <= 1e-10 * energy[0][1]);
}

#[test]
fn wkb_and_spectral_fields_agree_in_a_smooth_medium() {
    let dir = tempfile::tempdir().unwrap();
    let mut fields = Vec::new();
    for method in ["wkb", "spectral"] {
        let config = write_config(
            dir.path(),
            &format!("{method}.toml"),
            &SMOOTH_PACKET.replace("METHOD", method),
        );
        let out = dir.path().join(method);
        assert_success(&wkbwave("propagate", &config, &out));
        fields.push((
            read_csv(&out.join("field_t0.csv")),
            read_csv(&out.join("field_t10.csv")),
        ));
    }
    let (wkb, spectral) = (&fields[0], &fields[1]);
    assert!(
        relative_l2(&wkb.1, &spectral.1) < 1e-2,
        "{}",
        relative_l2(&wkb.1, &spectral.1)
    );

    // At t = 0 the WKB superposition reproduces the input to round-trip accuracy.
    assert!(relative_l2(&wkb.0, &spectral.0) < 1e-3);
    let modes = read_csv(&dir.path().join("wkb/modes.csv"));
    assert_eq!(modes.len(), 300);
}

#[test]
fn lorentz_desk_config_recovers_the_decay_rate() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&wkbwave("lorentz", &configs().join("lorentz_desk.toml"), dir.path()));
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    let rate = fit["decay_rate"].as_f64().unwrap();
    assert!((rate - 5.0).abs() < 0.5, "decay rate {rate}");
    let radius = fit["exclusion_radius"].as_f64().unwrap();
    assert_eq!(fit["omega_star"].as_f64(), Some(2.0));

    let analytic = read_csv(&dir.path().join("bracket_analytic.csv"));
    assert_eq!(analytic.len(), 201);
    let mut excluded = 0;
    for row in &analytic {
        let flagged = row[5] == 1.0;
        assert_eq!(flagged, row[1].abs() < radius, "{row:?}");
        assert_eq!(row[4], 2.0);
        if flagged {
            excluded += 1;
            assert!(row[2].is_nan() && row[3].is_nan());
        }
    }
    assert!(excluded > 0);
    let numeric = read_csv(&dir.path().join("bracket_numeric.csv"));
    assert_eq!(numeric.len(), 201);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = configs().join("propagate_packet_wkb.toml");
    assert_success(&wkbwave("propagate", &config, &a));
    assert_success(&wkbwave("propagate", &config, &b));
    for name in [
        "modes.csv",
        "field_t0.csv",
        "field_t5.csv",
        "field_t10.csv",
        "validity.csv",
        "resolved_config.toml",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn resolved_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("z,value\n");
    for i in 0..401 {
        let z = -20.0 + 0.1 * i as f64;
        table.push_str(&format!("{z},{}\n", 1.0 + 0.2 / (1.0 + z * z / 25.0)));
    }
    fs::write(dir.path().join("eps2.csv"), table).unwrap();
    let config = write_config(
        dir.path(),
        "tabulated.toml",
        "[medium.eps2]\nkind = \"tabulated\"\nfile = \"eps2.csv\"\n\n[zgrid]\nz_min = -20.0\nz_max = 20.0\nn = 401\n\n[eigen]\nk = 3\n",
    );
    let first = dir.path().join("first");
    assert_success(&wkbwave("eigen", &config, &first));

    let elsewhere = tempfile::tempdir().unwrap();
    let copy = elsewhere.path().join("resolved.toml");
    fs::copy(first.join("resolved_config.toml"), &copy).unwrap();
    let second = elsewhere.path().join("second");
    assert_success(&wkbwave("eigen", &copy, &second));
    for name in [
        "eigenvalues.csv",
        "eigvec_0.csv",
        "eigvec_2.csv",
        "resolved_config.toml",
    ] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn thread_cap_is_validated_and_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("propagate_packet_wkb.toml");
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_wkbwave"))
            .args([
                "propagate",
                "--config",
                config.to_str().unwrap(),
                "--out",
                dir.path().join(out).to_str().unwrap(),
            ])
            .env("WKBWAVE_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_success(&run("1", "one"));
    assert_success(&run("3", "three"));
    for name in ["modes.csv", "field_t10.csv"] {
        assert_eq!(
            fs::read(dir.path().join("one").join(name)).unwrap(),
            fs::read(dir.path().join("three").join(name)).unwrap()
        );
    }
    for bad in ["0", "many"] {
        let output = run(bad, "bad");
        assert_eq!(output.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&output.stderr).contains("WKBWAVE_THREADS"));
    }
}

#[test]
fn validate_reports_monotone_window() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&wkbwave(
        "validate",
        &configs().join("validate_cauchy.toml"),
        dir.path(),
    ));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["monotone"], serde_json::Value::Bool(true));
    let lhs = report["max_validity_lhs"].as_f64().unwrap();
    assert!(lhs > 0.0 && lhs < 1e-2);
}
