use std::path::Path;
use std::process::{Command, Output};

use squeeze_cli::format::read_csv;
use squeeze_core::fock::density_matrix;
use squeeze_core::GaussianState;

fn squeeze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeeze"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn squeeze_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--output-dir", dir.to_str().unwrap()]);
    squeeze(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn meta_f64(path: &Path, key: &str) -> f64 {
    read_csv(path).unwrap().meta(key).unwrap().parse().unwrap()
}

#[test]
fn analyze_preset_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(dir.path(), &["analyze", "--preset", "paper"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("vacuum admixture = 4.80%"),
        "{}",
        stdout(&o)
    );
    let path = dir.path().join("analyze.csv");
    let admixture = meta_f64(&path, "vacuum_admixture");
    assert!((admixture - 0.048).abs() < 0.002);
    assert_eq!(read_csv(&path).unwrap().rows.len(), 3);
}

#[test]
fn analyze_rejects_vacuum_and_accepts_pure_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(dir.path(), &["analyze", "--pair=0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pair"));

    let o = squeeze_in(
        dir.path(),
        &["analyze", "--pair=-3.05,3.05", "--format", "json"],
    );
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analyze.json")).unwrap())
            .unwrap();
    assert!((report["eta_gamma"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((report["pairs"][0]["purity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn fock_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(
        dir.path(),
        &["fock", "--state=-6.2,6.7", "--truncation", "40"],
    );
    assert!(o.status.success());
    let rho = density_matrix(&GaussianState::from_db(-6.2, 6.7).unwrap(), 40);
    let t = read_csv(&dir.path().join("fock_density.csv")).unwrap();
    let (rows, cols, vals) = (
        t.column("row").unwrap(),
        t.column("col").unwrap(),
        t.column("value").unwrap(),
    );
    assert_eq!(vals.len(), rho.non_zero().count());
    for ((r, c), v) in rows.iter().zip(&cols).zip(&vals) {
        let exact = rho.get(*r as usize, *c as usize);
        assert!((v - exact).abs() <= 1e-12 * exact.abs().max(1e-300));
    }
    let pn = read_csv(&dir.path().join("fock_pn.csv")).unwrap();
    assert_eq!(pn.column("probability").unwrap(), rho.diagonal());
    assert_eq!(pn.meta("truncation"), Some("40"));
}

#[test]
fn fock_vacuum_has_one_entry() {
    let dir = tempfile::tempdir().unwrap();
    assert!(squeeze_in(
        dir.path(),
        &[
            "fock",
            "--state=0,0",
            "--truncation",
            "20",
            "--format",
            "json"
        ]
    )
    .status
    .success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fock.json")).unwrap())
            .unwrap();
    assert_eq!(report["entries"], serde_json::json!([[0, 0, 1.0]]));
    assert_eq!(report["trace_deficit"], serde_json::json!(0.0));
}

#[test]
fn fock_preset_regenerates_tables_and_passes_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(
        dir.path(),
        &[
            "fock",
            "--preset",
            "paper",
            "--renormalize",
            "--keep",
            "10",
            "--verify-oracle",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 1..=3 {
        let path = dir.path().join(format!("fock_{i}_density.csv"));
        assert!(meta_f64(&path, "table_max_abs_diff") < 5e-5);
        assert!(meta_f64(&path, "oracle_max_abs_diff") < 1e-4);
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("wigner.json");
    std::fs::write(
        &config,
        r#"{"state": [-11.5, 16.0], "points": 31, "convention": "quarter", "stem": "w"}"#,
    )
    .unwrap();
    let o = squeeze_in(
        dir.path(),
        &[
            "wigner",
            "--config",
            config.to_str().unwrap(),
            "--points",
            "201",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read_csv(&dir.path().join("w_grid.csv")).unwrap();
    assert_eq!(grid.rows.len(), 201 * 201);
    assert_eq!(grid.meta("convention"), Some("quarter"));
    let norm: f64 = grid.meta("normalization").unwrap().parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-6);
    let marg = dir.path().join("w_marginals.csv");
    let v1: f64 = read_csv(&marg)
        .unwrap()
        .meta("v1")
        .unwrap()
        .parse()
        .unwrap();
    assert!((meta_f64(&marg, "marginal_variance_x1") / v1 - 1.0).abs() < 1e-3);
}

#[test]
fn wigner_vacuum_peak() {
    let dir = tempfile::tempdir().unwrap();
    assert!(squeeze_in(
        dir.path(),
        &[
            "wigner",
            "--state=0,0",
            "--convention",
            "quarter",
            "--points",
            "101"
        ]
    )
    .status
    .success());
    let grid = read_csv(&dir.path().join("wigner_grid.csv")).unwrap();
    let w = grid.column("w").unwrap();
    let peak = w.iter().cloned().fold(0.0, f64::max);
    assert!((peak - 2.0 / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn degenerate_grid_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(dir.path(), &["wigner", "--state=-3,3", "--points", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid"));
}

#[test]
fn spectrum_eval_bandwidth_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(dir.path(), &["spectrum", "bandwidth", "--preset", "paper"]);
    assert!(o.status.success());
    let t = read_csv(&dir.path().join("bandwidth.csv")).unwrap();
    let bw = t.column("value").unwrap()[0];
    assert!((bw / 170e6 - 1.0).abs() < 0.05);

    let o = squeeze_in(
        dir.path(),
        &[
            "spectrum",
            "eval",
            "--preset",
            "paper",
            "--f-min-mhz",
            "5",
            "--f-max-mhz",
            "100",
            "--points",
            "20",
            "--stem",
            "data",
        ],
    );
    assert!(o.status.success());
    let o = squeeze_in(
        dir.path(),
        &[
            "spectrum",
            "fit",
            "--data",
            dir.path().join("data.csv").to_str().unwrap(),
            "--pump-ratio",
            "0.4",
            "--eta-gamma",
            "0.9",
            "--kappa",
            "8e8",
            "--format",
            "json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
            .unwrap();
    assert!((report["model"]["pump_ratio"].as_f64().unwrap() - 0.535).abs() < 1e-6);
    assert_eq!(report["status"], "converged");
    assert_eq!(report["ill_conditioned"], false);
}

#[test]
fn non_monotone_frequencies_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(
        &data,
        "f_hz,v1_db,v2_db\n2e6,-10,15\n1e6,-10,15\n3e6,-9,14\n",
    )
    .unwrap();
    let o = squeeze_in(
        dir.path(),
        &["spectrum", "fit", "--data", data.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("data"));
}

#[test]
fn missing_input_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(
        dir.path(),
        &["spectrum", "fit", "--data", "/nonexistent/spectrum.csv"],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn insufficient_truncation_is_a_convergence_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = squeeze_in(
        dir.path(),
        &[
            "spectrum",
            "rate",
            "--preset",
            "paper",
            "--truncation",
            "10",
            "--half-fsr-ghz",
            "0.01",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn simulate_round_trip_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"{"state_db": [-2.9, 2.9], "seed": 5,
            "phase_schedule": [{"theta": 0.0, "samples": 200000}, {"theta": 1.5707963267948966, "samples": 200000}],
            "sweep": {"rotation_rate": 2e-6, "total_samples": 1570797, "window": 20000}}"#,
    )
    .unwrap();
    let o = squeeze_in(
        dir.path(),
        &["simulate", "--config", config.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let est = read_csv(&dir.path().join("simulate_estimates.csv")).unwrap();
    let (v, se, truth) = (
        est.column("variance").unwrap(),
        est.column("std_error").unwrap(),
        est.column("expected_variance").unwrap(),
    );
    for i in 0..2 {
        assert!(
            (v[i] - truth[i]).abs() <= 3.0 * se[i],
            "{} vs {}",
            v[i],
            truth[i]
        );
    }

    let trace = read_csv(&dir.path().join("simulate_trace.csv")).unwrap();
    assert_eq!(
        trace.header,
        ["segment_index", "theta_radians", "sample_value"]
    );
    assert_eq!(trace.rows.len(), 400_000);

    let sweep = read_csv(&dir.path().join("simulate_sweep.csv")).unwrap();
    let sv = sweep.column("variance").unwrap();
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    assert!((10.0 * min.log10() + 2.9).abs() < 0.1, "{min}");
    assert!((10.0 * max.log10() - 2.9).abs() < 0.1, "{max}");
}

#[test]
fn simulate_seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"{"state_db": [-3, 3], "seed": 1, "phase_schedule": [{"theta": 0.5, "samples": 100}]}"#,
    )
    .unwrap();
    let run = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec!["simulate", "--config", config.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(squeeze_in(&out, &args).status.success());
        std::fs::read(out.join("simulate_trace.csv")).unwrap()
    };
    let base = run("a", &[]);
    assert_eq!(run("b", &["--seed", "1"]), base);
    assert_ne!(run("c", &["--seed", "2"]), base);
}

#[test]
fn bad_config_schema_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"{"state_db": [-3, 3], "seed": 1, "phase_schedule": [], "bogus": 1}"#,
    )
    .unwrap();
    let o = squeeze_in(
        dir.path(),
        &["simulate", "--config", config.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn provenance_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        squeeze_in(dir.path(), &["spectrum", "bandwidth", "--preset", "paper"])
            .status
            .success()
    );
    let plain = std::fs::read_to_string(dir.path().join("bandwidth.csv")).unwrap();
    assert!(!plain.contains("provenance"));
    assert!(squeeze_in(
        dir.path(),
        &["--provenance", "spectrum", "bandwidth", "--preset", "paper"]
    )
    .status
    .success());
    let tagged = std::fs::read_to_string(dir.path().join("bandwidth.csv")).unwrap();
    assert!(tagged.contains("# provenance.version = "));
    assert!(tagged.contains("# provenance.unix_time = "));
}
