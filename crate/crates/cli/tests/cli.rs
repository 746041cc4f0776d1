use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spdc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let o = spdc(args, dir);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        Some(s.parse().unwrap())
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Wavelength extrema of the e- and o-branches in a tuning-curve CSV.
fn branch_extrema(csv: &str) -> (f64, f64) {
    let r = rows(csv);
    let with = |col: usize| -> Vec<f64> {
        r.iter().filter(|row| num(&row[col]).is_some()).map(|row| num(&row[0]).unwrap()).collect()
    };
    let e_min = with(1).into_iter().fold(f64::INFINITY, f64::min);
    let o_max = with(2).into_iter().fold(f64::NEG_INFINITY, f64::max);
    for row in &r {
        // Beams leave on opposite sides of the pump.
        if let Some(a) = num(&row[1]) {
            assert!(a > 0.0);
        }
        if let Some(a) = num(&row[2]) {
            assert!(a < 0.0);
        }
    }
    (e_min, o_max)
}

const FINE_GRID: [&str; 6] = [
    "--set",
    "tuning_min_nm=700",
    "--set",
    "tuning_max_nm=704.4",
    "--set",
    "tuning_points=221",
];

#[test]
fn beamlike_tuning_curve_is_tangent_at_degeneracy() {
    let dir = tempfile::tempdir().unwrap();
    let theta = spdc_core::PhaseMatcher::default().beamlike_angle(0.3511, 0.7022).unwrap().to_degrees();
    let set = format!("theta_p_deg={theta}");
    let mut args = vec!["tuning-curve", "--set", set.as_str()];
    args.extend(FINE_GRID);
    let out = ok(&args, dir.path());
    assert!(out.starts_with("wavelength_nm,angle_e_ext_deg,angle_o_ext_deg,angle_e_int_deg,angle_o_int_deg\n"));
    let (e_min, o_max) = branch_extrema(&out);
    assert!((e_min - 702.2).abs() <= 0.2, "{e_min}");
    assert!((o_max - 702.2).abs() <= 0.2, "{o_max}");
}

#[test]
fn nominal_angle_curve_brackets_degeneracy() {
    // At the rounded 48.3° the branches stop just short of 702.2 nm on either side.
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["tuning-curve"];
    args.extend(FINE_GRID);
    let (e_min, o_max) = branch_extrema(&ok(&args, dir.path()));
    assert!(o_max < 702.2 && 702.2 < e_min);
    assert!(e_min - o_max < 1.5, "{o_max} .. {e_min}");
}

#[test]
fn collinear_curve_passes_through_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        &[
            "tuning-curve",
            "--set",
            "theta_p_deg=49.2",
            "--set",
            "tuning_min_nm=702.2",
            "--set",
            "tuning_max_nm=702.3",
        ],
        dir.path(),
    );
    let r = rows(&out);
    let at_deg: Vec<f64> = r
        .iter()
        .filter(|row| row[0] == "702.200000")
        .flat_map(|row| [num(&row[1]), num(&row[2])])
        .flatten()
        .collect();
    assert!(at_deg.iter().any(|a| a.abs() < 0.1), "{at_deg:?}");
}

#[test]
fn two_point_range_gives_rows_for_both_wavelengths() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        &["tuning-curve", "--set", "tuning_min_nm=695", "--set", "tuning_max_nm=710", "--set", "tuning_points=2"],
        dir.path(),
    );
    let r = rows(&out);
    let mut wl: Vec<&str> = r.iter().map(|row| row[0].as_str()).collect();
    wl.dedup();
    assert_eq!(wl, vec!["695.000000", "710.000000"]);
    // One row per emission direction in the optic-axis plane.
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row.len() == 5));
}

#[test]
fn flat_filter_dip_sits_at_half_dl() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    ok(
        &[
            "hom-scan",
            "--set",
            "filter1_shape=flat",
            "--set",
            "filter2_shape=flat",
            "--set",
            "filter1_fwhm_nm=20",
            "--set",
            "filter2_fwhm_nm=20",
            "--set",
            "tau_step_ps=0.002",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    let side = read_json(&dir.path().join("scan.json"));
    let dl = side["dl_ps"].as_f64().unwrap();
    let dip = side["dip_tau_ps"].as_f64().unwrap();
    assert!((dip + dl / 2.0).abs() <= 0.002 + 1e-12, "{dip} vs {}", -dl / 2.0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("tau_ps,rate_normalized\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn narrow_gaussian_filters_give_gaussian_dip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    ok(&["hom-scan", "--out", out.to_str().unwrap()], dir.path());
    let side = read_json(&dir.path().join("g.json"));
    let fit = &side["gaussian_fit"];
    assert!(fit["residual_rms"].as_f64().unwrap() < 0.02);
    assert_eq!(fit["gaussian_shaped"], Value::Bool(true));
}

#[test]
fn single_delay_scan_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["hom-scan", "--set", "tau_min_ps=-0.1", "--set", "tau_max_ps=-0.1"], dir.path());
    assert_eq!(rows(&out).len(), 1);
}

#[test]
fn polarization_correlation_extrema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pol.csv");
    ok(&["pol-correlation", "--set", "overlap=1", "--out", out.to_str().unwrap()], dir.path());
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    let pts: Vec<(f64, f64)> = r.iter().map(|row| (num(&row[0]).unwrap(), num(&row[1]).unwrap())).collect();
    let min = pts.iter().cloned().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let max = pts.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    assert_eq!(min.0, -45.0);
    assert_eq!(max.0, 45.0);
    let side = read_json(&dir.path().join("pol.json"));
    let vis = side["sin2_fit"]["visibility"].as_f64().unwrap();
    assert!((vis - 1.0).abs() < 1e-9, "{vis}");
    assert!((side["sin2_fit"]["min_angle_deg"].as_f64().unwrap() + 45.0).abs() < 1e-9);
}

#[test]
fn equal_analyzers_never_coincide_for_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["pol-correlation", "--track", "--set", "overlap=1"], dir.path());
    for row in rows(&out) {
        assert!(num(&row[1]).unwrap().abs() < 1e-12);
    }
}

#[test]
fn state_reports() {
    let dir = tempfile::tempdir().unwrap();
    let hom: Value = serde_json::from_str(&ok(&["state", "--set", "scheme=hom-dip", "--set", "overlap=1"], dir.path())).unwrap();
    assert!(hom["probabilities"]["coincidence"].as_f64().unwrap() < 1e-12);
    assert!((hom["probabilities"]["both_in_c"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let singlet: Value = serde_json::from_str(&ok(&["state", "--set", "overlap=1"], dir.path())).unwrap();
    let f = singlet["density_matrix"]["bell_fidelities"]["psi-"].as_f64().unwrap();
    assert!((f - 1.0).abs() < 1e-12);

    let two: Value = serde_json::from_str(&ok(
        &["state", "--set", "scheme=two-crystal", "--set", "mirror_t2=0.7071067811865476"],
        dir.path(),
    ))
    .unwrap();
    let c = two["density_matrix"]["concurrence"].as_f64().unwrap();
    assert!((c - 2.0 * 2.0_f64.sqrt() / 3.0).abs() < 1e-7);

    let q: Value = serde_json::from_str(&ok(&["state", "--set", "scheme=qutrit"], dir.path())).unwrap();
    assert!((q["weights"]["HV"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn counts_are_seeded_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&["counts", "--seed", "11"], dir.path());
    let b = ok(&["counts", "--seed", "11"], dir.path());
    let c = ok(&["counts", "--seed", "12"], dir.path());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.contains("0.250250000"));
    let out = dir.path().join("counts.json");
    ok(&["counts", "--out", out.to_str().unwrap()], dir.path());
    assert!(read_json(&out)["counts"]["pairs"].as_u64().unwrap() > 0);
}

#[test]
fn reruns_are_byte_identical_and_leave_no_temp_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let args = ["hom-scan", "--set", "tau_step_ps=0.01", "--out", out.to_str().unwrap()];
    ok(&args, dir.path());
    let first = std::fs::read(&out).unwrap();
    ok(&args, dir.path());
    assert_eq!(first, std::fs::read(&out).unwrap());
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"tau_min_ps": -0.2, "tau_max_ps": -0.2, "out": "from_config.csv"}"#).unwrap();
    ok(&["hom-scan", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(dir.path().join("from_config.csv").exists());
    // The command-line path wins over the file.
    ok(&["hom-scan", "--config", cfg.to_str().unwrap(), "--out", "flag.csv"], dir.path());
    assert!(dir.path().join("flag.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(spdc(&["counts", "--set", "nonsense=1"], dir.path()).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(spdc(&["counts", "--config", bad.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(spdc(&["counts", "--config", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(spdc(&["hom-scan", "--set", "pump_wavelength_nm=500"], dir.path()).status.code(), Some(2));
    assert_eq!(spdc(&["counts", "--set", "arm1_detector=1.5"], dir.path()).status.code(), Some(2));
    // Steep pump angle: the emission cone leaves the solver's search window.
    let o = spdc(&["tuning-curve", "--set", "theta_p_deg=80"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nm"));
    assert_eq!(spdc(&["no-such-command"], dir.path()).status.code(), Some(2));
}
