use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use spdc_core::biphoton::{gaussian_filter_shape_check, hom_scan, jsa_cw, DelayScan};
use spdc_core::counting::{accidental_rate, expected_ratio, simulate_counts};
use spdc_core::numerics::solve_dense;
use spdc_core::phasematch::{PhaseMatcher, WalkoffResult};
use spdc_core::polstate::{
    hom_dip_state, pbs_combined_state, qutrit_state, two_crystal_bell, ModeLabel, Pol, PolarizationDensityMatrix,
    TwoCrystalSettings, TwoPhotonState,
};
use spdc_core::{Complex, SpdcError};

use crate::config::{RunConfig, Scheme};
use crate::error::CliError;
use crate::output::{csv, csv_field, sig9, write_atomic};

const PORT_C: u8 = 3;
const PORT_D: u8 = 4;

/// Main artifact plus optional JSON sidecar.
pub struct Artifact {
    pub body: String,
    pub sidecar: Option<Value>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let p = out.with_extension("json");
    if p == out {
        let mut s = out.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    } else {
        p
    }
}

/// Writes the artifact to `out` (atomically) or to stdout, with the sidecar
/// next to it or on stderr.
pub fn emit(artifact: &Artifact, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_atomic(path, &artifact.body)?;
            if let Some(side) = &artifact.sidecar {
                write_atomic(&sidecar_path(path), &(serde_json::to_string_pretty(side)? + "\n"))?;
            }
        }
        None => {
            print!("{}", artifact.body);
            if let Some(side) = &artifact.sidecar {
                eprintln!("{}", serde_json::to_string_pretty(side)?);
            }
        }
    }
    Ok(())
}

fn walkoff(cfg: &RunConfig) -> Result<WalkoffResult<f64>, CliError> {
    let crystal = cfg.crystal()?;
    PhaseMatcher::default()
        .walkoff(&crystal, cfg.degenerate_um())
        .map_err(|e| CliError::at("group-delay mismatch", e))
}

fn scan(cfg: &RunConfig, w: &WalkoffResult<f64>, tau: &[f64]) -> Result<DelayScan<f64>, CliError> {
    let jsa = jsa_cw(w)?;
    let (f1, f2) = cfg.filters()?;
    hom_scan(&jsa, &f1, &f2, tau).map_err(|e| match e {
        SpdcError::EmptyPassband => CliError::Config("filters block the whole down-conversion spectrum".into()),
        other => CliError::at("delay scan", other),
    })
}

/// Delay and two-photon overlap used by the polarization commands.
fn resolve_overlap(cfg: &RunConfig) -> Result<(Option<f64>, f64), CliError> {
    if let Some(v) = cfg.overlap {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config(format!("overlap must be in [0, 1], got {v}")));
        }
        return Ok((cfg.tau_ps, v));
    }
    let w = walkoff(cfg)?;
    let tau = cfg.tau_ps.unwrap_or(-w.dl_ps / 2.0);
    let r = scan(cfg, &w, &[tau])?.rate[0];
    let v = 1.0 - r;
    // Rates up to 1 + 1e-9 are quadrature noise on the unit baseline.
    let v = if (-1e-9..0.0).contains(&v) { 0.0 } else { v };
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::Config(format!(
            "delay scan gives overlap {v} at τ = {tau} ps (hard-edged filters ring above the baseline); set `overlap` explicitly"
        )));
    }
    Ok((Some(tau), v))
}

pub fn tuning_curve(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let crystal = cfg.crystal()?;
    let samples = PhaseMatcher::default().tuning_curve(
        &crystal,
        (cfg.tuning_min_nm * 1e-3, cfg.tuning_max_nm * 1e-3),
        cfg.tuning_points,
    )?;
    let mut rows = Vec::new();
    for s in samples {
        let nm = s.wavelength * 1e3;
        let take = |r: Result<Vec<_>, SpdcError>| match r {
            Ok(v) => Ok(v),
            Err(SpdcError::NoPhaseMatch(_)) => Ok(Vec::new()),
            Err(e) => Err(CliError::at(format!("tuning curve at {} nm", sig9(nm)), e)),
        };
        let e = take(s.e_branch)?;
        let o = take(s.o_branch)?;
        for k in 0..e.len().max(o.len()).max(1) {
            let ep = e.get(k);
            let op = o.get(k);
            rows.push(vec![
                sig9(nm),
                csv_field(ep.map(|p| p.alpha_e_external.to_degrees())),
                csv_field(op.map(|p| p.alpha_o_external.to_degrees())),
                csv_field(ep.map(|p| p.alpha_e_internal.to_degrees())),
                csv_field(op.map(|p| p.alpha_o_internal.to_degrees())),
            ]);
        }
    }
    Ok(Artifact {
        body: csv(
            &["wavelength_nm", "angle_e_ext_deg", "angle_o_ext_deg", "angle_e_int_deg", "angle_o_int_deg"],
            &rows,
        ),
        sidecar: None,
    })
}

pub fn hom_scan_cmd(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let w = walkoff(cfg)?;
    let taus = cfg.tau_grid();
    let s = scan(cfg, &w, &taus)?;
    let rows: Vec<Vec<String>> = s.tau.iter().zip(&s.rate).map(|(t, r)| vec![sig9(*t), sig9(*r)]).collect();
    let (dip_tau, dip_rate) = s.minimum().expect("scan has at least one delay");
    let fit = match gaussian_filter_shape_check(&s) {
        Ok(f) => json!({
            "visibility": f.visibility,
            "center_ps": f.center,
            "width_ps": f.width,
            "residual_rms": f.residual_rms,
            "gaussian_shaped": f.meets_contract(w.dl_ps),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let sidecar = json!({
        "dl_ps": w.dl_ps,
        "d_ps_per_mm": w.d_ps_per_mm,
        "expected_dip_tau_ps": -w.dl_ps / 2.0,
        "dip_tau_ps": dip_tau,
        "dip_rate": dip_rate,
        "tau_step_ps": cfg.tau_step_ps,
        "points": s.len(),
        "gaussian_fit": fit,
    });
    Ok(Artifact {
        body: csv(&["tau_ps", "rate_normalized"], &rows),
        sidecar: Some(sidecar),
    })
}

/// Least-squares fit of `a + b cos 2θ + c sin 2θ` (θ in radians).
fn sin2_fit(theta: &[f64], p: &[f64]) -> Option<[f64; 3]> {
    let mut ata = vec![0.0; 9];
    let mut atb = vec![0.0; 3];
    for (&t, &y) in theta.iter().zip(p) {
        let row = [1.0, (2.0 * t).cos(), (2.0 * t).sin()];
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i * 3 + j] += row[i] * row[j];
            }
        }
    }
    solve_dense(ata, atb).map(|v| [v[0], v[1], v[2]])
}

pub fn pol_correlation(cfg: &RunConfig, track: bool) -> Result<Artifact, CliError> {
    let (tau, overlap) = resolve_overlap(cfg)?;
    let hwp = cfg.hwp_deg.unwrap_or(0.0);
    let (post, sector) = hom_dip_state(hwp.to_radians(), overlap)?.postselect_coincidence(PORT_C, PORT_D)?;
    let a2 = cfg.analyzer2_grid();
    let mut probs = Vec::with_capacity(a2.len());
    for &deg in &a2 {
        let a1 = if track { deg } else { cfg.analyzer1_deg };
        probs.push(post.coincidence_probability(PORT_C, PORT_D, a1.to_radians(), deg.to_radians())?);
    }
    let rows: Vec<Vec<String>> = a2.iter().zip(&probs).map(|(a, p)| vec![sig9(*a), sig9(*p)]).collect();
    let theta: Vec<f64> = a2.iter().map(|d| d.to_radians()).collect();
    let fit = match sin2_fit(&theta, &probs) {
        Some([a, b, c]) if a.abs() > 1e-15 && a2.len() >= 3 => {
            let amplitude = b.hypot(c);
            // Minimum where cos(2θ − φ) = −1, φ = atan2(c, b).
            let min_deg = ((c.atan2(b) + std::f64::consts::PI) / 2.0).to_degrees();
            let min_deg = (min_deg + 90.0).rem_euclid(180.0) - 90.0;
            json!({ "offset": a, "amplitude": amplitude, "visibility": amplitude / a, "min_angle_deg": min_deg })
        }
        _ => json!({ "error": "curve is flat or too short to fit" }),
    };
    let sidecar = json!({
        "analyzer1_deg": if track { Value::String("tracks analyzer2".into()) } else { json!(cfg.analyzer1_deg) },
        "hwp_deg": hwp,
        "tau_ps": tau,
        "overlap": overlap,
        "coincidence_sector_probability": sector,
        "sin2_fit": fit,
    });
    Ok(Artifact {
        body: csv(&["a2_deg", "coincidence_probability"], &rows),
        sidecar: Some(sidecar),
    })
}

#[derive(Serialize)]
struct Complexish {
    re: f64,
    im: f64,
}

fn mode_name(m: ModeLabel) -> String {
    format!("{}{}", m.path, if m.pol == Pol::H { "H" } else { "V" })
}

fn density_json(rho: &PolarizationDensityMatrix<f64>) -> Value {
    let re: Vec<Vec<f64>> = rho.elements.iter().map(|r| r.iter().map(|x| x.re).collect()).collect();
    let im: Vec<Vec<f64>> = rho.elements.iter().map(|r| r.iter().map(|x| x.im).collect()).collect();
    let f = rho.bell_fidelities();
    json!({
        "basis": ["HH", "HV", "VH", "VV"],
        "re": re,
        "im": im,
        "trace": rho.trace(),
        "purity": rho.purity(),
        "min_eigenvalue": rho.min_eigenvalue(),
        "concurrence": rho.concurrence(),
        "bell_fidelities": { "phi+": f[0], "phi-": f[1], "psi+": f[2], "psi-": f[3] },
    })
}

fn terms_json(s: &TwoPhotonState<f64>) -> Value {
    Value::Array(
        s.bosonic_terms(1e-14)
            .into_iter()
            .map(|(m, n, a)| json!({ "modes": [mode_name(m), mode_name(n)], "re": a.re, "im": a.im }))
            .collect(),
    )
}

fn same_path_probability(s: &TwoPhotonState<f64>, path: u8) -> f64 {
    let h = ModeLabel::new(path, Pol::H);
    let v = ModeLabel::new(path, Pol::V);
    s.probability(h, h) + s.probability(h, v) + s.probability(v, v)
}

pub fn state(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let report = match cfg.scheme {
        Scheme::HomDip => {
            let (tau, overlap) = resolve_overlap(cfg)?;
            let hwp = cfg.hwp_deg.unwrap_or(45.0);
            let s = hom_dip_state(hwp.to_radians(), overlap)?;
            json!({
                "scheme": "hom-dip",
                "hwp_deg": hwp,
                "tau_ps": tau,
                "overlap": overlap,
                "norm": s.norm(),
                "amplitudes": terms_json(&s),
                "probabilities": {
                    "coincidence": s.coincidence_sector_probability(PORT_C, PORT_D)?,
                    "both_in_c": same_path_probability(&s, PORT_C),
                    "both_in_d": same_path_probability(&s, PORT_D),
                },
            })
        }
        Scheme::Singlet => {
            let (tau, overlap) = resolve_overlap(cfg)?;
            let hwp = cfg.hwp_deg.unwrap_or(0.0);
            let s = hom_dip_state(hwp.to_radians(), overlap)?;
            let (rho, p) = s.polarization_density_matrix(PORT_C, PORT_D)?;
            json!({
                "scheme": "singlet",
                "hwp_deg": hwp,
                "tau_ps": tau,
                "overlap": overlap,
                "coincidence_sector_probability": p,
                "density_matrix": density_json(&rho),
            })
        }
        Scheme::Qutrit => {
            let s = pbs_combined_state(cfg.qutrit_hwp_deg.map(f64::to_radians))?;
            let q = qutrit_state(&s)?;
            let c = |z: Complex<f64>| Complexish { re: z.re, im: z.im };
            json!({
                "scheme": "qutrit",
                "hwp_after_pbs_deg": cfg.qutrit_hwp_deg,
                "path": q.path,
                "norm": s.norm(),
                "amplitudes": { "2H": c(q.two_h), "HV": c(q.hv), "2V": c(q.two_v) },
                "weights": { "2H": q.weights()[0], "HV": q.weights()[1], "2V": q.weights()[2] },
            })
        }
        Scheme::TwoCrystal => {
            let settings = TwoCrystalSettings {
                phase: cfg.compensator_phase_deg.to_radians(),
                hwp_after: cfg.bell_hwp_deg.map(f64::to_radians),
                t1: cfg.mirror_t1,
                t2: cfg.mirror_t2,
                pump_angle: cfg.pump_polarization_deg.to_radians(),
            };
            let r = two_crystal_bell(&settings)?;
            json!({
                "scheme": "two-crystal",
                "compensator_phase_deg": cfg.compensator_phase_deg,
                "hwp_after_deg": cfg.bell_hwp_deg,
                "mirror_t1": cfg.mirror_t1,
                "mirror_t2": cfg.mirror_t2,
                "pump_polarization_deg": cfg.pump_polarization_deg,
                "weights": r.weights,
                "discarded_probability": r.discarded_probability,
                "pair_rate_factor": r.pair_rate_factor,
                "norm": r.state.norm(),
                "density_matrix": density_json(&r.density),
            })
        }
    };
    Ok(Artifact {
        body: serde_json::to_string_pretty(&report)? + "\n",
        sidecar: None,
    })
}

pub fn counts(cfg: &RunConfig) -> Result<(String, Value), CliError> {
    let (c1, c2) = cfg.chains()?;
    let run = cfg.counting();
    let r = simulate_counts(&run, &c1, &c2)?;
    let ratio1 = expected_ratio(&c2)?;
    let ratio2 = expected_ratio(&c1)?;
    let acc = accidental_rate(run.pair_rate * c1.product(), run.pair_rate * c2.product(), run.window)?;
    let measured1 = r.true_coinc as f64 / r.singles1.max(1) as f64;
    let se1 = (ratio1 * (1.0 - ratio1) / r.singles1.max(1) as f64).sqrt();

    let mut t = String::new();
    t.push_str("efficiency budget\n");
    t.push_str(&format!(
        "  {:<4} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "arm", "detector", "fiber", "filter", "misc", "product"
    ));
    for (i, c) in [(1, c1), (2, c2)] {
        t.push_str(&format!(
            "  {:<4} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
            i,
            sig9(c.detector),
            sig9(c.fiber_coupling),
            sig9(c.filter_peak),
            sig9(c.misc_optical),
            sig9(c.product())
        ));
    }
    t.push_str(&format!("expected coincidence/single ratio, arm 1: {}\n", sig9(ratio1)));
    t.push_str(&format!("expected coincidence/single ratio, arm 2: {}\n", sig9(ratio2)));
    t.push_str(&format!(
        "simulation: seed {}, {} s at {} pairs/s, {} ns window\n",
        run.seed,
        sig9(run.duration),
        sig9(run.pair_rate),
        sig9(run.window)
    ));
    for (k, v) in [
        ("pairs", r.pairs),
        ("singles arm 1", r.singles1),
        ("singles arm 2", r.singles2),
        ("true coincidences", r.true_coinc),
        ("accidental coincidences", r.accidental_coinc),
    ] {
        t.push_str(&format!("  {k:<26} {v:>12}\n"));
    }
    t.push_str(&format!("  {:<26} {:>12}\n", "expected accidentals", sig9(acc * run.duration)));
    t.push_str(&format!(
        "  {:<26} {:>12} +/- {}\n",
        "measured ratio arm 1",
        sig9(measured1),
        sig9(se1)
    ));
    let summary = json!({
        "chains": [c1, c2],
        "expected_ratio_arm1": ratio1,
        "expected_ratio_arm2": ratio2,
        "config": run,
        "counts": r,
        "expected_accidentals": acc * run.duration,
        "measured_ratio_arm1": measured1,
        "ratio_standard_error_arm1": se1,
    });
    Ok((t, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin2_fit_recovers_singlet_curve() {
        let theta: Vec<f64> = (0..37).map(|i| (-90.0 + 5.0 * i as f64).to_radians()).collect();
        let p: Vec<f64> = theta.iter().map(|t| 0.5 * (t + std::f64::consts::FRAC_PI_4).sin().powi(2)).collect();
        let [a, b, c] = sin2_fit(&theta, &p).unwrap();
        assert!((a - 0.25).abs() < 1e-12);
        assert!(b.abs() < 1e-12);
        assert!((c - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sidecar_next_to_output() {
        assert_eq!(sidecar_path(Path::new("a/scan.csv")), PathBuf::from("a/scan.json"));
        assert_eq!(sidecar_path(Path::new("a/x.json")), PathBuf::from("a/x.json.meta.json"));
    }
}
