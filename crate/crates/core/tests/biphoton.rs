use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use spdc_core::biphoton::{
    gaussian_filter_shape_check, hom_scan, hom_scan_with, jsa_cw, pulsed_visibility, triangle_closed_form,
    HomOptions, SpectralFilter,
};
use spdc_core::phasematch::{CrystalConfig, PhaseMatcher, WalkoffResult};

const DEG: f64 = 0.702_2;

fn bbo_walkoff() -> WalkoffResult<f64> {
    let pm = PhaseMatcher::<f64>::default();
    let cfg = CrystalConfig::new(0.3511, 48.3_f64.to_radians(), 1.0).unwrap();
    pm.walkoff(&cfg, DEG).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn jsa_is_normalized_on_symmetric_grid() {
    let w = bbo_walkoff();
    let jsa = jsa_cw(&w).unwrap();
    let n = jsa.grid.len();
    for k in 0..n {
        assert_eq!(jsa.grid.omega[k], -jsa.grid.omega[n - 1 - k]);
    }
    let norm: f64 = jsa.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * jsa.grid.step;
    assert!((norm - 1.0).abs() < 1e-12);
    let lobe = 2.0 * PI / w.dl_ps;
    let main = jsa.grid.omega.iter().filter(|o| o.abs() < lobe).count();
    assert!(main >= 64, "{main}");
}

#[test]
fn jsa_temporal_support_has_width_dl() {
    // Brute-force inverse transform: the amplitude is a rectangle on [0, DL].
    let w = bbo_walkoff();
    let jsa = jsa_cw(&w).unwrap();
    let dl = w.dl_ps;
    let at = |t: f64| -> f64 {
        jsa.grid
            .omega
            .iter()
            .zip(&jsa.amp)
            .map(|(&o, a)| a * Complex::from_polar(1.0, o * t))
            .sum::<Complex<f64>>()
            .norm()
    };
    let peak = at(dl / 2.0);
    for t in [-0.5 * dl, -0.1 * dl, 1.1 * dl, 1.5 * dl, 3.0 * dl] {
        assert!(at(t) < 1e-3 * peak, "t = {t}: {} vs {peak}", at(t));
    }
    for t in [0.1 * dl, 0.3 * dl, 0.7 * dl, 0.9 * dl] {
        assert!((at(t) / peak - 1.0).abs() < 1e-2);
    }
}

#[test]
fn open_filters_reproduce_triangle() {
    let w = bbo_walkoff();
    let dl = w.dl_ps;
    let jsa = jsa_cw(&w).unwrap();
    let open = SpectralFilter::open(DEG);
    let tau = linspace(-2.0 * dl, dl, 301);
    let scan = hom_scan(&jsa, &open, &open, &tau).unwrap();
    let err = scan
        .tau
        .iter()
        .zip(&scan.rate)
        .map(|(&t, &r)| (r - triangle_closed_form(t, dl)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "{err}");
    let (tmin, rmin) = scan.minimum().unwrap();
    assert!((tmin + dl / 2.0).abs() <= tau[1] - tau[0]);
    assert!(rmin < 1e-6);
}

#[test]
fn unbounded_flat_filter_baseline_and_dip() {
    let w = bbo_walkoff();
    let dl = w.dl_ps;
    let jsa = jsa_cw(&w).unwrap();
    let open = SpectralFilter::open(DEG);
    let scan = hom_scan(&jsa, &open, &open, &[-3.0 * dl, -dl / 2.0]).unwrap();
    assert!((scan.rate[0] - 1.0).abs() < 1e-6, "{:?}", scan.rate);
    assert!(scan.rate[1] < 1e-6, "{:?}", scan.rate);
}

#[test]
fn wide_flat_filters_approach_triangle() {
    // A 200 nm band clips the sinc tails; the residual ringing is O(1/(Ω_max DL)^2).
    let w = bbo_walkoff();
    let dl = w.dl_ps;
    let jsa = jsa_cw(&w).unwrap();
    let wide = SpectralFilter::flat(DEG, 200.0).unwrap();
    let tau = linspace(-2.0 * dl, dl, 61);
    let scan = hom_scan(&jsa, &wide, &wide, &tau).unwrap();
    let err = tau
        .iter()
        .zip(&scan.rate)
        .map(|(&t, &r)| (r - triangle_closed_form(t, dl)).abs())
        .fold(0.0, f64::max);
    assert!(err < 2e-2, "{err}");
}

#[test]
fn grid_doubling_is_stable() {
    let w = bbo_walkoff();
    let dl = w.dl_ps;
    let jsa = jsa_cw(&w).unwrap();
    let tau = linspace(-2.0 * dl, dl, 61);
    for (f1, f2) in [
        (SpectralFilter::open(DEG), SpectralFilter::open(DEG)),
        (SpectralFilter::gaussian(DEG, 3.0).unwrap(), SpectralFilter::gaussian(DEG, 3.0).unwrap()),
        (SpectralFilter::flat(DEG, 20.0).unwrap(), SpectralFilter::flat(DEG, 20.0).unwrap()),
    ] {
        let a = hom_scan_with(&jsa, &f1, &f2, &tau, HomOptions { refinement: 1 }).unwrap();
        let b = hom_scan_with(&jsa, &f1, &f2, &tau, HomOptions { refinement: 2 }).unwrap();
        let diff = a.rate.iter().zip(&b.rate).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{f1:?}: {diff}");
    }
}

#[test]
fn filter_swap_symmetry() {
    let w = bbo_walkoff();
    let jsa = jsa_cw(&w).unwrap();
    let f1 = SpectralFilter::gaussian(DEG, 3.0).unwrap();
    let f2 = SpectralFilter::flat(DEG, 20.0).unwrap();
    let tau = linspace(-0.6, 0.4, 41);
    let a = hom_scan(&jsa, &f1, &f2, &tau).unwrap();
    let b = hom_scan(&jsa, &f2, &f1, &tau).unwrap();
    for (x, y) in a.rate.iter().zip(&b.rate) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn narrow_gaussian_filters_give_gaussian_dip() {
    let w = bbo_walkoff();
    let dl = w.dl_ps;
    let jsa = jsa_cw(&w).unwrap();
    let tau = linspace(-dl / 2.0 - 1.0, -dl / 2.0 + 1.0, 201);
    let g3 = SpectralFilter::gaussian(DEG, 3.0).unwrap();
    let fit3 = gaussian_filter_shape_check(&hom_scan(&jsa, &g3, &g3, &tau).unwrap()).unwrap();
    assert!(fit3.visibility > 0.99, "{fit3:?}");
    assert!(fit3.meets_contract(dl), "{fit3:?}");

    let g20 = SpectralFilter::gaussian(DEG, 20.0).unwrap();
    let fit20 = gaussian_filter_shape_check(&hom_scan(&jsa, &g20, &g20, &tau).unwrap()).unwrap();
    assert!(fit20.residual_rms > fit3.residual_rms, "{fit20:?} vs {fit3:?}");
}

#[test]
fn pulsed_mismatches_are_consistent_with_walkoff() {
    let w = bbo_walkoff();
    assert!((w.delta_o_ps_per_mm - w.delta_e_ps_per_mm - w.d_ps_per_mm).abs() < 1e-12);
}

#[test]
fn pulsed_visibility_ladder() {
    let w = bbo_walkoff();
    assert!((pulsed_visibility(0.0, &w).unwrap() - 1.0).abs() < 1e-6);
    let ladder = [0.0, 0.3, 1.0, 2.0, 4.0, 8.0, 15.0, 30.0, 60.0, 120.0];
    let v: Vec<f64> = ladder.iter().map(|&s| pulsed_visibility(s, &w).unwrap()).collect();
    for pair in v.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-9, "{v:?}");
    }
    // Pulse duration 1/σ far below DL.
    assert!(v[9] < 0.5, "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rate_bounded_for_gaussian_filters(fwhm1 in 0.5f64..40.0, fwhm2 in 0.5f64..40.0, tau in -1.5f64..1.0) {
        let w = bbo_walkoff();
        let jsa = jsa_cw(&w).unwrap();
        let f1 = SpectralFilter::gaussian(DEG, fwhm1).unwrap();
        let f2 = SpectralFilter::gaussian(DEG, fwhm2).unwrap();
        let scan = hom_scan(&jsa, &f1, &f2, &[tau]).unwrap();
        prop_assert!(scan.rate[0] >= 0.0 && scan.rate[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn triangle_is_piecewise_linear(tau in -1.0f64..1.0, dl in 0.05f64..1.0) {
        let r = triangle_closed_form(tau, dl);
        prop_assert!((0.0..=1.0).contains(&r));
        let x = (tau + dl / 2.0).abs() / (dl / 2.0);
        prop_assert!((r - x.min(1.0)).abs() < 1e-12);
    }
}
