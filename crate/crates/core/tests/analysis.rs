use feqo::analysis::regime::*;
use feqo::analysis::sidebands::*;
use feqo::analysis::usg::usg_prediction;
use feqo::analysis::wigner::{wigner, WignerOptions};
use feqo::constants::{HBAR, NM};
use feqo::field::FieldProfile;
use feqo::physics::{solver_rabi_frequency, ElectronParams, LaserGratingParams};
use feqo::presets::{preset, PresetName};
use feqo::wavepacket::{make_gaussian, Grid, WavepacketSpec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn setup() -> (ElectronParams, LaserGratingParams, Grid) {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 1e8, PI / 2.0).unwrap();
    let grid = Grid::centered(256.0 * l.grating_period, 8192).unwrap();
    (e, l, grid)
}

fn gaussians(q: f64, centres: &[(f64, f64)], width: f64) -> Spectrum {
    let dk: Vec<f64> = (-3000..3000).map(|i| i as f64 * 1e-3 * q).collect();
    let density = dk
        .iter()
        .map(|k| centres.iter().map(|(c, w)| w * (-(k - c * q).powi(2) / (2.0 * (width * q).powi(2))).exp()).sum())
        .collect();
    Spectrum::new(dk, density).unwrap()
}

#[test]
fn wigner_marginals_match_the_densities() {
    let (e, l, grid) = setup();
    for spec in [WavepacketSpec::single(0.02, 0.5), WavepacketSpec::pair(0.03, 0.5, -0.5, C64::new(0.0, 1.0))] {
        let wp = make_gaussian(&grid, &e, &l, &spec).unwrap();
        let opts = WignerOptions {
            n_z: 128,
            n_p: 128,
            ..WignerOptions::default()
        };
        let w = wigner(&wp, &opts).unwrap();
        let check = |a: Vec<f64>, b: Vec<f64>| {
            let m = b.iter().cloned().fold(0.0, f64::max);
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / m
        };
        assert!(check(w.position_marginal(), w.reference_position(&wp)) < 1e-10);
        assert!(check(w.momentum_marginal(), w.reference_momentum(&wp)) < 1e-10);
        assert!(w.imag_residue < 1e-10);
    }
}

#[test]
fn a_single_gaussian_is_nonnegative_and_a_cat_is_not() {
    let (e, l, grid) = setup();
    let opts = WignerOptions {
        n_z: 256,
        n_p: 256,
        ..WignerOptions::default()
    };
    let single = wigner(&make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.02, 0.5)).unwrap(), &opts).unwrap();
    assert!(single.min() > -1e-3 * single.max());
    let cat = make_gaussian(&grid, &e, &l, &WavepacketSpec::pair(0.02, 0.25, -0.25, C64::new(1.0, 0.0))).unwrap();
    let w = wigner(&cat, &opts).unwrap();
    assert!(w.min() < -0.1 * w.max(), "{} {}", w.min(), w.max());
}

#[test]
fn wrapped_chirped_states_keep_exact_marginals() {
    let (e, l, grid) = setup();
    let spec = WavepacketSpec {
        chirp_drift: 2e-3,
        ..WavepacketSpec::pair(0.05, 0.5, -0.5, C64::new(0.6, 0.2))
    };
    let wp = make_gaussian(&grid, &e, &l, &spec).unwrap();
    let d = wp.to_position().density();
    let peak = d.iter().cloned().fold(0.0, f64::max);
    assert!(d.iter().filter(|&&v| v > 1e-6 * peak).count() > grid.n_points() / 2);
    let opts = WignerOptions {
        n_z: 64,
        n_p: 64,
        ..WignerOptions::default()
    };
    let w = wigner(&wp, &opts).unwrap();
    let err = |a: Vec<f64>, b: Vec<f64>| {
        let m = b.iter().cloned().fold(0.0, f64::max);
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / m
    };
    assert!(err(w.position_marginal(), w.reference_position(&wp)) < 1e-10);
    assert!(err(w.momentum_marginal(), w.reference_momentum(&wp)) < 1e-10);
    assert_eq!(w.z_bins.last().unwrap().1, grid.n_points());
}

#[test]
fn wigner_rejects_spectra_near_nyquist() {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 1e8, PI / 2.0).unwrap();
    // Nyquist at 4q; a packet at 3q is outside the alias-free half.
    let grid = Grid::centered(256.0 * l.grating_period, 2048).unwrap();
    let wp = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.05, 3.0)).unwrap();
    assert!(wigner(&wp, &WignerOptions::default()).is_err());
}

#[test]
fn sideband_windows_partition_the_spectrum() {
    let q = 1.0e9;
    let s = gaussians(q, &[(0.5, 1.0), (-0.5, 0.7), (1.5, 0.1), (-2.5, 0.05)], 0.04);
    let opts = SidebandOptions {
        max_order: 2.5,
        ..SidebandOptions::default()
    };
    let r = sideband_populations(&s, q, &opts).unwrap();
    assert_eq!(r.windows.len(), 6);
    assert!((r.total() - s.total()).abs() < 1e-12 * s.total());
    assert!((r.leakage - (1.0 - r.p_plus_half() - r.p_minus_half())).abs() < 1e-15);
    assert!(r.population(1.5) / r.population(0.5) > 0.09);
    assert!((r.window(0.5).unwrap().mean_dk / (0.5 * q) - 1.0).abs() < 1e-6);
    let bad = SidebandOptions {
        halfwidth_over_q: 0.6,
        ..SidebandOptions::default()
    };
    assert!(sideband_populations(&s, q, &bad).is_err());
    assert!(sideband_populations(&s, -1.0, &opts).is_err());
}

#[test]
fn two_lobes_need_a_real_dip() {
    let q = 1.0e9;
    let opts = SidebandOptions {
        smoothing: 0.005 * q,
        ..SidebandOptions::default()
    };
    let split = gaussians(q, &[(0.4, 1.0), (0.6, 0.8), (-0.42, 0.5), (-0.58, 0.5)], 0.02);
    let r = sideband_populations(&split, q, &opts).unwrap();
    let up = measure_split(&r, 0.5).unwrap();
    assert!(!up.single_lobe);
    assert!((up.value / (0.2 * q) - 1.0).abs() < 0.01, "{}", up.value / q);
    let down = measure_split(&r, -0.5).unwrap();
    assert!((down.value / (0.16 * q) - 1.0).abs() < 0.01);
    assert!(down.lobes[0] < down.lobes[1]);

    // Two close peaks with a shallow saddle are one lobe.
    let shallow = gaussians(q, &[(0.48, 1.0), (0.52, 1.0)], 0.02);
    let r = sideband_populations(&shallow, q, &opts).unwrap();
    assert!(measure_split(&r, 0.5).unwrap().single_lobe);
    assert!(matches!(measure_split(&r, -0.5), Err(feqo::Error::NoPeak(_))));
    assert!(measure_split(&r, 7.5).is_err());
}

#[test]
fn total_variation_is_a_distance() {
    let q = 1.0e9;
    let a = gaussians(q, &[(0.5, 1.0)], 0.02);
    let b = gaussians(q, &[(-0.5, 1.0)], 0.02);
    let norm = |s: Spectrum| {
        let t = s.total();
        Spectrum::new(s.dk.clone(), s.density.iter().map(|d| d / t).collect()).unwrap()
    };
    let (a, b) = (norm(a), norm(b));
    assert!(total_variation(&a, &a).unwrap() == 0.0);
    assert!((total_variation(&a, &b).unwrap() - 1.0).abs() < 1e-9);
    let short = Spectrum::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    assert!(total_variation(&a, &short).is_err());
    assert!((a.mirrored().total() - a.total()).abs() < 1e-12);
}

#[test]
fn linear_ramp_prediction_is_closed_form() {
    let (e, l, _) = setup();
    let slope = 1e15;
    let profile = FieldProfile::linear_gradient(-100.0 * NM, 100.0 * NM, 0.0, 2e8, PI / 2.0).unwrap();
    let t = 0.25e-12;
    let p = usg_prediction(&profile, &e, &l, t).unwrap();
    let expect = solver_rabi_frequency(&e, &l, 1.0) * slope * t / HBAR;
    assert!((p.kick / expect - 1.0).abs() < 1e-9, "{} vs {expect}", p.kick);
    assert!((p.separation - 2.0 * p.kick).abs() < 1e-6);
    let flat = FieldProfile::uniform(1e8, PI / 2.0).unwrap();
    assert_eq!(usg_prediction(&flat, &e, &l, t).unwrap().kick, 0.0);
    assert!(usg_prediction(&profile, &e, &l, -1.0).is_err());
}

#[test]
fn presets_land_in_their_regimes() {
    let table = [
        (PresetName::Fig2a, Regime::Bragg),
        (PresetName::Fig2c, Regime::UltrafastSternGerlach),
        (PresetName::Fig2d, Regime::UltrafastSternGerlach),
        (PresetName::Fig3, Regime::AnomalousBragg),
        (PresetName::S1On, Regime::AnomalousBragg),
        (PresetName::S1Off, Regime::AnomalousBragg),
        (PresetName::S2, Regime::RamanNathPinem),
        (PresetName::S3MinusPi, Regime::Dla),
        (PresetName::S3PlusHalfPi, Regime::Dla),
        (PresetName::S3MinusHalfPi, Regime::Dla),
        (PresetName::S4, Regime::Apinem),
    ];
    for (name, want) in table {
        let p = preset(name).unwrap();
        let label = classify_regime(&p, &central_couplings(&p).unwrap());
        assert_eq!(label.regime, want, "{name}: {}", label.rationale());
        assert!(!label.trace.is_empty());
    }
}

#[test]
fn rationale_lists_every_comparison() {
    let p = preset(PresetName::Fig2a).unwrap();
    let label = classify_regime(&p, &central_couplings(&p).unwrap());
    let text = label.rationale();
    for needle in ["beta = 0.019781 >= 0.5 : false", "klein_cook = 1.526616 >= 1 : true", "gradient : false"] {
        assert!(text.contains(needle), "{text}");
    }
}

#[test]
fn zero_field_is_indeterminate() {
    let mut p = preset(PresetName::Fig2a).unwrap();
    p.e0_v_per_m = 0.0;
    let label = classify_regime(&p, &central_couplings(&p).unwrap());
    assert_eq!(label.regime, Regime::Indeterminate);
    assert!(label.note.is_some());
}

fn inputs(beta: f64, dk: f64) -> RegimeInputs {
    RegimeInputs {
        beta,
        delta_k_over_q: dk,
        q: 2.0 * PI / 4e-9,
        wavelength: 200e-9,
        klein_cook: 1.5,
        validity_ratio: 1.3,
        has_gradient: false,
        chirp_drift: 0.0,
        velocity: 6e6,
        mass: 9.1e-31,
    }
}

proptest! {
    #[test]
    fn fast_wave_like_electrons_are_pinem(beta in 0.5f64..0.99, dk in 1e-5f64..1e-3) {
        let label = classify(&inputs(beta, dk), &Thresholds::default());
        prop_assert_eq!(label.regime, Regime::RamanNathPinem);
    }

    #[test]
    fn point_like_electrons_are_dla_without_chirp(beta in 0.01f64..0.9, dk in 2.0f64..10.0) {
        let label = classify(&inputs(beta, dk), &Thresholds::default());
        prop_assert_eq!(label.regime, Regime::Dla);
    }

    #[test]
    fn broad_slow_packets_are_anomalous(dk in 0.051f64..0.2) {
        let mut x = inputs(0.02, dk);
        x.has_gradient = true;
        prop_assert_eq!(classify(&x, &Thresholds::default()).regime, Regime::AnomalousBragg);
    }
}
