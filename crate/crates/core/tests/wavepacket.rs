use feqo::constants::NM;
use feqo::physics::{ElectronParams, LaserGratingParams};
use feqo::wavepacket::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn setup(periods: f64, n: usize) -> (ElectronParams, LaserGratingParams, Grid) {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 1e8, PI / 2.0).unwrap();
    let grid = Grid::centered(periods * l.grating_period, n).unwrap();
    (e, l, grid)
}

#[test]
fn grid_rejects_bad_shapes() {
    assert!(Grid::new(0.0, 1.0, 1000).is_err());
    assert!(Grid::new(0.0, 1.0, 1).is_err());
    assert!(Grid::new(1.0, 1.0, 64).is_err());
    assert!(Grid::new(0.0, f64::INFINITY, 64).is_err());
    let g = Grid::centered(8.0, 8).unwrap();
    assert_eq!(g.positions(), vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    assert_eq!(g.dk_at(4), 0.0);
    assert!((g.dk_nyquist() - PI).abs() < 1e-15);
}

#[test]
fn gaussian_has_the_requested_moments() {
    let (e, l, grid) = setup(256.0, 8192);
    let wp = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.02, 0.5)).unwrap();
    assert!((wp.norm() - 1.0).abs() < 1e-13);
    let m = wp.moments();
    assert!((m.mean / (0.5 * l.q) - 1.0).abs() < 1e-10);
    assert!((m.variance.sqrt() / (0.02 * l.q) - 1.0).abs() < 1e-9);
    let pos = wp.to_position();
    assert!((pos.norm() - 1.0).abs() < 1e-12);
    let sz = pos.moments().variance.sqrt();
    assert!((sz - 1.0 / (2.0 * 0.02 * l.q)).abs() < 1e-6 * sz);
}

#[test]
fn undersampled_packets_are_rejected() {
    let (e, l, grid) = setup(16.0, 64);
    // Nyquist is 2q here, so a packet at 1.95q leaks out of the window.
    assert!(matches!(make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.05, 1.95)), Err(feqo::Error::Grid(_))));
    // And a 0.001q-wide packet is far longer than 16 periods.
    assert!(matches!(make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.001, 0.0)), Err(feqo::Error::Grid(_))));
    assert!(make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.0, 0.0)).is_err());
}

#[test]
fn cancelling_superposition_is_an_error() {
    let (e, l, grid) = setup(256.0, 4096);
    let spec = WavepacketSpec::pair(0.02, 0.5, 0.5, C64::new(-1.0, 0.0));
    assert!(make_gaussian(&grid, &e, &l, &spec).is_err());
}

#[test]
fn representation_is_checked() {
    let (e, _, grid) = setup(64.0, 1024);
    let wp = Wavepacket::new(grid, vec![C64::new(1.0, 0.0); 1024], Representation::Position, e.k0).unwrap();
    assert!(matches!(apply_chirp(&wp, 1e-3, &e), Err(feqo::Error::Representation { .. })));
    assert!(Wavepacket::new(grid, vec![C64::new(1.0, 0.0); 10], Representation::Position, e.k0).is_err());
}

#[test]
fn chirp_spreads_like_free_flight() {
    let (e, l, grid) = setup(4096.0, 1 << 16);
    let wp = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.01, 0.0)).unwrap();
    let l_d = 2e-3;
    let chirped = apply_chirp(&wp, l_d, &e).unwrap();
    assert!((chirped.norm() - 1.0).abs() < 1e-12);
    let t = l_d / e.velocity();
    let expect = free_gaussian_width(0.01 * l.q, e.dispersion_mass(), t);
    let got = chirped.to_position().moments().variance.sqrt();
    assert!(((got - expect) / expect).abs() < 1e-6, "{got} vs {expect}");
    assert!(expect > 3.0 * free_gaussian_width(0.01 * l.q, e.dispersion_mass(), 0.0));
    // Drift towards +dk: the chirp moves a +dk packet forward in the frame.
    let kicked = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.01, 0.05)).unwrap();
    let moved = apply_chirp(&kicked, l_d, &e).unwrap().to_position().moments().mean;
    let v_rel = feqo::constants::HBAR * 0.05 * l.q / e.dispersion_mass();
    assert!(((moved - v_rel * t) / (v_rel * t)).abs() < 1e-6, "{moved} vs {}", v_rel * t);
}

#[test]
fn chirp_coefficient_uses_the_longitudinal_mass() {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let c = chirp_coefficient(0.1, &e);
    let m = feqo::constants::ELECTRON_MASS * e.gamma.powi(3);
    let expect = feqo::constants::HBAR * 0.1 / (2.0 * m * e.velocity());
    assert!((c / expect - 1.0).abs() < 1e-14);
    assert!(free_gaussian_width(1e8, m, 0.0) == 0.5e-8);
    assert!((free_gaussian_width(1e8, 1.0, 10.0).powi(2) - (0.25e-16 + (feqo::constants::HBAR * 1e9).powi(2))).abs() < 1e-30);
}

#[test]
fn transforms_reuse_a_plan() {
    let (e, l, grid) = setup(128.0, 2048);
    let wp = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.05, 0.3)).unwrap();
    let mut spectral = Spectral::new(&grid);
    let pos = wp.transformed(Representation::Position, &mut spectral);
    let back = pos.transformed(Representation::Momentum, &mut spectral);
    let err = back
        .amplitudes
        .iter()
        .zip(&wp.amplitudes)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-12);
    let dens = spectral.momentum_density(&pos.amplitudes);
    assert!(dens.iter().zip(wp.density()).all(|(a, b)| (a - b).abs() <= 1e-12 * b.max(1e-30) + 1e-20));
    assert!(pos.grid.length() / NM > 500.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_preserve_the_norm(
        dk in 0.01f64..0.2,
        offset in -1.0f64..1.0,
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        other in -1.0f64..1.0,
        l_d in 0.0f64..1e-3,
    ) {
        let (e, l, grid) = setup(512.0, 1 << 13);
        let spec = WavepacketSpec { chirp_drift: l_d, ..WavepacketSpec::pair(dk, offset, other, C64::new(re, im)) };
        let wp = match make_gaussian(&grid, &e, &l, &spec) {
            Ok(wp) => wp,
            Err(_) => return Ok(()),
        };
        let pos = wp.to_position();
        prop_assert!((pos.norm() - wp.norm()).abs() < 1e-12);
        let back = pos.to_momentum();
        let err = back.amplitudes.iter().zip(&wp.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
    }
}
