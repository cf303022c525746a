use feqo::constants::{NM, PS};
use feqo::field::FieldProfile;
use feqo::physics::{ElectronParams, LaserGratingParams};
use feqo::tdse::*;
use feqo::tridiag::{solve_cyclic, solve_tridiagonal};
use feqo::wavepacket::{free_gaussian_width, make_gaussian, Grid, Representation, WavepacketSpec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: C64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn random_hermitian(n: usize, seed: u64, boundary: Boundary) -> TridiagonalHamiltonian {
    // Small LCG so the oracle does not depend on a random-number crate.
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let diag: Vec<C64> = (0..n).map(|_| c(3.0 * next(), 0.0)).collect();
    let upper: Vec<C64> = (0..n).map(|_| c(next(), next())).collect();
    let mut lower: Vec<C64> = upper.iter().map(|u| u.conj()).collect();
    let mut upper = upper;
    if boundary == Boundary::Dirichlet {
        upper[n - 1] = c(0.0, 0.0);
        lower[n - 1] = c(0.0, 0.0);
    }
    TridiagonalHamiltonian {
        diag,
        upper,
        lower,
        time_tau: 0.0,
        boundary,
    }
}

fn cayley_oracle(h: &TridiagonalHamiltonian, d_tau: f64, psi: &[C64]) -> Vec<C64> {
    let n = h.len();
    let half = c(0.0, 0.5 * d_tau);
    let mut lhs = vec![vec![c(0.0, 0.0); n]; n];
    let mut rhs = vec![c(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let hij = h.entry(i, j);
            let id = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
            lhs[i][j] = id + half * hij;
            rhs[i] += (id - half * hij) * psi[j];
        }
    }
    dense_solve(lhs, rhs)
}

#[test]
fn crank_nicolson_matches_dense_cayley_transform() {
    for boundary in [Boundary::Periodic, Boundary::Dirichlet] {
        let h = random_hermitian(64, 7, boundary);
        let psi: Vec<C64> = (0..64).map(|i| C64::from_polar(1.0, 0.3 * i as f64) * (i as f64 / 9.0).sin()).collect();
        let expect = cayley_oracle(&h, 0.37, &psi);
        let mut got = psi.clone();
        CrankNicolson::new(h, 0.37).unwrap().step(&mut got);
        let err = got.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{boundary:?}: {err}");
    }
}

#[test]
fn tridiagonal_solvers_match_dense_elimination() {
    let n = 12;
    let sub: Vec<C64> = (0..n - 1).map(|i| c(0.3 + 0.01 * i as f64, -0.2)).collect();
    let sup: Vec<C64> = (0..n - 1).map(|i| c(-0.1, 0.05 * i as f64)).collect();
    let diag: Vec<C64> = (0..n).map(|i| c(2.0 + 0.1 * i as f64, 0.5)).collect();
    let b: Vec<C64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
    let (tr, bl) = (c(0.4, 0.1), c(-0.2, 0.3));
    let mut dense = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        dense[i][i] = diag[i];
        if i + 1 < n {
            dense[i][i + 1] = sup[i];
            dense[i + 1][i] = sub[i];
        }
    }
    let x = solve_tridiagonal(&sub, &diag, &sup, &b).unwrap();
    let y = dense_solve(dense.clone(), b.clone());
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-13));
    dense[0][n - 1] = tr;
    dense[n - 1][0] = bl;
    let x = solve_cyclic(&sub, &diag, &sup, tr, bl, &b).unwrap();
    let y = dense_solve(dense, b);
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-13));
}

#[test]
fn singular_system_is_reported() {
    let z = c(0.0, 0.0);
    let r = solve_tridiagonal(&[z, z], &[c(1.0, 0.0), z, c(1.0, 0.0)], &[z, z], &[c(1.0, 0.0); 3]);
    assert!(r.is_err());
}

#[test]
fn assembled_hamiltonian_is_hermitian() {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 1e8, PI / 2.0).unwrap();
    let grid = Grid::centered(64.0 * l.grating_period, 1024).unwrap();
    let profile = FieldProfile::linear_gradient(-100.0 * NM, 100.0 * NM, 0.0, 2e8, PI / 2.0).unwrap();
    let h = assemble_hamiltonian(&grid, &e, &l, &profile, 0.0, &HamiltonianOptions::default()).unwrap();
    for i in 0..h.len() {
        assert!(h.diag[i].im.abs() < 1e-9 * h.diag[i].norm().max(1.0));
        assert!((h.upper[i] - h.lower[i].conj()).norm() <= 1e-12 * h.upper[i].norm());
    }
}

fn fig2a_packet(grid: &Grid) -> (ElectronParams, LaserGratingParams, feqo::wavepacket::Wavepacket) {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 1e8, PI / 2.0).unwrap();
    let wp = make_gaussian(grid, &e, &l, &WavepacketSpec::single(0.02, 0.5)).unwrap();
    (e, l, wp)
}

#[test]
fn free_propagation_keeps_the_spectrum_and_spreads_the_packet() {
    let e = ElectronParams::from_kinetic_energy(100.0).unwrap();
    let l = LaserGratingParams::phase_matched(&e, 6.2, 0.0, PI / 2.0).unwrap();
    let grid = Grid::centered(256.0 * l.grating_period, 4096).unwrap();
    let wp = make_gaussian(&grid, &e, &l, &WavepacketSpec::single(0.02, 0.0)).unwrap();
    let profile = FieldProfile::uniform(0.0, PI / 2.0).unwrap();
    let t = 10.0 * PS;
    let rec = evolve(&wp, &e, &l, &profile, &EvolutionConfig::new(t, 4000)).unwrap();
    let before = wp.to_momentum().density();
    let after = rec.snapshots.last().unwrap().to_momentum().density();
    let change = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let peak = before.iter().cloned().fold(0.0, f64::max);
    assert!(change < 1e-10 * peak, "{change}");
    let sigma = rec.snapshots.last().unwrap().moments().variance.sqrt();
    let expect = free_gaussian_width(0.02 * l.q, e.dispersion_mass(), t);
    assert!(expect > 2.0 * free_gaussian_width(0.02 * l.q, e.dispersion_mass(), 0.0));
    assert!(((sigma - expect) / expect).abs() < 0.01, "{sigma} vs {expect}");
}

#[test]
fn norm_drift_abort_returns_the_partial_record() {
    let grid = Grid::centered(256.0 * 3.955632e-9, 4096).unwrap();
    let (e, l, wp) = fig2a_packet(&grid);
    let profile = FieldProfile::uniform(1e8, PI / 2.0).unwrap();
    let mut cfg = EvolutionConfig::new(0.01 * PS, 10);
    cfg.norm_tolerance = 1e-300;
    match evolve(&wp, &e, &l, &profile, &cfg) {
        Err(feqo::Error::NormDrift { step, partial, .. }) => {
            assert_eq!(step, 1);
            assert_eq!(partial.steps_completed, 1);
            assert_eq!(partial.snapshots.len(), 2);
        }
        other => panic!("expected an abort, got {other:?}"),
    }
}

#[test]
fn evolution_rejects_bad_configs() {
    let grid = Grid::centered(256.0 * 3.955632e-9, 4096).unwrap();
    let (e, l, wp) = fig2a_packet(&grid);
    let profile = FieldProfile::uniform(1e8, PI / 2.0).unwrap();
    assert!(evolve(&wp, &e, &l, &profile, &EvolutionConfig::new(1e-13, 0)).is_err());
    assert!(evolve(&wp, &e, &l, &profile, &EvolutionConfig::new(-1.0, 10)).is_err());
    let ws = wp.to_position();
    let h = assemble_hamiltonian(&grid, &e, &l, &profile, 0.0, &HamiltonianOptions::default()).unwrap();
    assert!(matches!(cn_step(&wp, &h, 1e-9), Err(feqo::Error::Representation { .. })));
    assert!(cn_step(&ws, &h, 1e-9).is_ok());
}

#[test]
fn observer_sees_every_requested_step() {
    let grid = Grid::centered(256.0 * 3.955632e-9, 4096).unwrap();
    let (e, l, wp) = fig2a_packet(&grid);
    let profile = FieldProfile::uniform(1e8, PI / 2.0).unwrap();
    let mut cfg = EvolutionConfig::new(0.01 * PS, 20);
    cfg.observe_every = 5;
    cfg.snapshot_every = 10;
    let mut seen = Vec::new();
    let rec = evolve_observed(&wp, &e, &l, &profile, &cfg, |s, _, _| seen.push(s)).unwrap();
    assert_eq!(seen, vec![0, 5, 10, 15, 20]);
    assert_eq!(rec.snapshots.len(), 3);
    assert_eq!(rec.norm_history.len(), 21);
    assert!(rec.snapshots.iter().all(|s| s.representation == Representation::Position));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cayley_step_is_unitary(seed in 0u64..1000, d_tau in 0.01f64..5.0, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Dirichlet };
        let h = random_hermitian(48, seed, boundary);
        let mut psi: Vec<C64> = (0..48).map(|i| c((i as f64 * 0.7 + seed as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let n0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut cn = CrankNicolson::new(h, d_tau).unwrap();
        for _ in 0..20 {
            cn.step(&mut psi);
        }
        let n1: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(((n1 - n0) / n0).abs() < 1e-12);
    }
}
