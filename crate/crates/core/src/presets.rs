//! Named parameter sets for the reference experiments.
//!
//! | name | electron | field | packet | T |
//! |---|---|---|---|---|
//! | fig2a | 100 eV | 1e8 V/m uniform | 0.02q at +q/2 | 25 ps |
//! | fig2c | 100 eV | 0 -> 2e8 V/m over +-100 nm | 0.02q, (|+q/2> + |-q/2>)/sqrt2 | 0.25 ps |
//! | fig2d | 100 eV | as fig2c | 0.02q at +q/2 | 0.25 ps |
//! | fig3, s1_on | 100 eV | 1e8 V/m with a weak gradient | 0.15q at +q/2 | 25.9 ps |
//! | s1_off | 100 eV | 1e8 V/m uniform | 0.15q at +q/2 | 25.9 ps |
//! | s2 | beta 0.05 | 1e8 V/m | 0.05q at +q/2 | 0.52 ps |
//! | s3_* | beta 0.02 | 1e9 V/m, theta = -pi, +pi/2, -pi/2 | 1.5q at 0 | 0.14 ps |
//! | s4 | beta 0.02 | 1e9 V/m | 1.2q at 0, pre-chirped over 10 cm | 0.14 ps |
//!
//! All use a 6.2 eV photon and the phase-matched grating period. The gradient
//! presets sample the field in the co-moving frame. The fig2c/d interaction
//! time is shortened so that the lobe separation stays below the sideband
//! spacing; fig3's gradient is chosen for a lobe separation of 16 pi per
//! micrometre over the full interaction.

use crate::config::{ElectronInput, ExperimentParams, GradientSpec, Output};
use crate::constants::{HBAR, NM, PS};
use crate::error::{Error, Result};
use crate::physics::{phase_matched_period, solver_rabi_frequency, ElectronParams, LaserGratingParams};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Fig2a,
    Fig2c,
    Fig2d,
    Fig3,
    S1On,
    S1Off,
    S2,
    S3MinusPi,
    S3PlusHalfPi,
    S3MinusHalfPi,
    S4,
}

impl PresetName {
    pub const ALL: [PresetName; 11] = [
        PresetName::Fig2a,
        PresetName::Fig2c,
        PresetName::Fig2d,
        PresetName::Fig3,
        PresetName::S1On,
        PresetName::S1Off,
        PresetName::S2,
        PresetName::S3MinusPi,
        PresetName::S3PlusHalfPi,
        PresetName::S3MinusHalfPi,
        PresetName::S4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetName::Fig2a => "fig2a",
            PresetName::Fig2c => "fig2c",
            PresetName::Fig2d => "fig2d",
            PresetName::Fig3 => "fig3",
            PresetName::S1On => "s1_on",
            PresetName::S1Off => "s1_off",
            PresetName::S2 => "s2",
            PresetName::S3MinusPi => "s3_minus_pi",
            PresetName::S3PlusHalfPi => "s3_plus_half_pi",
            PresetName::S3MinusHalfPi => "s3_minus_half_pi",
            PresetName::S4 => "s4",
        }
    }

    /// Accepts the canonical names plus `s3` for `s3_plus_half_pi`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "s3" {
            return Ok(PresetName::S3PlusHalfPi);
        }
        PresetName::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = PresetName::ALL.iter().map(|p| p.name()).collect();
            Error::domain("preset", format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lobe separation targeted by the weak-gradient presets (rad/m).
pub const WEAK_GRADIENT_SEPARATION: f64 = 16.0 * PI * 1e6;

/// Field slope (V/m^2) whose kick separates the pseudospin lobes by
/// `separation` after `total_time` at the given electron energy.
pub fn slope_for_separation(kinetic_energy_ev: f64, photon_energy_ev: f64, separation: f64, total_time: f64) -> Result<f64> {
    let electron = ElectronParams::from_kinetic_energy(kinetic_energy_ev)?;
    let period = phase_matched_period(&electron, photon_energy_ev)?;
    let laser = LaserGratingParams::new(photon_energy_ev, period, 0.0, PI / 2.0)?;
    let per_field = solver_rabi_frequency(&electron, &laser, 1.0);
    Ok(separation * HBAR / (2.0 * total_time * per_field))
}

fn base() -> ExperimentParams {
    ExperimentParams {
        outputs: vec![Output::Spectrum, Output::Populations, Output::Record],
        ..ExperimentParams::default()
    }
}

fn usg_gradient() -> GradientSpec {
    GradientSpec::Linear {
        xi_lo_nm: -100.0,
        xi_hi_nm: 100.0,
        e_lo: 0.0,
        e_hi: 2e8,
    }
}

fn broad(t_ps: f64, gradient: bool) -> Result<ExperimentParams> {
    let mut p = base();
    p.delta_k_over_q = 0.15;
    p.t_total_ps = t_ps;
    p.domain_nm = 8192.0;
    p.n_steps = Some(80_000);
    p.snapshot_every = Some(100);
    if gradient {
        let slope = slope_for_separation(100.0, 6.2, WEAK_GRADIENT_SEPARATION, t_ps * PS)?;
        let half = 100.0 * NM * slope;
        p.gradient = GradientSpec::Linear {
            xi_lo_nm: -100.0,
            xi_hi_nm: 100.0,
            e_lo: 1e8 - half,
            e_hi: 1e8 + half,
        };
    }
    Ok(p)
}

fn dla(theta: f64) -> ExperimentParams {
    let mut p = base();
    p.electron = ElectronInput::Beta(0.02);
    p.e0_v_per_m = 1e9;
    p.theta_rad = theta;
    p.delta_k_over_q = 1.5;
    p.dk_offset_over_q = 0.0;
    p.t_total_ps = 0.14;
    p.domain_nm = 512.0;
    p.n_points = 1 << 15;
    p.n_steps = Some(20_000);
    p.snapshot_every = Some(20);
    p.spectrum_range_over_q = 8.0;
    p.lattice_sidebands = 2;
    p
}

pub fn preset(name: PresetName) -> Result<ExperimentParams> {
    let p = match name {
        PresetName::Fig2a => {
            let mut p = base();
            p.n_steps = Some(100_000);
            p.snapshot_every = Some(100);
            p
        }
        PresetName::Fig2c | PresetName::Fig2d => {
            let mut p = base();
            p.gradient = usg_gradient();
            p.t_total_ps = 0.25;
            p.n_steps = Some(1_000);
            p.snapshot_every = Some(5);
            if name == PresetName::Fig2c {
                p.superposition = Some((-0.5, Complex64::new(1.0, 0.0)));
            }
            p
        }
        PresetName::Fig3 | PresetName::S1On => broad(25.9, true)?,
        PresetName::S1Off => broad(25.9, false)?,
        PresetName::S2 => {
            let mut p = base();
            p.electron = ElectronInput::Beta(0.05);
            p.delta_k_over_q = 0.05;
            p.t_total_ps = 0.52;
            p.domain_nm = 2048.0;
            p.n_points = 1 << 15;
            p.n_steps = Some(20_000);
            p.snapshot_every = Some(20);
            p.spectrum_range_over_q = 8.0;
            p
        }
        PresetName::S3MinusPi => dla(-PI),
        PresetName::S3PlusHalfPi => dla(PI / 2.0),
        PresetName::S3MinusHalfPi => dla(-PI / 2.0),
        PresetName::S4 => {
            let mut p = dla(PI / 2.0);
            p.delta_k_over_q = 1.2;
            p.chirp_ld_cm = 10.0;
            p
        }
    };
    Ok(p)
}
