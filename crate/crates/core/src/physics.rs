//! Relativistic electron kinematics, grating phase matching and the closed-form
//! couplings that parameterize both the TDSE and the two-level model.
//!
//! All public quantities are SI. The solver works in co-moving units where time
//! is measured as `tau = c t` in metres; the `alpha` coefficients below are the
//! prefactors of that equation.

use crate::constants::{ELECTRON_MASS, ELECTRON_REST_ENERGY_EV, EV, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronParams {
    /// Kinetic energy (eV).
    pub kinetic_energy_ev: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Central wavenumber p0/hbar (rad/m).
    pub k0: f64,
    /// Central momentum gamma m v0 (kg m/s).
    pub p0: f64,
}

impl ElectronParams {
    pub fn from_kinetic_energy(kinetic_energy_ev: f64) -> Result<Self> {
        if !(kinetic_energy_ev.is_finite() && kinetic_energy_ev > 0.0) {
            return Err(Error::domain(
                "kinetic_energy_ev",
                format!("must be positive and finite, got {kinetic_energy_ev}"),
            ));
        }
        let eps = kinetic_energy_ev / ELECTRON_REST_ENERGY_EV;
        let gamma = 1.0 + eps;
        // sqrt(1 - 1/gamma^2) written to avoid cancellation at low energy.
        let beta = (eps * (2.0 + eps)).sqrt() / gamma;
        Ok(Self::assemble(kinetic_energy_ev, beta, gamma))
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
            return Err(Error::domain("beta", format!("must lie in (0, 1), got {beta}")));
        }
        let s = (1.0 - beta * beta).sqrt();
        let gamma = 1.0 / s;
        let gamma_minus_one = beta * beta / (s * (1.0 + s));
        Ok(Self::assemble(gamma_minus_one * ELECTRON_REST_ENERGY_EV, beta, gamma))
    }

    fn assemble(kinetic_energy_ev: f64, beta: f64, gamma: f64) -> Self {
        let p0 = gamma * ELECTRON_MASS * beta * SPEED_OF_LIGHT;
        ElectronParams {
            kinetic_energy_ev,
            beta,
            gamma,
            k0: p0 / HBAR,
            p0,
        }
    }

    /// Group velocity v0 (m/s).
    pub fn velocity(&self) -> f64 {
        self.beta * SPEED_OF_LIGHT
    }

    /// Longitudinal dispersion mass gamma^3 m.
    pub fn dispersion_mass(&self) -> f64 {
        self.gamma.powi(3) * ELECTRON_MASS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserGratingParams {
    pub photon_energy_ev: f64,
    /// Angular frequency (rad/s).
    pub omega_l: f64,
    /// Grating period (m).
    pub grating_period: f64,
    /// Grating wavevector 2 pi / period (rad/m).
    pub q: f64,
    /// Central longitudinal field amplitude (V/m).
    pub e0_central: f64,
    /// Carrier phase offset (rad).
    pub theta: f64,
}

impl LaserGratingParams {
    pub fn new(photon_energy_ev: f64, grating_period: f64, e0_central: f64, theta: f64) -> Result<Self> {
        if !(photon_energy_ev.is_finite() && photon_energy_ev > 0.0) {
            return Err(Error::domain("photon_energy_ev", "must be positive and finite"));
        }
        if !(grating_period.is_finite() && grating_period > 0.0) {
            return Err(Error::domain("grating_period", "must be positive and finite"));
        }
        if !(e0_central.is_finite() && e0_central >= 0.0) {
            return Err(Error::domain("e0_central", "must be non-negative and finite"));
        }
        if !theta.is_finite() {
            return Err(Error::domain("theta", "must be finite"));
        }
        Ok(LaserGratingParams {
            photon_energy_ev,
            omega_l: photon_energy_ev * EV / HBAR,
            grating_period,
            q: 2.0 * PI / grating_period,
            e0_central,
            theta,
        })
    }

    /// Grating whose phase velocity equals the electron group velocity.
    pub fn phase_matched(
        electron: &ElectronParams,
        photon_energy_ev: f64,
        e0_central: f64,
        theta: f64,
    ) -> Result<Self> {
        let period = phase_matched_period(electron, photon_energy_ev)?;
        Self::new(photon_energy_ev, period, e0_central, theta)
    }

    /// Free-space optical wavelength 2 pi c / omega_L.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.omega_l
    }

    /// Frequency of the grating phase as seen in the frame moving with the
    /// electron, omega_L - q v0. Zero when phase matched.
    pub fn detuning(&self, electron: &ElectronParams) -> f64 {
        self.omega_l - self.q * electron.velocity()
    }

    pub fn with_e0(&self, e0_central: f64) -> Self {
        LaserGratingParams { e0_central, ..*self }
    }
}

/// Grating period for which omega_L / q equals the electron velocity.
pub fn phase_matched_period(electron: &ElectronParams, photon_energy_ev: f64) -> Result<f64> {
    if !(photon_energy_ev.is_finite() && photon_energy_ev > 0.0) {
        return Err(Error::domain("photon_energy_ev", "must be positive and finite"));
    }
    Ok(2.0 * PI * electron.velocity() * HBAR / (photon_energy_ev * EV))
}

/// Omega = e E0 hbar k0 / (2 m omega_L), in joules.
pub fn rabi_frequency(electron: &ElectronParams, laser: &LaserGratingParams, e0_local: f64) -> f64 {
    EV * e0_local * HBAR * electron.k0 / (2.0 * ELECTRON_MASS * laser.omega_l)
}

/// Coupling between the +q/2 and -q/2 sidebands implied by the TDSE
/// coefficients, hbar c alpha0 / 2. Smaller than [`rabi_frequency`] by gamma.
pub fn solver_rabi_frequency(electron: &ElectronParams, laser: &LaserGratingParams, e0_local: f64) -> f64 {
    HBAR * SPEED_OF_LIGHT * alpha0(electron, laser, e0_local) / 2.0
}

pub(crate) fn alpha0(electron: &ElectronParams, laser: &LaserGratingParams, e0: f64) -> f64 {
    EV * e0 * electron.beta / (HBAR * laser.omega_l)
}

pub(crate) fn alpha1(electron: &ElectronParams, laser: &LaserGratingParams, e0: f64) -> f64 {
    EV * e0 / (electron.gamma * ELECTRON_MASS * SPEED_OF_LIGHT * laser.omega_l)
}

pub(crate) fn alpha2(electron: &ElectronParams) -> f64 {
    HBAR / (2.0 * electron.gamma.powi(3) * ELECTRON_MASS * SPEED_OF_LIGHT)
}

/// hbar^2 q^2 / 2m with the rest mass.
pub fn recoil_energy(laser: &LaserGratingParams) -> f64 {
    HBAR * HBAR * laser.q * laser.q / (2.0 * ELECTRON_MASS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    /// Omega from the closed form (J).
    pub rabi_omega: f64,
    /// 1/m
    pub alpha0: f64,
    /// dimensionless
    pub alpha1: f64,
    /// m
    pub alpha2: f64,
    /// hbar^2 q^2 / 2m (J)
    pub recoil_energy: f64,
    /// recoil_energy / (2 Omega); infinite when Omega = 0.
    pub klein_cook_q: f64,
}

pub fn tdse_coefficients(electron: &ElectronParams, laser: &LaserGratingParams) -> DerivedCouplings {
    tdse_coefficients_at(electron, laser, laser.e0_central)
}

pub fn tdse_coefficients_at(electron: &ElectronParams, laser: &LaserGratingParams, e0: f64) -> DerivedCouplings {
    let rabi_omega = rabi_frequency(electron, laser, e0);
    let recoil = recoil_energy(laser);
    DerivedCouplings {
        rabi_omega,
        alpha0: alpha0(electron, laser, e0),
        alpha1: alpha1(electron, laser, e0),
        alpha2: alpha2(electron),
        recoil_energy: recoil,
        klein_cook_q: klein_cook_from(recoil, rabi_omega),
    }
}

fn klein_cook_from(recoil: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        f64::INFINITY
    } else {
        recoil / (2.0 * omega.abs())
    }
}

/// Klein-Cook parameter Q = hbar^2 q^2 / (4 m |Omega|).
///
/// Returns `f64::INFINITY` when the coupling vanishes: with no field every
/// sideband is isolated, which is the Q -> infinity limit.
pub fn klein_cook(derived: &DerivedCouplings) -> f64 {
    klein_cook_from(derived.recoil_energy, derived.rabi_omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelValidity {
    /// |Omega| / (hbar^2 q^2 / 8m)
    pub ratio: f64,
    pub valid: bool,
}

pub fn two_level_validity(derived: &DerivedCouplings) -> TwoLevelValidity {
    let bound = derived.recoil_energy / 4.0;
    let ratio = derived.rabi_omega.abs() / bound;
    TwoLevelValidity {
        ratio,
        valid: ratio < 1.0,
    }
}
