//! Lobe separation expected from the optical field gradient.

use crate::constants::HBAR;
use crate::dirac::{CouplingSchedule, ProfileSchedule};
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::physics::{ElectronParams, LaserGratingParams};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UsgPrediction {
    /// (1/hbar) \int grad Omega dt (rad/m): the kick on each sigma_x eigenstate.
    pub kick: f64,
    /// Distance between the two lobes of one sideband, twice the kick.
    pub separation: f64,
}

/// Composite Simpson quadrature of `f` on [0, t] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = t / n as f64;
    let mut acc = f(0.0) + f(t);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Integrates dOmega/dz along the co-moving trajectory of the packet centre.
///
/// The two pseudospin eigenstates feel opposite forces -+ grad Omega, so
/// their lobes sit at +-kick about each sideband centre.
pub fn usg_prediction(
    profile: &FieldProfile,
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    total_time: f64,
) -> Result<UsgPrediction> {
    if !(total_time.is_finite() && total_time >= 0.0) {
        return Err(Error::domain("total_time", "must be non-negative"));
    }
    let schedule = ProfileSchedule::new(profile.clone(), electron, laser);
    Ok(prediction_from(&schedule, total_time))
}

/// As [`usg_prediction`] for an arbitrary coupling schedule.
pub fn prediction_from(schedule: &dyn CouplingSchedule, total_time: f64) -> UsgPrediction {
    let kick = simpson(|t| schedule.at(t).gradient, total_time, 1000) / HBAR;
    UsgPrediction {
        kick,
        separation: 2.0 * kick,
    }
}
