//! CODATA 2018 constants, rounded to 10 significant digits.

/// Elementary charge (C). Also the joule value of one electronvolt.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Electron rest mass (kg).
pub const ELECTRON_MASS: f64 = 9.109383702e-31;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054571817e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Joules per electronvolt.
pub const EV: f64 = ELEMENTARY_CHARGE;
/// Electron rest energy in eV.
pub const ELECTRON_REST_ENERGY_EV: f64 = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT / EV;

pub const NM: f64 = 1e-9;
pub const PS: f64 = 1e-12;
pub const FS: f64 = 1e-15;
