//! Observables computed from wavepackets and lattice states.

pub mod regime;
pub mod sidebands;
pub mod usg;
pub mod wigner;

pub use regime::{classify, classify_regime, Regime, RegimeInputs, RegimeLabel, Thresholds};
pub use sidebands::{
    find_peaks, measure_split, sideband_populations, total_variation, Peak, SidebandOptions, SidebandReport,
    SidebandWindow, Spectrum, Split,
};
pub use usg::{usg_prediction, UsgPrediction};
pub use wigner::{wigner, WignerGrid, WignerOptions};
