//! Diffraction-regime classification from the packet size relative to the
//! optical period travelled, the electron speed, the Klein-Cook parameter and
//! the presence of a field gradient.

use crate::config::ExperimentParams;
use crate::field::FieldShape;
use crate::physics::{tdse_coefficients_at, two_level_validity, DerivedCouplings};
use crate::wavepacket::free_gaussian_width;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    RamanNathPinem,
    Bragg,
    UltrafastSternGerlach,
    AnomalousBragg,
    Apinem,
    Dla,
    Indeterminate,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::RamanNathPinem => "RamanNathPINEM",
            Regime::Bragg => "Bragg",
            Regime::UltrafastSternGerlach => "UltrafastSternGerlach",
            Regime::AnomalousBragg => "AnomalousBragg",
            Regime::Apinem => "APINEM",
            Regime::Dla => "DLA",
            Regime::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub beta_fast: f64,
    /// Plane-wave when size >= this times beta lambda.
    pub plane_wave: f64,
    /// Point-like when size <= this times beta lambda.
    pub point_particle: f64,
    /// Momentum width (in q) above which Bragg dynamics become anomalous.
    pub anomalous_width: f64,
    /// Smallest Klein-Cook parameter for Bragg behaviour.
    pub klein_cook_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            beta_fast: 0.5,
            plane_wave: 3.0,
            point_particle: 1.0 / 3.0,
            anomalous_width: 0.05,
            klein_cook_min: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeInputs {
    pub beta: f64,
    /// Momentum standard deviation in units of q.
    pub delta_k_over_q: f64,
    pub q: f64,
    /// Optical wavelength (m).
    pub wavelength: f64,
    pub klein_cook: f64,
    pub validity_ratio: f64,
    pub has_gradient: bool,
    /// Pre-chirp drift length (m).
    pub chirp_drift: f64,
    /// Electron velocity (m/s) and dispersion mass (kg), for the chirped size.
    pub velocity: f64,
    pub mass: f64,
}

/// One comparison made while classifying.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    /// `>=`, `<`, `>`, or `flag` for a yes/no property.
    pub relation: &'static str,
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub trace: Vec<Check>,
    pub note: Option<String>,
}

impl RegimeLabel {
    /// One line per comparison, e.g. `size/beta_lambda = 3.97 >= 3 : true`.
    pub fn rationale(&self) -> String {
        let mut lines: Vec<String> = self
            .trace
            .iter()
            .map(|c| match c.relation {
                "flag" => format!("{} : {}", c.name, c.holds),
                _ => format!("{} = {:.6} {} {} : {}", c.name, c.value, c.relation, c.threshold, c.holds),
            })
            .collect();
        if let Some(n) = &self.note {
            lines.push(n.clone());
        }
        lines.join("; ")
    }
}

struct Trace(Vec<Check>);

impl Trace {
    fn ge(&mut self, name: &'static str, value: f64, threshold: f64) -> bool {
        let holds = value >= threshold;
        self.0.push(Check {
            name,
            value,
            relation: ">=",
            threshold,
            holds,
        });
        holds
    }

    fn le(&mut self, name: &'static str, value: f64, threshold: f64) -> bool {
        let holds = value <= threshold;
        self.0.push(Check {
            name,
            value,
            relation: "<=",
            threshold,
            holds,
        });
        holds
    }

    fn gt(&mut self, name: &'static str, value: f64, threshold: f64) -> bool {
        let holds = value > threshold;
        self.0.push(Check {
            name,
            value,
            relation: ">",
            threshold,
            holds,
        });
        holds
    }
}

pub fn classify(x: &RegimeInputs, th: &Thresholds) -> RegimeLabel {
    let mut t = Trace(Vec::new());
    let finite = [x.beta, x.delta_k_over_q, x.q, x.wavelength, x.velocity, x.mass, x.chirp_drift]
        .iter()
        .all(|v| v.is_finite());
    if !finite || !(x.delta_k_over_q > 0.0 && x.q > 0.0 && x.beta > 0.0 && x.wavelength > 0.0) {
        return RegimeLabel {
            regime: Regime::Indeterminate,
            trace: t.0,
            note: Some("non-finite or non-positive kinematic input".into()),
        };
    }
    let beta_lambda = x.beta * x.wavelength;
    let sigma_k = x.delta_k_over_q * x.q;
    let size = 1.0 / (2.0 * sigma_k);
    let fast = t.ge("beta", x.beta, th.beta_fast);
    let ratio = size / beta_lambda;
    if t.le("size/beta_lambda", ratio, th.point_particle) {
        let regime = if x.chirp_drift > 0.0 && x.velocity > 0.0 && x.mass > 0.0 {
            let spread = free_gaussian_width(sigma_k, x.mass, x.chirp_drift / x.velocity);
            if t.gt("chirped_size/beta_lambda", spread / beta_lambda, 1.0) {
                Regime::Apinem
            } else {
                Regime::Dla
            }
        } else {
            Regime::Dla
        };
        return RegimeLabel {
            regime,
            trace: t.0,
            note: None,
        };
    }
    let plane = t.ge("size/beta_lambda", ratio, th.plane_wave);
    let note = if plane {
        None
    } else {
        Some("size between the point and plane-wave cuts; treated as wave-like".to_string())
    };
    if fast {
        return RegimeLabel {
            regime: Regime::RamanNathPinem,
            trace: t.0,
            note,
        };
    }
    if !x.klein_cook.is_finite() || x.klein_cook.is_nan() {
        return RegimeLabel {
            regime: Regime::Indeterminate,
            trace: t.0,
            note: Some("no coupling: Klein-Cook parameter undefined".into()),
        };
    }
    if !t.ge("klein_cook", x.klein_cook, th.klein_cook_min) {
        return RegimeLabel {
            regime: Regime::RamanNathPinem,
            trace: t.0,
            note,
        };
    }
    // Recorded for reference; Bragg presets sit above r = 1.
    t.0.push(Check {
        name: "validity_ratio",
        value: x.validity_ratio,
        relation: "<",
        threshold: 1.0,
        holds: x.validity_ratio < 1.0,
    });
    let regime = if t.gt("delta_k/q", x.delta_k_over_q, th.anomalous_width) {
        Regime::AnomalousBragg
    } else if x.has_gradient {
        t.0.push(Check {
            name: "gradient",
            value: 1.0,
            relation: "flag",
            threshold: 1.0,
            holds: true,
        });
        Regime::UltrafastSternGerlach
    } else {
        t.0.push(Check {
            name: "gradient",
            value: 0.0,
            relation: "flag",
            threshold: 1.0,
            holds: false,
        });
        Regime::Bragg
    };
    RegimeLabel {
        regime,
        trace: t.0,
        note,
    }
}

/// Classifies a configuration; `derived` supplies the coupling (pass the
/// values at the central field).
pub fn classify_regime(params: &ExperimentParams, derived: &DerivedCouplings) -> RegimeLabel {
    classify_with(params, derived, &Thresholds::default())
}

pub fn classify_with(params: &ExperimentParams, derived: &DerivedCouplings, th: &Thresholds) -> RegimeLabel {
    let resolved = match params.resolve() {
        Ok(r) => r,
        Err(e) => {
            return RegimeLabel {
                regime: Regime::Indeterminate,
                trace: Vec::new(),
                note: Some(format!("parameters do not resolve: {e}")),
            }
        }
    };
    let has_gradient = match &resolved.profile.shape {
        FieldShape::Uniform => false,
        FieldShape::LinearGradient { e_lo, e_hi, .. } => e_lo != e_hi,
        FieldShape::Tabulated { e0, .. } => e0.windows(2).any(|w| w[0] != w[1]),
    };
    let inputs = RegimeInputs {
        beta: resolved.electron.beta,
        delta_k_over_q: params.delta_k_over_q,
        q: resolved.laser.q,
        wavelength: resolved.laser.wavelength(),
        klein_cook: derived.klein_cook_q,
        validity_ratio: two_level_validity(derived).ratio,
        has_gradient,
        chirp_drift: resolved.spec.chirp_drift,
        velocity: resolved.electron.velocity(),
        mass: resolved.electron.dispersion_mass(),
    };
    classify(&inputs, th)
}

/// Couplings at the central field of a configuration.
pub fn central_couplings(params: &ExperimentParams) -> crate::Result<DerivedCouplings> {
    let r = params.resolve()?;
    Ok(tdse_coefficients_at(&r.electron, &r.laser, r.profile.field_at(0.0)))
}
