//! Longitudinal field amplitude and phase profiles E0(xi), theta(xi) in the
//! co-moving frame.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldShape {
    Uniform,
    /// Linear ramp from `e_lo` at `xi_lo` to `e_hi` at `xi_hi`, clamped outside.
    LinearGradient { xi_lo: f64, xi_hi: f64, e_lo: f64, e_hi: f64 },
    /// Piecewise-linear table on increasing `xi`, clamped outside.
    Tabulated { xi: Vec<f64>, e0: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseProfile {
    Constant(f64),
    Linear { theta0: f64, slope: f64 },
}

impl PhaseProfile {
    pub fn at(&self, xi: f64) -> f64 {
        match *self {
            PhaseProfile::Constant(t) => t,
            PhaseProfile::Linear { theta0, slope } => theta0 + slope * xi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub shape: FieldShape,
    /// Amplitude of the uniform profile; informational for the other shapes.
    pub e0_central: f64,
    pub theta: PhaseProfile,
}

impl FieldProfile {
    pub fn uniform(e0: f64, theta: f64) -> Result<Self> {
        if !(e0.is_finite() && e0 >= 0.0) {
            return Err(Error::domain("e0", "must be non-negative and finite"));
        }
        Ok(FieldProfile {
            shape: FieldShape::Uniform,
            e0_central: e0,
            theta: PhaseProfile::Constant(theta),
        })
    }

    pub fn linear_gradient(xi_lo: f64, xi_hi: f64, e_lo: f64, e_hi: f64, theta: f64) -> Result<Self> {
        if !(xi_lo.is_finite() && xi_hi.is_finite() && xi_hi > xi_lo) {
            return Err(Error::domain("gradient window", "need xi_lo < xi_hi"));
        }
        if !(e_lo.is_finite() && e_hi.is_finite() && e_lo >= 0.0 && e_hi >= 0.0) {
            return Err(Error::domain("gradient amplitudes", "must be non-negative and finite"));
        }
        let shape = FieldShape::LinearGradient { xi_lo, xi_hi, e_lo, e_hi };
        let mut p = FieldProfile {
            shape,
            e0_central: 0.0,
            theta: PhaseProfile::Constant(theta),
        };
        p.e0_central = p.field_at(0.0);
        Ok(p)
    }

    pub fn tabulated(xi: Vec<f64>, e0: Vec<f64>, theta: f64) -> Result<Self> {
        if xi.len() < 2 || xi.len() != e0.len() {
            return Err(Error::domain("tabulated profile", "need at least two (xi, e0) pairs of equal length"));
        }
        if xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated profile", "xi must be strictly increasing"));
        }
        if e0.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::domain("tabulated profile", "amplitudes must be non-negative and finite"));
        }
        let mut p = FieldProfile {
            shape: FieldShape::Tabulated { xi, e0 },
            e0_central: 0.0,
            theta: PhaseProfile::Constant(theta),
        };
        p.e0_central = p.field_at(0.0);
        Ok(p)
    }

    pub fn with_theta(mut self, theta: PhaseProfile) -> Self {
        self.theta = theta;
        self
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.shape, FieldShape::Uniform)
    }

    /// E0 at co-moving position `xi` (V/m).
    pub fn field_at(&self, xi: f64) -> f64 {
        match &self.shape {
            FieldShape::Uniform => self.e0_central,
            FieldShape::LinearGradient { xi_lo, xi_hi, e_lo, e_hi } => {
                if xi <= *xi_lo {
                    *e_lo
                } else if xi >= *xi_hi {
                    *e_hi
                } else {
                    e_lo + (e_hi - e_lo) * (xi - xi_lo) / (xi_hi - xi_lo)
                }
            }
            FieldShape::Tabulated { xi: xs, e0 } => {
                let n = xs.len();
                if xi <= xs[0] {
                    return e0[0];
                }
                if xi >= xs[n - 1] {
                    return e0[n - 1];
                }
                let k = xs.partition_point(|&x| x <= xi) - 1;
                let t = (xi - xs[k]) / (xs[k + 1] - xs[k]);
                e0[k] + t * (e0[k + 1] - e0[k])
            }
        }
    }

    /// dE0/dxi (V/m^2); one-sided inside the ramp, zero where clamped.
    pub fn gradient_at(&self, xi: f64) -> f64 {
        match &self.shape {
            FieldShape::Uniform => 0.0,
            FieldShape::LinearGradient { xi_lo, xi_hi, e_lo, e_hi } => {
                if xi < *xi_lo || xi > *xi_hi {
                    0.0
                } else {
                    (e_hi - e_lo) / (xi_hi - xi_lo)
                }
            }
            FieldShape::Tabulated { xi: xs, e0 } => {
                let n = xs.len();
                if xi < xs[0] || xi > xs[n - 1] {
                    return 0.0;
                }
                let k = (xs.partition_point(|&x| x <= xi).max(1) - 1).min(n - 2);
                (e0[k + 1] - e0[k]) / (xs[k + 1] - xs[k])
            }
        }
    }

    pub fn theta_at(&self, xi: f64) -> f64 {
        self.theta.at(xi)
    }

    /// The same shape with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let shape = match &self.shape {
            FieldShape::Uniform => FieldShape::Uniform,
            FieldShape::LinearGradient { xi_lo, xi_hi, e_lo, e_hi } => FieldShape::LinearGradient {
                xi_lo: *xi_lo,
                xi_hi: *xi_hi,
                e_lo: e_lo * factor,
                e_hi: e_hi * factor,
            },
            FieldShape::Tabulated { xi, e0 } => FieldShape::Tabulated {
                xi: xi.clone(),
                e0: e0.iter().map(|e| e * factor).collect(),
            },
        };
        FieldProfile {
            shape,
            e0_central: self.e0_central * factor,
            theta: self.theta,
        }
    }
}
