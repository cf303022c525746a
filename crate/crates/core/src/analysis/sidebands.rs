//! Momentum spectra, sideband populations and lobe detection.

use crate::error::{Error, Result};
use crate::wavepacket::{Representation, Spectral, Wavepacket};
use serde::Serialize;

/// Momentum density |chi(dk)|^2 on a uniform increasing axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// rad/m
    pub dk: Vec<f64>,
    pub density: Vec<f64>,
}

impl Spectrum {
    pub fn new(dk: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if dk.len() != density.len() || dk.len() < 2 {
            return Err(Error::domain("spectrum", "need matching axis and density of length >= 2"));
        }
        if !(dk[1] > dk[0]) {
            return Err(Error::domain("spectrum", "axis must increase"));
        }
        Ok(Spectrum { dk, density })
    }

    pub fn from_wavepacket(wp: &Wavepacket) -> Self {
        let m = match wp.representation {
            Representation::Momentum => wp.clone(),
            Representation::Position => wp.to_momentum(),
        };
        Spectrum {
            dk: m.grid.dk_axis(),
            density: m.density(),
        }
    }

    /// As [`Spectrum::from_wavepacket`] for raw position amplitudes, reusing a
    /// planned transform.
    pub fn from_position(amps: &[num_complex::Complex64], spectral: &mut Spectral) -> Self {
        Spectrum {
            dk: spectral.grid().dk_axis(),
            density: spectral.momentum_density(amps),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.dk[1] - self.dk[0]
    }

    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing()
    }

    /// Mirror image dk -> -dk. The axis stays increasing.
    pub fn mirrored(&self) -> Spectrum {
        Spectrum {
            dk: self.dk.iter().rev().map(|k| -k).collect(),
            density: self.density.iter().rev().cloned().collect(),
        }
    }

    /// Gaussian-smoothed copy (standard deviation `sigma` in rad/m).
    pub fn smoothed(&self, sigma: f64) -> Spectrum {
        Spectrum {
            dk: self.dk.clone(),
            density: smooth(&self.density, self.spacing(), sigma),
        }
    }
}

/// Gaussian convolution on a uniform grid, truncated at four standard
/// deviations and renormalized near the edges.
pub fn smooth(values: &[f64], h: f64, sigma: f64) -> Vec<f64> {
    if !(sigma > 0.0) || sigma < 0.25 * h {
        return values.to_vec();
    }
    let r = (4.0 * sigma / h).ceil() as isize;
    let kernel: Vec<f64> = (-r..=r)
        .map(|i| {
            let x = i as f64 * h / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let n = values.len() as isize;
    (0..n)
        .map(|j| {
            let (mut acc, mut w) = (0.0, 0.0);
            for (o, kv) in (-r..=r).zip(&kernel) {
                let i = j + o;
                if i >= 0 && i < n {
                    acc += kv * values[i as usize];
                    w += kv;
                }
            }
            acc / w
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Interpolated position (rad/m).
    pub dk: f64,
    pub height: f64,
}

/// Local maxima above `threshold` times the largest value, refined by a
/// parabola through the three surrounding samples. Sorted by height, highest
/// first.
pub fn find_peaks(axis: &[f64], values: &[f64], threshold: f64) -> Vec<Peak> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let h = axis[1] - axis[0];
    let mut peaks = Vec::new();
    for j in 1..n - 1 {
        let (a, b, c) = (values[j - 1], values[j], values[j + 1]);
        if b > a && b >= c && b > threshold * max {
            let denom = a - 2.0 * b + c;
            let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            peaks.push(Peak {
                dk: axis[j] + shift * h,
                height: b - 0.25 * (a - c) * shift,
            });
        }
    }
    peaks.sort_by(|x, y| y.height.total_cmp(&x.height));
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandOptions {
    /// Window half-width in units of q; at most 1/2.
    pub halfwidth_over_q: f64,
    /// Gaussian smoothing before peak detection (rad/m, 0 = none).
    pub smoothing: f64,
    /// Peaks below this fraction of the window maximum are ignored.
    pub peak_threshold: f64,
    /// Outermost |order|; windows at +-1/2, +-3/2, ... up to this.
    pub max_order: f64,
    /// Two peaks count as separate lobes only if the smoothed minimum between
    /// them is at most this fraction of the lower peak.
    pub max_dip: f64,
}

impl Default for SidebandOptions {
    fn default() -> Self {
        SidebandOptions {
            halfwidth_over_q: 0.5,
            smoothing: 0.0,
            peak_threshold: 0.05,
            max_order: 2.5,
            max_dip: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandWindow {
    /// Centre in units of q.
    pub order: f64,
    pub population: f64,
    /// Population-weighted mean dk inside the window (rad/m); the window
    /// centre when empty.
    pub mean_dk: f64,
    pub peaks: Vec<Peak>,
    /// Smoothed minimum between the two highest peaks over the lower of the
    /// two; `None` with fewer than two peaks.
    pub dip: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandReport {
    pub q: f64,
    pub halfwidth: f64,
    /// Descending order: +max ... -max.
    pub windows: Vec<SidebandWindow>,
    /// 1 - p(+1/2) - p(-1/2)
    pub leakage: f64,
    /// Copied from the options used to build the report.
    pub max_dip: f64,
}

impl SidebandReport {
    pub fn window(&self, order: f64) -> Option<&SidebandWindow> {
        self.windows.iter().find(|w| (w.order - order).abs() < 1e-9)
    }

    pub fn population(&self, order: f64) -> f64 {
        self.window(order).map_or(0.0, |w| w.population)
    }

    pub fn p_plus_half(&self) -> f64 {
        self.population(0.5)
    }

    pub fn p_minus_half(&self) -> f64 {
        self.population(-0.5)
    }

    pub fn total(&self) -> f64 {
        self.windows.iter().map(|w| w.population).sum()
    }
}

/// Fraction of the bin [k - h/2, k + h/2] inside [lo, hi].
fn overlap(k: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let a = (k - 0.5 * h).max(lo);
    let b = (k + 0.5 * h).min(hi);
    ((b - a) / h).clamp(0.0, 1.0)
}

/// Integrates the spectrum over windows centred at odd multiples of q/2.
pub fn sideband_populations(spectrum: &Spectrum, q: f64, opts: &SidebandOptions) -> Result<SidebandReport> {
    if !(q > 0.0) {
        return Err(Error::domain("q", "must be positive"));
    }
    if !(opts.halfwidth_over_q > 0.0 && opts.halfwidth_over_q <= 0.5 + 1e-12) {
        return Err(Error::domain(
            "window half-width",
            format!("must lie in (0, 1/2] of q so windows do not overlap, got {}", opts.halfwidth_over_q),
        ));
    }
    let h = spectrum.spacing();
    let hw = opts.halfwidth_over_q * q;
    // Smoothing margin in samples, so each window is smoothed independently.
    let margin = if opts.smoothing > 0.0 {
        (4.0 * opts.smoothing / h).ceil() as usize
    } else {
        0
    };
    let n_orders = (opts.max_order + 0.5).round() as usize;
    let mut orders = Vec::new();
    for i in (0..n_orders).rev() {
        orders.push(i as f64 + 0.5);
    }
    for i in 0..n_orders {
        orders.push(-(i as f64 + 0.5));
    }
    let mut windows = Vec::with_capacity(orders.len());
    for order in orders {
        let centre = order * q;
        let (lo, hi) = (centre - hw, centre + hw);
        let (mut pop, mut first) = (0.0, 0.0);
        let mut idx = Vec::new();
        for (j, (&k, &d)) in spectrum.dk.iter().zip(&spectrum.density).enumerate() {
            let w = overlap(k, h, lo, hi);
            if w > 0.0 {
                pop += w * d * h;
                first += w * d * h * k;
            }
            if k >= lo && k < hi {
                idx.push(j);
            }
        }
        let (peaks, dip) = if idx.len() >= 3 {
            let (a, b) = (idx[0], idx[idx.len() - 1] + 1);
            let (sa, sb) = (a.saturating_sub(margin), (b + margin).min(spectrum.dk.len()));
            let smoothed = smooth(&spectrum.density[sa..sb], h, opts.smoothing);
            let values = &smoothed[a - sa..b - sa];
            let peaks = find_peaks(&spectrum.dk[a..b], values, opts.peak_threshold);
            let dip = match peaks.as_slice() {
                [p, r, ..] => {
                    let at = |k: f64| (((k - spectrum.dk[a]) / h).round() as usize).min(values.len() - 1);
                    let (i, j) = (at(p.dk.min(r.dk)), at(p.dk.max(r.dk)));
                    let valley = values[i..=j].iter().cloned().fold(f64::INFINITY, f64::min);
                    Some(valley / p.height.min(r.height))
                }
                _ => None,
            };
            (peaks, dip)
        } else {
            (Vec::new(), None)
        };
        windows.push(SidebandWindow {
            order,
            population: pop,
            mean_dk: if pop > 0.0 { first / pop } else { centre },
            peaks,
            dip,
        });
    }
    let mut report = SidebandReport {
        q,
        halfwidth: hw,
        windows,
        leakage: 0.0,
        max_dip: opts.max_dip,
    };
    report.leakage = 1.0 - report.p_plus_half() - report.p_minus_half();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Split {
    /// Distance between the two highest lobes (rad/m); 0 for a single lobe.
    pub value: f64,
    pub single_lobe: bool,
    /// Lobe positions (rad/m), lower first; equal for a single lobe.
    pub lobes: [f64; 2],
}

/// Lobe splitting inside the window of the given order.
/// Peaks separated by a shallow dip (see [`SidebandOptions::max_dip`]) are
/// one lobe.
pub fn measure_split(report: &SidebandReport, order: f64) -> Result<Split> {
    let w = report
        .window(order)
        .ok_or_else(|| Error::domain("order", format!("no window at {order} q")))?;
    let separated = w.dip.is_some_and(|d| d <= report.max_dip);
    match (w.peaks.as_slice(), separated) {
        ([], _) => Err(Error::NoPeak(format!("window at {order} q has no local maximum"))),
        ([a, b, ..], true) => {
            let (lo, hi) = if a.dk <= b.dk { (a.dk, b.dk) } else { (b.dk, a.dk) };
            Ok(Split {
                value: hi - lo,
                single_lobe: false,
                lobes: [lo, hi],
            })
        }
        ([p, ..], _) => Ok(Split {
            value: 0.0,
            single_lobe: true,
            lobes: [p.dk, p.dk],
        }),
    }
}

/// Half the L1 distance between two spectra on the same axis.
pub fn total_variation(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.dk.len() != b.dk.len() || (a.spacing() - b.spacing()).abs() > 1e-9 * a.spacing() {
        return Err(Error::domain("spectra", "axes differ"));
    }
    let h = a.spacing();
    Ok(0.5 * a.density.iter().zip(&b.density).map(|(x, y)| (x - y).abs()).sum::<f64>() * h)
}
