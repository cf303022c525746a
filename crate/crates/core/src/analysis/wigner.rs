//! Discrete Wigner function, binned onto a coarse phase-space grid.
//!
//! W(x, k) = (1/pi) \int psi*(x + y) psi(x - y) exp(2 i k y) dy, so that the
//! k-integral gives |psi(x)|^2 and the x-integral gives |psi(k)|^2. Half-step
//! lags come from a band-limited 2x interpolation of psi. Each output cell
//! holds the cell-averaged value (mass / area), which keeps both marginals
//! exact after binning.
//!
//! States that fill more than a quarter of the periodic domain (heavily
//! chirped packets wrap around it) are evaluated from momentum-space pairs
//! instead, with centres on the half-integer momentum grid. Both marginals
//! stay exact; the half-integer centres carry only interference terms.

use crate::error::{Error, Result};
use crate::wavepacket::{Representation, Wavepacket};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerOptions {
    pub n_z: usize,
    pub n_p: usize,
    /// Samples below this fraction of the peak density are outside the support.
    pub support_threshold: f64,
}

impl Default for WignerOptions {
    fn default() -> Self {
        WignerOptions {
            n_z: 512,
            n_p: 512,
            support_threshold: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    /// Bin centres (m).
    pub z_axis: Vec<f64>,
    /// Bin centres, dk relative to k0 (rad/m).
    pub p_axis: Vec<f64>,
    pub z_width: Vec<f64>,
    pub p_width: Vec<f64>,
    /// Row-major [z][p], cell averages.
    pub values: Vec<f64>,
    /// Largest imaginary residue before it was discarded, relative to the
    /// largest real value.
    pub imag_residue: f64,
    /// Grid index ranges [start, end) of each bin.
    pub z_bins: Vec<(usize, usize)>,
    pub p_bins: Vec<(usize, usize)>,
}

impl WignerGrid {
    pub fn n_z(&self) -> usize {
        self.z_axis.len()
    }

    pub fn n_p(&self) -> usize {
        self.p_axis.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_p() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integral over p of each z-row: the bin-averaged position density.
    pub fn position_marginal(&self) -> Vec<f64> {
        (0..self.n_z())
            .map(|i| (0..self.n_p()).map(|j| self.at(i, j) * self.p_width[j]).sum())
            .collect()
    }

    /// Integral over z of each p-column: the bin-averaged momentum density.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        (0..self.n_p())
            .map(|j| (0..self.n_z()).map(|i| self.at(i, j) * self.z_width[i]).sum())
            .collect()
    }

    /// Direct bin averages of |psi(x)|^2 over the same z bins.
    pub fn reference_position(&self, wp: &Wavepacket) -> Vec<f64> {
        let pos = match wp.representation {
            Representation::Position => wp.clone(),
            Representation::Momentum => wp.to_position(),
        };
        let d = pos.density();
        self.z_bins
            .iter()
            .map(|&(a, b)| d[a..b].iter().sum::<f64>() / (b - a) as f64)
            .collect()
    }

    /// Direct bin averages of |psi(k)|^2 over the same p bins.
    pub fn reference_momentum(&self, wp: &Wavepacket) -> Vec<f64> {
        let mom = match wp.representation {
            Representation::Momentum => wp.clone(),
            Representation::Position => wp.to_momentum(),
        };
        let d = mom.density();
        self.p_bins
            .iter()
            .map(|&(a, b)| d[a..b].iter().sum::<f64>() / (b - a) as f64)
            .collect()
    }
}

/// First and last index (inclusive) above `frac` of the maximum.
fn support(d: &[f64], frac: f64) -> Option<(usize, usize)> {
    let max = d.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let cut = frac * max;
    let lo = d.iter().position(|&v| v > cut)?;
    let hi = d.iter().rposition(|&v| v > cut)?;
    Some((lo, hi))
}

/// Splits [lo, hi] into at most `n` contiguous bins of equal sample count
/// (the last may be shorter).
fn bins(lo: usize, hi: usize, n: usize) -> Vec<(usize, usize)> {
    let count = hi - lo + 1;
    let size = count.div_ceil(n.max(1));
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = (a + size).min(hi + 1);
        out.push((a, b));
        a = b;
    }
    out
}

pub fn wigner(wp: &Wavepacket, opts: &WignerOptions) -> Result<WignerGrid> {
    if opts.n_z < 1 || opts.n_p < 1 {
        return Err(Error::domain("wigner size", "need at least one bin per axis"));
    }
    let grid = wp.grid;
    let n = grid.n_points();
    let h = grid.d_xi();
    let dk = grid.dk();
    let (pos, mom) = match wp.representation {
        Representation::Position => (wp.clone(), wp.to_momentum()),
        Representation::Momentum => (wp.to_position(), wp.clone()),
    };
    let (z_lo, z_hi) = support(&pos.density(), opts.support_threshold)
        .ok_or_else(|| Error::domain("wavepacket", "zero state has no Wigner function"))?;
    let (p_lo, p_hi) = support(&mom.density(), opts.support_threshold).unwrap_or((0, n - 1));
    // Half-step sampling is alias-free only when the spectrum stays inside the
    // central half of the momentum window.
    let quarter = n / 4;
    if p_lo < n / 2 - quarter || p_hi >= n / 2 + quarter {
        return Err(Error::Grid(format!(
            "momentum support [{:.3e}, {:.3e}] rad/m exceeds half the Nyquist range {:.3e}; refine d_xi",
            grid.dk_at(p_lo),
            grid.dk_at(p_hi),
            grid.dk_nyquist()
        )));
    }

    let width = z_hi - z_lo;
    if 2 * width + 8 > n / 2 {
        // Pairs are cheap here, so the support is cut much deeper: cross
        // terms scale with the amplitude, not the density, of the tails.
        let deep = support(&mom.density(), opts.support_threshold.min(1e-24)).unwrap_or((p_lo, p_hi));
        return wigner_from_momentum(&pos, deep, opts);
    }

    // psi2[2n] = psi[n], psi2[2n+1] interpolated.
    let mut planner = FftPlanner::<f64>::new();
    let mut spec = pos.amplitudes.clone();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![C64::new(0.0, 0.0); 2 * n];
    let half = n / 2;
    padded[..half].copy_from_slice(&spec[..half]);
    padded[2 * n - half + 1..].copy_from_slice(&spec[half + 1..]);
    padded[half] = spec[half] * 0.5;
    padded[2 * n - half] = spec[half] * 0.5;
    planner.plan_fft_inverse(2 * n).process(&mut padded);
    let psi2: Vec<C64> = padded.iter().map(|v| v / n as f64).collect();

    let max_lag = (2 * width + 8).min(n / 2) as isize;
    let two_n = 2 * n as isize;
    let z_bins = bins(z_lo, z_hi, opts.n_z);
    let p_bins = bins(p_lo, p_hi, opts.n_p);
    let inverse = planner.plan_fft_inverse(n);
    let norm = h / (2.0 * PI);
    let mut values = vec![0.0; z_bins.len() * p_bins.len()];
    let mut imag_residue: f64 = 0.0;
    let mut real_max: f64 = 0.0;
    let mut f = vec![C64::new(0.0, 0.0); n];
    for (bi, &(a, b)) in z_bins.iter().enumerate() {
        f.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for row in a..b {
            let c = 2 * row as isize;
            for m in -max_lag..=max_lag {
                let i1 = (c + m).rem_euclid(two_n) as usize;
                let i2 = (c - m).rem_euclid(two_n) as usize;
                let w = if m.unsigned_abs() == n / 2 { 0.5 } else { 1.0 };
                f[m.rem_euclid(n as isize) as usize] += psi2[i1].conj() * psi2[i2] * w;
            }
        }
        inverse.process(&mut f);
        // Row mass: h * sum over rows of W(x_row, k_j).
        let zw = (b - a) as f64 * h;
        for (bj, &(pa, pb)) in p_bins.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in pa..pb {
                // Signed momentum index j - n/2 maps to FFT slot (j - n/2) mod n.
                let slot = (j as isize - half as isize).rem_euclid(n as isize) as usize;
                acc += f[slot];
            }
            let mass = acc * (norm * h * dk);
            let pw = (pb - pa) as f64 * dk;
            let v = mass / (zw * pw);
            imag_residue = imag_residue.max(v.im.abs());
            real_max = real_max.max(v.re.abs());
            values[bi * p_bins.len() + bj] = v.re;
        }
    }
    let z_axis = z_bins
        .iter()
        .map(|&(a, b)| grid.xi(a) + 0.5 * (b - a - 1) as f64 * h)
        .collect();
    let p_axis = p_bins
        .iter()
        .map(|&(a, b)| grid.dk_at(a) + 0.5 * (b - a - 1) as f64 * dk)
        .collect();
    Ok(WignerGrid {
        z_axis,
        p_axis,
        z_width: z_bins.iter().map(|&(a, b)| (b - a) as f64 * h).collect(),
        p_width: p_bins.iter().map(|&(a, b)| (b - a) as f64 * dk).collect(),
        values,
        imag_residue: if real_max > 0.0 { imag_residue / real_max } else { 0.0 },
        z_bins,
        p_bins,
    })
}

/// Wigner function from momentum pairs over the whole periodic domain.
fn wigner_from_momentum(pos: &Wavepacket, (p_lo, p_hi): (usize, usize), opts: &WignerOptions) -> Result<WignerGrid> {
    let grid = pos.grid;
    let n = grid.n_points();
    let half = n / 2;
    let h = grid.d_xi();
    let dk = grid.dk();
    let mut planner = FftPlanner::<f64>::new();
    let mut spec = pos.amplitudes.clone();
    planner.plan_fft_forward(n).process(&mut spec);
    // phi[j] pairs with dk_at(j); psi_r = (-1)^r / n sum_j phi[j] e^{2 pi i j r / n}.
    let phi: Vec<C64> = (0..n).map(|j| spec[(j + half) % n]).collect();

    let z_bins = bins(0, n - 1, opts.n_z);
    let p_bins = bins(p_lo, p_hi, opts.n_p);
    let inverse = planner.plan_fft_inverse(n);
    // Centre c2 = j1 + j2 carries momentum width dk/2, hence the factor 2.
    let scale = 2.0 / (n as f64 * n as f64 * dk);
    let mut values = vec![0.0; z_bins.len() * p_bins.len()];
    let mut imag_residue: f64 = 0.0;
    let mut real_max: f64 = 0.0;
    let mut g = vec![C64::new(0.0, 0.0); n];
    for (bj, &(pa, pb)) in p_bins.iter().enumerate() {
        g.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for c2 in 2 * pa..2 * pb {
            // j1 + j2 = c2 with both inside the support.
            for j1 in p_lo.max(c2.saturating_sub(p_hi))..=p_hi.min(c2 - p_lo) {
                let j2 = c2 - j1;
                let s = (j2 as isize - j1 as isize).rem_euclid(n as isize) as usize;
                g[s] += phi[j1].conj() * phi[j2];
            }
        }
        inverse.process(&mut g);
        let pw = (pb - pa) as f64 * dk;
        for (bi, &(a, b)) in z_bins.iter().enumerate() {
            // Mass of the cell: sum over rows of W h, times dk/2 per centre.
            let acc: C64 = g[a..b].iter().sum();
            let v = acc * (scale * h * 0.5 * dk) / ((b - a) as f64 * h * pw);
            imag_residue = imag_residue.max(v.im.abs());
            real_max = real_max.max(v.re.abs());
            values[bi * p_bins.len() + bj] = v.re;
        }
    }
    Ok(WignerGrid {
        z_axis: z_bins.iter().map(|&(a, b)| grid.xi(a) + 0.5 * (b - a - 1) as f64 * h).collect(),
        p_axis: p_bins.iter().map(|&(a, b)| grid.dk_at(a) + 0.5 * (b - a - 1) as f64 * dk).collect(),
        z_width: z_bins.iter().map(|&(a, b)| (b - a) as f64 * h).collect(),
        p_width: p_bins.iter().map(|&(a, b)| (b - a) as f64 * dk).collect(),
        values,
        imag_residue: if real_max > 0.0 { imag_residue / real_max } else { 0.0 },
        z_bins,
        p_bins,
    })
}
