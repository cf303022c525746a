//! Wavepacket envelopes on a uniform co-moving grid.
//!
//! The momentum amplitudes approximate the continuous transform
//! `chi(dk) = (2 pi)^{-1/2} \int chi(xi) exp(-i dk xi) dxi`, sampled on
//! `dk_j = (j - n/2) * 2 pi / L`. They are always stored in increasing `dk`
//! order; FFT ordering never leaks out of this module.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::physics::{ElectronParams, LaserGratingParams};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

type C64 = Complex64;

/// Largest tolerated Gaussian tail mass outside the grid windows.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    xi_min: f64,
    xi_max: f64,
    n_points: usize,
    d_xi: f64,
}

impl Grid {
    pub fn new(xi_min: f64, xi_max: f64, n_points: usize) -> Result<Self> {
        if !(xi_min.is_finite() && xi_max.is_finite() && xi_max > xi_min) {
            return Err(Error::domain("grid bounds", format!("need xi_min < xi_max, got [{xi_min}, {xi_max}]")));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::domain("n_points", format!("must be a power of two >= 2, got {n_points}")));
        }
        Ok(Grid {
            xi_min,
            xi_max,
            n_points,
            d_xi: (xi_max - xi_min) / n_points as f64,
        })
    }

    /// Grid on [-length/2, length/2).
    pub fn centered(length: f64, n_points: usize) -> Result<Self> {
        Self::new(-0.5 * length, 0.5 * length, n_points)
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }
    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn d_xi(&self) -> f64 {
        self.d_xi
    }
    pub fn length(&self) -> f64 {
        self.xi_max - self.xi_min
    }
    pub fn xi(&self, i: usize) -> f64 {
        self.xi_min + i as f64 * self.d_xi
    }
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.xi(i)).collect()
    }
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length()
    }
    pub fn dk_at(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dk()
    }
    /// Monotonically increasing momentum offsets relative to k0.
    pub fn dk_axis(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.dk_at(j)).collect()
    }
    /// Largest representable |dk|.
    pub fn dk_nyquist(&self) -> f64 {
        PI / self.d_xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    fn name(self) -> &'static str {
        match self {
            Representation::Position => "position",
            Representation::Momentum => "momentum",
        }
    }
}

/// Planned forward/inverse transforms for one grid. Reuse it in loops.
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// exp(-i dk_j xi_min) * d_xi / sqrt(2 pi), in increasing-dk order
    phase: Vec<C64>,
    buf: Vec<C64>,
    scratch: Vec<C64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let scale = grid.d_xi() / (2.0 * PI).sqrt();
        let phase = (0..n)
            .map(|j| C64::from_polar(scale, -grid.dk_at(j) * grid.xi_min()))
            .collect();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Spectral {
            grid: *grid,
            forward,
            inverse,
            phase,
            buf: vec![C64::new(0.0, 0.0); n],
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Position amplitudes to momentum amplitudes (increasing dk).
    pub fn forward(&mut self, position: &[C64], momentum: &mut [C64]) {
        let n = self.grid.n_points();
        self.buf.copy_from_slice(position);
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        let half = n / 2;
        for j in 0..n {
            momentum[j] = self.buf[(j + half) % n] * self.phase[j];
        }
    }

    pub fn inverse(&mut self, momentum: &[C64], position: &mut [C64]) {
        let n = self.grid.n_points();
        let half = n / 2;
        for j in 0..n {
            self.buf[(j + half) % n] = momentum[j] / self.phase[j];
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        // 1/phase carries sqrt(2pi)/d_xi; the inverse sum needs dk/sqrt(2pi).
        let scale = self.grid.dk() * self.grid.d_xi() / (2.0 * PI);
        for (p, b) in position.iter_mut().zip(&self.buf) {
            *p = b * scale;
        }
    }

    /// |chi(dk)|^2 of position amplitudes, written into `density`.
    pub fn momentum_density_into(&mut self, position: &[C64], density: &mut [f64]) {
        let n = self.grid.n_points();
        self.buf.copy_from_slice(position);
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        let half = n / 2;
        let s2 = self.phase[0].norm_sqr();
        for j in 0..n {
            density[j] = self.buf[(j + half) % n].norm_sqr() * s2;
        }
    }

    pub fn momentum_density(&mut self, position: &[C64]) -> Vec<f64> {
        let mut d = vec![0.0; position.len()];
        self.momentum_density_into(position, &mut d);
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    pub grid: Grid,
    pub amplitudes: Vec<C64>,
    pub representation: Representation,
    /// The carrier wavenumber removed from the envelope (rad/m).
    pub k_center: f64,
}

impl Wavepacket {
    pub fn new(grid: Grid, amplitudes: Vec<C64>, representation: Representation, k_center: f64) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::domain(
                "amplitudes",
                format!("length {} does not match grid size {}", amplitudes.len(), grid.n_points()),
            ));
        }
        Ok(Wavepacket {
            grid,
            amplitudes,
            representation,
            k_center,
        })
    }

    /// Integration weight of one sample in the current representation.
    pub fn measure(&self) -> f64 {
        match self.representation {
            Representation::Position => self.grid.d_xi(),
            Representation::Momentum => self.grid.dk(),
        }
    }

    /// Sample coordinates in the current representation (xi or dk).
    pub fn axis(&self) -> Vec<f64> {
        match self.representation {
            Representation::Position => self.grid.positions(),
            Representation::Momentum => self.grid.dk_axis(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn normalize(&mut self) {
        let n = self.norm().sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    pub fn require(&self, representation: Representation) -> Result<()> {
        if self.representation == representation {
            Ok(())
        } else {
            Err(Error::Representation {
                expected: representation.name(),
                found: self.representation.name(),
            })
        }
    }

    pub fn to_momentum(&self) -> Wavepacket {
        self.transformed(Representation::Momentum, &mut Spectral::new(&self.grid))
    }

    pub fn to_position(&self) -> Wavepacket {
        self.transformed(Representation::Position, &mut Spectral::new(&self.grid))
    }

    /// Representation change using a pre-planned transform.
    pub fn transformed(&self, target: Representation, spectral: &mut Spectral) -> Wavepacket {
        if self.representation == target {
            return self.clone();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        match target {
            Representation::Momentum => spectral.forward(&self.amplitudes, &mut out),
            Representation::Position => spectral.inverse(&self.amplitudes, &mut out),
        }
        Wavepacket {
            grid: self.grid,
            amplitudes: out,
            representation: target,
            k_center: self.k_center,
        }
    }

    /// First and second central moments of the density along the native axis.
    pub fn moments(&self) -> Moments {
        let w = self.measure();
        let axis = self.axis();
        let dens = self.density();
        let total: f64 = dens.iter().sum::<f64>() * w;
        let mean = axis.iter().zip(&dens).map(|(x, p)| x * p).sum::<f64>() * w / total;
        let variance = axis
            .iter()
            .zip(&dens)
            .map(|(x, p)| (x - mean) * (x - mean) * p)
            .sum::<f64>()
            * w
            / total;
        Moments { mean, variance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Superposition {
    /// Centre of the second component, in units of q.
    pub dk_offset: f64,
    /// Complex amplitude relative to the first component.
    pub weight: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    /// Momentum standard deviation in units of q.
    pub delta_k: f64,
    /// Centre of the first component in units of q.
    pub dk_offset: f64,
    /// Free-drift length L_D applied as a quadratic spectral phase (m).
    pub chirp_drift: f64,
    pub superposition: Option<Superposition>,
}

impl WavepacketSpec {
    pub fn single(delta_k: f64, dk_offset: f64) -> Self {
        WavepacketSpec {
            delta_k,
            dk_offset,
            chirp_drift: 0.0,
            superposition: None,
        }
    }

    /// (|a> + w|b>) with both components of width `delta_k`.
    pub fn pair(delta_k: f64, dk_offset: f64, other_offset: f64, weight: C64) -> Self {
        WavepacketSpec {
            delta_k,
            dk_offset,
            chirp_drift: 0.0,
            superposition: Some(Superposition {
                dk_offset: other_offset,
                weight,
            }),
        }
    }

    fn components(&self) -> Vec<(f64, C64)> {
        let mut c = vec![(self.dk_offset, C64::new(1.0, 0.0))];
        if let Some(s) = self.superposition {
            c.push((s.dk_offset, s.weight));
        }
        c
    }
}

/// Gaussian tail mass outside [lo, hi] for a density with mean `c`, std `s`.
fn gaussian_tail(c: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let r = std::f64::consts::SQRT_2 * s;
    0.5 * libm::erfc((hi - c) / r) + 0.5 * libm::erfc((c - lo) / r)
}

/// Builds the momentum-space Gaussian (optionally a two-component
/// superposition), normalized on the grid, then applies the chirp if any.
pub fn make_gaussian(
    grid: &Grid,
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    spec: &WavepacketSpec,
) -> Result<Wavepacket> {
    if !(spec.delta_k.is_finite() && spec.delta_k > 0.0) {
        return Err(Error::domain("delta_k", format!("must be positive, got {}", spec.delta_k)));
    }
    if !(spec.chirp_drift.is_finite() && spec.chirp_drift >= 0.0) {
        return Err(Error::domain("chirp_drift", "must be non-negative"));
    }
    let q = laser.q;
    let sigma_k = spec.delta_k * q;
    let sigma_z = 1.0 / (2.0 * sigma_k);
    let k_lo = grid.dk_at(0) - 0.5 * grid.dk();
    let k_hi = grid.dk_at(grid.n_points() - 1) + 0.5 * grid.dk();
    let components = spec.components();
    for &(offset, weight) in &components {
        if !(offset.is_finite() && weight.re.is_finite() && weight.im.is_finite()) {
            return Err(Error::domain("superposition", "non-finite offset or weight"));
        }
        let tail = gaussian_tail(offset * q, sigma_k, k_lo, k_hi);
        if tail > TAIL_MASS_LIMIT {
            return Err(Error::Grid(format!(
                "momentum tail mass {tail:.3e} outside |dk| <= {:.4}q for a component at {offset}q with width {}q; refine d_xi",
                grid.dk_nyquist() / q,
                spec.delta_k
            )));
        }
        let ptail = gaussian_tail(0.0, sigma_z, grid.xi_min(), grid.xi_max());
        if ptail > TAIL_MASS_LIMIT {
            return Err(Error::Grid(format!(
                "position tail mass {ptail:.3e} outside the {:.4e} m domain for width {sigma_z:.4e} m; enlarge the domain",
                grid.length()
            )));
        }
    }
    let amp_norm = (2.0 * PI * sigma_k * sigma_k).powf(-0.25);
    let amplitudes: Vec<C64> = grid
        .dk_axis()
        .iter()
        .map(|&dk| {
            components
                .iter()
                .map(|&(offset, weight)| {
                    let d = dk - offset * q;
                    weight * (amp_norm * (-d * d / (4.0 * sigma_k * sigma_k)).exp())
                })
                .sum()
        })
        .collect();
    let mut wp = Wavepacket::new(*grid, amplitudes, Representation::Momentum, electron.k0)?;
    if wp.norm() == 0.0 {
        return Err(Error::domain("superposition", "components cancel to a zero state"));
    }
    wp.normalize();
    if spec.chirp_drift > 0.0 {
        wp = apply_chirp(&wp, spec.chirp_drift, electron)?;
    }
    Ok(wp)
}

/// Quadratic spectral phase accumulated by free drift over `l_d` at the
/// electron velocity: `exp(-i hbar dk^2 t / (2 gamma^3 m))` with `t = l_d / v0`.
pub fn apply_chirp(wp: &Wavepacket, l_d: f64, electron: &ElectronParams) -> Result<Wavepacket> {
    wp.require(Representation::Momentum)?;
    if !(l_d.is_finite() && l_d >= 0.0) {
        return Err(Error::domain("chirp_drift", "must be non-negative"));
    }
    let coef = chirp_coefficient(l_d, electron);
    let mut out = wp.clone();
    for (a, dk) in out.amplitudes.iter_mut().zip(wp.grid.dk_axis()) {
        *a *= C64::from_polar(1.0, -coef * dk * dk);
    }
    Ok(out)
}

/// phi(dk) / dk^2 for a drift over `l_d` (m^2).
pub fn chirp_coefficient(l_d: f64, electron: &ElectronParams) -> f64 {
    HBAR * (l_d / electron.velocity()) / (2.0 * electron.dispersion_mass())
}

/// Position standard deviation of a Gaussian of momentum width `sigma_k`
/// (rad/m) after free evolution with mass `mass` for time `t`.
pub fn free_gaussian_width(sigma_k: f64, mass: f64, t: f64) -> f64 {
    let s0 = 1.0 / (2.0 * sigma_k);
    let spread = HBAR * sigma_k * t / mass;
    (s0 * s0 + spread * spread).sqrt()
}
