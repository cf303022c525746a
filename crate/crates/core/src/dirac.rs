//! Reduced synthetic-momentum-lattice model.
//!
//! The state is a set of sideband envelopes c_s(dk), each centred at momentum
//! `order_s * q` relative to k0. Orders are half-integers and the count is
//! even (two-level case: +1/2, -1/2). Rows are stored in descending order, so
//! component 0 of the two-level lattice is the |+q/2> amplitude.
//!
//! The Hamiltonian between neighbouring rows is `<k+q|H|k> = -kappa (Omega + G z)`
//! with `kappa = exp(i(theta - pi/2))` and `z = i d/d(dk)`; this is the
//! continuum limit of the finite-difference operator used by the TDSE solver,
//! so theta = pi/2 gives the real coupling `-Omega sigma_x`.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::physics::{solver_rabi_frequency, ElectronParams, LaserGratingParams};
use crate::wavepacket::{Representation, Wavepacket};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracParams {
    /// Coupling magnitude |Omega| (J).
    pub omega: f64,
    /// Grating wavevector (rad/m).
    pub q: f64,
    /// Mass in the on-site dispersion (kg).
    pub mass_eff: f64,
    /// Grating phase, same convention as the TDSE field.
    pub theta: f64,
    /// Central wavenumber; only used by `momentum_correction`.
    pub k0: f64,
    /// Keep the common hbar^2 dk^2 / 2M term on every sideband.
    pub include_scalar: bool,
    /// Scale each link by 1 + k_link / k0, the first-order momentum dependence
    /// of the coupling that the large-k0 limit drops.
    pub momentum_correction: bool,
}

impl DiracParams {
    pub fn new(omega: f64, q: f64, mass_eff: f64, theta: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::domain("omega", "must be non-negative and finite"));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::domain("q", "must be positive"));
        }
        if !(mass_eff.is_finite() && mass_eff > 0.0) {
            return Err(Error::domain("mass_eff", "must be positive"));
        }
        if !theta.is_finite() {
            return Err(Error::domain("theta", "must be finite"));
        }
        Ok(DiracParams {
            omega,
            q,
            mass_eff,
            theta,
            k0: f64::INFINITY,
            include_scalar: false,
            momentum_correction: false,
        })
    }

    /// Parameters that reproduce the TDSE coefficients: the solver's coupling
    /// hbar c alpha0 / 2 and the dispersion mass gamma^3 m.
    pub fn from_tdse(electron: &ElectronParams, laser: &LaserGratingParams, e0: f64) -> Result<Self> {
        let mut p = Self::new(
            solver_rabi_frequency(electron, laser, e0),
            laser.q,
            electron.dispersion_mass(),
            laser.theta,
        )?;
        p.k0 = electron.k0;
        Ok(p)
    }

    pub fn with_omega(self, omega: f64) -> Self {
        DiracParams { omega, ..self }
    }

    /// Unit phase of the link coupling, exp(i(theta - pi/2)).
    pub fn link_phase(&self) -> C64 {
        C64::from_polar(1.0, self.theta - FRAC_PI_2)
    }

    /// On-site energy (J) of a sideband of the given order at offset `dk`.
    pub fn onsite_energy(&self, order: f64, dk: f64) -> f64 {
        let c = HBAR * HBAR / (2.0 * self.mass_eff);
        let k = order * self.q + dk;
        let mut e = c * (k * k - 0.25 * self.q * self.q);
        if !self.include_scalar {
            e -= c * dk * dk;
        }
        e
    }

    fn link_factor(&self, lower_order: f64, dk: f64) -> f64 {
        if self.momentum_correction && self.k0.is_finite() {
            1.0 + ((lower_order + 0.5) * self.q + dk) / self.k0
        } else {
            1.0
        }
    }
}

/// Instantaneous coupling at the packet: |Omega| (J) and dOmega/dz (J/m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coupling {
    pub omega: f64,
    pub gradient: f64,
}

pub trait CouplingSchedule: Sync {
    fn at(&self, t: f64) -> Coupling;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoupling(pub Coupling);

impl ConstantCoupling {
    pub fn uniform(omega: f64) -> Self {
        ConstantCoupling(Coupling { omega, gradient: 0.0 })
    }
}

impl CouplingSchedule for ConstantCoupling {
    fn at(&self, _t: f64) -> Coupling {
        self.0
    }
}

/// Omega and its gradient sampled from a field profile along the classical
/// co-moving trajectory `z(t) = z0 + drift * t`.
#[derive(Debug, Clone)]
pub struct ProfileSchedule {
    pub profile: FieldProfile,
    /// Coupling per unit field (J per V/m).
    pub omega_per_field: f64,
    pub z0: f64,
    pub drift: f64,
}

impl ProfileSchedule {
    pub fn new(profile: FieldProfile, electron: &ElectronParams, laser: &LaserGratingParams) -> Self {
        ProfileSchedule {
            profile,
            omega_per_field: solver_rabi_frequency(electron, laser, 1.0),
            z0: 0.0,
            drift: 0.0,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.z0 + self.drift * t
    }
}

impl CouplingSchedule for ProfileSchedule {
    fn at(&self, t: f64) -> Coupling {
        let z = self.position(t);
        Coupling {
            omega: self.omega_per_field * self.profile.field_at(z),
            gradient: self.omega_per_field * self.profile.gradient_at(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinorLattice {
    /// Offsets within one sideband cell (rad/m), uniformly spaced.
    pub dk_axis: Vec<f64>,
    /// Half-integer sideband orders in units of q, descending.
    pub orders: Vec<f64>,
    /// Row-major [sideband][dk].
    pub amplitudes: Vec<C64>,
}

impl SpinorLattice {
    pub fn new(n_sidebands: usize, dk_axis: Vec<f64>) -> Result<Self> {
        if n_sidebands < 2 || n_sidebands % 2 == 1 {
            return Err(Error::domain("n_sidebands", "need an even count of at least 2"));
        }
        if dk_axis.is_empty() {
            return Err(Error::domain("dk_axis", "must not be empty"));
        }
        if dk_axis.len() > 1 {
            let h = dk_axis[1] - dk_axis[0];
            let uniform = h > 0.0
                && dk_axis
                    .windows(2)
                    .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
            if !uniform {
                return Err(Error::domain("dk_axis", "must be uniformly increasing"));
            }
        }
        let top = (n_sidebands as f64 - 1.0) / 2.0;
        let orders = (0..n_sidebands).map(|s| top - s as f64).collect();
        let n = n_sidebands * dk_axis.len();
        Ok(SpinorLattice {
            dk_axis,
            orders,
            amplitudes: vec![C64::new(0.0, 0.0); n],
        })
    }

    /// Two-level lattice (+q/2, -q/2).
    pub fn two_level(dk_axis: Vec<f64>) -> Result<Self> {
        Self::new(2, dk_axis)
    }

    pub fn n_sidebands(&self) -> usize {
        self.orders.len()
    }

    pub fn n_dk(&self) -> usize {
        self.dk_axis.len()
    }

    /// Quadrature weight of one dk sample; 1 for a single-point lattice.
    pub fn weight(&self) -> f64 {
        if self.dk_axis.len() > 1 {
            self.dk_axis[1] - self.dk_axis[0]
        } else {
            1.0
        }
    }

    /// Row index of the sideband with the given order.
    pub fn sideband(&self, order: f64) -> Option<usize> {
        self.orders.iter().position(|&o| (o - order).abs() < 1e-9)
    }

    pub fn component(&self, s: usize) -> &[C64] {
        let n = self.n_dk();
        &self.amplitudes[s * n..(s + 1) * n]
    }

    pub fn component_mut(&mut self, s: usize) -> &mut [C64] {
        let n = self.n_dk();
        &mut self.amplitudes[s * n..(s + 1) * n]
    }

    pub fn population(&self, s: usize) -> f64 {
        self.component(s).iter().map(|a| a.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_sidebands()).map(|s| self.population(s)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("spinor", "cannot normalize a zero state"));
        }
        let s = 1.0 / n.sqrt();
        for a in &mut self.amplitudes {
            *a *= s;
        }
        Ok(())
    }

    /// Population-weighted mean dk of one sideband (rad/m); 0 if empty.
    pub fn mean_dk(&self, s: usize) -> f64 {
        let (mut acc, mut tot) = (0.0, 0.0);
        for (a, k) in self.component(s).iter().zip(&self.dk_axis) {
            let w = a.norm_sqr();
            acc += w * k;
            tot += w;
        }
        if tot > 0.0 {
            acc / tot
        } else {
            0.0
        }
    }

    /// Fills each listed sideband with a Gaussian envelope of standard
    /// deviation `sigma` (rad/m) about dk = 0, times the given weight, then
    /// normalizes.
    pub fn gaussian(n_sidebands: usize, dk_axis: Vec<f64>, sigma: f64, weights: &[(f64, C64)]) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::domain("sigma", "must be positive"));
        }
        let mut lat = Self::new(n_sidebands, dk_axis)?;
        for &(order, w) in weights {
            let s = lat
                .sideband(order)
                .ok_or_else(|| Error::domain("weights", format!("no sideband of order {order}")))?;
            let axis = lat.dk_axis.clone();
            for (a, k) in lat.component_mut(s).iter_mut().zip(axis) {
                *a += w * (-k * k / (4.0 * sigma * sigma)).exp();
            }
        }
        lat.normalize()?;
        Ok(lat)
    }

    /// Samples a momentum-representation wavepacket onto the lattice. The grid
    /// spacing must divide q; the cell axis keeps the samples with
    /// |dk| <= `support` (and always inside [-q/2, q/2)).
    pub fn from_wavepacket(wp: &Wavepacket, q: f64, n_sidebands: usize, support: f64) -> Result<Self> {
        wp.require(Representation::Momentum)?;
        let grid = wp.grid;
        let dk = grid.dk();
        let ratio = q / dk;
        let shift = ratio.round() as i64;
        if (ratio - shift as f64).abs() > 1e-6 || shift < 1 {
            return Err(Error::Grid(format!(
                "grid spacing {dk:.6e} does not divide q = {q:.6e}; use a domain that is a whole number of periods"
            )));
        }
        let half = (grid.n_points() / 2) as i64;
        let cell: Vec<i64> = (-shift / 2..shift - shift / 2)
            .filter(|&j| (j as f64 * dk).abs() <= support)
            .collect();
        let axis: Vec<f64> = cell.iter().map(|&j| j as f64 * dk).collect();
        let mut lat = Self::new(n_sidebands, axis)?;
        let orders = lat.orders.clone();
        for (s, order) in orders.iter().enumerate() {
            let base = (order * shift as f64).round() as i64;
            for (slot, &j) in lat.component_mut(s).iter_mut().zip(&cell) {
                let idx = base + j + half;
                if idx >= 0 && (idx as usize) < grid.n_points() {
                    *slot = wp.amplitudes[idx as usize];
                }
            }
        }
        Ok(lat)
    }

    /// Flattened spectrum: (order q + dk, |c|^2) for every sample, sorted by
    /// momentum.
    pub fn spectrum(&self, q: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.amplitudes.len());
        for s in (0..self.n_sidebands()).rev() {
            for (a, k) in self.component(s).iter().zip(&self.dk_axis) {
                out.push((self.orders[s] * q + k, a.norm_sqr()));
            }
        }
        out
    }
}

/// d/d(dk) with a fourth-order central stencil and zero padding. The matrix is
/// antisymmetric, so `i D` is Hermitian.
fn derivative(src: &[C64], h: f64, out: &mut [C64]) {
    let n = src.len();
    let at = |j: isize| -> C64 {
        if j < 0 || j as usize >= n {
            C64::new(0.0, 0.0)
        } else {
            src[j as usize]
        }
    };
    let c = 1.0 / (12.0 * h);
    for j in 0..n {
        let i = j as isize;
        out[j] = (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) * c;
    }
}

struct Operator<'a> {
    orders: &'a [f64],
    dk: &'a [f64],
    onsite: Vec<f64>,
    /// link_factor per (link, dk)
    factors: Vec<f64>,
    kappa: C64,
    h: f64,
    scratch: Vec<C64>,
}

impl<'a> Operator<'a> {
    fn new(params: &'a DiracParams, lattice: &'a SpinorLattice) -> Self {
        let nd = lattice.n_dk();
        let ns = lattice.n_sidebands();
        let mut onsite = Vec::with_capacity(ns * nd);
        for &o in &lattice.orders {
            onsite.extend(lattice.dk_axis.iter().map(|&k| params.onsite_energy(o, k) / HBAR));
        }
        let mut factors = Vec::with_capacity((ns - 1) * nd);
        for s in 0..ns - 1 {
            let lower = lattice.orders[s + 1];
            factors.extend(lattice.dk_axis.iter().map(|&k| params.link_factor(lower, k)));
        }
        Operator {
            orders: &lattice.orders,
            dk: &lattice.dk_axis,
            onsite,
            factors,
            kappa: params.link_phase(),
            h: lattice.weight(),
            scratch: vec![C64::new(0.0, 0.0); nd],
        }
    }

    /// out = -i H psi / hbar.
    fn apply(&mut self, c: Coupling, psi: &[C64], out: &mut [C64]) {
        let nd = self.dk.len();
        let ns = self.orders.len();
        let mi = C64::new(0.0, -1.0);
        for (o, (p, e)) in out.iter_mut().zip(psi.iter().zip(&self.onsite)) {
            *o = mi * p * e;
        }
        let w = c.omega / HBAR;
        let g = c.gradient / HBAR;
        let use_grad = g != 0.0 && nd > 1;
        // Row s couples to row s+1 with -kappa, and back with -conj(kappa).
        let up = mi * (-self.kappa);
        let down = mi * (-self.kappa.conj());
        for s in 0..ns - 1 {
            let f = &self.factors[s * nd..(s + 1) * nd];
            let (lo, hi) = (s * nd, (s + 1) * nd);
            for j in 0..nd {
                let a = psi[lo + j];
                let b = psi[hi + j];
                let wf = w * f[j];
                out[lo + j] += up * (b * wf);
                out[hi + j] += down * (a * wf);
            }
            if use_grad {
                // z = i d/d(dk)
                let i_unit = C64::new(0.0, g);
                derivative(&psi[hi..hi + nd], self.h, &mut self.scratch);
                for j in 0..nd {
                    out[lo + j] += up * (i_unit * self.scratch[j]);
                }
                derivative(&psi[lo..lo + nd], self.h, &mut self.scratch);
                for j in 0..nd {
                    out[hi + j] += down * (i_unit * self.scratch[j]);
                }
            }
        }
    }
}

/// d psi / dt for the current coupling, as a lattice of the same shape.
pub fn coupled_mode_rhs(state: &SpinorLattice, params: &DiracParams, coupling: Coupling) -> SpinorLattice {
    let mut op = Operator::new(params, state);
    let mut out = state.clone();
    op.apply(coupling, &state.amplitudes, &mut out.amplitudes);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracOptions {
    /// s
    pub total_time: f64,
    pub n_steps: usize,
    /// Record populations every this many steps (the last step always).
    pub record_every: usize,
    /// Also keep the full lattice at each record.
    pub keep_states: bool,
    pub norm_tolerance: f64,
}

impl DiracOptions {
    pub fn new(total_time: f64, n_steps: usize) -> Self {
        DiracOptions {
            total_time,
            n_steps,
            record_every: 1,
            keep_states: false,
            norm_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiracTrajectory {
    pub times: Vec<f64>,
    /// [record][sideband]
    pub populations: Vec<Vec<f64>>,
    /// [record][sideband] mean dk (rad/m)
    pub mean_dk: Vec<Vec<f64>>,
    pub states: Vec<SpinorLattice>,
    pub final_state: SpinorLattice,
    pub max_norm_drift: f64,
}

impl DiracTrajectory {
    /// Population history of one sideband.
    pub fn series(&self, s: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[s]).collect()
    }
}

/// Fixed-step classical Runge-Kutta integration.
pub fn dirac_evolve(
    initial: &SpinorLattice,
    params: &DiracParams,
    schedule: &dyn CouplingSchedule,
    opts: &DiracOptions,
) -> Result<DiracTrajectory> {
    if !(opts.total_time.is_finite() && opts.total_time > 0.0) {
        return Err(Error::domain("total_time", "must be positive"));
    }
    if opts.n_steps == 0 || opts.record_every == 0 {
        return Err(Error::domain("n_steps", "n_steps and record_every must be at least 1"));
    }
    let mut op = Operator::new(params, initial);
    let n = initial.amplitudes.len();
    let dt = opts.total_time / opts.n_steps as f64;
    let mut psi = initial.amplitudes.clone();
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let norm0 = initial.norm();
    let mut current = initial.clone();

    let mut traj = DiracTrajectory {
        times: vec![0.0],
        populations: vec![initial.populations()],
        mean_dk: vec![(0..initial.n_sidebands()).map(|s| initial.mean_dk(s)).collect()],
        states: if opts.keep_states { vec![initial.clone()] } else { Vec::new() },
        final_state: initial.clone(),
        max_norm_drift: 0.0,
    };

    for step in 1..=opts.n_steps {
        let t0 = dt * (step - 1) as f64;
        let c0 = schedule.at(t0);
        let ch = schedule.at(t0 + 0.5 * dt);
        let c1 = schedule.at(t0 + dt);
        op.apply(c0, &psi, &mut k1);
        for i in 0..n {
            tmp[i] = psi[i] + k1[i] * (0.5 * dt);
        }
        op.apply(ch, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = psi[i] + k2[i] * (0.5 * dt);
        }
        op.apply(ch, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        op.apply(c1, &tmp, &mut k4);
        let w = dt / 6.0;
        for i in 0..n {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        let last = step == opts.n_steps;
        if last || step % opts.record_every == 0 {
            current.amplitudes.copy_from_slice(&psi);
            let drift = (current.norm() - norm0).abs();
            traj.max_norm_drift = traj.max_norm_drift.max(drift);
            if !(drift <= opts.norm_tolerance) {
                return Err(Error::StepTooLarge {
                    drift,
                    tolerance: opts.norm_tolerance,
                    n_steps: opts.n_steps,
                });
            }
            traj.times.push(t0 + dt);
            traj.populations.push(current.populations());
            traj.mean_dk
                .push((0..current.n_sidebands()).map(|s| current.mean_dk(s)).collect());
            if opts.keep_states {
                traj.states.push(current.clone());
            }
        }
    }
    current.amplitudes.copy_from_slice(&psi);
    traj.final_state = current;
    Ok(traj)
}

/// Two-level eigenenergies (E+, E-) without the common scalar term (J).
pub fn energy_gap(dk: f64, params: &DiracParams) -> (f64, f64) {
    let z = HBAR * HBAR * params.q * dk / (2.0 * params.mass_eff);
    let e = params.omega.hypot(z);
    (e, -e)
}

/// Population revival period 2 pi hbar / (E+ - E-) = pi hbar / E+ (s).
pub fn rabi_period(dk: f64, params: &DiracParams) -> Result<f64> {
    let (e, _) = energy_gap(dk, params);
    if !(e > 0.0) {
        return Err(Error::domain("rabi_period", "energy gap is zero"));
    }
    Ok(std::f64::consts::PI * HBAR / e)
}

/// Step count for [`dirac_evolve`] that keeps the fastest lattice frequency
/// below `phase_per_step` radians per step, for couplings up to `max`.
pub fn rk4_steps(lattice: &SpinorLattice, params: &DiracParams, max: Coupling, total_time: f64, phase_per_step: f64) -> usize {
    let onsite = lattice
        .orders
        .iter()
        .flat_map(|&o| lattice.dk_axis.iter().map(move |&k| params.onsite_energy(o, k).abs()))
        .fold(0.0, f64::max);
    // The fourth-order stencil's largest eigenvalue is about 1.37 / h.
    let grad = if lattice.n_dk() > 1 {
        max.gradient.abs() * 1.4 / lattice.weight()
    } else {
        0.0
    };
    let w = (onsite + 2.0 * max.omega.abs() + 2.0 * grad) / HBAR;
    (w * total_time / phase_per_step).ceil().max(1.0) as usize
}
