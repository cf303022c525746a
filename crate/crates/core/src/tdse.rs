//! Finite-difference Hamiltonian in the co-moving frame and the Crank-Nicolson
//! propagator.
//!
//! Units: lengths in metres, time as `tau = c t` (metres), Hamiltonian entries
//! in 1/m so that `i d chi / d tau = H chi`. Multiply by `hbar c` for joules.

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::field::FieldProfile;
use crate::physics::{alpha0, alpha1, alpha2, ElectronParams, LaserGratingParams};
use crate::numerics::FlushSubnormals;
use crate::tridiag::Factorization;
use crate::wavepacket::{Representation, Spectral, Wavepacket};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// Treatment of the first-order `-i beta d/dxi` term.
///
/// In the frame moving at v0 the carrier's group velocity is already removed,
/// so the term cancels; `AsWritten` keeps it, which drifts the envelope at v0
/// and moves the Bragg resonance away from dk = +-q/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Advection {
    CoMoving,
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianOptions {
    pub boundary: Boundary,
    pub symmetrize: bool,
    pub advection: Advection,
    /// Constant subtracted from the diagonal (1/m). Changes only the global phase.
    pub diagonal_shift: f64,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        HamiltonianOptions {
            boundary: Boundary::Periodic,
            symmetrize: true,
            advection: Advection::CoMoving,
            diagonal_shift: 0.0,
        }
    }
}

/// `upper[i] = H[i][i+1]`, `lower[i] = H[i+1][i]` (indices mod n). Under
/// Dirichlet boundaries the wrap-around entries `upper[n-1]`, `lower[n-1]`
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub time_tau: f64,
    pub boundary: Boundary,
}

impl TridiagonalHamiltonian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix element H[i][j]; zero outside the (cyclic) band.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let n = self.len();
        if i == j {
            self.diag[i]
        } else if j == (i + 1) % n {
            self.upper[i]
        } else if i == (j + 1) % n {
            self.lower[j]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// H v.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                self.diag[i] * v[i] + self.lower[prev] * v[prev] + self.upper[i] * v[next]
            })
            .collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.upper)
            .chain(&self.lower)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Per-site couplings that do not depend on time.
struct SiteTerms {
    xi: Vec<f64>,
    a0: Vec<f64>,
    a1: Vec<f64>,
    theta: Vec<f64>,
}

impl SiteTerms {
    fn new(xi: Vec<f64>, electron: &ElectronParams, laser: &LaserGratingParams, profile: &FieldProfile) -> Self {
        let a0_unit = alpha0(electron, laser, 1.0);
        let a1_unit = alpha1(electron, laser, 1.0);
        let e0: Vec<f64> = xi.iter().map(|&x| profile.field_at(x)).collect();
        SiteTerms {
            a0: e0.iter().map(|e| e * a0_unit).collect(),
            a1: e0.iter().map(|e| e * a1_unit).collect(),
            theta: xi.iter().map(|&x| profile.theta_at(x)).collect(),
            xi,
        }
    }
}

fn assemble_sites(
    sites: &SiteTerms,
    d_xi: f64,
    q: f64,
    detuning: f64,
    a2: f64,
    beta: f64,
    tau_c: f64,
    opts: &HamiltonianOptions,
) -> Result<TridiagonalHamiltonian> {
    let n = sites.xi.len();
    let kin = a2 / (d_xi * d_xi);
    let adv = match opts.advection {
        Advection::CoMoving => 0.0,
        Advection::AsWritten => beta / (2.0 * d_xi),
    };
    let shift = detuning * tau_c / SPEED_OF_LIGHT;
    let phases: Vec<C64> = (0..n)
        .map(|i| C64::from_polar(1.0, q * sites.xi[i] + sites.theta[i] + shift))
        .collect();
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for i in 0..n {
        let e = phases[i];
        let half_a1 = sites.a1[i] / (2.0 * d_xi);
        diag.push(C64::new(
            2.0 * kin - (sites.a1[i] / d_xi) * e.re - sites.a0[i] * e.im - opts.diagonal_shift,
            0.0,
        ));
        upper.push(C64::new(-kin, -adv) + e * half_a1);
        // lower[i] = H[i+1][i] uses the row site i+1.
        let r = (i + 1) % n;
        lower.push(C64::new(-kin, adv) + phases[r].conj() * (sites.a1[r] / (2.0 * d_xi)));
    }
    if opts.symmetrize {
        for i in 0..n {
            let u = 0.5 * (upper[i] + lower[i].conj());
            upper[i] = u;
            lower[i] = u.conj();
        }
    }
    if opts.boundary == Boundary::Dirichlet {
        upper[n - 1] = C64::new(0.0, 0.0);
        lower[n - 1] = C64::new(0.0, 0.0);
    }
    let finite = diag
        .iter()
        .chain(&upper)
        .chain(&lower)
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(Error::domain("hamiltonian", "non-finite coefficient"));
    }
    Ok(TridiagonalHamiltonian {
        diag,
        upper,
        lower,
        time_tau: tau_c,
        boundary: opts.boundary,
    })
}

/// Hamiltonian at co-moving time `tau_c` with local alpha0, alpha1 per site.
///
/// The grating phase seen in the moving frame is `q xi + theta(xi) +
/// (omega_L - q v0) tau_c / c`; the last term vanishes under phase matching.
pub fn assemble_hamiltonian(
    grid: &crate::wavepacket::Grid,
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    profile: &FieldProfile,
    tau_c: f64,
    opts: &HamiltonianOptions,
) -> Result<TridiagonalHamiltonian> {
    let sites = SiteTerms::new(grid.positions(), electron, laser, profile);
    assemble_sites(
        &sites,
        grid.d_xi(),
        laser.q,
        laser.detuning(electron),
        alpha2(electron),
        electron.beta,
        tau_c,
        opts,
    )
}

/// Pre-factorized Cayley step `(1 + i dtau H/2)^-1 (1 - i dtau H/2)`.
pub struct CrankNicolson {
    h: TridiagonalHamiltonian,
    half: C64,
    lhs: Factorization,
    rhs: Vec<C64>,
}

impl CrankNicolson {
    pub fn new(h: TridiagonalHamiltonian, d_tau: f64) -> Result<Self> {
        if !(d_tau.is_finite() && d_tau > 0.0) {
            return Err(Error::domain("d_tau", "must be positive"));
        }
        let n = h.len();
        if n < 3 {
            return Err(Error::domain("hamiltonian", "need at least 3 sites"));
        }
        let half = C64::new(0.0, 0.5 * d_tau);
        let one = C64::new(1.0, 0.0);
        let diag: Vec<C64> = h.diag.iter().map(|d| one + half * d).collect();
        let sup: Vec<C64> = h.upper[..n - 1].iter().map(|u| half * u).collect();
        let sub: Vec<C64> = h.lower[..n - 1].iter().map(|l| half * l).collect();
        let lhs = match h.boundary {
            Boundary::Periodic => {
                Factorization::new_cyclic(&sub, &diag, &sup, half * h.lower[n - 1], half * h.upper[n - 1])?
            }
            Boundary::Dirichlet => Factorization::new(&sub, &diag, &sup)?,
        };
        Ok(CrankNicolson {
            h,
            half,
            lhs,
            rhs: vec![C64::new(0.0, 0.0); n],
        })
    }

    pub fn hamiltonian(&self) -> &TridiagonalHamiltonian {
        &self.h
    }

    /// Advances `amps` by one step in place.
    pub fn step(&mut self, amps: &mut [C64]) {
        let n = amps.len();
        let h = &self.h;
        let half = self.half;
        for i in 0..n {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            let next = if i + 1 == n { 0 } else { i + 1 };
            let hv = h.diag[i] * amps[i] + h.lower[prev] * amps[prev] + h.upper[i] * amps[next];
            self.rhs[i] = amps[i] - half * hv;
        }
        self.lhs.solve_in_place(&mut self.rhs);
        amps.copy_from_slice(&self.rhs);
    }
}

/// One Crank-Nicolson step of a position-representation state.
pub fn cn_step(state: &Wavepacket, h: &TridiagonalHamiltonian, d_tau: f64) -> Result<Wavepacket> {
    state.require(Representation::Position)?;
    if h.len() != state.amplitudes.len() {
        return Err(Error::domain("hamiltonian", "size does not match the state"));
    }
    let mut cn = CrankNicolson::new(h.clone(), d_tau)?;
    let mut out = state.clone();
    cn.step(&mut out.amplitudes);
    Ok(out)
}

/// Energy subtracted from the Hamiltonian before stepping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnergyReference {
    Zero,
    /// Mean kinetic energy of the initial state. Keeps the populated
    /// eigenphases small, which is where Crank-Nicolson is most accurate.
    InitialKinetic,
    Joules(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Interaction time (s).
    pub total_time: f64,
    pub n_steps: usize,
    /// Store a snapshot every this many steps; the final state is always kept.
    pub snapshot_every: usize,
    /// Call the observer every this many steps (0 = only first and last).
    pub observe_every: usize,
    pub boundary: Boundary,
    pub symmetrize: bool,
    pub advection: Advection,
    pub energy_reference: EnergyReference,
    /// Abort when |norm - initial norm| exceeds this.
    pub norm_tolerance: f64,
}

impl EvolutionConfig {
    pub fn new(total_time: f64, n_steps: usize) -> Self {
        EvolutionConfig {
            total_time,
            n_steps,
            snapshot_every: n_steps.max(1),
            observe_every: 0,
            boundary: Boundary::Periodic,
            symmetrize: true,
            advection: Advection::CoMoving,
            energy_reference: EnergyReference::InitialKinetic,
            norm_tolerance: 1e-6,
        }
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(Error::domain("total_time", "must be positive"));
        }
        if self.n_steps == 0 {
            return Err(Error::domain("n_steps", "must be at least 1"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::domain("snapshot_every", "must be at least 1"));
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::domain("norm_tolerance", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    /// Snapshot times (s).
    pub times: Vec<f64>,
    /// Position-representation snapshots.
    pub snapshots: Vec<Wavepacket>,
    /// Norm after every step, starting with the initial norm.
    pub norm_history: Vec<f64>,
    pub max_norm_drift: f64,
    pub final_norm_drift: f64,
    pub steps_completed: usize,
    pub config: EvolutionConfig,
}

/// Mean of the finite-difference kinetic energy over the spectrum (1/m).
fn mean_kinetic(state: &Wavepacket, a2: f64) -> f64 {
    let m = state.to_momentum();
    let dx = state.grid.d_xi();
    let axis = m.grid.dk_axis();
    let mut acc = 0.0;
    let mut tot = 0.0;
    for (a, k) in m.amplitudes.iter().zip(axis) {
        let w = a.norm_sqr();
        acc += w * 2.0 * a2 / (dx * dx) * (1.0 - (k * dx).cos());
        tot += w;
    }
    acc / tot
}

/// Propagates `initial` and returns snapshots plus the norm history.
pub fn evolve(
    initial: &Wavepacket,
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    profile: &FieldProfile,
    config: &EvolutionConfig,
) -> Result<SimulationRecord> {
    evolve_observed(initial, electron, laser, profile, config, |_, _, _| {})
}

/// As [`evolve`], calling `observer(step, t, position_amplitudes)` at step 0,
/// every `observe_every` steps and after the last step.
pub fn evolve_observed<F>(
    initial: &Wavepacket,
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    profile: &FieldProfile,
    config: &EvolutionConfig,
    mut observer: F,
) -> Result<SimulationRecord>
where
    F: FnMut(usize, f64, &[C64]),
{
    config.validate()?;
    let _ftz = FlushSubnormals::new();
    let grid = initial.grid;
    let state0 = if initial.representation == Representation::Position {
        initial.clone()
    } else {
        initial.transformed(Representation::Position, &mut Spectral::new(&grid))
    };
    let a2 = alpha2(electron);
    let diagonal_shift = match config.energy_reference {
        EnergyReference::Zero => 0.0,
        EnergyReference::InitialKinetic => mean_kinetic(&state0, a2),
        EnergyReference::Joules(e) => e / (HBAR * SPEED_OF_LIGHT),
    };
    let opts = HamiltonianOptions {
        boundary: config.boundary,
        symmetrize: config.symmetrize,
        advection: config.advection,
        diagonal_shift,
    };
    let dt = config.dt();
    let d_tau = SPEED_OF_LIGHT * dt;
    let detuning = laser.detuning(electron);
    // Phase-matched (to rounding) gratings give a static Hamiltonian.
    let static_h = (detuning * config.total_time).abs() < 1e-9;
    let sites = SiteTerms::new(grid.positions(), electron, laser, profile);
    let build = |tau: f64| {
        assemble_sites(&sites, grid.d_xi(), laser.q, detuning, a2, electron.beta, tau, &opts)
    };
    let mut cn = CrankNicolson::new(build(0.0)?, d_tau)?;

    let mut amps = state0.amplitudes.clone();
    let measure = grid.d_xi();
    let norm_of = |a: &[C64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>() * measure;
    let n0 = norm_of(&amps);
    let mut record = SimulationRecord {
        times: vec![0.0],
        snapshots: vec![state0.clone()],
        norm_history: Vec::with_capacity(config.n_steps + 1),
        max_norm_drift: 0.0,
        final_norm_drift: 0.0,
        steps_completed: 0,
        config: *config,
    };
    record.norm_history.push(n0);
    observer(0, 0.0, &amps);

    for step in 1..=config.n_steps {
        if !static_h {
            let tau_mid = d_tau * (step as f64 - 0.5);
            cn = CrankNicolson::new(build(tau_mid)?, d_tau)?;
        }
        cn.step(&mut amps);
        let t = dt * step as f64;
        let norm = norm_of(&amps);
        let drift = (norm - n0).abs();
        record.norm_history.push(norm);
        record.max_norm_drift = record.max_norm_drift.max(drift);
        record.final_norm_drift = drift;
        record.steps_completed = step;
        if !(drift <= config.norm_tolerance) {
            record.times.push(t);
            record.snapshots.push(Wavepacket {
                amplitudes: amps,
                ..state0.clone()
            });
            return Err(Error::NormDrift {
                step,
                time: t,
                drift,
                tolerance: config.norm_tolerance,
                partial: Box::new(record),
            });
        }
        let last = step == config.n_steps;
        if last || (config.observe_every > 0 && step % config.observe_every == 0) {
            observer(step, t, &amps);
        }
        if last || step % config.snapshot_every == 0 {
            record.times.push(t);
            record.snapshots.push(Wavepacket {
                amplitudes: amps.clone(),
                ..state0.clone()
            });
        }
    }
    Ok(record)
}

/// Energy in joules of a Hamiltonian eigenvalue expressed in 1/m.
pub fn to_joules(h: f64) -> f64 {
    h * HBAR * SPEED_OF_LIGHT
}
