//! Runs a configuration end to end and writes its output directory.

use crate::analysis::regime::{central_couplings, classify_regime, RegimeLabel};
use crate::analysis::sidebands::{measure_split, sideband_populations, SidebandOptions, SidebandReport, Spectrum, Split};
use crate::analysis::usg::{usg_prediction, UsgPrediction};
use crate::analysis::wigner::{wigner, WignerGrid, WignerOptions};
use crate::config::{ExperimentParams, Output, Resolved};
use crate::constants::{NM, PS};
use crate::dirac::{dirac_evolve, rk4_steps, Coupling, DiracOptions, DiracParams, DiracTrajectory, ProfileSchedule, SpinorLattice};
use crate::error::{Error, Result};
use crate::io::{populations_csv, render_ppm, spectrum_csv, table_csv, ColorMap, GridFile, PopulationRow, RenderOptions, Scale};
use crate::physics::{two_level_validity, DerivedCouplings};
use crate::presets::WEAK_GRADIENT_SEPARATION;
use crate::tdse::{evolve_observed, SimulationRecord};
use crate::wavepacket::{make_gaussian, Spectral, Wavepacket};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Columns of the momentum-vs-time record, at most.
pub const RECORD_COLUMNS: usize = 1024;

/// In-memory result of one propagation.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: ExperimentParams,
    pub resolved: Resolved,
    pub derived: DerivedCouplings,
    pub label: RegimeLabel,
    pub usg: Option<UsgPrediction>,
    pub initial: Wavepacket,
    pub record: SimulationRecord,
    /// Observation times (s), one per population row and sideband report.
    pub times: Vec<f64>,
    pub reports: Vec<SidebandReport>,
    pub populations: Vec<PopulationRow>,
    /// Momentum density vs time over the configured spectrum range.
    pub spectrogram: GridFile,
    pub initial_spectrum: Spectrum,
    pub final_spectrum: Spectrum,
    /// Set when the solver stopped early; everything above is partial.
    pub abort: Option<String>,
    pub wall_seconds: f64,
}

impl Simulation {
    /// Lobe splits of the +-q/2 windows in the last report.
    pub fn final_splits(&self) -> (Option<Split>, Option<Split>) {
        match self.reports.last() {
            Some(r) => (measure_split(r, 0.5).ok(), measure_split(r, -0.5).ok()),
            None => (None, None),
        }
    }
}

pub fn sideband_options(params: &ExperimentParams, q: f64) -> SidebandOptions {
    SidebandOptions {
        halfwidth_over_q: params.window_halfwidth_over_q,
        smoothing: params.smoothing_over_delta_k * params.delta_k_over_q * q,
        max_order: (params.spectrum_range_over_q - 0.5).max(0.5),
        ..SidebandOptions::default()
    }
}

/// Column range and bin size of the spectrogram for a grid.
fn record_layout(dk_axis: &[f64], range: f64) -> (usize, usize, usize) {
    let lo = dk_axis.iter().position(|&k| k >= -range).unwrap_or(0);
    let hi = dk_axis.iter().rposition(|&k| k <= range).unwrap_or(dk_axis.len() - 1);
    let count = hi + 1 - lo;
    let bin = count.div_ceil(RECORD_COLUMNS);
    (lo, count / bin, bin)
}

fn population_row(t: f64, report: &SidebandReport) -> PopulationRow {
    let mean = |o: f64| report.window(o).map_or(0.0, |w| w.mean_dk);
    PopulationRow {
        t_ps: t / PS,
        p_plus_half: report.p_plus_half(),
        p_minus_half: report.p_minus_half(),
        leakage: report.leakage,
        mean_dk_plus: mean(0.5),
        mean_dk_minus: mean(-0.5),
        split_rad_per_m: measure_split(report, 0.5).map_or(0.0, |s| s.value),
    }
}

/// Propagates a configuration and collects the observables, without touching
/// the file system. A solver abort is reported in [`Simulation::abort`].
pub fn simulate(params: &ExperimentParams) -> Result<Simulation> {
    let start = Instant::now();
    let resolved = params.resolve()?;
    let derived = central_couplings(params)?;
    let label = classify_regime(params, &derived);
    let usg = if resolved.profile.is_uniform() {
        None
    } else {
        Some(usg_prediction(
            &resolved.profile,
            &resolved.electron,
            &resolved.laser,
            resolved.evolution.total_time,
        )?)
    };
    let initial = make_gaussian(&resolved.grid, &resolved.electron, &resolved.laser, &resolved.spec)?;
    let q = resolved.laser.q;
    let grid = resolved.grid;
    let opts = sideband_options(params, q);
    let mut spectral = Spectral::new(&grid);
    let mut dk_axis = grid.dk_axis();
    let mut density = vec![0.0; grid.n_points()];
    let (col0, n_cols, bin) = record_layout(&dk_axis, params.spectrum_range_over_q * q);
    let mut rows: Vec<f64> = Vec::new();
    let mut times = Vec::new();
    let mut reports = Vec::new();
    let mut failure = None;

    // `snapshot_every` sets the observation cadence. Full states are kept at
    // eight evenly spaced times when a Wigner output is requested, otherwise
    // only the initial and final states.
    let mut evolution = resolved.evolution;
    evolution.snapshot_every = if params.outputs.contains(&Output::Wigner) {
        (evolution.n_steps / 8).max(1)
    } else {
        evolution.n_steps.max(1)
    };
    let outcome = evolve_observed(
        &initial,
        &resolved.electron,
        &resolved.laser,
        &resolved.profile,
        &evolution,
        |_, t, amps| {
            if failure.is_some() {
                return;
            }
            spectral.momentum_density_into(amps, &mut density);
            let spectrum = Spectrum {
                dk: std::mem::take(&mut dk_axis),
                density: std::mem::take(&mut density),
            };
            match sideband_populations(&spectrum, q, &opts) {
                Ok(r) => {
                    times.push(t);
                    reports.push(r);
                }
                Err(e) => failure = Some(e),
            }
            for c in 0..n_cols {
                let a = col0 + c * bin;
                rows.push(spectrum.density[a..a + bin].iter().sum::<f64>() / bin as f64);
            }
            dk_axis = spectrum.dk;
            density = spectrum.density;
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (record, abort) = match outcome {
        Ok(r) => (r, None),
        Err(Error::NormDrift {
            step,
            time,
            drift,
            tolerance,
            partial,
        }) => {
            let msg = format!("norm drift {drift:.3e} exceeded {tolerance:.3e} at step {step} (t = {:.6} ps)", time / PS);
            (*partial, Some(msg))
        }
        Err(e) => return Err(e),
    };
    let populations = times.iter().zip(&reports).map(|(&t, r)| population_row(t, r)).collect();
    let centre = |c: usize| (dk_axis[col0 + c * bin] + 0.5 * (bin - 1) as f64 * grid.dk()) / q;
    let n_rows = times.len().max(1);
    if rows.is_empty() {
        rows = vec![0.0; n_cols];
    }
    let spectrogram = GridFile::new(
        n_rows,
        n_cols,
        [
            times.first().copied().unwrap_or(0.0) / PS,
            times.last().copied().unwrap_or(0.0) / PS,
            centre(0),
            centre(n_cols - 1),
        ],
        rows,
    )?;
    let initial_spectrum = Spectrum::from_wavepacket(&initial);
    let final_spectrum = Spectrum::from_wavepacket(record.snapshots.last().unwrap_or(&initial));
    Ok(Simulation {
        params: params.clone(),
        resolved,
        derived,
        label,
        usg,
        initial,
        record,
        times,
        reports,
        populations,
        spectrogram,
        initial_spectrum,
        final_spectrum,
        abort,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Reduced-model propagation matched to a simulation's initial state.
pub fn lattice_trajectory(sim: &Simulation, n_sidebands: usize) -> Result<DiracTrajectory> {
    let r = &sim.resolved;
    let q = r.laser.q;
    let mom = sim.initial.to_momentum();
    let support = sim.params.window_halfwidth_over_q * q;
    let lattice = SpinorLattice::from_wavepacket(&mom, q, n_sidebands, support)?;
    let params = DiracParams::from_tdse(&r.electron, &r.laser, r.profile.e0_central)?;
    let schedule = ProfileSchedule::new(r.profile.clone(), &r.electron, &r.laser);
    let max = Coupling {
        omega: schedule.omega_per_field * field_extent(&r.profile).0,
        gradient: schedule.omega_per_field * field_extent(&r.profile).1,
    };
    let total = r.evolution.total_time;
    let n_steps = rk4_steps(&lattice, &params, max, total, 0.2);
    let mut opts = DiracOptions::new(total, n_steps);
    opts.record_every = (n_steps / 1000).max(1);
    opts.norm_tolerance = 1e-6;
    dirac_evolve(&lattice, &params, &schedule, &opts)
}

/// Largest |E0| and |dE0/dz| of a profile.
fn field_extent(profile: &crate::field::FieldProfile) -> (f64, f64) {
    use crate::field::FieldShape;
    match &profile.shape {
        FieldShape::Uniform => (profile.e0_central.abs(), 0.0),
        FieldShape::LinearGradient { xi_lo, xi_hi, e_lo, e_hi } => {
            (e_lo.abs().max(e_hi.abs()), ((e_hi - e_lo) / (xi_hi - xi_lo)).abs())
        }
        FieldShape::Tabulated { xi, e0 } => {
            let e = e0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let g = xi
                .windows(2)
                .zip(e0.windows(2))
                .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max);
            (e, g)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSummary {
    pub grating_period_nm: f64,
    pub q_rad_per_m: f64,
    pub beta: f64,
    pub gamma: f64,
    pub domain_nm: f64,
    pub n_points: usize,
    pub n_steps: usize,
    pub dt_s: f64,
    pub observe_every: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub status: &'static str,
    pub error: Option<String>,
    pub config: String,
    pub resolved: ResolvedSummary,
    pub max_norm_drift: f64,
    pub final_norm_drift: f64,
    pub steps_completed: usize,
    pub klein_cook_q: f64,
    pub validity_ratio: f64,
    pub two_level_valid: bool,
    pub regime: String,
    pub regime_rationale: String,
    pub split_plus_half: Option<Split>,
    pub split_minus_half: Option<Split>,
    pub usg_prediction: Option<UsgPrediction>,
    /// Reference lobe separation quoted for the weak-gradient experiments.
    pub reference_separation_rad_per_m: f64,
    pub final_p_plus_half: f64,
    pub final_p_minus_half: f64,
    pub final_leakage: f64,
    pub notes: Vec<String>,
    pub wall_seconds: f64,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub simulation: Simulation,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn aborted(&self) -> bool {
        self.simulation.abort.is_some()
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        let digest = Sha256::digest(bytes);
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        });
        Ok(())
    }
}

fn wigner_file(w: &WignerGrid, q: f64) -> Result<GridFile> {
    GridFile::new(
        w.n_z(),
        w.n_p(),
        [
            w.z_axis[0] / NM,
            w.z_axis[w.n_z() - 1] / NM,
            w.p_axis[0] / q,
            w.p_axis[w.n_p() - 1] / q,
        ],
        w.values.clone(),
    )
}

/// Simulates `params` and writes every requested output into `out_dir`.
///
/// A solver abort still writes what was computed; the manifest status is
/// then `aborted` and [`RunOutcome::aborted`] is true.
pub fn run(params: &ExperimentParams, out_dir: &Path) -> Result<RunOutcome> {
    let sim = simulate(params)?;
    write_outputs(sim, out_dir)
}

pub fn write_outputs(sim: Simulation, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let params = &sim.params;
    let q = sim.resolved.laser.q;
    let mut w = Writer {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let mut notes = Vec::new();
    let wants = |o: Output| params.outputs.contains(&o);
    if wants(Output::Spectrum) {
        let s = &sim.final_spectrum;
        w.put("spectrum.csv", spectrum_csv(&s.dk, &s.density, q).as_bytes())?;
        let s = &sim.initial_spectrum;
        w.put("spectrum_initial.csv", spectrum_csv(&s.dk, &s.density, q).as_bytes())?;
    }
    if wants(Output::Populations) {
        w.put("populations.csv", populations_csv(&sim.populations).as_bytes())?;
    }
    if wants(Output::Record) {
        w.put("record.bin", &sim.spectrogram.to_bytes())?;
    }
    if wants(Output::Heatmap) {
        let opts = RenderOptions {
            scale: Scale::SymLog { linthresh: 1e-3 },
            color_map: ColorMap::Viridis,
        };
        w.put("record.ppm", &render_ppm(&sim.spectrogram, &opts))?;
    }
    if wants(Output::Wigner) {
        let wopts = WignerOptions {
            n_z: params.wigner_points,
            n_p: params.wigner_points,
            ..WignerOptions::default()
        };
        let last = sim.record.snapshots.last().unwrap_or(&sim.initial);
        match wigner(last, &wopts) {
            Ok(wg) => {
                let file = wigner_file(&wg, q)?;
                w.put("wigner.bin", &file.to_bytes())?;
                if wants(Output::Heatmap) {
                    let opts = RenderOptions {
                        scale: Scale::Linear,
                        color_map: ColorMap::Diverging,
                    };
                    w.put("wigner.ppm", &render_ppm(&file, &opts))?;
                }
            }
            Err(e) => notes.push(format!("wigner output skipped: {e}")),
        }
    }
    if wants(Output::Lattice) && sim.abort.is_none() {
        match lattice_trajectory(&sim, params.lattice_sidebands) {
            Ok(traj) => {
                let orders = &traj.final_state.orders;
                let names: Vec<String> = std::iter::once("t_ps".to_string())
                    .chain(orders.iter().map(|o| format!("p_{o:+}")))
                    .collect();
                let header: Vec<&str> = names.iter().map(String::as_str).collect();
                let rows: Vec<Vec<f64>> = traj
                    .times
                    .iter()
                    .zip(&traj.populations)
                    .map(|(t, p)| std::iter::once(t / PS).chain(p.iter().copied()).collect())
                    .collect();
                w.put("lattice.csv", table_csv(&header, &rows).as_bytes())?;
            }
            Err(e) => notes.push(format!("lattice output skipped: {e}")),
        }
    }
    if let Some(n) = &sim.label.note {
        notes.push(format!("classifier: {n}"));
    }

    let r = &sim.resolved;
    let (split_plus, split_minus) = sim.final_splits();
    let last = sim.reports.last();
    let manifest = Manifest {
        status: if sim.abort.is_some() { "aborted" } else { "ok" },
        error: sim.abort.clone(),
        config: params.to_config_string(),
        resolved: ResolvedSummary {
            grating_period_nm: r.laser.grating_period / NM,
            q_rad_per_m: q,
            beta: r.electron.beta,
            gamma: r.electron.gamma,
            domain_nm: r.grid.length() / NM,
            n_points: r.grid.n_points(),
            n_steps: r.evolution.n_steps,
            dt_s: r.evolution.dt(),
            observe_every: r.evolution.observe_every,
        },
        max_norm_drift: sim.record.max_norm_drift,
        final_norm_drift: sim.record.final_norm_drift,
        steps_completed: sim.record.steps_completed,
        klein_cook_q: sim.derived.klein_cook_q,
        validity_ratio: two_level_validity(&sim.derived).ratio,
        two_level_valid: two_level_validity(&sim.derived).valid,
        regime: sim.label.regime.name().to_string(),
        regime_rationale: sim.label.rationale(),
        split_plus_half: split_plus,
        split_minus_half: split_minus,
        usg_prediction: sim.usg,
        reference_separation_rad_per_m: WEAK_GRADIENT_SEPARATION,
        final_p_plus_half: last.map_or(f64::NAN, |r| r.p_plus_half()),
        final_p_minus_half: last.map_or(f64::NAN, |r| r.p_minus_half()),
        final_leakage: last.map_or(f64::NAN, |r| r.leakage),
        notes,
        wall_seconds: sim.wall_seconds,
        files: w.files.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    let path = out_dir.join("manifest.json");
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(RunOutcome {
        manifest,
        simulation: sim,
        out_dir: out_dir.to_path_buf(),
    })
}
