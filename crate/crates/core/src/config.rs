//! Experiment configuration: a flat `key = value` text format with optional
//! `[section]` headers that prefix the keys below them.
//!
//! ```text
//! [electron]
//! kinetic_energy_ev = 100
//! [grating]
//! period_nm = auto
//! ```
//!
//! Every key not listed in [`KEYS`] is rejected. Omitted keys take the
//! defaults of [`ExperimentParams::default`]. Errors are collected for the
//! whole file before returning.

use crate::field::FieldProfile;
use crate::physics::{phase_matched_period, ElectronParams, LaserGratingParams};
use crate::tdse::{Boundary, EvolutionConfig};
use crate::wavepacket::{Grid, Superposition, WavepacketSpec};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::constants::{NM, PS};

/// One problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.key.is_empty()) {
            (Some(l), false) => write!(f, "line {l}: {}: {}", self.key, self.message),
            (Some(l), true) => write!(f, "line {l}: {}", self.message),
            (None, false) => write!(f, "{}: {}", self.key, self.message),
            (None, true) => write!(f, "{}", self.message),
        }
    }
}

fn join(issues: &[Issue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error\n{}", join(.0))]
    Syntax(Vec<Issue>),
    #[error("invalid configuration\n{}", join(.0))]
    Invalid(Vec<Issue>),
}

impl ConfigError {
    /// Process exit code: 1 validation, 3 I/O, 4 syntax.
    pub fn exit_code(&self) -> i32 {
        match self {
            ConfigError::Invalid(_) => 1,
            ConfigError::Io { .. } => 3,
            ConfigError::Syntax(_) => 4,
        }
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            ConfigError::Syntax(v) | ConfigError::Invalid(v) => v,
            ConfigError::Io { .. } => &[],
        }
    }
}

/// Recognized keys.
pub const KEYS: &[&str] = &[
    "electron.kinetic_energy_ev",
    "electron.beta",
    "laser.photon_energy_ev",
    "laser.e0_v_per_m",
    "laser.theta_rad",
    "laser.gradient.kind",
    "laser.gradient.xi_lo_nm",
    "laser.gradient.xi_hi_nm",
    "laser.gradient.e_lo_v_per_m",
    "laser.gradient.e_hi_v_per_m",
    "laser.gradient.table",
    "grating.period_nm",
    "wavepacket.delta_k_over_q",
    "wavepacket.dk_offset_over_q",
    "wavepacket.superposition.dk_offset_over_q",
    "wavepacket.superposition.weight_re",
    "wavepacket.superposition.weight_im",
    "wavepacket.chirp_ld_cm",
    "grid.domain_nm",
    "grid.n_points",
    "evolution.t_total_ps",
    "evolution.n_steps",
    "evolution.snapshot_every",
    "evolution.boundary",
    "evolution.symmetrize",
    "evolution.norm_tolerance",
    "analysis.window_halfwidth_over_q",
    "analysis.smoothing_over_delta_k",
    "analysis.spectrum_range_over_q",
    "analysis.wigner_points",
    "analysis.lattice_sidebands",
    "outputs",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectronInput {
    KineticEnergyEv(f64),
    Beta(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GradientSpec {
    None,
    /// Linear ramp between two co-moving positions, clamped outside.
    Linear {
        xi_lo_nm: f64,
        xi_hi_nm: f64,
        e_lo: f64,
        e_hi: f64,
    },
    /// Piecewise-linear (xi_nm, E0) table.
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GratingPeriod {
    /// Phase matched to the electron velocity.
    Auto,
    Nm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Spectrum,
    Populations,
    Record,
    Wigner,
    Heatmap,
    Lattice,
}

impl Output {
    pub const ALL: [Output; 6] = [
        Output::Spectrum,
        Output::Populations,
        Output::Record,
        Output::Wigner,
        Output::Heatmap,
        Output::Lattice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Spectrum => "spectrum",
            Output::Populations => "populations",
            Output::Record => "record",
            Output::Wigner => "wigner",
            Output::Heatmap => "heatmap",
            Output::Lattice => "lattice",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Output::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub electron: ElectronInput,
    pub photon_energy_ev: f64,
    /// Uniform amplitude; ignored when a gradient is set.
    pub e0_v_per_m: f64,
    pub theta_rad: f64,
    pub gradient: GradientSpec,
    pub grating: GratingPeriod,
    pub delta_k_over_q: f64,
    pub dk_offset_over_q: f64,
    /// (offset in q, weight)
    pub superposition: Option<(f64, Complex64)>,
    pub chirp_ld_cm: f64,
    /// Requested domain; rounded to a whole number of grating periods.
    pub domain_nm: f64,
    pub n_points: usize,
    pub t_total_ps: f64,
    /// None picks a step from the spectral band of the initial state.
    pub n_steps: Option<usize>,
    /// Steps between recorded observables; None gives about 1000 records.
    pub snapshot_every: Option<usize>,
    pub boundary: Boundary,
    pub symmetrize: bool,
    pub norm_tolerance: f64,
    pub window_halfwidth_over_q: f64,
    /// Spectral smoothing before peak detection, in units of the initial width.
    pub smoothing_over_delta_k: f64,
    /// Half-range of the recorded spectrogram in units of q.
    pub spectrum_range_over_q: f64,
    pub wigner_points: usize,
    pub lattice_sidebands: usize,
    pub outputs: Vec<Output>,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            electron: ElectronInput::KineticEnergyEv(100.0),
            photon_energy_ev: 6.2,
            e0_v_per_m: 1e8,
            theta_rad: PI / 2.0,
            gradient: GradientSpec::None,
            grating: GratingPeriod::Auto,
            delta_k_over_q: 0.02,
            dk_offset_over_q: 0.5,
            superposition: None,
            chirp_ld_cm: 0.0,
            domain_nm: 4096.0,
            n_points: 1 << 16,
            t_total_ps: 25.0,
            n_steps: None,
            snapshot_every: None,
            boundary: Boundary::Periodic,
            symmetrize: true,
            norm_tolerance: 1e-6,
            window_halfwidth_over_q: 0.5,
            smoothing_over_delta_k: 0.5,
            spectrum_range_over_q: 3.0,
            wigner_points: 512,
            lattice_sidebands: 8,
            outputs: vec![Output::Spectrum, Output::Populations, Output::Record],
        }
    }
}

/// Numbers, optionally written as a multiple of pi: `pi/2`, `-pi`, `0.5*pi`,
/// `3*pi/4`.
fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let t = s.replace(' ', "").to_ascii_lowercase();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(&t)),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let factor = if num == "pi" {
        1.0
    } else {
        num.strip_suffix("*pi")?.parse::<f64>().ok()?
    };
    Some(sign * factor * PI / den)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

struct Entry {
    line: Option<usize>,
    value: String,
}

/// Collects typed values and issues while reading an entry map.
struct Reader<'a> {
    map: &'a BTreeMap<String, Entry>,
    issues: Vec<Issue>,
}

impl<'a> Reader<'a> {
    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).and_then(|e| e.line)
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn bad(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            line: self.line(key),
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        match self.raw(key) {
            None => default,
            Some(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    self.bad(key, format!("expected a finite number, got `{s}`"));
                    default
                }
            },
        }
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        self.raw(key)?;
        Some(self.f64_or(key, f64::NAN))
    }

    fn count_or(&mut self, key: &str, default: usize) -> usize {
        match self.raw(key) {
            None => default,
            Some(s) => match s.parse::<i64>() {
                Ok(v) if v > 0 => v as usize,
                Ok(v) => {
                    self.bad(key, format!("must be a positive integer, got {v}"));
                    default
                }
                Err(_) => {
                    self.bad(key, format!("expected an integer, got `{s}`"));
                    default
                }
            },
        }
    }

    fn auto_count(&mut self, key: &str) -> Option<usize> {
        match self.raw(key) {
            None | Some("auto") => None,
            Some(_) => Some(self.count_or(key, 1)),
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        if !(v > 0.0) && !v.is_nan() {
            self.bad(key, format!("must be positive, got {v}"));
        }
    }

    fn non_negative(&mut self, key: &str, v: f64) {
        if v < 0.0 {
            self.bad(key, format!("must be non-negative, got {v}"));
        }
    }
}

impl ExperimentParams {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let map = tokenize(text)?;
        Self::from_entries(&map)
    }

    fn from_entries(map: &BTreeMap<String, Entry>) -> Result<Self, ConfigError> {
        let d = ExperimentParams::default();
        let mut r = Reader {
            map,
            issues: Vec::new(),
        };
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                r.bad(key, "unknown key");
            }
        }

        let energy = r.opt_f64("electron.kinetic_energy_ev");
        let beta = r.opt_f64("electron.beta");
        let electron = match (energy, beta) {
            (Some(_), Some(_)) => {
                r.bad("electron.beta", "give either kinetic_energy_ev or beta, not both");
                d.electron
            }
            (None, Some(b)) => {
                if !(b > 0.0 && b < 1.0) {
                    r.bad("electron.beta", format!("must lie in (0, 1), got {b}"));
                }
                ElectronInput::Beta(b)
            }
            (Some(e), None) => {
                r.positive("electron.kinetic_energy_ev", e);
                ElectronInput::KineticEnergyEv(e)
            }
            (None, None) => d.electron,
        };

        let photon_energy_ev = r.f64_or("laser.photon_energy_ev", d.photon_energy_ev);
        r.positive("laser.photon_energy_ev", photon_energy_ev);
        let e0_v_per_m = r.f64_or("laser.e0_v_per_m", d.e0_v_per_m);
        r.non_negative("laser.e0_v_per_m", e0_v_per_m);
        let theta_rad = match r.raw("laser.theta_rad") {
            None => d.theta_rad,
            Some(s) => match parse_angle(s) {
                Some(v) if v.is_finite() => v,
                _ => {
                    r.bad("laser.theta_rad", format!("expected a number or multiple of pi, got `{s}`"));
                    d.theta_rad
                }
            },
        };

        let gradient = match r.raw("laser.gradient.kind").unwrap_or("none") {
            "none" => {
                for k in [
                    "laser.gradient.xi_lo_nm",
                    "laser.gradient.xi_hi_nm",
                    "laser.gradient.e_lo_v_per_m",
                    "laser.gradient.e_hi_v_per_m",
                    "laser.gradient.table",
                ] {
                    if r.raw(k).is_some() {
                        r.bad(k, "set laser.gradient.kind to use gradient parameters");
                    }
                }
                GradientSpec::None
            }
            "linear" => {
                let need = |r: &mut Reader, k: &str| match r.opt_f64(k) {
                    Some(v) => v,
                    None => {
                        r.bad(k, "required for a linear gradient");
                        0.0
                    }
                };
                let xi_lo_nm = need(&mut r, "laser.gradient.xi_lo_nm");
                let xi_hi_nm = need(&mut r, "laser.gradient.xi_hi_nm");
                let e_lo = need(&mut r, "laser.gradient.e_lo_v_per_m");
                let e_hi = need(&mut r, "laser.gradient.e_hi_v_per_m");
                if !(xi_hi_nm > xi_lo_nm) {
                    r.bad("laser.gradient.xi_hi_nm", "must exceed xi_lo_nm");
                }
                r.non_negative("laser.gradient.e_lo_v_per_m", e_lo);
                r.non_negative("laser.gradient.e_hi_v_per_m", e_hi);
                GradientSpec::Linear {
                    xi_lo_nm,
                    xi_hi_nm,
                    e_lo,
                    e_hi,
                }
            }
            "table" => {
                let key = "laser.gradient.table";
                let mut pts = Vec::new();
                match r.raw(key) {
                    None => r.bad(key, "required for a tabulated gradient"),
                    Some(s) => {
                        for item in s.split(',') {
                            let parsed = item
                                .split_once(':')
                                .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
                            match parsed {
                                Some((x, e)) if x.is_finite() && e.is_finite() && e >= 0.0 => pts.push((x, e)),
                                _ => {
                                    r.bad(key, format!("bad entry `{}`; expected xi_nm:e0 with e0 >= 0", item.trim()));
                                }
                            }
                        }
                        if pts.len() < 2 {
                            r.bad(key, "need at least two points");
                        } else if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                            r.bad(key, "positions must be strictly increasing");
                        }
                    }
                }
                GradientSpec::Table(pts)
            }
            other => {
                r.bad("laser.gradient.kind", format!("expected none, linear or table, got `{other}`"));
                GradientSpec::None
            }
        };

        let grating = match r.raw("grating.period_nm") {
            None | Some("auto") => GratingPeriod::Auto,
            Some(_) => {
                let v = r.f64_or("grating.period_nm", 1.0);
                r.positive("grating.period_nm", v);
                GratingPeriod::Nm(v)
            }
        };

        let delta_k_over_q = r.f64_or("wavepacket.delta_k_over_q", d.delta_k_over_q);
        r.positive("wavepacket.delta_k_over_q", delta_k_over_q);
        let dk_offset_over_q = r.f64_or("wavepacket.dk_offset_over_q", d.dk_offset_over_q);
        let sup_offset = r.opt_f64("wavepacket.superposition.dk_offset_over_q");
        let weight_re = r.opt_f64("wavepacket.superposition.weight_re");
        let weight_im = r.opt_f64("wavepacket.superposition.weight_im");
        let superposition = match sup_offset {
            Some(o) => Some((o, Complex64::new(weight_re.unwrap_or(1.0), weight_im.unwrap_or(0.0)))),
            None => {
                if weight_re.is_some() || weight_im.is_some() {
                    r.bad(
                        "wavepacket.superposition.dk_offset_over_q",
                        "required when a superposition weight is given",
                    );
                }
                None
            }
        };
        let chirp_ld_cm = r.f64_or("wavepacket.chirp_ld_cm", d.chirp_ld_cm);
        r.non_negative("wavepacket.chirp_ld_cm", chirp_ld_cm);

        let domain_nm = r.f64_or("grid.domain_nm", d.domain_nm);
        r.positive("grid.domain_nm", domain_nm);
        let n_points = r.count_or("grid.n_points", d.n_points);
        if n_points < 8 || !n_points.is_power_of_two() {
            r.bad("grid.n_points", format!("must be a power of two >= 8, got {n_points}"));
        }

        let t_total_ps = r.f64_or("evolution.t_total_ps", d.t_total_ps);
        r.positive("evolution.t_total_ps", t_total_ps);
        let n_steps = r.auto_count("evolution.n_steps");
        let snapshot_every = r.auto_count("evolution.snapshot_every");
        let boundary = match r.raw("evolution.boundary").unwrap_or("periodic") {
            "periodic" => Boundary::Periodic,
            "dirichlet" => Boundary::Dirichlet,
            other => {
                r.bad("evolution.boundary", format!("expected periodic or dirichlet, got `{other}`"));
                d.boundary
            }
        };
        let symmetrize = match r.raw("evolution.symmetrize").unwrap_or("true") {
            "true" => true,
            "false" => false,
            other => {
                r.bad("evolution.symmetrize", format!("expected true or false, got `{other}`"));
                d.symmetrize
            }
        };
        let norm_tolerance = r.f64_or("evolution.norm_tolerance", d.norm_tolerance);
        r.positive("evolution.norm_tolerance", norm_tolerance);

        let window_halfwidth_over_q = r.f64_or("analysis.window_halfwidth_over_q", d.window_halfwidth_over_q);
        if !(window_halfwidth_over_q > 0.0 && window_halfwidth_over_q <= 0.5) {
            r.bad(
                "analysis.window_halfwidth_over_q",
                format!("must lie in (0, 0.5] so windows do not overlap, got {window_halfwidth_over_q}"),
            );
        }
        let smoothing_over_delta_k = r.f64_or("analysis.smoothing_over_delta_k", d.smoothing_over_delta_k);
        r.non_negative("analysis.smoothing_over_delta_k", smoothing_over_delta_k);
        let spectrum_range_over_q = r.f64_or("analysis.spectrum_range_over_q", d.spectrum_range_over_q);
        r.positive("analysis.spectrum_range_over_q", spectrum_range_over_q);
        let wigner_points = r.count_or("analysis.wigner_points", d.wigner_points);
        if wigner_points < 2 {
            r.bad("analysis.wigner_points", "need at least 2");
        }
        let lattice_sidebands = r.count_or("analysis.lattice_sidebands", d.lattice_sidebands);
        if lattice_sidebands < 2 || lattice_sidebands % 2 == 1 {
            r.bad("analysis.lattice_sidebands", "need an even count of at least 2");
        }

        let outputs = match r.raw("outputs") {
            None => d.outputs.clone(),
            Some(s) => {
                let mut out = Vec::new();
                for name in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    match Output::parse(name) {
                        Some(o) if !out.contains(&o) => out.push(o),
                        Some(_) => {}
                        None => r.bad("outputs", format!("unknown output `{name}`")),
                    }
                }
                out.sort();
                out
            }
        };

        let params = ExperimentParams {
            electron,
            photon_energy_ev,
            e0_v_per_m,
            theta_rad,
            gradient,
            grating,
            delta_k_over_q,
            dk_offset_over_q,
            superposition,
            chirp_ld_cm,
            domain_nm,
            n_points,
            t_total_ps,
            n_steps,
            snapshot_every,
            boundary,
            symmetrize,
            norm_tolerance,
            window_halfwidth_over_q,
            smoothing_over_delta_k,
            spectrum_range_over_q,
            wigner_points,
            lattice_sidebands,
            outputs,
        };
        if r.issues.is_empty() {
            if let Err(e) = params.resolve() {
                r.issues.push(Issue {
                    line: None,
                    key: String::new(),
                    message: e.to_string(),
                });
            }
        }
        if r.issues.is_empty() {
            Ok(params)
        } else {
            Err(ConfigError::Invalid(r.issues))
        }
    }

    /// Ordered (key, value) pairs that reparse to an equal value.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut v: Vec<(&str, String)> = Vec::new();
        match self.electron {
            ElectronInput::KineticEnergyEv(e) => v.push(("electron.kinetic_energy_ev", fmt_f64(e))),
            ElectronInput::Beta(b) => v.push(("electron.beta", fmt_f64(b))),
        }
        v.push(("laser.photon_energy_ev", fmt_f64(self.photon_energy_ev)));
        v.push(("laser.e0_v_per_m", fmt_f64(self.e0_v_per_m)));
        v.push(("laser.theta_rad", fmt_f64(self.theta_rad)));
        match &self.gradient {
            GradientSpec::None => v.push(("laser.gradient.kind", "none".into())),
            GradientSpec::Linear {
                xi_lo_nm,
                xi_hi_nm,
                e_lo,
                e_hi,
            } => {
                v.push(("laser.gradient.kind", "linear".into()));
                v.push(("laser.gradient.xi_lo_nm", fmt_f64(*xi_lo_nm)));
                v.push(("laser.gradient.xi_hi_nm", fmt_f64(*xi_hi_nm)));
                v.push(("laser.gradient.e_lo_v_per_m", fmt_f64(*e_lo)));
                v.push(("laser.gradient.e_hi_v_per_m", fmt_f64(*e_hi)));
            }
            GradientSpec::Table(pts) => {
                v.push(("laser.gradient.kind", "table".into()));
                let s = pts
                    .iter()
                    .map(|(x, e)| format!("{}:{}", fmt_f64(*x), fmt_f64(*e)))
                    .collect::<Vec<_>>()
                    .join(", ");
                v.push(("laser.gradient.table", s));
            }
        }
        v.push((
            "grating.period_nm",
            match self.grating {
                GratingPeriod::Auto => "auto".into(),
                GratingPeriod::Nm(p) => fmt_f64(p),
            },
        ));
        v.push(("wavepacket.delta_k_over_q", fmt_f64(self.delta_k_over_q)));
        v.push(("wavepacket.dk_offset_over_q", fmt_f64(self.dk_offset_over_q)));
        if let Some((o, w)) = self.superposition {
            v.push(("wavepacket.superposition.dk_offset_over_q", fmt_f64(o)));
            v.push(("wavepacket.superposition.weight_re", fmt_f64(w.re)));
            v.push(("wavepacket.superposition.weight_im", fmt_f64(w.im)));
        }
        v.push(("wavepacket.chirp_ld_cm", fmt_f64(self.chirp_ld_cm)));
        v.push(("grid.domain_nm", fmt_f64(self.domain_nm)));
        v.push(("grid.n_points", self.n_points.to_string()));
        v.push(("evolution.t_total_ps", fmt_f64(self.t_total_ps)));
        let auto = |o: Option<usize>| o.map_or("auto".to_string(), |n| n.to_string());
        v.push(("evolution.n_steps", auto(self.n_steps)));
        v.push(("evolution.snapshot_every", auto(self.snapshot_every)));
        v.push((
            "evolution.boundary",
            match self.boundary {
                Boundary::Periodic => "periodic".into(),
                Boundary::Dirichlet => "dirichlet".into(),
            },
        ));
        v.push(("evolution.symmetrize", self.symmetrize.to_string()));
        v.push(("evolution.norm_tolerance", fmt_f64(self.norm_tolerance)));
        v.push(("analysis.window_halfwidth_over_q", fmt_f64(self.window_halfwidth_over_q)));
        v.push(("analysis.smoothing_over_delta_k", fmt_f64(self.smoothing_over_delta_k)));
        v.push(("analysis.spectrum_range_over_q", fmt_f64(self.spectrum_range_over_q)));
        v.push(("analysis.wigner_points", self.wigner_points.to_string()));
        v.push(("analysis.lattice_sidebands", self.lattice_sidebands.to_string()));
        v.push((
            "outputs",
            self.outputs.iter().map(|o| o.name()).collect::<Vec<_>>().join(", "),
        ));
        v.into_iter().map(|(k, s)| (k.to_string(), s)).collect()
    }

    /// Config text grouped into sections, top-level keys first.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut section = String::new();
        let (top, nested): (Vec<_>, Vec<_>) = self.entries().into_iter().partition(|(k, _)| !k.contains('.'));
        for (key, value) in top.into_iter().chain(nested) {
            let (sec, rest) = match key.split_once('.') {
                Some((s, r)) => (s.to_string(), r.to_string()),
                None => (String::new(), key.clone()),
            };
            if sec != section {
                if !out.is_empty() {
                    out.push('\n');
                }
                if !sec.is_empty() {
                    out.push_str(&format!("[{sec}]\n"));
                }
                section = sec;
            }
            out.push_str(&format!("{rest} = {value}\n"));
        }
        out
    }

    /// Copy with one key replaced, revalidated.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self, ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::Invalid(vec![Issue {
                line: None,
                key: key.to_string(),
                message: "unknown key".into(),
            }]));
        }
        let mut map: BTreeMap<String, Entry> = self
            .entries()
            .into_iter()
            .map(|(k, v)| (k, Entry { line: None, value: v }))
            .collect();
        // The two electron inputs are exclusive.
        if key == "electron.beta" {
            map.remove("electron.kinetic_energy_ev");
        } else if key == "electron.kinetic_energy_ev" {
            map.remove("electron.beta");
        }
        map.insert(
            key.to_string(),
            Entry {
                line: None,
                value: value.trim().to_string(),
            },
        );
        Self::from_entries(&map)
    }

    /// Physical objects derived from the parameters.
    pub fn resolve(&self) -> crate::Result<Resolved> {
        let electron = match self.electron {
            ElectronInput::KineticEnergyEv(e) => ElectronParams::from_kinetic_energy(e)?,
            ElectronInput::Beta(b) => ElectronParams::from_beta(b)?,
        };
        let period = match self.grating {
            GratingPeriod::Auto => phase_matched_period(&electron, self.photon_energy_ev)?,
            GratingPeriod::Nm(p) => p * NM,
        };
        let profile = match &self.gradient {
            GradientSpec::None => FieldProfile::uniform(self.e0_v_per_m, self.theta_rad)?,
            GradientSpec::Linear {
                xi_lo_nm,
                xi_hi_nm,
                e_lo,
                e_hi,
            } => FieldProfile::linear_gradient(xi_lo_nm * NM, xi_hi_nm * NM, *e_lo, *e_hi, self.theta_rad)?,
            GradientSpec::Table(pts) => FieldProfile::tabulated(
                pts.iter().map(|p| p.0 * NM).collect(),
                pts.iter().map(|p| p.1).collect(),
                self.theta_rad,
            )?,
        };
        let laser = LaserGratingParams::new(self.photon_energy_ev, period, profile.e0_central, self.theta_rad)?;
        let periods = (self.domain_nm * NM / period).round().max(1.0);
        let grid = Grid::centered(periods * period, self.n_points)?;
        let spec = WavepacketSpec {
            delta_k: self.delta_k_over_q,
            dk_offset: self.dk_offset_over_q,
            chirp_drift: self.chirp_ld_cm * 1e-2,
            superposition: self.superposition.map(|(o, w)| Superposition {
                dk_offset: o,
                weight: w,
            }),
        };
        let total_time = self.t_total_ps * PS;
        let n_steps = match self.n_steps {
            Some(n) => n,
            None => auto_steps(&electron, &laser, &profile, &spec, total_time),
        };
        let mut evolution = EvolutionConfig::new(total_time, n_steps);
        evolution.boundary = self.boundary;
        evolution.symmetrize = self.symmetrize;
        evolution.norm_tolerance = self.norm_tolerance;
        evolution.observe_every = self.snapshot_every.unwrap_or_else(|| (n_steps / 1000).max(1));
        Ok(Resolved {
            electron,
            laser,
            profile,
            grid,
            spec,
            evolution,
        })
    }
}

/// Everything a run needs, in SI units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub electron: ElectronParams,
    pub laser: LaserGratingParams,
    pub profile: FieldProfile,
    pub grid: Grid,
    pub spec: WavepacketSpec,
    pub evolution: EvolutionConfig,
}

/// Largest Crank-Nicolson phase per step accepted by the automatic step.
pub const AUTO_PHASE_PER_STEP: f64 = 0.12;

/// Step count that keeps the Cayley phase of the populated band below
/// [`AUTO_PHASE_PER_STEP`]. The band reaches one recoil (or the trapping
/// height of the potential, if larger) beyond the outermost component, plus
/// three widths; energies are measured from the lowest component.
pub fn auto_steps(
    electron: &ElectronParams,
    laser: &LaserGratingParams,
    profile: &FieldProfile,
    spec: &WavepacketSpec,
    total_time: f64,
) -> usize {
    use crate::physics::tdse_coefficients_at;
    let q = laser.q;
    let e_max = match &profile.shape {
        crate::field::FieldShape::Uniform => profile.e0_central,
        crate::field::FieldShape::LinearGradient { e_lo, e_hi, .. } => e_lo.max(*e_hi),
        crate::field::FieldShape::Tabulated { e0, .. } => e0.iter().cloned().fold(0.0, f64::max),
    };
    let c = tdse_coefficients_at(electron, laser, e_max);
    let mut offsets = vec![spec.dk_offset];
    if let Some(s) = spec.superposition {
        offsets.push(s.dk_offset);
    }
    let outer = offsets.iter().map(|o| o.abs()).fold(0.0, f64::max);
    let inner = offsets.iter().map(|o| o.abs()).fold(f64::INFINITY, f64::min);
    let reach = q.max((c.alpha0 / c.alpha2).sqrt());
    let k_hi = outer * q + reach + 3.0 * spec.delta_k * q;
    let k_lo = (inner * q - 3.0 * spec.delta_k * q).max(0.0);
    let band = c.alpha2 * (k_hi * k_hi - k_lo * k_lo) + c.alpha0;
    let d_tau = AUTO_PHASE_PER_STEP / band;
    let dt = d_tau / crate::constants::SPEED_OF_LIGHT;
    (total_time / dt).ceil().max(1.0) as usize
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut issues = Vec::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() && !name.contains(char::is_whitespace) => {
                    section = name.trim().to_string();
                }
                _ => issues.push(Issue {
                    line: Some(line_no),
                    key: String::new(),
                    message: format!("malformed section header `{line}`"),
                }),
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            issues.push(Issue {
                line: Some(line_no),
                key: String::new(),
                message: format!("expected `key = value`, got `{line}`"),
            });
            continue;
        };
        let k = k.trim();
        let v = v.trim().trim_matches('"');
        if k.is_empty() || k.contains(char::is_whitespace) {
            issues.push(Issue {
                line: Some(line_no),
                key: k.to_string(),
                message: "malformed key".into(),
            });
            continue;
        }
        let key = if section.is_empty() {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        if let Some(prev) = map.get(&key) {
            let prev: &Entry = prev;
            issues.push(Issue {
                line: Some(line_no),
                key: key.clone(),
                message: format!("duplicate key (first set on line {})", prev.line.unwrap_or(0)),
            });
            continue;
        }
        map.insert(
            key,
            Entry {
                line: Some(line_no),
                value: v.to_string(),
            },
        );
    }
    if issues.is_empty() {
        Ok(map)
    } else {
        Err(ConfigError::Syntax(issues))
    }
}
