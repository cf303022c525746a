//! Cartesian parameter sweeps producing a regime map.

use crate::analysis::regime::{central_couplings, classify_regime};
use crate::config::{ConfigError, ExperimentParams, Issue};
use crate::error::{Error, Result};
use crate::physics::two_level_validity;
use crate::runner::run;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    /// Parses `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |message: String| {
            Error::Config(ConfigError::Invalid(vec![Issue {
                line: None,
                key: spec.to_string(),
                message,
            }]))
        };
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| bad("expected key=v1,v2,...".into()))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if key.trim().is_empty() || values.iter().any(String::is_empty) {
            return Err(bad("empty key or value".into()));
        }
        Ok(Axis {
            key: key.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub workers: usize,
    /// Largest number of points accepted.
    pub cap: usize,
    /// Skip the propagations; leakage and split are left empty.
    pub classify_only: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            workers: 1,
            cap: 64,
            classify_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<String>,
    pub klein_cook_q: f64,
    pub validity_ratio: f64,
    pub leakage: Option<f64>,
    pub split: Option<f64>,
    pub label: String,
    pub status: String,
}

/// Points in row-major order, the last axis varying fastest.
pub fn cartesian(axes: &[Axis]) -> Vec<Vec<String>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for v in &axis.values {
                let mut q = p.clone();
                q.push(v.clone());
                next.push(q);
            }
        }
        points = next;
    }
    points
}

fn point_params(base: &ExperimentParams, axes: &[Axis], values: &[String]) -> Result<ExperimentParams> {
    let mut p = base.clone();
    for (a, v) in axes.iter().zip(values) {
        p = p.with_override(&a.key, v)?;
    }
    Ok(p)
}

fn evaluate(params: &ExperimentParams, dir: &Path, classify_only: bool) -> Result<(f64, f64, Option<f64>, Option<f64>, String, String)> {
    let derived = central_couplings(params)?;
    let ratio = two_level_validity(&derived).ratio;
    if classify_only {
        let label = classify_regime(params, &derived);
        return Ok((derived.klein_cook_q, ratio, None, None, label.regime.name().into(), "classified".into()));
    }
    let out = run(params, dir)?;
    let m = &out.manifest;
    let split = m.split_plus_half.map(|s| s.value);
    Ok((
        m.klein_cook_q,
        m.validity_ratio,
        Some(m.final_leakage),
        split,
        m.regime.clone(),
        m.status.to_string(),
    ))
}

/// Runs every point of the cartesian product of `axes` over `base`, each in
/// its own `point_NNNN` subdirectory, and writes `regime_map.csv`.
///
/// Every point is validated, and the cap checked, before any propagation.
pub fn sweep(base: &ExperimentParams, axes: &[Axis], out_dir: &Path, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    let points = cartesian(axes);
    if points.len() > opts.cap {
        return Err(Error::Config(ConfigError::Invalid(vec![Issue {
            line: None,
            key: "sweep".into(),
            message: format!("{} points exceed the cap of {}", points.len(), opts.cap),
        }])));
    }
    let params: Vec<ExperimentParams> = points
        .iter()
        .map(|v| point_params(base, axes, v))
        .collect::<Result<_>>()?;
    for p in &params {
        p.resolve()?;
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SweepRow>>>> = Mutex::new((0..points.len()).map(|_| None).collect());
    let workers = opts.workers.clamp(1, points.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= points.len() {
                    break;
                }
                let dir = out_dir.join(format!("point_{i:04}"));
                let row = evaluate(&params[i], &dir, opts.classify_only).map(|(qk, r, leak, split, label, status)| SweepRow {
                    index: i,
                    values: points[i].clone(),
                    klein_cook_q: qk,
                    validity_ratio: r,
                    leakage: leak,
                    split,
                    label,
                    status,
                });
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every point is evaluated"))
        .collect::<Result<_>>()?;
    let path = out_dir.join("regime_map.csv");
    std::fs::write(&path, regime_map_csv(axes, &rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

pub fn regime_map_csv(axes: &[Axis], rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
    let mut header = vec!["index".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        ["klein_cook_q", "validity_ratio", "leakage", "split_rad_per_m", "label", "status"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let mut cells = vec![r.index.to_string()];
        cells.extend(r.values.iter().cloned());
        cells.push(format!("{:e}", r.klein_cook_q));
        cells.push(format!("{:e}", r.validity_ratio));
        cells.push(opt(r.leakage));
        cells.push(opt(r.split));
        cells.push(r.label.clone());
        cells.push(r.status.clone());
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
