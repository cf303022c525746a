//! Output formats: the FEQO binary grid, binary PPM heatmaps and CSV tables.
//!
//! FEQO layout, all little-endian: `b"FEQO"`, `u32` version, `u64` rows,
//! `u64` cols, four `f64` axis bounds (row_min, row_max, col_min, col_max),
//! then rows * cols `f64` values in row-major order.

use crate::error::{Error, Result};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"FEQO";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub rows: usize,
    pub cols: usize,
    /// (row_min, row_max, col_min, col_max)
    pub bounds: [f64; 4],
    pub data: Vec<f64>,
}

impl GridFile {
    pub fn new(rows: usize, cols: usize, bounds: [f64; 4], data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Format("grid must have at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Format(format!(
                "payload has {} values, expected {rows} x {cols}",
                data.len()
            )));
        }
        Ok(GridFile {
            rows,
            cols,
            bounds,
            data,
        })
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for b in self.bounds {
            out.extend_from_slice(&b.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("missing FEQO magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let rows = u64_at(8);
        let cols = u64_at(16);
        let bounds = [f64_at(24), f64_at(32), f64_at(40), f64_at(48)];
        let count = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
        if (bytes.len() - HEADER_LEN) as u64 != count {
            return Err(Error::Format(format!(
                "payload is {} bytes, header declares {rows} x {cols}",
                bytes.len() - HEADER_LEN
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        GridFile::new(rows as usize, cols as usize, bounds, data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMap {
    Viridis,
    Gray,
    /// Blue-white-red, centred on zero; for signed data.
    Diverging,
}

impl ColorMap {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "viridis" => Some(ColorMap::Viridis),
            "gray" | "grey" => Some(ColorMap::Gray),
            "diverging" => Some(ColorMap::Diverging),
            _ => None,
        }
    }

    /// RGB for t in [0, 1].
    pub fn color(self, t: f64) -> [u8; 3] {
        let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
        let stops: &[[f64; 3]] = match self {
            ColorMap::Viridis => &[
                [68.0, 1.0, 84.0],
                [59.0, 82.0, 139.0],
                [33.0, 145.0, 140.0],
                [94.0, 201.0, 98.0],
                [253.0, 231.0, 37.0],
            ],
            ColorMap::Gray => &[[0.0, 0.0, 0.0], [255.0, 255.0, 255.0]],
            ColorMap::Diverging => &[[33.0, 102.0, 172.0], [247.0, 247.0, 247.0], [178.0, 24.0, 43.0]],
        };
        let x = t * (stops.len() - 1) as f64;
        let i = (x.floor() as usize).min(stops.len() - 2);
        let f = x - i as f64;
        let mut out = [0u8; 3];
        for c in 0..3 {
            out[c] = (stops[i][c] + f * (stops[i + 1][c] - stops[i][c])).round() as u8;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Linear,
    /// sign(v) log10(1 + |v| / linthresh), with `linthresh` relative to max|v|.
    SymLog { linthresh: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub scale: Scale,
    pub color_map: ColorMap,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: Scale::Linear,
            color_map: ColorMap::Viridis,
        }
    }
}

/// Binary PPM (P6), one pixel per grid cell, grid row 0 at the top.
///
/// Data with negative values are mapped symmetrically about zero; otherwise
/// the range [min, max] fills the colour map. A constant grid renders as the
/// first colour.
pub fn render_ppm(grid: &GridFile, opts: &RenderOptions) -> Vec<u8> {
    let max_abs = grid.data.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let transform = |v: f64| match opts.scale {
        Scale::Linear => v,
        Scale::SymLog { linthresh } => {
            let t = (linthresh * max_abs).max(f64::MIN_POSITIVE);
            v.signum() * (1.0 + v.abs() / t).log10()
        }
    };
    let vals: Vec<f64> = grid
        .data
        .iter()
        .map(|&v| if v.is_finite() { transform(v) } else { 0.0 })
        .collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let signed = lo < 0.0;
    let (a, b) = if signed {
        let m = lo.abs().max(hi.abs());
        (-m, m)
    } else {
        (lo, hi)
    };
    let mut out = format!("P6\n{} {}\n255\n", grid.cols, grid.rows).into_bytes();
    out.reserve(3 * vals.len());
    for v in vals {
        let t = if b > a { (v - a) / (b - a) } else { 0.0 };
        out.extend_from_slice(&opts.color_map.color(t));
    }
    out
}

fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

/// `dk_over_q,probability_density`
pub fn spectrum_csv(dk: &[f64], density: &[f64], q: f64) -> String {
    let mut s = String::from("dk_over_q,probability_density\n");
    for (k, d) in dk.iter().zip(density) {
        s.push_str(&fmt_num(k / q));
        s.push(',');
        s.push_str(&fmt_num(*d));
        s.push('\n');
    }
    s
}

/// One populations.csv row.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PopulationRow {
    pub t_ps: f64,
    pub p_plus_half: f64,
    pub p_minus_half: f64,
    pub leakage: f64,
    pub mean_dk_plus: f64,
    pub mean_dk_minus: f64,
    /// Lobe split in the +q/2 window (rad/m); 0 for a single lobe.
    pub split_rad_per_m: f64,
}

pub fn populations_csv(rows: &[PopulationRow]) -> String {
    let mut s = String::from("t_ps,p_plus_half,p_minus_half,leakage,mean_dk_plus,mean_dk_minus,split_rad_per_m\n");
    for r in rows {
        let cells = [
            r.t_ps,
            r.p_plus_half,
            r.p_minus_half,
            r.leakage,
            r.mean_dk_plus,
            r.mean_dk_minus,
            r.split_rad_per_m,
        ];
        s.push_str(&cells.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Generic numeric table with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_map_endpoints() {
        assert_eq!(ColorMap::Gray.color(0.0), [0, 0, 0]);
        assert_eq!(ColorMap::Gray.color(1.0), [255, 255, 255]);
        assert_eq!(ColorMap::Diverging.color(0.5), [247, 247, 247]);
    }
}
