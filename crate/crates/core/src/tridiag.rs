//! Complex tridiagonal solves: Thomas elimination, and the cyclic variant with
//! a Sherman-Morrison rank-one correction for the two corner entries.
//!
//! The factorization is kept so that a time stepper with a constant left-hand
//! side pays only the O(n) substitution sweeps per step.

use crate::error::{Error, Result};
use num_complex::Complex64;

type C64 = Complex64;

/// Pivots smaller than this (relative to the row scale) are treated as zero.
const PIVOT_EPS: f64 = 1e-300;

#[derive(Debug, Clone)]
struct ShermanMorrison {
    /// Solution of T' z = u.
    z: Vec<C64>,
    /// top_right / gamma
    ratio: C64,
    /// 1 / (1 + v.z)
    inv_denom: C64,
}

/// LU factors of a (possibly cyclic) tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// sub[i-1] / pivot[i]; entry 0 unused. Folding the division into the
    /// multiplier leaves one complex multiply-add on each sweep's critical path.
    sub_scaled: Vec<C64>,
    /// modified super-diagonal c'
    sup_mod: Vec<C64>,
    inv_pivot: Vec<C64>,
    cyclic: Option<ShermanMorrison>,
}

impl Factorization {
    /// Open tridiagonal matrix with `sub[i] = A[i+1][i]`, `sup[i] = A[i][i+1]`
    /// (both of length n - 1).
    pub fn new(sub: &[C64], diag: &[C64], sup: &[C64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::domain("tridiagonal", "inconsistent diagonal lengths"));
        }
        let (sup_mod, inv_pivot) = thomas_factor(sub, diag, sup)?;
        Ok(Factorization {
            sub_scaled: scale_sub(sub, &inv_pivot),
            sup_mod,
            inv_pivot,
            cyclic: None,
        })
    }

    /// Cyclic matrix: as [`Factorization::new`] plus `top_right = A[0][n-1]`
    /// and `bottom_left = A[n-1][0]`.
    pub fn new_cyclic(sub: &[C64], diag: &[C64], sup: &[C64], top_right: C64, bottom_left: C64) -> Result<Self> {
        let n = diag.len();
        if n < 3 {
            return Err(Error::domain("tridiagonal", "cyclic systems need at least 3 rows"));
        }
        if sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::domain("tridiagonal", "inconsistent diagonal lengths"));
        }
        let gamma = if diag[0].norm() > 0.0 { -diag[0] } else { C64::new(-1.0, 0.0) };
        let mut d = diag.to_vec();
        d[0] -= gamma;
        d[n - 1] -= top_right * bottom_left / gamma;
        let (sup_mod, inv_pivot) = thomas_factor(sub, &d, sup)?;
        let mut f = Factorization {
            sub_scaled: scale_sub(sub, &inv_pivot),
            sup_mod,
            inv_pivot,
            cyclic: None,
        };
        let mut z = vec![C64::new(0.0, 0.0); n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        f.substitute(&mut z);
        let ratio = top_right / gamma;
        let denom = C64::new(1.0, 0.0) + z[0] + ratio * z[n - 1];
        if denom.norm() < PIVOT_EPS {
            return Err(Error::Singular { row: n - 1 });
        }
        f.cyclic = Some(ShermanMorrison {
            z,
            ratio,
            inv_denom: denom.inv(),
        });
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    fn substitute(&self, x: &mut [C64]) {
        let n = x.len();
        for (v, p) in x.iter_mut().zip(&self.inv_pivot) {
            *v *= p;
        }
        for i in 1..n {
            x[i] = x[i] - self.sub_scaled[i] * x[i - 1];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.sup_mod[i] * x[i + 1];
        }
    }

    /// Overwrites `rhs` with the solution of A x = rhs.
    pub fn solve_in_place(&self, rhs: &mut [C64]) {
        assert_eq!(rhs.len(), self.len(), "right-hand side length mismatch");
        self.substitute(rhs);
        if let Some(sm) = &self.cyclic {
            let n = rhs.len();
            let factor = (rhs[0] + sm.ratio * rhs[n - 1]) * sm.inv_denom;
            for (x, z) in rhs.iter_mut().zip(&sm.z) {
                *x -= factor * z;
            }
        }
    }
}

fn scale_sub(sub: &[C64], inv_pivot: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); inv_pivot.len()];
    for i in 1..inv_pivot.len() {
        out[i] = sub[i - 1] * inv_pivot[i];
    }
    out
}

fn thomas_factor(sub: &[C64], diag: &[C64], sup: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = diag.len();
    let mut sup_mod = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut inv_pivot = vec![C64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - sub[i - 1] * sup_mod[i - 1];
        }
        if !(pivot.norm() > PIVOT_EPS) {
            return Err(Error::Singular { row: i });
        }
        inv_pivot[i] = pivot.inv();
        if i + 1 < n {
            sup_mod[i] = sup[i] * inv_pivot[i];
        }
    }
    Ok((sup_mod, inv_pivot))
}

/// One-shot Thomas solve.
pub fn solve_tridiagonal(sub: &[C64], diag: &[C64], sup: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    let f = Factorization::new(sub, diag, sup)?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}

/// One-shot cyclic solve.
pub fn solve_cyclic(
    sub: &[C64],
    diag: &[C64],
    sup: &[C64],
    top_right: C64,
    bottom_left: C64,
    rhs: &[C64],
) -> Result<Vec<C64>> {
    let f = Factorization::new_cyclic(sub, diag, sup, top_right, bottom_left)?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}
