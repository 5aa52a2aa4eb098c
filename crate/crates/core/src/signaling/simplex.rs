//! Phase-one simplex for `A x = b, x ≥ 0` on a dense tableau.

use crate::error::{NweError, Result};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

pub(crate) struct PhaseOne {
    /// Minimal total infeasibility `Σ artificials`.
    pub objective: f64,
    /// A feasible point when `objective` is zero.
    pub x: Vec<f64>,
    /// Duals of the original rows. When `objective > 0` they satisfy
    /// `yᵀA ≤ 0` and `yᵀb = objective`, a Farkas certificate.
    pub y: Vec<f64>,
}

/// Minimizes the sum of artificial variables with Bland's rule.
pub(crate) fn phase_one(a: &[Vec<f64>], b: &[f64]) -> Result<PhaseOne> {
    let rows = a.len();
    if rows == 0 || rows != b.len() {
        return Err(NweError::DimensionMismatch {
            expected: rows,
            got: b.len(),
        });
    }
    let cols = a[0].len();
    let width = cols + rows + 1;
    let rhs = width - 1;

    let mut flip = vec![1.0; rows];
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for r in 0..rows {
        if a[r].len() != cols {
            return Err(NweError::DimensionMismatch {
                expected: cols,
                got: a[r].len(),
            });
        }
        if b[r] < 0.0 {
            flip[r] = -1.0;
        }
        let mut row = vec![0.0; width];
        for j in 0..cols {
            row[j] = flip[r] * a[r][j];
        }
        row[cols + r] = 1.0;
        row[rhs] = flip[r] * b[r];
        t.push(row);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs; artificials start basic at cost 1.
    let mut z = vec![0.0; width];
    for row in &t {
        for j in 0..cols {
            z[j] -= row[j];
        }
        z[rhs] -= row[rhs];
    }

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..cols + rows).find(|&j| z[j] < -PIVOT_TOL) else {
            let x = (0..cols)
                .map(|j| {
                    basis
                        .iter()
                        .position(|&bj| bj == j)
                        .map_or(0.0, |r| t[r][rhs].max(0.0))
                })
                .collect();
            let y = (0..rows).map(|r| flip[r] * (1.0 - z[cols + r])).collect();
            return Ok(PhaseOne {
                objective: -z[rhs],
                x,
                y,
            });
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            if t[r][enter] > PIVOT_TOL {
                let ratio = t[r][rhs] / t[r][enter];
                let take = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[r] < basis[lr])
                    }
                };
                if take {
                    leave = Some((r, ratio));
                }
            }
        }
        let (pr, _) = leave.ok_or_else(|| {
            NweError::NumericalInconclusive("phase-one objective unbounded below".into())
        })?;
        pivot(&mut t, &mut z, pr, enter);
        basis[pr] = enter;
    }
    Err(NweError::NumericalInconclusive(format!(
        "no convergence after {MAX_PIVOTS} pivots"
    )))
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], pr: usize, pc: usize) {
    let p = t[pr][pc];
    t[pr].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[pr].clone();
    for (r, row) in t.iter_mut().enumerate() {
        if r != pr {
            let f = row[pc];
            if f != 0.0 {
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    let f = z[pc];
    z.iter_mut()
        .zip(&pivot_row)
        .for_each(|(v, pv)| *v -= f * pv);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 0.
        let res = phase_one(&[vec![1.0, 1.0], vec![1.0, -1.0]], &[1.0, 0.0]).unwrap();
        assert!(res.objective.abs() < 1e-12);
        assert!((res.x[0] - 0.5).abs() < 1e-12 && (res.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_has_farkas_certificate() {
        // x0 + x1 = 1 and x0 + x1 = 2 cannot both hold.
        let a = [vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = [1.0, 2.0];
        let res = phase_one(&a, &b).unwrap();
        assert!(res.objective > 0.5);
        for col in 0..2 {
            let ya: f64 = a.iter().zip(&res.y).map(|(row, y)| y * row[col]).sum();
            assert!(ya <= 1e-12);
        }
        let yb: f64 = (0..2).map(|r| res.y[r] * b[r]).sum();
        assert!((yb - res.objective).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows() {
        let a = [vec![-1.0, 0.0], vec![0.0, 1.0]];
        let res = phase_one(&a, &[-0.25, 0.75]).unwrap();
        assert!(res.objective.abs() < 1e-12);
        assert!((res.x[0] - 0.25).abs() < 1e-12);
        let bad = phase_one(&[vec![1.0, 0.0]], &[-1.0]).unwrap();
        assert!(bad.objective > 0.5);
        assert!(-bad.y[0] > 0.5 && bad.y[0] <= 1e-12);
    }
}
