//! Phase-one tableau simplex for equality-constrained feasibility.
//!
//! Minimizes the sum of artificial slacks for `A x = b, x >= 0`, entering on
//! the most negative reduced cost and falling back to Bland's anti-cycling
//! rule after a long degenerate stall. The system is feasible exactly when
//! the optimum is zero; a strictly positive optimum is the infeasibility
//! residual.

use crate::{Error, Result};

const ENTER_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;

pub(crate) struct PhaseOne {
    /// Optimal sum of artificial slacks.
    pub objective: f64,
    /// Values of the structural variables at the optimum.
    pub x: Vec<f64>,
}

/// `rows` holds `(coefficients, rhs)` pairs, each coefficient vector of
/// length `num_vars`.
pub(crate) fn solve(num_vars: usize, rows: &[(Vec<f64>, f64)]) -> Result<PhaseOne> {
    let r = rows.len();
    if r == 0 || num_vars == 0 {
        return Err(Error::Solver("phase one needs a nonempty system".into()));
    }
    let width = num_vars + r + 1; // structural + artificial + rhs
    let mut tab = vec![vec![0.0f64; width]; r + 1];
    for (k, (coeffs, rhs)) in rows.iter().enumerate() {
        debug_assert_eq!(coeffs.len(), num_vars);
        let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for (slot, c) in tab[k + 1][..num_vars].iter_mut().zip(coeffs) {
            *slot = flip * c;
        }
        tab[k + 1][num_vars + k] = 1.0;
        tab[k + 1][width - 1] = flip * rhs;
    }
    // Reduced costs with the artificial basis: 0 - column sums for the
    // structural columns, 0 for artificials; the stored "rhs" of the
    // objective row is minus the current objective value.
    let (obj_row, body) = tab.split_first_mut().expect("tableau has an objective row");
    for (col, slot) in obj_row[..num_vars].iter_mut().enumerate() {
        *slot = -body.iter().map(|row| row[col]).sum::<f64>();
    }
    obj_row[width - 1] = -body.iter().map(|row| row[width - 1]).sum::<f64>();

    let mut basis: Vec<usize> = (num_vars..num_vars + r).collect();
    let max_pivots = 100_000usize;
    // Degenerate stalls longer than this switch entering to Bland's rule,
    // which cannot cycle; Dantzig's rule is much faster everywhere else.
    let stall_limit = 10 * (r + 16);
    let mut stalled = 0usize;
    let mut last_objective = f64::INFINITY;
    for _ in 0..max_pivots {
        let enter = if stalled < stall_limit {
            // Dantzig: most negative reduced cost.
            let mut best: Option<(usize, f64)> = None;
            for (c, &rc) in tab[0][..num_vars + r].iter().enumerate() {
                if rc < -ENTER_TOL && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((c, rc));
                }
            }
            best.map(|(c, _)| c)
        } else {
            // Bland: lowest-index improving column.
            (0..num_vars + r).find(|&c| tab[0][c] < -ENTER_TOL)
        };
        let Some(enter) = enter else {
            let mut x = vec![0.0; num_vars];
            for (k, &col) in basis.iter().enumerate() {
                if col < num_vars {
                    x[col] = tab[k + 1][width - 1];
                }
            }
            return Ok(PhaseOne { objective: -tab[0][width - 1], x });
        };
        // Ratio test; ties broken by the lowest basic variable index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for k in 1..=r {
            let piv = tab[k][enter];
            if piv > PIVOT_TOL {
                let ratio = tab[k][width - 1] / piv;
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best - 1e-15
                            || (ratio <= best + 1e-15 && basis[k - 1] < basis[cur - 1])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(k);
                }
            }
        }
        let Some(p) = leave else {
            return Err(Error::Solver("phase one objective unbounded below".into()));
        };
        let scale = tab[p][enter];
        tab[p].iter_mut().for_each(|v| *v /= scale);
        for q in 0..=r {
            if q == p {
                continue;
            }
            let factor = tab[q][enter];
            if factor != 0.0 {
                // Row elimination needs rows p and q at once; split the
                // borrow around the larger index.
                let (lo, hi) = tab.split_at_mut(p.max(q));
                let (target, pivot_row) =
                    if q < p { (&mut lo[q], &*hi[0]) } else { (&mut hi[0], &*lo[p]) };
                for (t, pv) in target.iter_mut().zip(pivot_row) {
                    *t -= factor * pv;
                }
                tab[q][enter] = 0.0;
            }
        }
        basis[p - 1] = enter;
        let objective = -tab[0][width - 1];
        if objective < last_objective - 1e-12 * (1.0 + objective.abs()) {
            last_objective = objective;
            stalled = 0;
        } else {
            stalled += 1;
        }
    }
    Err(Error::Solver("phase one pivot limit exceeded".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system_reaches_zero() {
        // x1 + x2 = 1, x1 - x2 = 0 has the solution (1/2, 1/2).
        let rows = vec![
            (vec![1.0, 1.0], 1.0),
            (vec![1.0, -1.0], 0.0),
        ];
        let sol = solve(2, &rows).unwrap();
        assert!(sol.objective <= 1e-12);
        assert!((sol.x[0] - 0.5).abs() <= 1e-12);
        assert!((sol.x[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn infeasible_system_reports_residual() {
        // x1 = 1 and x1 = 2 cannot both hold with a single variable.
        let rows = vec![(vec![1.0], 1.0), (vec![1.0], 2.0)];
        let sol = solve(1, &rows).unwrap();
        assert!(sol.objective >= 0.5);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x1 = -0.75 is feasible at x1 = 0.75.
        let rows = vec![(vec![-1.0], -0.75)];
        let sol = solve(1, &rows).unwrap();
        assert!(sol.objective <= 1e-12);
        assert!((sol.x[0] - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn redundant_rows_are_harmless() {
        let rows = vec![
            (vec![1.0, 1.0], 1.0),
            (vec![2.0, 2.0], 2.0),
            (vec![1.0, 0.0], 0.25),
        ];
        let sol = solve(2, &rows).unwrap();
        assert!(sol.objective <= 1e-12);
        assert!((sol.x[0] - 0.25).abs() <= 1e-10);
        assert!((sol.x[1] - 0.75).abs() <= 1e-10);
    }
}
