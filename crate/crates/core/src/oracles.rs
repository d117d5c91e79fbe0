//! Exact convex-order oracles with machine-checkable certificates.
//!
//! Two independent routes decide `mu <=_c nu` for finitely supported
//! measures:
//!
//! * [`quantile_test`] (dimension one): the running integral of the quantile
//!   difference `D(x) = int_0^x (F_mu^{-1} - F_nu^{-1})` must stay
//!   nonnegative and vanish at `x = 1`. `D` is piecewise linear, so checking
//!   its breakpoints is exact.
//! * [`martingale_feasibility`] (any dimension): the measures are ordered
//!   exactly when a martingale coupling exists, i.e. a nonnegative matrix
//!   with marginals `mu`, `nu` whose rows are mean-preserving splits. That
//!   is an LP feasibility question answered by a phase-one simplex.

mod phase1;

use crate::measures::DiscreteMeasure;
use crate::{Error, Result};

/// Tolerance for the quantile-integral test.
pub const QUANTILE_TOL: f64 = 1e-12;
/// Tolerance on mean agreement before attempting the martingale LP.
pub const MEAN_TOL: f64 = 1e-9;
/// A phase-one optimum at or below this value certifies feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Residual allowed when re-verifying a returned coupling.
pub const COUPLING_RESIDUAL_TOL: f64 = 1e-8;

/// Evidence returned with a verdict: a witness of failure, or the coupling
/// that proves order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// The quantile integral dips below zero at `x`.
    QuantileViolation { x: f64, integral: f64 },
    /// Barycenters differ by `delta = mean(mu) - mean(nu)`.
    MeanMismatch { delta: Vec<f64> },
    /// A martingale coupling: row-major `rows x cols` matrix with `mu`
    /// marginal on rows, `nu` on columns, rows splitting each atom of `mu`
    /// without moving its mean.
    MartingaleCoupling { rows: usize, cols: usize, plan: Vec<f64> },
    /// The coupling LP is infeasible; `residual` is the smallest attainable
    /// total constraint violation.
    Infeasible { residual: f64 },
}

/// Outcome of an oracle run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleVerdict {
    pub ordered: bool,
    pub certificate: Option<Certificate>,
}

/// Decides convex order in dimension one through the quantile criterion:
/// `mu <=_c nu` iff `int_0^x [F_mu^{-1} - F_nu^{-1}] dy >= 0` for every
/// `x in [0, 1]` with equality at `x = 1`.
pub fn quantile_test(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OracleVerdict> {
    let am = mu.sorted_atoms_1d()?;
    let an = nu.sorted_atoms_1d()?;
    let mut d = 0.0f64;
    let mut min_d = 0.0f64;
    let mut min_x = 0.0f64;
    let mut t = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut cm = am[0].1;
    let mut cn = an[0].1;
    while t < 1.0 {
        let next = cm.min(cn).min(1.0);
        if next > t {
            d += (next - t) * (am[i].0 - an[j].0);
            t = next;
            if d < min_d {
                min_d = d;
                min_x = t;
            }
        }
        if t >= 1.0 {
            break;
        }
        if cm <= cn {
            if i + 1 < am.len() {
                i += 1;
                cm += am[i].1;
            } else {
                cm = f64::INFINITY;
            }
        } else if j + 1 < an.len() {
            j += 1;
            cn += an[j].1;
        } else {
            cn = f64::INFINITY;
        }
    }
    if min_d < -QUANTILE_TOL {
        return Ok(OracleVerdict {
            ordered: false,
            certificate: Some(Certificate::QuantileViolation { x: min_x, integral: min_d }),
        });
    }
    // D(1) is the mean difference; recompute it directly for accuracy.
    let mean_gap = mu.mean()[0] - nu.mean()[0];
    if mean_gap.abs() > QUANTILE_TOL {
        return Ok(OracleVerdict {
            ordered: false,
            certificate: Some(Certificate::MeanMismatch { delta: vec![mean_gap] }),
        });
    }
    Ok(OracleVerdict { ordered: true, certificate: None })
}

/// Largest coupling size (`mu` atoms times `nu` atoms) for which
/// [`auto_oracle`] is willing to run the martingale LP.
pub const AUTO_ORACLE_CELL_CAP: usize = 4096;

/// Runs the cheapest applicable exact oracle: [`quantile_test`] in
/// dimension one, [`martingale_feasibility`] when the coupling stays at or
/// under [`AUTO_ORACLE_CELL_CAP`] cells, `None` when both are out of reach.
pub fn auto_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Option<OracleVerdict>> {
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension { expected: mu.dim(), got: nu.dim() });
    }
    if mu.dim() == 1 {
        return quantile_test(mu, nu).map(Some);
    }
    if mu.len() * nu.len() <= AUTO_ORACLE_CELL_CAP {
        return martingale_feasibility(mu, nu).map(Some);
    }
    Ok(None)
}

/// Decides convex order in any dimension by testing for a martingale
/// coupling `pi >= 0` with `sum_j pi_ij = w_i`, `sum_i pi_ij = v_j` and
/// `sum_j pi_ij y_j = w_i x_i` for every atom `x_i` of `mu`.
pub fn martingale_feasibility(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<OracleVerdict> {
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension { expected: mu.dim(), got: nu.dim() });
    }
    let d = mu.dim();
    let delta: Vec<f64> =
        mu.mean().iter().zip(nu.mean()).map(|(a, b)| a - b).collect();
    if delta.iter().any(|x| x.abs() > MEAN_TOL) {
        return Ok(OracleVerdict {
            ordered: false,
            certificate: Some(Certificate::MeanMismatch { delta }),
        });
    }

    let (n, m) = (mu.len(), nu.len());
    let nv = n * m;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + m + n * d);
    for i in 0..n {
        let mut coeffs = vec![0.0; nv];
        coeffs[i * m..(i + 1) * m].iter_mut().for_each(|c| *c = 1.0);
        rows.push((coeffs, mu.weight(i)));
    }
    for j in 0..m {
        let mut coeffs = vec![0.0; nv];
        (0..n).for_each(|i| coeffs[i * m + j] = 1.0);
        rows.push((coeffs, nu.weight(j)));
    }
    for i in 0..n {
        for k in 0..d {
            let mut coeffs = vec![0.0; nv];
            for j in 0..m {
                coeffs[i * m + j] = nu.point(j)[k];
            }
            rows.push((coeffs, mu.weight(i) * mu.point(i)[k]));
        }
    }

    let sol = phase1::solve(nv, &rows)?;
    if sol.objective > FEASIBILITY_TOL {
        return Ok(OracleVerdict {
            ordered: false,
            certificate: Some(Certificate::Infeasible { residual: sol.objective }),
        });
    }
    verify_coupling(&sol.x, mu, nu)?;
    Ok(OracleVerdict {
        ordered: true,
        certificate: Some(Certificate::MartingaleCoupling { rows: n, cols: m, plan: sol.x }),
    })
}

/// Re-checks a claimed martingale coupling against its defining equations
/// before it is handed out as a certificate.
fn verify_coupling(plan: &[f64], mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let fail = |msg: String| Err(Error::Solver(format!("martingale coupling invalid: {msg}")));
    for (idx, &x) in plan.iter().enumerate() {
        if x < -1e-12 {
            return fail(format!("negative mass {x} at cell {idx}"));
        }
    }
    for i in 0..n {
        let s: f64 = plan[i * m..(i + 1) * m].iter().sum();
        if (s - mu.weight(i)).abs() > COUPLING_RESIDUAL_TOL {
            return fail(format!("row {i} mass off by {}", s - mu.weight(i)));
        }
        for k in 0..d {
            let moment: f64 =
                (0..m).map(|j| plan[i * m + j] * nu.point(j)[k]).sum();
            let target = mu.weight(i) * mu.point(i)[k];
            if (moment - target).abs() > COUPLING_RESIDUAL_TOL {
                return fail(format!("row {i} mean drifts by {}", moment - target));
            }
        }
    }
    for j in 0..m {
        let s: f64 = (0..n).map(|i| plan[i * m + j]).sum();
        if (s - nu.weight(j)).abs() > COUPLING_RESIDUAL_TOL {
            return fail(format!("col {j} mass off by {}", s - nu.weight(j)));
        }
    }
    Ok(())
}
