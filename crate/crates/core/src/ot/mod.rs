//! Exact optimal transport between finitely supported measures.
//!
//! Everything here reduces to the dense transportation LP
//! `opt sum_ij c_ij pi_ij` over couplings `pi` with fixed marginals, solved
//! exactly by a network simplex ([`solve_transport`]). On top of it sit the
//! cost functionals the convex-order test needs: the max-covariance
//! `C(mu, rho) = sup_pi sum <x, y> pi`, the Wasserstein distances, and the
//! quantile form of `W_2^2` in dimension one, which provides an independent
//! cross-check of the LP route.

mod simplex;

use crate::measures::DiscreteMeasure;
use crate::{Error, Result};

/// Which way the transportation objective points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

/// Dense cost matrix `c_ij` between two supports.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("cost matrix needs positive shape".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "cost matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite cost entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds the matrix entrywise from atom pairs of two measures.
    fn between(
        x: &DiscreteMeasure,
        y: &DiscreteMeasure,
        f: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::Dimension { expected: x.dim(), got: y.dim() });
        }
        let (rows, cols) = (x.len(), y.len());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let xi = x.point(i);
            for j in 0..cols {
                data.push(f(xi, y.point(j)));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Inner-product costs `<x_i, y_j>` (use with [`Sense::Max`] for `C`).
    pub fn inner_product(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<Self> {
        Self::between(x, y, |p, q| p.iter().zip(q).map(|(a, b)| a * b).sum())
    }

    /// Squared Euclidean costs `|x_i - y_j|^2`.
    pub fn squared_distance(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<Self> {
        Self::between(x, y, |p, q| {
            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
        })
    }

    /// Euclidean costs `|x_i - y_j|`.
    pub fn distance(x: &DiscreteMeasure, y: &DiscreteMeasure) -> Result<Self> {
        Self::between(x, y, |p, q| {
            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// An optimal coupling with its dual certificate.
///
/// For [`Sense::Min`] the potentials satisfy `f_i + g_j <= c_ij` with
/// equality on the support of the plan; for [`Sense::Max`] the inequality
/// flips. The duals are normalized so `dual_g[0] = 0`, and the dual value
/// `sum a_i f_i + sum b_j g_j` equals `primal_value` up to rounding.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    matrix: Vec<f64>,
    pub primal_value: f64,
    pub dual_f: Vec<f64>,
    pub dual_g: Vec<f64>,
    pub sense: Sense,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Mass shipped from row atom `i` to column atom `j`.
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.cols + j]
    }

    /// Dense row-major plan entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.matrix[i * self.cols..(i + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.flow(i, j)).sum())
            .collect()
    }

    /// Value of the dual objective against the given marginals.
    pub fn dual_value(&self, a: &[f64], b: &[f64]) -> f64 {
        let fa: f64 = a.iter().zip(&self.dual_f).map(|(w, f)| w * f).sum();
        let gb: f64 = b.iter().zip(&self.dual_g).map(|(w, g)| w * g).sum();
        fa + gb
    }

    /// Checks the exactness contract of the solver: marginals within `1e-9`,
    /// no entry below `-1e-12`, complementary slackness within `1e-7` on the
    /// support, and primal/dual agreement within `1e-8`.
    pub fn validate(&self, cost: &CostMatrix, a: &[f64], b: &[f64]) -> Result<()> {
        let fail = |msg: String| Err(Error::Solver(msg));
        if cost.rows != self.rows || cost.cols != self.cols {
            return fail("validate: shape mismatch".into());
        }
        for (i, (s, w)) in self.row_sums().iter().zip(a).enumerate() {
            if (s - w).abs() > 1e-9 {
                return fail(format!("row {i} marginal off by {}", s - w));
            }
        }
        for (j, (s, w)) in self.col_sums().iter().zip(b).enumerate() {
            if (s - w).abs() > 1e-9 {
                return fail(format!("col {j} marginal off by {}", s - w));
            }
        }
        let mut primal = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.flow(i, j);
                if x < -1e-12 {
                    return fail(format!("negative flow {x} at ({i},{j})"));
                }
                primal += x * cost.get(i, j);
                if x > 1e-9 {
                    let slack = self.dual_f[i] + self.dual_g[j] - cost.get(i, j);
                    if slack.abs() > 1e-7 {
                        return fail(format!("slackness {slack} at ({i},{j})"));
                    }
                }
            }
        }
        let gap = primal - self.dual_value(a, b);
        if gap.abs() > 1e-8 {
            return fail(format!("duality gap {gap}"));
        }
        if (primal - self.primal_value).abs() > 1e-8 {
            return fail(format!(
                "stored value {} disagrees with plan value {primal}",
                self.primal_value
            ));
        }
        Ok(())
    }
}

fn validate_marginal(name: &str, w: &[f64], expected: usize) -> Result<f64> {
    if w.len() != expected {
        return Err(Error::InvalidInput(format!(
            "{name} has {} weights, cost matrix expects {expected}",
            w.len()
        )));
    }
    let mut sum = 0.0;
    for (i, x) in w.iter().enumerate() {
        if !x.is_finite() || *x < 0.0 {
            return Err(Error::InvalidInput(format!("{name}[{i}] = {x}")));
        }
        sum += x;
    }
    if sum <= 0.0 {
        return Err(Error::InvalidInput(format!("{name} carries no mass")));
    }
    Ok(sum)
}

/// Solves the transportation problem exactly and returns the optimal plan
/// with dual potentials. Zero-weight rows and columns are dropped before the
/// solve and reinserted as zero rows of the plan; their potentials are filled
/// with the tightest dual-feasible values.
pub fn solve_transport(
    cost: &CostMatrix,
    a: &[f64],
    b: &[f64],
    sense: Sense,
) -> Result<TransportPlan> {
    let (n, m) = (cost.rows, cost.cols);
    let sa = validate_marginal("a", a, n)?;
    let sb = validate_marginal("b", b, m)?;
    if (sa - sb).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "marginal masses differ: {sa} vs {sb}"
        )));
    }

    let keep_rows: Vec<usize> = (0..n).filter(|&i| a[i] > 0.0).collect();
    let keep_cols: Vec<usize> = (0..m).filter(|&j| b[j] > 0.0).collect();
    let (kn, km) = (keep_rows.len(), keep_cols.len());

    // Min-sense costs on the kept block; Max runs on negated costs.
    let mut sub_cost = Vec::with_capacity(kn * km);
    for &i in &keep_rows {
        for &j in &keep_cols {
            let c = cost.get(i, j);
            sub_cost.push(match sense {
                Sense::Min => c,
                Sense::Max => -c,
            });
        }
    }
    let sub_a: Vec<f64> = keep_rows.iter().map(|&i| a[i]).collect();
    let sub_b: Vec<f64> = keep_cols.iter().map(|&j| b[j]).collect();

    let sol = simplex::solve_min(kn, km, &sub_cost, &sub_a, &sub_b)?;

    let mut matrix = vec![0.0; n * m];
    let mut primal_value = 0.0;
    for (ki, &i) in keep_rows.iter().enumerate() {
        for (kj, &j) in keep_cols.iter().enumerate() {
            let x = sol.plan[ki * km + kj];
            if x != 0.0 {
                matrix[i * m + j] = x;
                primal_value += x * cost.get(i, j);
            }
        }
    }

    // Expand duals in min-space first, then flip sign for Max.
    let mut fu = vec![f64::NAN; n];
    let mut gv = vec![f64::NAN; m];
    for (ki, &i) in keep_rows.iter().enumerate() {
        fu[i] = sol.u[ki];
    }
    for (kj, &j) in keep_cols.iter().enumerate() {
        gv[j] = sol.v[kj];
    }
    let min_cost = |i: usize, j: usize| match sense {
        Sense::Min => cost.get(i, j),
        Sense::Max => -cost.get(i, j),
    };
    for (j, g) in gv.iter_mut().enumerate() {
        if g.is_nan() {
            *g = keep_rows
                .iter()
                .map(|&i| min_cost(i, j) - fu[i])
                .fold(f64::INFINITY, f64::min);
        }
    }
    for (i, f) in fu.iter_mut().enumerate() {
        if f.is_nan() {
            *f = keep_cols
                .iter()
                .map(|&j| min_cost(i, j) - gv[j])
                .fold(f64::INFINITY, f64::min);
        }
    }
    let (mut dual_f, mut dual_g): (Vec<f64>, Vec<f64>) = match sense {
        Sense::Min => (fu, gv),
        Sense::Max => (
            fu.into_iter().map(|x| -x).collect(),
            gv.into_iter().map(|x| -x).collect(),
        ),
    };
    let shift = dual_g[0];
    dual_g.iter_mut().for_each(|g| *g -= shift);
    dual_f.iter_mut().for_each(|f| *f += shift);

    Ok(TransportPlan {
        rows: n,
        cols: m,
        matrix,
        primal_value,
        dual_f,
        dual_g,
        sense,
    })
}

/// Max-covariance transport cost `C(mu, rho) = sup_pi sum <x, y> dpi`.
pub fn max_covariance(mu: &DiscreteMeasure, rho: &DiscreteMeasure) -> Result<f64> {
    Ok(max_covariance_plan(mu, rho)?.primal_value)
}

/// Same as [`max_covariance`] but returns the whole optimal plan; the
/// arbitrage construction needs the coupling, not just its value.
pub fn max_covariance_plan(
    mu: &DiscreteMeasure,
    rho: &DiscreteMeasure,
) -> Result<TransportPlan> {
    let cost = CostMatrix::inner_product(mu, rho)?;
    solve_transport(&cost, mu.weights(), rho.weights(), Sense::Max)
}

/// Squared 2-Wasserstein distance via the transportation LP.
pub fn wasserstein2_sq(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let cost = CostMatrix::squared_distance(mu, nu)?;
    Ok(solve_transport(&cost, mu.weights(), nu.weights(), Sense::Min)?.primal_value)
}

/// 1-Wasserstein distance via the transportation LP.
pub fn wasserstein1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let cost = CostMatrix::distance(mu, nu)?;
    Ok(solve_transport(&cost, mu.weights(), nu.weights(), Sense::Min)?.primal_value)
}

/// Squared 2-Wasserstein distance in dimension one through the quantile
/// coupling `int_0^1 (F_mu^{-1} - F_nu^{-1})^2`, evaluated exactly on the
/// merged breakpoints of both cumulative weight ladders. Serves as an
/// independent oracle for [`wasserstein2_sq`].
pub fn wasserstein2_sq_quantile(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let am = mu.sorted_atoms_1d()?;
    let an = nu.sorted_atoms_1d()?;
    let mut total = 0.0;
    let mut t = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let mut cm = am[0].1;
    let mut cn = an[0].1;
    while t < 1.0 {
        let next = cm.min(cn).min(1.0);
        if next > t {
            let d = am[i].0 - an[j].0;
            total += (next - t) * d * d;
            t = next;
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
    Ok(total)
}
