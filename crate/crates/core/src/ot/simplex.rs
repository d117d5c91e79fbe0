//! Exact network simplex on the dense transportation polytope.
//!
//! Minimizes `sum_ij c_ij x_ij` over `x >= 0` with prescribed row sums `a`
//! and column sums `b` (all strictly positive, equal totals). The solver
//! maintains a spanning-tree basis over the bipartite node set, so optimal
//! dual potentials come out of the final tree for free: `u_i + v_j = c_ij`
//! holds exactly on every basic cell and `u_i + v_j <= c_ij` holds everywhere
//! else up to the pivot tolerance.

use crate::{Error, Result};

pub(crate) struct MinSolution {
    /// Dense row-major optimal plan, `n * m` entries.
    pub plan: Vec<f64>,
    /// Row potentials.
    pub u: Vec<f64>,
    /// Column potentials.
    pub v: Vec<f64>,
    /// Simplex pivots spent; a load diagnostic for callers and benches.
    #[allow(dead_code)]
    pub pivots: usize,
}

const NO_NODE: u32 = u32::MAX;

/// Tree basis state. Nodes `0..n` are rows, `n..n+m` are columns; the basis
/// always holds exactly `n + m - 1` edges forming a spanning tree.
struct Basis {
    n: usize,
    m: usize,
    edge_i: Vec<u32>,
    edge_j: Vec<u32>,
    flow: Vec<f64>,
    /// Edge ids incident to each node.
    adj: Vec<Vec<u32>>,
    parent: Vec<u32>,
    parent_edge: Vec<u32>,
    depth: Vec<u32>,
    /// Nodes in breadth-first order from the root; drives dual propagation.
    order: Vec<u32>,
    visited: Vec<bool>,
}

impl Basis {
    fn node_count(&self) -> usize {
        self.n + self.m
    }

    /// Northwest-corner initial basic feasible solution: a staircase of
    /// exactly `n + m - 1` cells (some possibly carrying zero flow).
    fn northwest(n: usize, m: usize, a: &[f64], b: &[f64]) -> Self {
        let mut edge_i = Vec::with_capacity(n + m - 1);
        let mut edge_j = Vec::with_capacity(n + m - 1);
        let mut flow = Vec::with_capacity(n + m - 1);
        let mut ar = a.to_vec();
        let mut br = b.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let t = ar[i].min(br[j]);
            edge_i.push(i as u32);
            edge_j.push(j as u32);
            flow.push(t);
            ar[i] -= t;
            br[j] -= t;
            if i + 1 == n && j + 1 == m {
                break;
            }
            if i + 1 < n && (ar[i] <= br[j] || j + 1 == m) {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut adj = vec![Vec::new(); n + m];
        for e in 0..edge_i.len() {
            adj[edge_i[e] as usize].push(e as u32);
            adj[n + edge_j[e] as usize].push(e as u32);
        }
        Basis {
            n,
            m,
            edge_i,
            edge_j,
            flow,
            adj,
            parent: vec![NO_NODE; n + m],
            parent_edge: vec![NO_NODE; n + m],
            depth: vec![0; n + m],
            order: Vec::with_capacity(n + m),
            visited: vec![false; n + m],
        }
    }

    /// Other endpoint of edge `e` as a node id.
    fn opposite(&self, e: u32, node: u32) -> u32 {
        let row = self.edge_i[e as usize];
        if row == node {
            self.n as u32 + self.edge_j[e as usize]
        } else {
            row
        }
    }

    /// Rebuilds parent/depth/order by BFS from node 0 and propagates dual
    /// potentials along the tree (`u[0] = 0` at the root).
    fn rebuild(&mut self, cost: &[f64], u: &mut [f64], v: &mut [f64]) -> Result<()> {
        let total = self.node_count();
        self.order.clear();
        self.visited.iter_mut().for_each(|f| *f = false);
        self.parent[0] = NO_NODE;
        self.parent_edge[0] = NO_NODE;
        self.depth[0] = 0;
        self.visited[0] = true;
        u[0] = 0.0;
        self.order.push(0);
        let mut head = 0usize;
        while head < self.order.len() {
            let node = self.order[head];
            head += 1;
            for idx in 0..self.adj[node as usize].len() {
                let e = self.adj[node as usize][idx];
                let other = self.opposite(e, node);
                if self.visited[other as usize] {
                    continue;
                }
                self.visited[other as usize] = true;
                self.parent[other as usize] = node;
                self.parent_edge[other as usize] = e;
                self.depth[other as usize] = self.depth[node as usize] + 1;
                let (i, j) = (self.edge_i[e as usize] as usize, self.edge_j[e as usize] as usize);
                if (node as usize) < self.n {
                    v[j] = cost[i * self.m + j] - u[i];
                } else {
                    u[i] = cost[i * self.m + j] - v[j];
                }
                self.order.push(other);
            }
        }
        if self.order.len() != total {
            return Err(Error::Solver("basis tree lost connectivity".into()));
        }
        Ok(())
    }

    /// Tree paths from the entering cell's endpoints up to their common
    /// ancestor. `path_i[k]` is the k-th edge on the way up from row `ei`,
    /// `path_j[k]` from column `ej`; edges at even `k` lose flow when the
    /// entering cell gains it.
    fn cycle(&self, ei: usize, ej: usize) -> (Vec<u32>, Vec<u32>) {
        let mut path_i = Vec::new();
        let mut path_j = Vec::new();
        let mut x = ei as u32;
        let mut y = (self.n + ej) as u32;
        while self.depth[x as usize] > self.depth[y as usize] {
            path_i.push(self.parent_edge[x as usize]);
            x = self.parent[x as usize];
        }
        while self.depth[y as usize] > self.depth[x as usize] {
            path_j.push(self.parent_edge[y as usize]);
            y = self.parent[y as usize];
        }
        while x != y {
            path_i.push(self.parent_edge[x as usize]);
            x = self.parent[x as usize];
            path_j.push(self.parent_edge[y as usize]);
            y = self.parent[y as usize];
        }
        (path_i, path_j)
    }

    fn remove_from_adj(&mut self, node: usize, e: u32) {
        let list = &mut self.adj[node];
        if let Some(pos) = list.iter().position(|&x| x == e) {
            list.swap_remove(pos);
        }
    }

    /// Replaces the leaving edge's slot with the entering cell.
    fn swap_edge(&mut self, leaving: u32, ei: usize, ej: usize, theta: f64) {
        let l = leaving as usize;
        let (oi, oj) = (self.edge_i[l] as usize, self.n + self.edge_j[l] as usize);
        self.remove_from_adj(oi, leaving);
        self.remove_from_adj(oj, leaving);
        self.edge_i[l] = ei as u32;
        self.edge_j[l] = ej as u32;
        self.flow[l] = theta;
        self.adj[ei].push(leaving);
        self.adj[self.n + ej].push(leaving);
    }

    /// Recomputes every basic flow from scratch by stripping leaves, which
    /// removes the rounding drift accumulated over pivots.
    fn recompute_flows(&mut self, a: &[f64], b: &[f64]) {
        let total = self.node_count();
        let mut residual: Vec<f64> = a
            .iter()
            .copied()
            .chain(b.iter().copied())
            .collect();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut consumed = vec![false; self.flow.len()];
        let mut stack: Vec<u32> =
            (0..total as u32).filter(|&v| degree[v as usize] == 1).collect();
        while let Some(node) = stack.pop() {
            if degree[node as usize] != 1 {
                continue;
            }
            let e = *self.adj[node as usize]
                .iter()
                .find(|&&e| !consumed[e as usize])
                .expect("leaf node keeps one live edge");
            consumed[e as usize] = true;
            let amount = residual[node as usize].max(0.0);
            self.flow[e as usize] = amount;
            let other = self.opposite(e, node);
            residual[node as usize] = 0.0;
            residual[other as usize] -= amount;
            degree[node as usize] = 0;
            degree[other as usize] -= 1;
            if degree[other as usize] == 1 {
                stack.push(other);
            }
        }
    }
}

/// Pivot selection switches to Bland's rule after this many pivots to force
/// termination on adversarially degenerate instances.
fn soft_pivot_limit(n: usize, m: usize) -> usize {
    200 * (n + m + 16)
}

fn hard_pivot_limit(n: usize, m: usize) -> usize {
    4000 * (n + m + 16)
}

/// Solves the transportation problem after permuting rows and columns into
/// a Monge-friendly order, then maps the solution back. For the cost
/// families produced by point clouds on a line (inner products, squared
/// distances) the permuted matrix satisfies the Monge condition, making the
/// northwest-corner start optimal or nearly so; for all other costs the
/// permutation is a harmless relabeling.
pub(crate) fn solve_min(
    n: usize,
    m: usize,
    cost: &[f64],
    a: &[f64],
    b: &[f64],
) -> Result<MinSolution> {
    debug_assert_eq!(cost.len(), n * m);
    // Row key: cost difference between the last and first column. For costs
    // of the form c_ij = f(x_i) + g(y_j) - 2 x_i y_j (inner products and
    // squared distances alike) the key is affine in x_i, so sorting by it
    // sorts the rows by value.
    let mut row_perm: Vec<usize> = (0..n).collect();
    row_perm.sort_by(|&p, &q| {
        let kp = cost[p * m + m - 1] - cost[p * m];
        let kq = cost[q * m + m - 1] - cost[q * m];
        kp.total_cmp(&kq)
    });
    // Column key, oriented by the sorted extreme rows so that both axes end
    // up sorted in matching directions (the Monge inequality survives a
    // simultaneous flip of both orders, but not a single-axis flip).
    let (first, last) = (row_perm[0], row_perm[n - 1]);
    let mut col_perm: Vec<usize> = (0..m).collect();
    col_perm.sort_by(|&p, &q| {
        let kp = cost[first * m + p] - cost[last * m + p];
        let kq = cost[first * m + q] - cost[last * m + q];
        kp.total_cmp(&kq)
    });
    let identity = row_perm.iter().enumerate().all(|(k, &p)| k == p)
        && col_perm.iter().enumerate().all(|(k, &p)| k == p);
    if identity {
        return solve_min_ordered(n, m, cost, a, b);
    }
    let mut pcost = vec![0.0; n * m];
    let mut pa = vec![0.0; n];
    let mut pb = vec![0.0; m];
    for (pi, &i) in row_perm.iter().enumerate() {
        pa[pi] = a[i];
        for (pj, &j) in col_perm.iter().enumerate() {
            pcost[pi * m + pj] = cost[i * m + j];
        }
    }
    for (pj, &j) in col_perm.iter().enumerate() {
        pb[pj] = b[j];
    }
    let sol = solve_min_ordered(n, m, &pcost, &pa, &pb)?;
    let mut plan = vec![0.0; n * m];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    for (pi, &i) in row_perm.iter().enumerate() {
        u[i] = sol.u[pi];
        for (pj, &j) in col_perm.iter().enumerate() {
            plan[i * m + j] = sol.plan[pi * m + pj];
        }
    }
    for (pj, &j) in col_perm.iter().enumerate() {
        v[j] = sol.v[pj];
    }
    Ok(MinSolution { plan, u, v, pivots: sol.pivots })
}

fn solve_min_ordered(
    n: usize,
    m: usize,
    cost: &[f64],
    a: &[f64],
    b: &[f64],
) -> Result<MinSolution> {
    let nm = n * m;
    let cost_scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-11 * (1.0 + cost_scale);

    let mut basis = Basis::northwest(n, m, a, b);
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];

    let block = 64.max((nm as f64).sqrt() as usize);
    let mut cursor = 0usize;
    let soft = soft_pivot_limit(n, m);
    let hard = hard_pivot_limit(n, m);
    let mut pivots = 0usize;

    loop {
        basis.rebuild(cost, &mut u, &mut v)?;

        let bland = pivots >= soft;
        let entering = if bland {
            find_entering_bland(cost, &u, &v, n, m, tol)
        } else {
            find_entering_block(cost, &u, &v, n, m, tol, block, &mut cursor)
        };
        let Some(flat) = entering else {
            break;
        };
        let (ei, ej) = (flat / m, flat % m);

        // Cycle edges in traversal order: from the apex down to row `ei`,
        // across the entering cell, then from column `ej` back up to the
        // apex. Edges marked true lose flow when the entering cell gains it.
        let (path_i, path_j) = basis.cycle(ei, ej);
        let mut traversal: Vec<(u32, bool)> = Vec::with_capacity(path_i.len() + path_j.len());
        for (pos, &e) in path_i.iter().rev().enumerate() {
            let k = path_i.len() - 1 - pos;
            traversal.push((e, k % 2 == 0));
        }
        for (k, &e) in path_j.iter().enumerate() {
            traversal.push((e, k % 2 == 0));
        }
        let mut theta = f64::INFINITY;
        for &(e, losing) in &traversal {
            if losing {
                theta = theta.min(basis.flow[e as usize]);
            }
        }

        // Leaving edge: the last blocking edge along the traversal
        // (Cunningham's rule, which preserves strong feasibility and starves
        // degenerate cycling). Under Bland's rule take the blocking edge
        // with the lowest cell index instead.
        let mut leaving = NO_NODE;
        if bland {
            let mut best_flat = usize::MAX;
            for &(e, losing) in &traversal {
                if losing && basis.flow[e as usize] == theta {
                    let flat = basis.edge_i[e as usize] as usize * m
                        + basis.edge_j[e as usize] as usize;
                    if flat < best_flat {
                        best_flat = flat;
                        leaving = e;
                    }
                }
            }
        } else {
            for &(e, losing) in &traversal {
                if losing && basis.flow[e as usize] == theta {
                    leaving = e;
                }
            }
        }
        if leaving == NO_NODE {
            return Err(Error::Solver("no blocking edge on pivot cycle".into()));
        }

        for (k, &e) in path_i.iter().enumerate() {
            let delta = if k % 2 == 0 { -theta } else { theta };
            basis.flow[e as usize] += delta;
        }
        for (k, &e) in path_j.iter().enumerate() {
            let delta = if k % 2 == 0 { -theta } else { theta };
            basis.flow[e as usize] += delta;
        }
        basis.swap_edge(leaving, ei, ej, theta);

        pivots += 1;
        if pivots > hard {
            return Err(Error::Solver(format!(
                "pivot limit exceeded on {n}x{m} transportation problem"
            )));
        }
    }

    basis.recompute_flows(a, b);
    let mut plan = vec![0.0; nm];
    for e in 0..basis.flow.len() {
        plan[basis.edge_i[e] as usize * m + basis.edge_j[e] as usize] = basis.flow[e];
    }
    Ok(MinSolution { plan, u, v, pivots })
}

/// Block pivot search: scans cells in rolling blocks starting from a moving
/// cursor and returns the most negative reduced cost in the first block that
/// contains one.
#[allow(clippy::too_many_arguments)] // flat solver state, not a config object
fn find_entering_block(
    cost: &[f64],
    u: &[f64],
    v: &[f64],
    n: usize,
    m: usize,
    tol: f64,
    block: usize,
    cursor: &mut usize,
) -> Option<usize> {
    let nm = n * m;
    let mut scanned = 0usize;
    let mut best_flat = 0usize;
    let mut best_r = -tol;
    let mut found = false;
    while scanned < nm {
        let chunk = block.min(nm - scanned);
        for _ in 0..chunk {
            let flat = *cursor;
            *cursor += 1;
            if *cursor == nm {
                *cursor = 0;
            }
            let r = cost[flat] - u[flat / m] - v[flat % m];
            if r < best_r {
                best_r = r;
                best_flat = flat;
                found = true;
            }
        }
        scanned += chunk;
        if found {
            return Some(best_flat);
        }
    }
    None
}

/// Bland's entering rule: the lowest-index cell with negative reduced cost.
fn find_entering_bland(
    cost: &[f64],
    u: &[f64],
    v: &[f64],
    n: usize,
    m: usize,
    tol: f64,
) -> Option<usize> {
    (0..n * m).find(|&flat| cost[flat] - u[flat / m] - v[flat % m] < -tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_solution(n: usize, m: usize, cost: &[f64], a: &[f64], b: &[f64], sol: &MinSolution) {
        for (i, &ai) in a.iter().enumerate().take(n) {
            let s: f64 = (0..m).map(|j| sol.plan[i * m + j]).sum();
            assert!((s - ai).abs() <= 1e-9, "row {i} marginal off by {}", s - ai);
        }
        for (j, &bj) in b.iter().enumerate().take(m) {
            let s: f64 = (0..n).map(|i| sol.plan[i * m + j]).sum();
            assert!((s - bj).abs() <= 1e-9, "col {j} marginal off by {}", s - bj);
        }
        let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        for i in 0..n {
            for j in 0..m {
                let r = cost[i * m + j] - sol.u[i] - sol.v[j];
                assert!(r >= -1e-9 * scale, "dual infeasible at ({i},{j}): {r}");
                if sol.plan[i * m + j] > 1e-9 {
                    assert!(r.abs() <= 1e-7, "slackness violated at ({i},{j}): {r}");
                }
            }
        }
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let cost = vec![0.0, 1.0, 1.0, 0.0];
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        let sol = solve_min(2, 2, &cost, &a, &b).unwrap();
        let value: f64 = cost.iter().zip(&sol.plan).map(|(c, x)| c * x).sum();
        assert!(value.abs() <= 1e-12);
        check_solution(2, 2, &cost, &a, &b, &sol);
    }

    #[test]
    fn single_row_and_single_column() {
        // The final leaf-strip recomputation fills one entry per tree node
        // from residual mass, so entries match to rounding, not bitwise.
        let sol = solve_min(1, 3, &[5.0, 1.0, 2.0], &[1.0], &[0.2, 0.5, 0.3]).unwrap();
        for (x, want) in sol.plan.iter().zip([0.2, 0.5, 0.3]) {
            assert!((x - want).abs() <= 1e-12);
        }
        let sol = solve_min(3, 1, &[5.0, 1.0, 2.0], &[0.2, 0.5, 0.3], &[1.0]).unwrap();
        for (x, want) in sol.plan.iter().zip([0.2, 0.5, 0.3]) {
            assert!((x - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_uniform_identity_terminates() {
        // Identical supports and uniform weights make every pivot degenerate;
        // the optimum couples each atom with itself at zero cost.
        let n = 60;
        let pts: Vec<f64> = (0..n).map(|k| (k % 7) as f64).collect();
        let mut cost = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = pts[i] - pts[j];
                cost[i * n + j] = d * d;
            }
        }
        let w = vec![1.0 / n as f64; n];
        let sol = solve_min(n, n, &cost, &w, &w).unwrap();
        let value: f64 = cost.iter().zip(&sol.plan).map(|(c, x)| c * x).sum();
        assert!(value.abs() <= 1e-10, "self-transport cost {value}");
        check_solution(n, n, &cost, &w, &w, &sol);
    }

    #[test]
    fn random_instances_satisfy_optimality_conditions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..50 {
            let n = rng.random_range(1..12);
            let m = rng.random_range(1..12);
            let cost: Vec<f64> = (0..n * m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let mut b: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            a.iter_mut().for_each(|x| *x /= sa);
            b.iter_mut().for_each(|x| *x /= sb);
            let sol = solve_min(n, m, &cost, &a, &b).unwrap_or_else(|e| {
                panic!("trial {trial} ({n}x{m}) failed: {e}");
            });
            check_solution(n, m, &cost, &a, &b, &sol);
        }
    }
}
