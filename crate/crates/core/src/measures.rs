//! Finitely supported probability measures on `R^d` and the supports used by
//! the convex-order estimators: unit-ball grids and the benchmark example
//! families (two-point spreads, four-point diamonds, sampled Gaussians).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Tolerance on `|sum of weights - 1|` accepted by constructors.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported probability measure: `n` atoms in `R^d` with
/// nonnegative weights summing to one. Duplicate atoms are allowed; they
/// simply split mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Row-major storage, `n * dim` entries; atom `i` is `points[i*dim..(i+1)*dim]`.
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from flat row-major points and explicit weights.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        if points.len() != weights.len() * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates for {} atoms in dimension {}, got {}",
                weights.len() * dim,
                weights.len(),
                dim,
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate {bad}")));
        }
        let mut sum = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!("weight {w} at index {i}")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        Ok(Self { dim, points, weights })
    }

    /// Empirical measure of `samples` (flat row-major), uniform weights `1/n`.
    pub fn from_samples(dim: usize, samples: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if samples.is_empty() || !samples.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "sample buffer of length {} is not a positive multiple of dim {}",
                samples.len(),
                dim
            )));
        }
        let n = samples.len() / dim;
        Self::new(dim, samples, vec![1.0 / n as f64; n])
    }

    /// Point mass at `point`.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty supports
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of atom `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Flat row-major coordinate buffer.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Barycenter `sum_i w_i x_i`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            let p = self.point(i);
            let w = self.weights[i];
            for (mk, pk) in m.iter_mut().zip(p) {
                *mk += w * pk;
            }
        }
        m
    }

    /// Second moment `sum_i w_i |x_i|^2`.
    pub fn second_moment(&self) -> f64 {
        (0..self.len())
            .map(|i| self.weights[i] * self.point(i).iter().map(|c| c * c).sum::<f64>())
            .sum()
    }

    /// Largest atom norm; every atom lies in the closed ball of this radius.
    pub fn support_radius(&self) -> f64 {
        (0..self.len())
            .map(|i| self.point(i).iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Quantile function `F^{-1}(u) = inf { y : F(y) >= u }` for `u in (0, 1]`,
    /// only defined in dimension one. The result is always one of the atoms.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::Dimension { expected: 1, got: self.dim });
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::InvalidInput(format!("quantile level {u} outside (0, 1]")));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].partial_cmp(&self.points[b]).unwrap());
        let mut cum = 0.0;
        for &i in &idx {
            cum += self.weights[i];
            if cum >= u {
                return Ok(self.points[i]);
            }
        }
        // Rounding can leave cum marginally below 1; the top atom is correct.
        Ok(self.points[*idx.last().unwrap()])
    }

    /// Atoms sorted ascending together with their weights (dimension one).
    /// Shared by the quantile-based routines that sweep cumulative mass.
    pub(crate) fn sorted_atoms_1d(&self) -> Result<Vec<(f64, f64)>> {
        if self.dim != 1 {
            return Err(Error::Dimension { expected: 1, got: self.dim });
        }
        let mut atoms: Vec<(f64, f64)> =
            self.points.iter().copied().zip(self.weights.iter().copied()).collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(atoms)
    }
}

impl serde::Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DiscreteMeasure", 3)?;
        st.serialize_field("dim", &self.dim)?;
        let nested: Vec<&[f64]> = (0..self.len()).map(|i| self.point(i)).collect();
        st.serialize_field("points", &nested)?;
        st.serialize_field("weights", &self.weights)?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            dim: usize,
            points: Vec<Vec<f64>>,
            #[serde(default)]
            weights: Option<Vec<f64>>,
        }
        let raw = Raw::deserialize(d)?;
        crate::io::measure_from_parts(raw.dim, raw.points, raw.weights)
            .map_err(serde::de::Error::custom)
    }
}

/// A fixed finite subset of the closed ball `B_r(0)` used as the support of
/// grid candidates `rho`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BallGrid {
    dim: usize,
    radius: f64,
    /// Row-major node coordinates, `g * dim` entries.
    nodes: Vec<f64>,
}

impl BallGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The grid support equipped with `weights` as a probability measure.
    pub fn measure(&self, weights: &[f64]) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.dim, self.nodes.clone(), weights.to_vec())
    }
}

/// Builds a grid of `g` points inside the closed ball of the given radius.
///
/// In dimension one the grid is `g` equidistant points on `[-r, r]` including
/// both endpoints. In higher dimensions a cubic lattice is refined until the
/// ball contains at least `g` lattice points, and the `g` points nearest the
/// origin are kept (ties broken lexicographically, so the result is
/// deterministic).
pub fn ball_grid(dim: usize, g: usize, radius: f64) -> Result<BallGrid> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if g < 2 {
        return Err(Error::InvalidInput(format!("grid size {g} must be at least 2")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!("grid radius {radius} must be positive")));
    }
    if dim == 1 {
        let step = 2.0 * radius / (g - 1) as f64;
        let nodes: Vec<f64> = (0..g).map(|k| -radius + step * k as f64).collect();
        return Ok(BallGrid { dim, radius, nodes });
    }
    // Find the coarsest integer lattice radius R with enough points in the
    // d-ball, then keep the g nearest the origin at pitch radius / R.
    let mut lattice_r = 1usize;
    let mut cells: Vec<Vec<i64>>;
    loop {
        cells = lattice_points_in_ball(dim, lattice_r as i64);
        if cells.len() >= g {
            break;
        }
        lattice_r += 1;
        if lattice_r > 1 << 12 {
            return Err(Error::InvalidInput(format!(
                "grid size {g} too large for dimension {dim}"
            )));
        }
    }
    cells.sort_by(|a, b| {
        let na: i64 = a.iter().map(|c| c * c).sum();
        let nb: i64 = b.iter().map(|c| c * c).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    cells.truncate(g);
    let pitch = radius / lattice_r as f64;
    let nodes: Vec<f64> =
        cells.iter().flat_map(|z| z.iter().map(|&c| c as f64 * pitch)).collect();
    Ok(BallGrid { dim, radius, nodes })
}

/// All integer vectors `z` in dimension `dim` with `|z| <= r`.
fn lattice_points_in_ball(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    fill_lattice(dim, r * r, 0, &mut cur, &mut out);
    out
}

fn fill_lattice(dim: usize, r2: i64, axis: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if axis == dim {
        out.push(cur.clone());
        return;
    }
    let used: i64 = cur[..axis].iter().map(|c| c * c).sum();
    let budget = r2 - used;
    let max_c = (budget as f64).sqrt().floor() as i64;
    for c in -max_c..=max_c {
        if c * c <= budget {
            cur[axis] = c;
            fill_lattice(dim, r2, axis + 1, cur, out);
        }
    }
    cur[axis] = 0;
}

/// Benchmark measure pairs with a one-parameter order/no-order transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleFamily {
    /// `mu` and `nu` are symmetrized Gaussian samples: `mu` from
    /// `N(0, sigma^2 I)`, `nu` from `N(0, I)`, each of `n` atoms.
    GaussSampled,
    /// `mu = (d_{-1-s} + d_{1+s}) / 2`, `nu = (d_{-1} + d_{1}) / 2` on the
    /// line; ordered exactly when `s <= 0`.
    TwoPoint,
    /// Planar analogue of `TwoPoint` with four atoms on the axes.
    FourPoint,
}

/// Constructs a benchmark pair `(mu, nu)` from a family and its parameter.
///
/// * `GaussSampled`: `param = sigma >= 0`, any `dim >= 1`; draws are
///   antithetic (each sampled point contributes `x` and `-x`), so both sample
///   means are exactly zero and the order transition at `sigma = 1` is a
///   property of the spread alone, matching the population behaviour. With
///   odd `n` the last atom sits at the origin.
/// * `TwoPoint`: `param = s in [-1, 1]`, `dim` must be 1; `n` and `seed` are
///   ignored.
/// * `FourPoint`: `param = s in [-1, 1]`, `dim` must be 2; `mu` has atoms
///   `(+-(1+s), 0)` and `(0, +-(1+s))` with weight `1/4`, `nu` is the `s = 0`
///   case.
pub fn make_example(
    family: ExampleFamily,
    param: f64,
    dim: usize,
    n: usize,
    seed: u64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    if !param.is_finite() {
        return Err(Error::InvalidInput(format!("family parameter {param} must be finite")));
    }
    match family {
        ExampleFamily::TwoPoint => {
            if dim != 1 {
                return Err(Error::Dimension { expected: 1, got: dim });
            }
            if !(-1.0..=1.0).contains(&param) {
                return Err(Error::InvalidInput(format!("two_point s={param} outside [-1, 1]")));
            }
            let a = 1.0 + param;
            let mu = DiscreteMeasure::new(1, vec![-a, a], vec![0.5, 0.5])?;
            let nu = DiscreteMeasure::new(1, vec![-1.0, 1.0], vec![0.5, 0.5])?;
            Ok((mu, nu))
        }
        ExampleFamily::FourPoint => {
            if dim != 2 {
                return Err(Error::Dimension { expected: 2, got: dim });
            }
            if !(-1.0..=1.0).contains(&param) {
                return Err(Error::InvalidInput(format!("four_point s={param} outside [-1, 1]")));
            }
            let diamond = |a: f64| {
                DiscreteMeasure::new(
                    2,
                    vec![a, 0.0, -a, 0.0, 0.0, a, 0.0, -a],
                    vec![0.25; 4],
                )
            };
            Ok((diamond(1.0 + param)?, diamond(1.0)?))
        }
        ExampleFamily::GaussSampled => {
            if param < 0.0 {
                return Err(Error::InvalidInput(format!("gauss_sampled sigma={param} < 0")));
            }
            if n == 0 {
                return Err(Error::InvalidInput("gauss_sampled needs n >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = DiscreteMeasure::from_samples(dim, gaussian_antithetic(dim, n, param, &mut rng))?;
            let nu = DiscreteMeasure::from_samples(dim, gaussian_antithetic(dim, n, 1.0, &mut rng))?;
            Ok((mu, nu))
        }
    }
}

/// `n` points from `N(0, sigma^2 I)` in antithetic pairs `(x, -x)`; odd `n`
/// appends the origin. Flat row-major output.
fn gaussian_antithetic<R: Rng>(dim: usize, n: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * dim);
    for _ in 0..n / 2 {
        let x: Vec<f64> = (0..dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            })
            .collect();
        out.extend_from_slice(&x);
        out.extend(x.iter().map(|c| -c));
    }
    if n % 2 == 1 {
        out.extend(std::iter::repeat_n(0.0, dim));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin_1d(a: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(1, vec![-a, a], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![-0.1, 1.1]).is_err());
        assert!(DiscreteMeasure::new(1, vec![0.0], vec![f64::NAN]).is_err());
        assert!(DiscreteMeasure::new(1, vec![f64::INFINITY], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(1, vec![], vec![]).is_err());
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(DiscreteMeasure::new(2, vec![0.0, 1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::from_samples(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn moments_of_symmetric_coin() {
        let m = coin_1d(2.0);
        assert_eq!(m.mean(), vec![0.0]);
        assert_eq!(m.second_moment(), 4.0);
        assert_eq!(m.support_radius(), 2.0);
    }

    #[test]
    fn uniform_round_trip_preserves_moments() {
        let m = DiscreteMeasure::from_samples(2, vec![0.5, -1.0, 2.0, 0.25, -0.75, 3.0]).unwrap();
        let again = DiscreteMeasure::from_samples(2, m.points().to_vec()).unwrap();
        assert_eq!(m.mean(), again.mean());
        assert_eq!(m.second_moment(), again.second_moment());
    }

    #[test]
    fn quantile_matches_definition() {
        // quarter mass at 0, three quarters at 2
        let m = DiscreteMeasure::new(1, vec![0.0, 2.0], vec![0.25, 0.75]).unwrap();
        assert_eq!(m.quantile(0.25).unwrap(), 0.0);
        assert_eq!(m.quantile(0.26).unwrap(), 2.0);
        assert_eq!(m.quantile(1.0).unwrap(), 2.0);
        let c = coin_1d(1.0);
        assert_eq!(c.quantile(0.5).unwrap(), -1.0);
        assert_eq!(c.quantile(0.51).unwrap(), 1.0);
        assert!(c.quantile(0.0).is_err());
        assert!(c.quantile(1.2).is_err());
    }

    #[test]
    fn quantile_is_monotone_and_atom_valued() {
        let m = DiscreteMeasure::new(
            1,
            vec![3.0, -1.0, 0.5, -1.0],
            vec![0.2, 0.3, 0.4, 0.1],
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=100 {
            let q = m.quantile(k as f64 / 100.0).unwrap();
            assert!(q >= prev);
            assert!(m.points().contains(&q));
            prev = q;
        }
    }

    #[test]
    fn quantile_needs_dim_one() {
        let m = DiscreteMeasure::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        assert!(matches!(m.quantile(0.5), Err(Error::Dimension { expected: 1, got: 2 })));
    }

    #[test]
    fn grid_1d_is_equidistant_with_endpoints() {
        let g = ball_grid(1, 5, 1.0).unwrap();
        assert_eq!(g.nodes(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g21 = ball_grid(1, 21, 1.0).unwrap();
        assert_eq!(g21.len(), 21);
        assert_eq!(g21.node(0), &[-1.0]);
        assert_eq!(g21.node(20), &[1.0]);
        assert_eq!(g21.node(10), &[0.0]);
    }

    #[test]
    fn grid_2d_has_exact_size_inside_ball() {
        for g in [5, 13, 21, 40] {
            let grid = ball_grid(2, g, 1.0).unwrap();
            assert_eq!(grid.len(), g);
            let mut seen = std::collections::BTreeSet::new();
            for i in 0..grid.len() {
                let node = grid.node(i);
                let norm2: f64 = node.iter().map(|c| c * c).sum();
                assert!(norm2 <= 1.0 + 1e-12);
                let key: Vec<u64> = node.iter().map(|c| c.to_bits()).collect();
                assert!(seen.insert(key), "duplicate node");
            }
        }
    }

    #[test]
    fn grid_2d_contains_origin_and_respects_radius() {
        let grid = ball_grid(2, 21, 0.5).unwrap();
        assert!((0..grid.len()).any(|i| grid.node(i) == [0.0, 0.0]));
        for i in 0..grid.len() {
            let norm2: f64 = grid.node(i).iter().map(|c| c * c).sum();
            assert!(norm2.sqrt() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn grid_rejects_degenerate_requests() {
        assert!(ball_grid(0, 5, 1.0).is_err());
        assert!(ball_grid(1, 1, 1.0).is_err());
        assert!(ball_grid(2, 5, 0.0).is_err());
    }

    #[test]
    fn two_point_family() {
        let (mu, nu) = make_example(ExampleFamily::TwoPoint, 0.5, 1, 0, 0).unwrap();
        assert_eq!(mu.points(), &[-1.5, 1.5]);
        assert_eq!(nu.points(), &[-1.0, 1.0]);
        assert_eq!(mu.mean(), vec![0.0]);
        assert_eq!(nu.mean(), vec![0.0]);
        assert!(make_example(ExampleFamily::TwoPoint, 1.5, 1, 0, 0).is_err());
        assert!(make_example(ExampleFamily::TwoPoint, 0.0, 2, 0, 0).is_err());
    }

    #[test]
    fn four_point_family() {
        let (mu, nu) = make_example(ExampleFamily::FourPoint, -0.25, 2, 0, 0).unwrap();
        assert_eq!(mu.len(), 4);
        assert_eq!(mu.mean(), vec![0.0, 0.0]);
        assert_eq!(nu.mean(), vec![0.0, 0.0]);
        assert_eq!(mu.second_moment(), 0.75 * 0.75);
        assert_eq!(nu.second_moment(), 1.0);
    }

    #[test]
    fn gauss_sampled_is_deterministic_and_centered() {
        let (mu1, nu1) = make_example(ExampleFamily::GaussSampled, 1.0, 1, 500, 7).unwrap();
        let (mu2, nu2) = make_example(ExampleFamily::GaussSampled, 1.0, 1, 500, 7).unwrap();
        assert_eq!(mu1, mu2);
        assert_eq!(nu1, nu2);
        // Antithetic pairs put both sample means at exactly zero, well within
        // the 3/sqrt(n) CLT envelope.
        let n = 500.0f64;
        assert!(mu1.mean()[0].abs() <= 3.0 / n.sqrt());
        assert!(nu1.mean()[0].abs() <= 3.0 / n.sqrt());
        // Identical law for mu and nu at sigma = 1: second moments agree with
        // the population value 1 at CLT scale.
        assert!((mu1.second_moment() - 1.0).abs() < 0.2);
        assert!((nu1.second_moment() - 1.0).abs() < 0.2);
        // Different seeds give different draws.
        let (mu3, _) = make_example(ExampleFamily::GaussSampled, 1.0, 1, 500, 8).unwrap();
        assert_ne!(mu1, mu3);
    }

    #[test]
    fn gauss_sampled_odd_n_and_dim2() {
        let (mu, nu) = make_example(ExampleFamily::GaussSampled, 2.0, 2, 11, 3).unwrap();
        assert_eq!(mu.len(), 11);
        assert_eq!(mu.dim(), 2);
        assert_eq!(mu.mean(), vec![0.0, 0.0]);
        assert_eq!(nu.mean(), vec![0.0, 0.0]);
        assert!(make_example(ExampleFamily::GaussSampled, -1.0, 1, 10, 0).is_err());
        assert!(make_example(ExampleFamily::GaussSampled, 1.0, 1, 0, 0).is_err());
    }

    #[test]
    fn sigma_zero_collapses_mu_to_origin() {
        let (mu, _) = make_example(ExampleFamily::GaussSampled, 0.0, 1, 6, 1).unwrap();
        assert!(mu.points().iter().all(|&c| c == 0.0));
        assert_eq!(mu.second_moment(), 0.0);
    }
}
