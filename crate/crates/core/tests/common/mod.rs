//! Generators shared by the integration suites.

use cvxord::DiscreteMeasure;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random measure with up to `max_atoms` atoms uniform in `[-scale, scale]^dim`
/// and random normalized weights bounded away from zero.
pub fn random_measure(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_atoms: usize,
    scale: f64,
) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let points: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-scale..=scale)).collect();
    let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    DiscreteMeasure::new(dim, points, weights).expect("random measure is valid")
}

/// Random measure rescaled, when necessary, to sit inside the closed unit ball.
pub fn unit_ball_measure(rng: &mut ChaCha8Rng, dim: usize, max_atoms: usize) -> DiscreteMeasure {
    let m = random_measure(rng, dim, max_atoms, 1.0);
    let radius = m.support_radius();
    if radius <= 1.0 {
        return m;
    }
    let points: Vec<f64> = m.points().iter().map(|x| x / radius).collect();
    DiscreteMeasure::new(dim, points, m.weights().to_vec()).expect("rescaled measure is valid")
}

/// Splits every atom of `mu` into a mean-preserving pair `x +- t`, which is
/// a dilation, so the result dominates `mu` in convex order by construction
/// and has strictly larger second moment (`t >= 0.1` on every axis).
pub fn dilate(rng: &mut ChaCha8Rng, mu: &DiscreteMeasure) -> DiscreteMeasure {
    let d = mu.dim();
    let mut points = Vec::with_capacity(2 * mu.len() * d);
    let mut weights = Vec::with_capacity(2 * mu.len());
    for i in 0..mu.len() {
        let x = mu.point(i);
        let t: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..0.6)).collect();
        points.extend(x.iter().zip(&t).map(|(a, b)| a + b));
        points.extend(x.iter().zip(&t).map(|(a, b)| a - b));
        weights.push(mu.weight(i) / 2.0);
        weights.push(mu.weight(i) / 2.0);
    }
    DiscreteMeasure::new(d, points, weights).expect("dilation is valid")
}
