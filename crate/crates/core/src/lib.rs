//! Decide whether two discrete probability measures on `R^d` are in convex
//! order, and construct a verified calendar-spread arbitrage when they are not.
//!
//! A measure `mu` is smaller than `nu` in convex order (`mu <=_c nu`) when
//! `int f dmu <= int f dnu` for every convex `f`. For finitely supported
//! measures this is decidable, and this crate offers three routes:
//!
//! * [`order`] estimates the transport functional
//!   `V(mu, nu) = inf_rho [ C(nu, rho) - C(mu, rho) ]`, where `C` is the
//!   max-covariance transport cost over candidate measures `rho` supported in
//!   the unit ball. `V >= 0` exactly when the measures are ordered, so the
//!   sign of the estimate yields a verdict.
//! * [`oracles`] holds exact certificates: a 1-d quantile-integral test and a
//!   martingale-coupling feasibility LP in any dimension.
//! * [`arbitrage`] turns a negative `V` witness into an explicit calendar
//!   spread (a convex payoff with positive model-independent profit).
//!
//! All transport subproblems are solved exactly with a network simplex on the
//! dense bipartite transportation polytope ([`ot`]), including dual
//! potentials, so sign decisions near zero are not polluted by the bias of
//! entropic approximations.

#![forbid(unsafe_code)]

pub mod arbitrage;
pub mod io;
pub mod measures;
pub mod oracles;
pub mod order;
pub mod ot;

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data failed validation (weights, supports, parameters, formats).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two objects that must live in the same dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    /// An LP solve did not terminate cleanly; results would be unreliable.
    #[error("solver failure: {0}")]
    Solver(String),
    /// File or serialization trouble while reading or writing measures.
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub use arbitrage::{
    barycentric_projection, detect_arbitrage, fit_intercepts, sample_test_pairs, verify_spread,
    ArbitrageReport, CalendarSpread, InterceptFit, SearchParams, SpreadDiagnostics, SpreadPiece,
};
pub use measures::{ball_grid, make_example, BallGrid, DiscreteMeasure, ExampleFamily};
pub use oracles::{auto_oracle, martingale_feasibility, quantile_test, Certificate, OracleVerdict};
pub use order::{
    check_easy_bound, check_w2_inequality, default_epsilon, estimate_v_direct,
    estimate_v_indirect, objective, optimize_simplex, ConvexOrderReport, IndirectMode, Method,
    RhoCandidate, Verdict,
};
pub use ot::{
    max_covariance, max_covariance_plan, solve_transport, wasserstein1, wasserstein2_sq,
    wasserstein2_sq_quantile, CostMatrix, Sense, TransportPlan,
};
