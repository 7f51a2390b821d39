//! Hamilton-Jacobi equations on a junction of half-lines.
//!
//! A *junction* is a network with a single vertex: `N` half-lines (called
//! *branches*) glued together at one point. Each branch `i` carries a
//! strictly convex running cost `L_i(q)` of the signed velocity `q`
//! (positive `q` moves away from the vertex). On such a domain the value
//! function
//!
//! ```text
//! u(t, x) = inf { u0(X(0)) + integral of L along X  :  X(t) = x }
//! ```
//!
//! over admissible paths `X` solves a Hamilton-Jacobi equation on every
//! branch together with a one-sided transmission condition at the vertex.
//!
//! The crate provides, bottom-up:
//!
//! * [`convex`]: strictly convex Lagrangians, their conjugates `H = L*`,
//!   and the nonincreasing envelopes `H^-` that enter the vertex condition;
//! * [`junction`]: the glued domain, positions on it ([`Point`]), and the
//!   per-branch quantities `K_l`, `xi_l^+`, `xi_l^-` the action formulas
//!   are built from;
//! * [`action`]: the closed-form minimal action `d0` between two points in
//!   unit time, its gradient, and the rescaled two-time action;
//! * [`hopf_lax`]: pointwise and grid evaluation of the value function,
//!   plus dynamic-programming and PDE-residual diagnostics;
//! * [`traffic`]: junctions built from road networks with concave flux
//!   functions, and conversions between value functions and car densities;
//! * [`oracle`]: slow brute-force evaluators used to cross-check every
//!   closed form in the crate;
//! * [`verify`]: named self-check suites combining all of the above, also
//!   exposed through the command-line tool.
//!
//! # Quick tour
//!
//! ```
//! use junction_hj::{Junction, Lagrangian, Point, d0};
//!
//! // Two branches with idling cost 1/4 each: L(q) = (1 -+ q)^2 / 4.
//! let junction = Junction::build(vec![
//!     Lagrangian::quadratic(0.25, -1.0, 0.0)?,
//!     Lagrangian::quadratic(0.25, 1.0, 0.0)?,
//! ])?;
//!
//! let y = junction.point(1, 0.5)?; // on branch 1
//! let x = junction.point(2, 0.5)?; // on branch 2
//! let crossing = d0(&junction, y, x)?;
//! assert!(crossing.value.abs() < 1e-12); // optimal speed 1 is free here
//! # Ok::<(), junction_hj::Error>(())
//! ```

pub mod action;
pub mod convex;
pub mod hopf_lax;
pub mod junction;
pub mod oracle;
pub mod traffic;
pub mod verify;

pub mod book;

mod roots;

pub use action::{
    action, d0, d0_gradient, d0_gradient_pair, d_junction, d_junction_gradient, d_implicit,
    d_linear, d_straight, phase_cost, solve_tau, ActionResult, GradientResult, Phase, Regime,
};
pub use convex::{Conjugate, Lagrangian};
pub use hopf_lax::{
    dpp_check, residual_check, solve_grid, solve_point, GridSolution, GridSpec, InitialDatum,
    ResidualReport,
};
pub use junction::{BranchId, GradientAt, Junction, Point, Sign, IDLE_COST_TOL};
pub use oracle::{brute_force_d0, brute_force_solve, line_lax_oleinik, OracleConfig};
pub use traffic::{
    demand_supply, density_field, flux_trace, junction_flux, riemann_u0, traffic_junction,
    DensityField, Flux, Road, RoadDirection, TrafficScenario,
};
pub use verify::{run_all_suites, run_suite, SuiteOutcome, VerifyContext, SUITE_NAMES};

/// Errors reported by the crate.
///
/// Infinite costs are *values*, not errors: functions such as
/// [`d_straight`] return `f64::INFINITY` where no admissible path exists.
/// Errors are reserved for malformed inputs and genuine numerical failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A Lagrangian, flux, or datum was built from invalid parameters.
    #[error("invalid construction: {0}")]
    Invalid(String),
    /// A junction must have at least one branch.
    #[error("a junction needs at least one branch")]
    EmptyJunction,
    /// A branch id does not exist on the junction at hand.
    #[error("branch {id} out of range (junction has {len} branches)")]
    BranchOutOfRange { id: usize, len: usize },
    /// A coordinate or time was negative, non-finite, or otherwise outside
    /// the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The optimal switching time is not determined by the data.
    ///
    /// This happens only for `solve_tau` at the origin pair `(0, 0)` when
    /// neither branch attains the minimal idling cost: every switching time
    /// yields the same cost and no canonical choice exists.
    #[error("switching time undefined at (0, 0): neither branch attains the minimal idling cost")]
    TauUndefinedAtOrigin,
    /// An iterative solve failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// A gradient was supplied with the wrong arity for the point.
    #[error("gradient arity mismatch: expected {expected} component(s), got {got}")]
    GradientArity { expected: usize, got: usize },
    /// A solution grid was malformed.
    #[error("bad grid: {0}")]
    BadGrid(String),
    /// A scenario (road network, densities, initial datum) violated one of
    /// its documented invariants.
    #[error("bad scenario: {0}")]
    BadScenario(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
