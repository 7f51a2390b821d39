//! The minimal action between two points of the junction in unit time.
//!
//! For points `y`, `x` and strictly convex branch costs, the action
//!
//! ```text
//! d0(y, x) = inf { integral of L_{b(s)}(X'(s)) ds over [0, 1] : X(0) = y, X(1) = x }
//! ```
//!
//! is attained by trajectories of a very rigid shape: either the path
//! never touches the vertex and cruises at constant speed (*straight*
//! regime), or it consists of an entry leg at constant velocity, a dwell
//! at the vertex, and an exit leg at constant velocity. Optimizing the
//! switching times `0 <= tau1 <= tau2 <= 1` of the two legs gives, per
//! entry/exit branch pair `(j, i)`:
//!
//! * a *linear* regime where a genuine dwell `tau1 < tau2` pays off; it
//!   occurs exactly on the open set
//!   `Delta = { x / xi_i^+ - y / xi_j^- < 1 }` (empty when either branch
//!   attains the minimal idling cost), the legs travel at the threshold
//!   velocities, and the value is affine in `(y, x)`;
//! * an *implicit* regime `tau1 = tau2 = T` otherwise, where the single
//!   switching time `T` solves the scalar equation
//!   `K_j(-y / T) = K_i(x / (1 - T))`.
//!
//! Everything here is exact up to root finding: no grids, no quadrature.

use crate::junction::{BranchId, Junction, Point, Sign};
use crate::roots;
use crate::{Error, Result};

/// Tolerance below which two candidate costs (straight versus through the
/// vertex) are treated as tied when classifying differentiability. Points
/// where the two regimes exchange optimality form the non-smooth set of
/// the action, and exact ties cannot be detected in floating point.
pub const NON_SMOOTH_TOL: f64 = 1e-10;

/// Euclidean distance (in the `(y, x)` coordinate quadrant) under which a
/// point is flagged as one of the two regime-boundary endpoints, where the
/// action is continuous but not differentiable.
const NEAR_KINK_TOL: f64 = 1e-10;

/// Convergence tolerance (width of the final bracket) for the switching
/// time `T` of the implicit regime.
const TAU_X_TOL: f64 = 1e-13;

/// Shape of a minimizing trajectory.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Regime {
    /// The path stays on one branch and never touches the vertex.
    Straight,
    /// Entry leg, dwell at the vertex, exit leg (`tau1 < tau2` possible);
    /// the value is affine in the coordinates.
    Linear,
    /// Entry leg and exit leg meet at the vertex at a single time
    /// `tau1 = tau2` determined implicitly.
    Implicit,
    /// Both endpoints are the vertex and the path never leaves it.
    StayAtJunction,
}

impl Regime {
    /// Lower-case name used in machine-readable output.
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Straight => "straight",
            Regime::Linear => "linear",
            Regime::Implicit => "implicit",
            Regime::StayAtJunction => "stay_at_junction",
        }
    }
}

/// Value and shape of a minimizing trajectory.
#[derive(Clone, Copy, Debug)]
pub struct ActionResult {
    /// The minimal action.
    pub value: f64,
    /// Shape of the minimizer.
    pub regime: Regime,
    /// Time the entry leg reaches the vertex; `None` in the straight
    /// regime, equal to `tau2` in the implicit regime.
    pub tau1: Option<f64>,
    /// Time the exit leg leaves the vertex; `None` in the straight regime.
    pub tau2: Option<f64>,
    /// Branch the trajectory starts on. Nominal (smallest admissible)
    /// when the start point is the vertex.
    pub entry_branch: BranchId,
    /// Branch the trajectory ends on; nominal when the end is the vertex.
    pub exit_branch: BranchId,
}

/// Which leg of a vertex-crossing trajectory a cost refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    /// From the start point to the vertex, over `[0, tau]`.
    Entry,
    /// From the vertex to the end point, over `[tau, 1]`.
    Exit,
}

/// One-sided spatial gradient of the action at a point pair.
#[derive(Clone, Copy, Debug)]
pub struct GradientResult {
    /// Derivative in the start coordinate `y` (along its branch).
    pub d_y: f64,
    /// Derivative in the end coordinate `x` (along its branch).
    pub d_x: f64,
    /// `false` on the non-smooth set, where two regimes tie.
    pub smooth: bool,
    /// Gradient of the runner-up regime at non-smooth points.
    pub alternate: Option<(f64, f64)>,
}

/// Action of the straight trajectory from `y` to `x` in unit time:
/// `L_i(x - y)` on a shared branch, the idling floor `L0(0)` from the
/// vertex to itself, and `+inf` across distinct branches (no straight
/// path exists; infinity is a value here, not an error).
///
/// # Panics
///
/// Panics if a point references a branch the junction lacks.
pub fn d_straight(jn: &Junction, y: Point, x: Point) -> f64 {
    jn.check_point(y).expect("start point lives on the junction");
    jn.check_point(x).expect("end point lives on the junction");
    match (y.branch(), x.branch()) {
        (None, None) => jn.l0_zero(),
        (Some(b), None) => jn.lagrangian(b).eval(-y.coord()),
        (None, Some(b)) => jn.lagrangian(b).eval(x.coord()),
        (Some(by), Some(bx)) if by == bx => jn.lagrangian(bx).eval(x.coord() - y.coord()),
        _ => f64::INFINITY,
    }
}

/// Cost of one leg of a vertex-crossing trajectory, normalized so that
/// the two legs add up to the total action.
///
/// The entry leg travels from `p` to the vertex over `[0, tau]` at
/// constant velocity and is billed net of the idling floor:
/// `tau L_j(-y / tau) - tau L0(0)`; the exit leg travels from the vertex
/// to `p` over `[tau, 1]` and carries the floor for the whole dwell:
/// `(1 - tau) L_i(x / (1 - tau)) + tau L0(0)`. Degenerate legs of zero
/// duration with a point to cover cost `+inf`; legs from or to the vertex
/// itself cost `0` (entry) and `L0(0)` (exit) for every `tau`.
pub fn phase_cost(jn: &Junction, phase: Phase, tau: f64, p: Point) -> Result<f64> {
    jn.check_point(p)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!(
            "leg switching time must lie in [0, 1], got {tau}"
        )));
    }
    let branch = p.branch().unwrap_or_else(|| BranchId::new(1));
    Ok(match phase {
        Phase::Entry => entry_cost(jn, branch, tau, p.coord()),
        Phase::Exit => exit_cost(jn, branch, tau, p.coord()),
    })
}

/// Entry-leg cost with plain coordinates; `y == 0` means the vertex.
fn entry_cost(jn: &Junction, j: BranchId, tau: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if tau == 0.0 {
        return f64::INFINITY;
    }
    tau * (jn.lagrangian(j).eval(-y / tau) - jn.l0_zero())
}

/// Exit-leg cost with plain coordinates; `x == 0` means the vertex.
fn exit_cost(jn: &Junction, i: BranchId, tau: f64, x: f64) -> f64 {
    if x == 0.0 {
        return jn.l0_zero();
    }
    if tau == 1.0 {
        return f64::INFINITY;
    }
    (1.0 - tau) * jn.lagrangian(i).eval(x / (1.0 - tau)) + tau * jn.l0_zero()
}

/// `K_l` without branch-id re-validation, for internal hot paths.
fn k_of(jn: &Junction, l: BranchId, xi: f64) -> f64 {
    let lag = jn.lagrangian(l);
    lag.eval(xi) - xi * lag.deriv(xi) - jn.l0_zero()
}

/// Whether `(y, x)` lies in the open dwell region `Delta^{ji}`.
///
/// `Delta` is empty when either branch attains the minimal idling cost;
/// otherwise it is the triangle `x / xi_i^+ - y / xi_j^- < 1` (note
/// `xi_j^- < 0`, so both terms are nonnegative).
fn in_delta(jn: &Junction, j: BranchId, y: f64, i: BranchId, x: f64) -> bool {
    if jn.in_i0(i) || jn.in_i0(j) {
        return false;
    }
    x / jn.xi_plus(i) - y / jn.xi_minus(j) < 1.0
}

/// The switching time of the implicit regime: the unique `T` in `[0, 1]`
/// at which entry and exit legs trade off optimally, solving
/// `K_j(-y / T) = K_i(x / (1 - T))` when both coordinates are positive.
///
/// Degenerate endpoints follow the one-sided optimality conditions:
/// with `y = 0` the optimum is `T = max(0, 1 - x / xi_i^+)` (`0` when
/// branch `i` attains the idling floor), with `x = 0` it is
/// `T = min(1, -y / xi_j^-)` (`1` when branch `j` attains the floor).
/// At `(0, 0)` the entry-side convention `T = 0` applies when branch `i`
/// attains the floor, then `T = 1` when branch `j` does; if neither does,
/// every `T` costs the same and  [`Error::TauUndefinedAtOrigin`] is
/// returned rather than inventing a canonical value.
pub fn solve_tau(jn: &Junction, j: BranchId, y: f64, i: BranchId, x: f64) -> Result<f64> {
    jn.check_branch(j)?;
    jn.check_branch(i)?;
    for (name, c) in [("y", y), ("x", x)] {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Domain(format!(
                "coordinate {name} must be finite and nonnegative, got {c}"
            )));
        }
    }
    match (y == 0.0, x == 0.0) {
        (true, true) => {
            if jn.in_i0(i) {
                Ok(0.0)
            } else if jn.in_i0(j) {
                Ok(1.0)
            } else {
                Err(Error::TauUndefinedAtOrigin)
            }
        }
        (true, false) => {
            if jn.in_i0(i) {
                Ok(0.0)
            } else {
                Ok((1.0 - x / jn.xi_plus(i)).max(0.0))
            }
        }
        (false, true) => {
            if jn.in_i0(j) {
                Ok(1.0)
            } else {
                Ok((-y / jn.xi_minus(j)).min(1.0))
            }
        }
        (false, false) => {
            let f = |tau: f64| k_of(jn, j, -y / tau) - k_of(jn, i, x / (1.0 - tau));
            // K' (xi) = -xi L''(xi), so F is strictly increasing in tau.
            let fp = |tau: f64| {
                let xi_y = -y / tau;
                let xi_x = x / (1.0 - tau);
                let kp_y = -xi_y * jn.lagrangian(j).deriv2(xi_y);
                let kp_x = -xi_x * jn.lagrangian(i).deriv2(xi_x);
                kp_y * y / (tau * tau) - kp_x * x / ((1.0 - tau) * (1.0 - tau))
            };
            // F drops to -inf as tau -> 0+ and climbs to +inf as
            // tau -> 1-: shrink geometrically from 1/4 until both signs
            // are seen, then hand over to safeguarded Newton.
            let mut lo = 0.25;
            loop {
                let v = f(lo);
                if !v.is_finite() {
                    return Err(Error::NoConvergence(format!(
                        "switching-time equation non-finite at tau = {lo}"
                    )));
                }
                if v < 0.0 {
                    break;
                }
                lo *= 0.25;
                if lo < 1e-300 {
                    return Err(Error::NoConvergence(
                        "no sign change near tau = 0".into(),
                    ));
                }
            }
            let mut gap = 0.25;
            loop {
                let v = f(1.0 - gap);
                if !v.is_finite() {
                    return Err(Error::NoConvergence(format!(
                        "switching-time equation non-finite at tau = {}",
                        1.0 - gap
                    )));
                }
                if v > 0.0 {
                    break;
                }
                gap *= 0.25;
                if gap < 1e-300 {
                    return Err(Error::NoConvergence(
                        "no sign change near tau = 1".into(),
                    ));
                }
            }
            roots::increasing_root(f, Some(&fp), lo, 1.0 - gap, TAU_X_TOL, 0.0)
                .map_err(Error::NoConvergence)
        }
    }
}

/// Action of the best vertex-crossing trajectory whose legs switch at a
/// *common* time `tau1 = tau2`, i.e. with no dwell.
///
/// Equals the full vertex-crossing action outside the dwell region and
/// exceeds it inside. Both endpoints may be the vertex (the value is then
/// the idling floor `L0(0)`).
pub fn d_implicit(jn: &Junction, y: Point, x: Point) -> Result<f64> {
    jn.check_point(y)?;
    jn.check_point(x)?;
    let (j, i) = match (y.branch(), x.branch()) {
        (None, None) => return Ok(jn.l0_zero()),
        (Some(j), Some(i)) => (j, i),
        (Some(j), None) => (j, j),
        (None, Some(i)) => (i, i),
    };
    let t = solve_tau(jn, j, y.coord(), i, x.coord())?;
    Ok(entry_cost(jn, j, t, y.coord()) + exit_cost(jn, i, t, x.coord()))
}

/// Value of the dwell (linear) regime for the branch pair `(j, i)`:
/// `-L_j'(xi_j^-) y + L_i'(xi_i^+) x + L0(0)`.
///
/// Returns `None` off the closure of the dwell region `Delta^{ji}` —
/// in particular whenever either branch attains the minimal idling cost —
/// since the formula describes an admissible trajectory only there.
///
/// # Panics
///
/// Panics if a branch id does not exist on the junction or a coordinate
/// is negative or non-finite.
pub fn d_linear(jn: &Junction, j: BranchId, y: f64, i: BranchId, x: f64) -> Option<f64> {
    jn.check_branch(j).expect("entry branch exists");
    jn.check_branch(i).expect("exit branch exists");
    assert!(
        y.is_finite() && y >= 0.0 && x.is_finite() && x >= 0.0,
        "coordinates must be finite and nonnegative"
    );
    in_delta(jn, j, y, i, x).then(|| linear_value(jn, j, y, i, x))
}

fn linear_value(jn: &Junction, j: BranchId, y: f64, i: BranchId, x: f64) -> f64 {
    let slope_y = jn.lagrangian(j).deriv(jn.xi_minus(j));
    let slope_x = jn.lagrangian(i).deriv(jn.xi_plus(i));
    -slope_y * y + slope_x * x + jn.l0_zero()
}

/// Per-pairing vertex-crossing action: the dwell formula on `Delta`, the
/// common-switch solve elsewhere.
fn d_junction_pair(
    jn: &Junction,
    j: BranchId,
    y: f64,
    i: BranchId,
    x: f64,
) -> Result<(f64, Regime, f64, f64)> {
    if in_delta(jn, j, y, i, x) {
        let tau1 = -y / jn.xi_minus(j);
        let tau2 = 1.0 - x / jn.xi_plus(i);
        Ok((linear_value(jn, j, y, i, x), Regime::Linear, tau1, tau2))
    } else {
        let t = solve_tau(jn, j, y, i, x)?;
        let value = entry_cost(jn, j, t, y) + exit_cost(jn, i, t, x);
        Ok((value, Regime::Implicit, t, t))
    }
}

/// Entry/exit branch pairs admissible for a pair of points: branches are
/// forced at interior points and free at the vertex.
fn pairings(jn: &Junction, y: Point, x: Point) -> Vec<(BranchId, BranchId)> {
    let entries: Vec<BranchId> = match y.branch() {
        Some(b) => vec![b],
        None => jn.branch_ids().collect(),
    };
    let exits: Vec<BranchId> = match x.branch() {
        Some(b) => vec![b],
        None => jn.branch_ids().collect(),
    };
    let mut out = Vec::with_capacity(entries.len() * exits.len());
    for &j in &entries {
        for &i in &exits {
            out.push((j, i));
        }
    }
    out
}

/// Minimal action among trajectories that pass through the vertex,
/// minimized over admissible entry/exit branch pairs.
///
/// Exact ties between pairings keep the lexicographically smallest
/// `(entry, exit)` pair, except when both points are the vertex: there
/// every pairing costs the idling floor `L0(0)`, and the dwell (linear)
/// description is preferred when some branch admits one.
pub fn d_junction(jn: &Junction, y: Point, x: Point) -> Result<ActionResult> {
    jn.check_point(y)?;
    jn.check_point(x)?;
    if y.is_junction() && x.is_junction() {
        // Every pairing dwells the whole time and costs L0(0); report the
        // dwell regime through the smallest branch that has one.
        return Ok(match jn.branch_ids().find(|&l| !jn.in_i0(l)) {
            Some(l) => ActionResult {
                value: jn.l0_zero(),
                regime: Regime::Linear,
                tau1: Some(0.0),
                tau2: Some(1.0),
                entry_branch: l,
                exit_branch: l,
            },
            None => ActionResult {
                value: jn.l0_zero(),
                regime: Regime::Implicit,
                tau1: Some(0.0),
                tau2: Some(0.0),
                entry_branch: BranchId::new(1),
                exit_branch: BranchId::new(1),
            },
        });
    }
    let mut best: Option<ActionResult> = None;
    for (j, i) in pairings(jn, y, x) {
        let (value, regime, tau1, tau2) = d_junction_pair(jn, j, y.coord(), i, x.coord())?;
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(ActionResult {
                value,
                regime,
                tau1: Some(tau1),
                tau2: Some(tau2),
                entry_branch: j,
                exit_branch: i,
            });
        }
    }
    Ok(best.expect("junctions have at least one branch"))
}

/// The minimal action `d0(y, x)` over all unit-time trajectories.
///
/// Dispatch per entry/exit pairing: on a shared branch attaining the
/// idling floor the straight path always wins; on other shared branches
/// the straight path competes with the vertex crossing (exact ties go to
/// the straight description); across branches only the crossing exists.
/// Ties between pairings prefer a same-branch description, whose
/// straight/crossing exchange carries the one-sided gradient information,
/// then keep the lexicographically smallest pair. When both points are
/// the vertex the trajectory never moves and the regime is reported as
/// [`Regime::StayAtJunction`].
pub fn d0(jn: &Junction, y: Point, x: Point) -> Result<ActionResult> {
    jn.check_point(y)?;
    jn.check_point(x)?;
    if y.is_junction() && x.is_junction() {
        return Ok(ActionResult {
            value: jn.l0_zero(),
            regime: Regime::StayAtJunction,
            tau1: Some(0.0),
            tau2: Some(1.0),
            entry_branch: BranchId::new(1),
            exit_branch: BranchId::new(1),
        });
    }
    let mut best: Option<ActionResult> = None;
    for (j, i) in pairings(jn, y, x) {
        let candidate = d0_pair(jn, j, y.coord(), i, x.coord())?;
        let better = best.as_ref().is_none_or(|b| {
            candidate.value < b.value
                || (candidate.value == b.value
                    && candidate.entry_branch == candidate.exit_branch
                    && b.entry_branch != b.exit_branch)
        });
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("junctions have at least one branch"))
}

/// The action restricted to one entry/exit pairing, straight arm included.
fn d0_pair(jn: &Junction, j: BranchId, y: f64, i: BranchId, x: f64) -> Result<ActionResult> {
    let straight = |value: f64| ActionResult {
        value,
        regime: Regime::Straight,
        tau1: None,
        tau2: None,
        entry_branch: j,
        exit_branch: i,
    };
    if i == j {
        let s = jn.lagrangian(i).eval(x - y);
        if jn.in_i0(i) {
            // Crossing re-enters the same branch and cannot beat the
            // straight path when the branch already idles at the floor.
            return Ok(straight(s));
        }
        let (value, regime, tau1, tau2) = d_junction_pair(jn, j, y, i, x)?;
        if s <= value {
            return Ok(straight(s));
        }
        return Ok(ActionResult {
            value,
            regime,
            tau1: Some(tau1),
            tau2: Some(tau2),
            entry_branch: j,
            exit_branch: i,
        });
    }
    let (value, regime, tau1, tau2) = d_junction_pair(jn, j, y, i, x)?;
    Ok(ActionResult {
        value,
        regime,
        tau1: Some(tau1),
        tau2: Some(tau2),
        entry_branch: j,
        exit_branch: i,
    })
}

/// One-sided spatial gradient of the vertex-crossing action
/// `D^{ji}(y, x)` for a fixed entry/exit pairing.
///
/// Inside the dwell region the gradient is the constant pair
/// `(-L_j'(xi_j^-), L_i'(xi_i^+))`; at interior points outside it the leg
/// velocities `-y / T` and `x / (1 - T)` give the slopes. On the
/// coordinate axes the optimality conditions clamp the leg velocity on
/// the side that still moves — `xi_x = max(x, xi_i^+)` at `y = 0` — and
/// transfer it to the frozen side through the level sets of `K`:
/// `xi_y = (K_j)^{-1}(K_i(xi_x))` on the nonpositive side. The crossing
/// action is continuously differentiable throughout the quadrant, so no
/// smoothness flag is needed here.
pub fn d_junction_gradient(
    jn: &Junction,
    j: BranchId,
    y: f64,
    i: BranchId,
    x: f64,
) -> Result<(f64, f64)> {
    jn.check_branch(j)?;
    jn.check_branch(i)?;
    for (name, c) in [("y", y), ("x", x)] {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Domain(format!(
                "coordinate {name} must be finite and nonnegative, got {c}"
            )));
        }
    }
    if in_delta(jn, j, y, i, x) {
        return Ok((
            -jn.lagrangian(j).deriv(jn.xi_minus(j)),
            jn.lagrangian(i).deriv(jn.xi_plus(i)),
        ));
    }
    let (xi_y, xi_x) = match (y == 0.0, x == 0.0) {
        (false, false) => {
            let t = solve_tau(jn, j, y, i, x)?;
            (-y / t, x / (1.0 - t))
        }
        (true, false) => {
            let xi_x = x.max(jn.xi_plus(i));
            let v = k_of(jn, i, xi_x);
            (jn.k_inverse(j, v, Sign::Minus)?, xi_x)
        }
        (false, true) => {
            let xi_y = (-y).min(jn.xi_minus(j));
            let v = k_of(jn, j, xi_y);
            (xi_y, jn.k_inverse(i, v, Sign::Plus)?)
        }
        (true, true) => match (jn.in_i0(j), jn.in_i0(i)) {
            // Not in Delta at the origin means some branch idles at the
            // floor; the frozen side sits at the other's threshold.
            (_, true) => (jn.xi_minus(j), 0.0),
            (true, false) => (0.0, jn.xi_plus(i)),
            (false, false) => unreachable!("origin lies in Delta for non-floor pairings"),
        },
    };
    Ok((-jn.lagrangian(j).deriv(xi_y), jn.lagrangian(i).deriv(xi_x)))
}

/// One-sided spatial gradient of the full action restricted to one
/// entry/exit pairing, `D0^{ji}`.
///
/// Follows the dispatch of [`d0`]: across branches and on floor-idling
/// shared branches the action keeps a single regime and is smooth; on
/// other shared branches the straight and crossing costs compete, and the
/// gradient is flagged non-smooth where they tie — along the exchange
/// curve inside the dwell region and at its two endpoints on the region's
/// boundary — with the straight gradient reported as primary and the
/// crossing gradient as the alternate.
pub fn d0_gradient_pair(
    jn: &Junction,
    j: BranchId,
    y: f64,
    i: BranchId,
    x: f64,
) -> Result<GradientResult> {
    jn.check_branch(j)?;
    jn.check_branch(i)?;
    let smooth = |(d_y, d_x): (f64, f64)| GradientResult { d_y, d_x, smooth: true, alternate: None };
    if i != j {
        return Ok(smooth(d_junction_gradient(jn, j, y, i, x)?));
    }
    let lag = jn.lagrangian(i);
    let straight_grad = {
        let s = lag.deriv(x - y);
        (-s, s)
    };
    if jn.in_i0(i) {
        return Ok(smooth(straight_grad));
    }
    // Distance to the two boundary kinks of the exchange curve.
    let near_entry_kink = (y + jn.xi_minus(j)).hypot(x) <= NEAR_KINK_TOL;
    let near_exit_kink = y.hypot(x - jn.xi_plus(i)) <= NEAR_KINK_TOL;
    if near_entry_kink || near_exit_kink {
        return Ok(GradientResult {
            d_y: straight_grad.0,
            d_x: straight_grad.1,
            smooth: false,
            alternate: Some(d_junction_gradient(jn, j, y, i, x)?),
        });
    }
    if !in_delta(jn, j, y, i, x) {
        // Off the dwell region the straight path is optimal on a shared
        // branch (ties included), and its description is the smooth one.
        return Ok(smooth(straight_grad));
    }
    let v_crossing = linear_value(jn, j, y, i, x);
    let v_straight = lag.eval(x - y);
    if (v_crossing - v_straight).abs() <= NON_SMOOTH_TOL {
        return Ok(GradientResult {
            d_y: straight_grad.0,
            d_x: straight_grad.1,
            smooth: false,
            alternate: Some(d_junction_gradient(jn, j, y, i, x)?),
        });
    }
    if v_straight < v_crossing {
        Ok(smooth(straight_grad))
    } else {
        Ok(smooth(d_junction_gradient(jn, j, y, i, x)?))
    }
}

/// One-sided spatial gradient of the action at a pair of points, taken
/// along the pairing that [`d0`] selects there.
///
/// At the vertex the reported derivatives are one-sided along the
/// selected (nominal, for vertex endpoints) branches; see
/// [`d0_gradient_pair`] for the smoothness classification.
pub fn d0_gradient(jn: &Junction, y: Point, x: Point) -> Result<GradientResult> {
    let selected = d0(jn, y, x)?;
    d0_gradient_pair(
        jn,
        selected.entry_branch,
        y.coord(),
        selected.exit_branch,
        x.coord(),
    )
}

/// The action between times `s <= t`: `(t - s) d0(y / (t - s), x / (t - s))`,
/// with switching times reported in absolute time.
///
/// At `s = t` the action degenerates to the indicator of `y = x` (zero
/// there, `+inf` elsewhere) with a nominal straight regime.
pub fn action(jn: &Junction, s: f64, y: Point, t: f64, x: Point) -> Result<ActionResult> {
    jn.check_point(y)?;
    jn.check_point(x)?;
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("times must be finite, got {s} and {t}")));
    }
    if s > t {
        return Err(Error::Domain(format!(
            "start time {s} must not exceed end time {t}"
        )));
    }
    if s == t {
        let nominal = y.branch().or_else(|| x.branch()).unwrap_or_else(|| BranchId::new(1));
        return Ok(ActionResult {
            value: if y == x { 0.0 } else { f64::INFINITY },
            regime: Regime::Straight,
            tau1: None,
            tau2: None,
            entry_branch: nominal,
            exit_branch: nominal,
        });
    }
    let h = t - s;
    let unit = d0(jn, y.div_coord(h), x.div_coord(h))?;
    Ok(ActionResult {
        value: h * unit.value,
        regime: unit.regime,
        tau1: unit.tau1.map(|tau| s + h * tau),
        tau2: unit.tau2.map(|tau| s + h * tau),
        entry_branch: unit.entry_branch,
        exit_branch: unit.exit_branch,
    })
}
