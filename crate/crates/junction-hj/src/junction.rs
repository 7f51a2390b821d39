//! The glued domain: `N` half-lines sharing a single vertex.
//!
//! Positions are [`Point`]s — either the shared vertex or a strictly
//! positive coordinate along one branch. [`Junction`] owns the per-branch
//! Lagrangians and precomputes the quantities the action formulas consume:
//!
//! * `L0(0)`, the minimal idling cost over all branches, and the set `I0`
//!   of branches attaining it;
//! * for each branch `l`, the function
//!   `K_l(xi) = L_l(xi) - xi L_l'(xi) - L0(0)`, which measures how much
//!   cheaper it is to cruise at velocity `xi` than to idle at the cheapest
//!   branch, in intercept terms;
//! * the roots `xi_l^- <= 0 <= xi_l^+` of `K_l` (both zero on `I0`
//!   branches), which are the threshold velocities at which passing
//!   through the vertex stops being worth a dwell;
//! * the convexity floor `gamma`, slope scale `gamma0`, and the coercivity
//!   offset `C0` used to bound minimizers.

use std::fmt;

use crate::convex::Lagrangian;
use crate::roots;
use crate::{Error, Result};

/// Absolute tolerance on `L_l(0) - min_k L_k(0)` when deciding which
/// branches attain the minimal idling cost.
///
/// The construction genuinely branches on this set (threshold velocities
/// collapse to zero on it), so membership must be a crisp rule rather
/// than a scale-relative heuristic: branches within `1e-12` of the
/// minimum are in, everything else is out.
pub const IDLE_COST_TOL: f64 = 1e-12;

/// 1-based identifier of a branch (half-line) of a junction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BranchId(usize);

impl BranchId {
    /// Creates a branch id. Ids are 1-based.
    ///
    /// # Panics
    ///
    /// Panics if `id` is zero. Whether an id exists on a particular
    /// junction is checked by the operations that receive it.
    pub fn new(id: usize) -> Self {
        assert!(id > 0, "branch ids are 1-based");
        Self(id)
    }

    /// The numeric id, 1-based.
    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based index into per-branch storage.
    pub(crate) fn index(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn from_index(index: usize) -> Self {
        Self(index + 1)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A position on a junction: the vertex itself or a strictly positive
/// coordinate along one branch.
///
/// Branch coordinates measure distance from the vertex. Constructing a
/// branch point with coordinate `0` canonicalizes to the vertex, so the
/// origin of every branch is one and the same point and compares equal no
/// matter how it was built.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    /// 0 encodes the vertex; otherwise the 1-based branch id.
    branch: usize,
    coord: f64,
}

impl Point {
    /// The vertex shared by all branches.
    pub fn junction() -> Self {
        Self { branch: 0, coord: 0.0 }
    }

    /// A point `coord` away from the vertex along `branch`.
    ///
    /// `coord` must be finite and nonnegative; `0` yields the vertex.
    pub fn on_branch(branch: BranchId, coord: f64) -> Result<Self> {
        if !coord.is_finite() || coord < 0.0 {
            return Err(Error::Domain(format!(
                "branch coordinate must be finite and nonnegative, got {coord}"
            )));
        }
        if coord == 0.0 {
            return Ok(Self::junction());
        }
        Ok(Self { branch: branch.get(), coord })
    }

    /// The branch the point lies on, or `None` at the vertex.
    pub fn branch(&self) -> Option<BranchId> {
        (self.branch != 0).then(|| BranchId::new(self.branch))
    }

    /// Distance from the vertex (zero at the vertex).
    pub fn coord(&self) -> f64 {
        self.coord
    }

    /// Whether this is the vertex.
    pub fn is_junction(&self) -> bool {
        self.branch == 0
    }

    /// The same point with its coordinate divided by `h > 0`.
    pub(crate) fn div_coord(&self, h: f64) -> Self {
        Self { branch: self.branch, coord: self.coord / h }
    }

    /// Ordering used to break exact ties between minimizer candidates:
    /// the vertex first, then by branch id, then by coordinate.
    pub(crate) fn tie_key(&self) -> (usize, f64) {
        (self.branch, self.coord)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_junction() {
            write!(f, "Point(vertex)")
        } else {
            write!(f, "Point({} on branch {})", self.coord, self.branch)
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_junction() {
            write!(f, "J")
        } else {
            write!(f, "{}:{}", self.branch, self.coord)
        }
    }
}

/// Which monotone side of `K_l` to invert.
///
/// `K_l` strictly decreases on `xi >= 0` and strictly increases on
/// `xi <= 0` (its derivative is `-xi L_l''(xi)`), so each side has a
/// well-defined inverse on values `v <= K_l(0)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    /// Invert on `xi >= 0`.
    Plus,
    /// Invert on `xi <= 0`.
    Minus,
}

/// Spatial gradient input for [`Junction::hamiltonian_at`].
#[derive(Clone, Copy, Debug)]
pub enum GradientAt<'a> {
    /// The derivative along the branch containing an interior point.
    Interior(f64),
    /// One outward one-sided derivative per branch at the vertex;
    /// the slice length must equal the number of branches.
    PerBranch(&'a [f64]),
}

/// A junction of `N >= 1` half-lines, each with its own strictly convex
/// velocity cost.
///
/// Built once by [`Junction::build`], which validates the branches and
/// caches every derived constant; the struct is immutable afterwards.
#[derive(Clone, Debug)]
pub struct Junction {
    branches: Vec<Lagrangian>,
    l0_zero: f64,
    in_i0: Vec<bool>,
    k_zero: Vec<f64>,
    xi_plus: Vec<f64>,
    xi_minus: Vec<f64>,
    gamma: f64,
    gamma0: f64,
    c0: f64,
}

impl Junction {
    /// Glues the given branch costs at a common vertex.
    ///
    /// Computes and caches the minimal idling cost `L0(0)`, the membership
    /// set `I0` (tolerance [`IDLE_COST_TOL`]), the threshold velocities
    /// `xi_l^+ >= 0` and `xi_l^- <= 0` solving `K_l = 0` on each side, the
    /// convexity floor `gamma = min_l gamma_l`, the slope scale
    /// `gamma0 = max_l |L_l'(0)|`, and the coercivity offset
    /// `C0 = max(0, -L0(0) + gamma0^2 / gamma)`.
    pub fn build(branches: Vec<Lagrangian>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::EmptyJunction);
        }
        let idle: Vec<f64> = branches.iter().map(|l| l.eval(0.0)).collect();
        if idle.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("idling cost must be finite on every branch".into()));
        }
        let l0_zero = idle.iter().copied().fold(f64::INFINITY, f64::min);
        let in_i0: Vec<bool> = idle.iter().map(|&v| v - l0_zero <= IDLE_COST_TOL).collect();
        let k_zero: Vec<f64> = idle.iter().map(|&v| v - l0_zero).collect();

        let mut xi_plus = vec![0.0; branches.len()];
        let mut xi_minus = vec![0.0; branches.len()];
        for (idx, l) in branches.iter().enumerate() {
            if in_i0[idx] {
                continue;
            }
            xi_plus[idx] = k_side_inverse(l, l0_zero, k_zero[idx], 0.0, Sign::Plus)?;
            xi_minus[idx] = k_side_inverse(l, l0_zero, k_zero[idx], 0.0, Sign::Minus)?;
        }

        let gamma = branches
            .iter()
            .map(Lagrangian::deriv2_lower)
            .fold(f64::INFINITY, f64::min);
        let gamma0 = branches
            .iter()
            .map(|l| l.deriv(0.0).abs())
            .fold(0.0, f64::max);
        let c0 = (-l0_zero + gamma0 * gamma0 / gamma).max(0.0);

        Ok(Self { branches, l0_zero, in_i0, k_zero, xi_plus, xi_minus, gamma, gamma0, c0 })
    }

    /// Number of branches `N`.
    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// All branch ids, `1..=N`.
    pub fn branch_ids(&self) -> impl Iterator<Item = BranchId> {
        (0..self.branches.len()).map(BranchId::from_index)
    }

    /// The cost of branch `l`.
    ///
    /// # Panics
    ///
    /// Panics if `l` does not exist on this junction; use
    /// [`Junction::check_branch`] to validate external ids first.
    pub fn lagrangian(&self, l: BranchId) -> &Lagrangian {
        &self.branches[l.index()]
    }

    /// The minimal idling cost `L0(0) = min_l L_l(0)`.
    pub fn l0_zero(&self) -> f64 {
        self.l0_zero
    }

    /// Whether branch `l` attains the minimal idling cost.
    pub fn in_i0(&self, l: BranchId) -> bool {
        self.in_i0[l.index()]
    }

    /// The branches attaining the minimal idling cost, ascending.
    pub fn i0(&self) -> Vec<BranchId> {
        self.branch_ids().filter(|&l| self.in_i0(l)).collect()
    }

    /// The threshold velocity `xi_l^+ >= 0` (zero on `I0` branches).
    pub fn xi_plus(&self, l: BranchId) -> f64 {
        self.xi_plus[l.index()]
    }

    /// The threshold velocity `xi_l^- <= 0` (zero on `I0` branches).
    pub fn xi_minus(&self, l: BranchId) -> f64 {
        self.xi_minus[l.index()]
    }

    /// The convexity floor `min_l gamma_l`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The slope scale `max_l |L_l'(0)|`.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// The coercivity offset: the unit-time action satisfies
    /// `d0(y, x) >= gamma / 4 * d(y, x)^2 - C0`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Checks that `l` names a branch of this junction.
    pub fn check_branch(&self, l: BranchId) -> Result<()> {
        if l.index() < self.branches.len() {
            Ok(())
        } else {
            Err(Error::BranchOutOfRange { id: l.get(), len: self.branches.len() })
        }
    }

    /// Checks that a point lives on this junction.
    pub fn check_point(&self, p: Point) -> Result<()> {
        match p.branch() {
            Some(b) => self.check_branch(b),
            None => Ok(()),
        }
    }

    /// Convenience constructor for a validated point: `branch` is checked
    /// against this junction, `coord = 0` yields the vertex.
    pub fn point(&self, branch: usize, coord: f64) -> Result<Point> {
        if branch == 0 {
            if coord != 0.0 {
                return Err(Error::Domain(format!(
                    "branch 0 denotes the vertex and has no coordinate {coord}"
                )));
            }
            return Ok(Point::junction());
        }
        let id = BranchId::new(branch);
        self.check_branch(id)?;
        Point::on_branch(id, coord)
    }

    /// Geodesic distance on the junction: `|x - y|` on a shared branch,
    /// `|x| + |y|` through the vertex otherwise.
    pub fn distance(&self, y: Point, x: Point) -> f64 {
        match (y.branch(), x.branch()) {
            (Some(by), Some(bx)) if by == bx => (x.coord() - y.coord()).abs(),
            _ => x.coord() + y.coord(),
        }
    }

    /// Evaluates `K_l(xi) = L_l(xi) - xi L_l'(xi) - L0(0)`.
    ///
    /// `K_l(xi)` is the (negated, `L0(0)`-shifted) intercept of the
    /// tangent to `L_l` at `xi`: cruising at `xi` beats idling at the
    /// cheapest branch exactly while `K_l(xi) > 0`.
    pub fn k_eval(&self, l: BranchId, xi: f64) -> Result<f64> {
        self.check_branch(l)?;
        if !xi.is_finite() {
            return Err(Error::Domain(format!("velocity must be finite, got {xi}")));
        }
        let lag = self.lagrangian(l);
        Ok(lag.eval(xi) - xi * lag.deriv(xi) - self.l0_zero)
    }

    /// Inverts `K_l` on the chosen side: the unique `xi` with
    /// `K_l(xi) = v` and `xi >= 0` (`Sign::Plus`) or `xi <= 0`
    /// (`Sign::Minus`).
    ///
    /// `K_l` peaks at `xi = 0`, so values `v > K_l(0)` are unreachable and
    /// produce a domain error.
    pub fn k_inverse(&self, l: BranchId, v: f64, side: Sign) -> Result<f64> {
        self.check_branch(l)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("target value must be finite, got {v}")));
        }
        k_side_inverse(self.lagrangian(l), self.l0_zero, self.k_zero[l.index()], v, side)
    }

    /// Evaluates the Hamiltonian of the problem at a point, given the
    /// spatial gradient there.
    ///
    /// At an interior point of branch `i` this is the branch Hamiltonian
    /// `H_i(p)`; at the vertex it is `max_l H_l^-(p_l)` over the one-sided
    /// derivatives, reflecting that only inward velocities compete there.
    /// The gradient arity must match the point.
    pub fn hamiltonian_at(&self, x: Point, grad: GradientAt<'_>) -> Result<f64> {
        self.check_point(x)?;
        match (x.branch(), grad) {
            (Some(b), GradientAt::Interior(p)) => self.lagrangian(b).hamiltonian(p),
            (None, GradientAt::PerBranch(ps)) => {
                if ps.len() != self.branches.len() {
                    return Err(Error::GradientArity {
                        expected: self.branches.len(),
                        got: ps.len(),
                    });
                }
                let mut best = f64::NEG_INFINITY;
                for (l, &p) in self.branch_ids().zip(ps) {
                    best = best.max(self.lagrangian(l).h_minus(p)?);
                }
                Ok(best)
            }
            (Some(_), GradientAt::PerBranch(ps)) => {
                Err(Error::GradientArity { expected: 1, got: ps.len() })
            }
            (None, GradientAt::Interior(_)) => {
                Err(Error::GradientArity { expected: self.branches.len(), got: 1 })
            }
        }
    }
}

/// Inverts `K(xi) = L(xi) - xi L'(xi) - l0_zero` on one side.
///
/// `k_zero = K(0) = L(0) - l0_zero >= 0` is passed in by the caller.
/// `K' (xi) = -xi L''(xi)`, so on either side `K` is strictly monotone
/// and strong convexity yields `K(xi) <= K(0) - gamma xi^2 / 2`: the
/// solution of `K = v` lies within `sqrt(2 (K(0) - v) / gamma)` of the
/// origin, which sizes the bracket.
fn k_side_inverse(
    l: &Lagrangian,
    l0_zero: f64,
    k_zero: f64,
    v: f64,
    side: Sign,
) -> Result<f64> {
    if v > k_zero {
        return Err(Error::Domain(format!(
            "value {v} exceeds the peak K(0) = {k_zero}; K is invertible only below its peak"
        )));
    }
    if v == k_zero {
        return Ok(0.0);
    }
    let k = |xi: f64| l.eval(xi) - xi * l.deriv(xi) - l0_zero;
    let gamma = l.deriv2_lower();
    let reach = (2.0 * (k_zero - v) / gamma).sqrt() + 1.0;
    // Orient so the function increases along the search direction: K
    // peaks at the origin and falls on both sides, so v - K does the job
    // with xi = s to the right and xi = -s to the left.
    let g = |s: f64| match side {
        Sign::Plus => v - k(s),
        Sign::Minus => v - k(-s),
    };
    let dg = |s: f64| match side {
        Sign::Plus => s * l.deriv2(s),
        Sign::Minus => s * l.deriv2(-s),
    };
    let root = roots::increasing_root(g, Some(&dg), 0.0, reach, 0.0, 1e-14)
        .map_err(Error::NoConvergence)?;
    Ok(match side {
        Sign::Plus => root,
        Sign::Minus => -root,
    })
}
