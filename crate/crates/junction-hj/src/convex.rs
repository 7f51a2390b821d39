//! Strictly convex Lagrangians and their convex conjugates.
//!
//! A branch's running cost is a velocity Lagrangian `L(q)`, assumed `C^2`
//! with `L''(q) >= gamma > 0` everywhere (strong convexity). Two derived
//! objects drive everything else in the crate:
//!
//! * the Legendre-Fenchel conjugate `H(p) = sup_q (p q - L(q))`, which is
//!   the Hamiltonian of the branch, and
//! * the one-sided envelope `H^-(p) = sup_{q <= 0} (p q - L(q))`, the
//!   nonincreasing part of `H` that the junction-point condition sees:
//!   only velocities pointing *toward* the vertex compete there.
//!
//! Quadratic costs `L(q) = a (q - b)^2 + c` conjugate in closed form and
//! are the workhorse of the crate (every LWR road produces one); arbitrary
//! strongly convex costs are supported through safeguarded Newton on
//! `L'(q) = p`.

use std::fmt;
use std::sync::Arc;

use crate::roots;
use crate::{Error, Result};

/// Convergence tolerance on `L'(q) - p` when conjugating a non-quadratic
/// Lagrangian numerically.
const CONJUGATE_F_TOL: f64 = 1e-12;

/// Velocities probed when sanity-checking a user-supplied Lagrangian.
const PROBE_GRID: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Quadratic { a: f64, b: f64, c: f64 },
    Custom { eval: ScalarFn, deriv: ScalarFn, gamma: f64 },
}

/// A strictly convex running cost `q -> L(q)` on signed velocities.
///
/// `q > 0` moves away from the junction point, `q < 0` toward it. The cost
/// must be `C^2` with `L'' >= gamma > 0`; the bound `gamma` is what makes
/// minimizers unique and the conjugate smooth, and several solvers use it
/// to size their search brackets.
#[derive(Clone)]
pub struct Lagrangian {
    repr: Repr,
}

/// Result of conjugating a Lagrangian at a slope `p`: the maximizing
/// velocity of `q -> p q - L(q)` and the value `H(p)` attained there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conjugate {
    /// The unique `q` with `L'(q) = p`.
    pub q_star: f64,
    /// `H(p) = p q_star - L(q_star)`.
    pub value: f64,
}

impl Lagrangian {
    /// Builds the quadratic cost `L(q) = a (q - b)^2 + c`.
    ///
    /// Requires `a > 0`; the strong-convexity constant is `2 a`. The
    /// minimal cost `c` is attained at the preferred velocity `b`.
    pub fn quadratic(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Invalid("quadratic coefficients must be finite".into()));
        }
        if a <= 0.0 {
            return Err(Error::Invalid(format!(
                "leading coefficient must be positive, got {a}"
            )));
        }
        Ok(Self { repr: Repr::Quadratic { a, b, c } })
    }

    /// Wraps a user-supplied cost given by callables for `L` and `L'`.
    ///
    /// `gamma` must be a valid lower bound for `L''`; it is trusted for
    /// bracket sizing but spot-checked on a coarse velocity grid, so
    /// grossly inconsistent inputs are rejected up front rather than
    /// producing silent nonsense later.
    pub fn custom(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma: f64,
    ) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::Invalid(format!(
                "convexity bound gamma must be positive, got {gamma}"
            )));
        }
        for &q in &PROBE_GRID {
            let (v, d) = (eval(q), deriv(q));
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::Invalid(format!(
                    "cost or slope non-finite at probe velocity {q}"
                )));
            }
            // First-order consistency of the supplied derivative.
            let h = 1e-5;
            let fd = (eval(q + h) - eval(q - h)) / (2.0 * h);
            if (fd - d).abs() > 1e-3 * (1.0 + d.abs()) {
                return Err(Error::Invalid(format!(
                    "slope at {q} disagrees with finite difference ({d} vs {fd})"
                )));
            }
        }
        for w in PROBE_GRID.windows(2) {
            let gap = deriv(w[1]) - deriv(w[0]);
            let need = gamma * (w[1] - w[0]);
            if gap < need * (1.0 - 1e-6) - 1e-9 {
                return Err(Error::Invalid(format!(
                    "slope increase {gap} on [{}, {}] falls short of the declared bound {need}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            repr: Repr::Custom { eval: Arc::new(eval), deriv: Arc::new(deriv), gamma },
        })
    }

    /// Cost of traveling at velocity `q`.
    pub fn eval(&self, q: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic { a, b, c } => a * (q - b) * (q - b) + c,
            Repr::Custom { eval, .. } => eval(q),
        }
    }

    /// Marginal cost `L'(q)`.
    pub fn deriv(&self, q: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic { a, b, .. } => 2.0 * a * (q - b),
            Repr::Custom { deriv, .. } => deriv(q),
        }
    }

    /// The strong-convexity constant: a positive lower bound for `L''`.
    pub fn deriv2_lower(&self) -> f64 {
        match &self.repr {
            Repr::Quadratic { a, .. } => 2.0 * a,
            Repr::Custom { gamma, .. } => *gamma,
        }
    }

    /// Second derivative; finite differences for custom costs.
    pub(crate) fn deriv2(&self, q: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic { a, .. } => 2.0 * a,
            Repr::Custom { deriv, .. } => {
                let h = 1e-6 * (1.0 + q.abs());
                (deriv(q + h) - deriv(q - h)) / (2.0 * h)
            }
        }
    }

    /// The coefficients `(a, b, c)` when the cost is the closed-form
    /// quadratic `a (q - b)^2 + c`.
    pub fn quadratic_coeffs(&self) -> Option<(f64, f64, f64)> {
        match self.repr {
            Repr::Quadratic { a, b, c } => Some((a, b, c)),
            Repr::Custom { .. } => None,
        }
    }

    /// Conjugates the cost at slope `p`: the maximizer and value of
    /// `q -> p q - L(q)`.
    ///
    /// Quadratics conjugate in closed form (`q* = b + p / 2a`); custom
    /// costs solve `L'(q) = p` by safeguarded Newton on an expanding
    /// bracket, to tolerance `1e-12` on the slope residual.
    pub fn conjugate(&self, p: f64) -> Result<Conjugate> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("conjugate slope must be finite, got {p}")));
        }
        match &self.repr {
            Repr::Quadratic { a, b, .. } => {
                let q_star = b + p / (2.0 * a);
                Ok(Conjugate { q_star, value: p * q_star - self.eval(q_star) })
            }
            Repr::Custom { deriv, gamma, .. } => {
                let g = |q: f64| deriv(q) - p;
                // L' grows at rate >= gamma, so the root lies within
                // |q| <= |L'(0) - p| / gamma of the origin.
                let seed = ((deriv(0.0) - p).abs() / gamma).max(1.0);
                let (lo, hi) = roots::expanding_bracket(g, seed)
                    .map_err(Error::NoConvergence)?;
                let d2 = |q: f64| self.deriv2(q);
                let q_star = roots::increasing_root(g, Some(&d2), lo, hi, 0.0, CONJUGATE_F_TOL)
                    .map_err(Error::NoConvergence)?;
                Ok(Conjugate { q_star, value: p * q_star - self.eval(q_star) })
            }
        }
    }

    /// The Hamiltonian `H(p) = sup_q (p q - L(q))`.
    pub fn hamiltonian(&self, p: f64) -> Result<f64> {
        Ok(self.conjugate(p)?.value)
    }

    /// The nonincreasing envelope `H^-(p) = sup_{q <= 0} (p q - L(q))`.
    ///
    /// Restricting the supremum to inward velocities flattens `H` to the
    /// right of its minimum: `H^-(p) = H(p)` for `p <= L'(0)` and
    /// `H^-(p) = -L(0)` beyond.
    pub fn h_minus(&self, p: f64) -> Result<f64> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("slope must be finite, got {p}")));
        }
        if p <= self.deriv(0.0) {
            self.hamiltonian(p)
        } else {
            Ok(-self.eval(0.0))
        }
    }
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Quadratic { a, b, c } => {
                write!(f, "Lagrangian({a} * (q - {b})^2 + {c})")
            }
            Repr::Custom { gamma, .. } => {
                write!(f, "Lagrangian(custom, gamma = {gamma})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry_cost() -> Lagrangian {
        // L(q) = (1 + q)^2 / 4, minimal at q = -1.
        Lagrangian::quadratic(0.25, -1.0, 0.0).unwrap()
    }

    /// Dense grid supremum of `p q - L(q)` over `q` in `[-10, 0]`; the
    /// independent check for `h_minus` values.
    fn h_minus_by_grid(l: &Lagrangian, p: f64) -> f64 {
        let n = 100_000;
        let mut best = f64::NEG_INFINITY;
        for k in 0..=n {
            let q = -10.0 + 10.0 * (k as f64) / (n as f64);
            best = best.max(p * q - l.eval(q));
        }
        best
    }

    #[test]
    fn conjugate_of_entry_cost_matches_closed_form() {
        let l = entry_cost();
        // H(p) = p^2 - p with maximizer 2p - 1.
        let c = l.conjugate(0.0).unwrap();
        assert!((c.q_star - -1.0).abs() < 1e-12);
        assert!(c.value.abs() < 1e-12);
        let c = l.conjugate(1.0).unwrap();
        assert!((c.q_star - 1.0).abs() < 1e-12);
        assert!(c.value.abs() < 1e-12);
        let c = l.conjugate(0.5).unwrap();
        assert!(c.q_star.abs() < 1e-12);
        assert!((c.value - -0.25).abs() < 1e-12);
    }

    #[test]
    fn h_minus_flattens_right_of_the_inward_slope() {
        let l = entry_cost();
        // L'(0) = 0.5: below it H^- equals H, above it the envelope is
        // pinned at -L(0) = -0.25.
        assert!((l.h_minus(0.0).unwrap() - 0.0).abs() < 1e-12);
        assert!((l.h_minus(1.0).unwrap() - -0.25).abs() < 1e-12);
        // p = -1 maximizes at q = 2p - 1 = -3, well inside q <= 0.
        assert!((l.h_minus(-1.0).unwrap() - 2.0).abs() < 1e-12);
        let c = l.conjugate(-1.0).unwrap();
        assert!((c.q_star - -3.0).abs() < 1e-12);
    }

    #[test]
    fn h_minus_agrees_with_grid_supremum() {
        let l = entry_cost();
        for p in [-2.0, -1.0, -0.3, 0.0, 0.2, 0.5, 1.0, 3.0] {
            let grid = h_minus_by_grid(&l, p);
            let exact = l.h_minus(p).unwrap();
            // Grid resolution 1e-4 and curvature 1/2 bound the gap.
            assert!(
                (grid - exact).abs() < 1e-7,
                "p = {p}: grid {grid} vs closed form {exact}"
            );
        }
    }

    #[test]
    fn custom_wrapper_reproduces_the_quadratic() {
        let l = entry_cost();
        let c = Lagrangian::custom(
            |q| 0.25 * (1.0 + q) * (1.0 + q),
            |q| 0.5 * (1.0 + q),
            0.5,
        )
        .unwrap();
        for p in [-3.0, -1.0, 0.0, 0.4, 1.0, 2.5] {
            let lhs = l.conjugate(p).unwrap();
            let rhs = c.conjugate(p).unwrap();
            assert!((lhs.value - rhs.value).abs() < 1e-10, "H at {p}");
            assert!((lhs.q_star - rhs.q_star).abs() < 1e-9, "maximizer at {p}");
        }
    }

    #[test]
    fn conjugation_is_an_involution_numerically() {
        // L**(q) = sup_p (q p - H(p)) sampled on a slope grid must
        // reproduce L(q).
        let l = Lagrangian::quadratic(0.5, 1.0, 0.0).unwrap();
        for q in [-2.0, -0.5, 0.0, 0.7, 1.0, 3.0] {
            let mut back = f64::NEG_INFINITY;
            for k in 0..=4000 {
                let p = -10.0 + 20.0 * (k as f64) / 4000.0;
                back = back.max(q * p - l.hamiltonian(p).unwrap());
            }
            assert!((back - l.eval(q)).abs() < 1e-4, "L** at {q}");
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(Lagrangian::quadratic(0.0, 0.0, 0.0).is_err());
        assert!(Lagrangian::quadratic(-1.0, 0.0, 0.0).is_err());
        assert!(Lagrangian::quadratic(f64::NAN, 0.0, 0.0).is_err());
        // Concave "cost": the slope decreases.
        assert!(Lagrangian::custom(|q| -q * q, |q| -2.0 * q, 1.0).is_err());
        // Declared bound far above the actual curvature.
        assert!(Lagrangian::custom(|q| 0.1 * q * q, |q| 0.2 * q, 5.0).is_err());
        // Derivative inconsistent with the cost.
        assert!(Lagrangian::custom(|q| q * q, |q| 3.0 * q, 1.0).is_err());
    }
}
