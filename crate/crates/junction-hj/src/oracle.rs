//! Slow, independent reference evaluators.
//!
//! Everything here recomputes quantities the library produces in closed
//! form — but by direct minimization over dense grids, sharing none of
//! the closed-form case analysis. The test suite compares the fast paths
//! against these oracles; disagreement beyond grid accuracy means a bug
//! in one of them. The oracles are deliberately simple: uniform grids,
//! window-shrinking refinement, no calculus.

use crate::action::{d0, d_straight, phase_cost, Phase};
use crate::hopf_lax::InitialDatum;
use crate::junction::{Junction, Point};
use crate::{Error, Lagrangian, Result};

/// Grid sizes for the brute-force evaluators.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Nodes per switching-time axis in [`brute_force_d0`].
    pub n_tau: usize,
    /// Nodes per spatial axis in [`brute_force_solve`] and
    /// [`line_lax_oleinik`].
    pub n_y: usize,
    /// Spatial search radius around the target point.
    pub radius: f64,
    /// Window-shrinking refinement rounds around the incumbent minimum
    /// (each round re-grids a window of two old steps on each side).
    pub refine: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_tau: 2000, n_y: 4096, radius: 10.0, refine: 3 }
    }
}

impl OracleConfig {
    fn check(&self) -> Result<()> {
        if self.n_tau < 2 || self.n_y < 2 {
            return Err(Error::Invalid(format!(
                "oracle grids need at least 2 nodes per axis, got n_tau = {}, n_y = {}",
                self.n_tau, self.n_y
            )));
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::Invalid(format!(
                "oracle radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k + 1 == n { hi } else { lo + step * k as f64 })
}

/// Minimum of `e1(t1) + e2(t2)` over grid pairs with `t1 <= t2`, by a
/// prefix-minimum sweep. Both inputs are `(coordinate, value)` lists with
/// ascending coordinates.
fn triangle_min(e1: &[(f64, f64)], e2: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    let mut prefix: Option<(f64, f64)> = None;
    let mut k = 0;
    for &(t2, v2) in e2 {
        while k < e1.len() && e1[k].0 <= t2 {
            let (t1, v1) = e1[k];
            if prefix.is_none_or(|(m, _)| v1 < m) {
                prefix = Some((v1, t1));
            }
            k += 1;
        }
        if let Some((m, t1)) = prefix {
            let total = m + v2;
            if best.is_none_or(|(b, _, _)| total < b) {
                best = Some((total, t1, t2));
            }
        }
    }
    best
}

/// The unit-time action by brute force.
///
/// Samples straight trajectories plus, for every (entry branch, exit
/// branch) pairing, all two-phase trajectories with switching times on an
/// `n_tau` by `n_tau` grid over the triangle `0 <= tau1 <= tau2 <= 1`,
/// then re-grids a shrinking window around the incumbent `refine` times.
/// The error decreases with the grid step, so doubling `n_tau` (at
/// `refine = 0`) tightens the result — the comparison tests rely on that.
pub fn brute_force_d0(jn: &Junction, y: Point, x: Point, cfg: &OracleConfig) -> Result<f64> {
    cfg.check()?;
    jn.check_point(y)?;
    jn.check_point(x)?;
    let mut best = d_straight(jn, y, x);

    let entry_branches: Vec<usize> = match y.branch() {
        Some(b) => vec![b.get()],
        None => jn.branch_ids().map(|b| b.get()).collect(),
    };
    let exit_branches: Vec<usize> = match x.branch() {
        Some(b) => vec![b.get()],
        None => jn.branch_ids().map(|b| b.get()).collect(),
    };

    for &j in &entry_branches {
        for &i in &exit_branches {
            let entry = jn.point(j, y.coord())?;
            let exit = jn.point(i, x.coord())?;
            let e1 = |t: f64| phase_cost(jn, Phase::Entry, t, entry);
            let e2 = |t: f64| phase_cost(jn, Phase::Exit, t, exit);
            let mut window1 = (0.0_f64, 1.0_f64);
            let mut window2 = (0.0_f64, 1.0_f64);
            let mut incumbent: Option<(f64, f64, f64)> = None;
            for _ in 0..=cfg.refine {
                let grid1 = linspace(window1.0, window1.1, cfg.n_tau)
                    .map(|t| Ok((t, e1(t)?)))
                    .collect::<Result<Vec<_>>>()?;
                let grid2 = linspace(window2.0, window2.1, cfg.n_tau)
                    .map(|t| Ok((t, e2(t)?)))
                    .collect::<Result<Vec<_>>>()?;
                let Some((v, t1, t2)) = triangle_min(&grid1, &grid2) else {
                    break;
                };
                if incumbent.is_none_or(|(b, _, _)| v < b) {
                    incumbent = Some((v, t1, t2));
                }
                let (_, t1, t2) = incumbent.unwrap();
                let step1 = (window1.1 - window1.0) / (cfg.n_tau - 1) as f64;
                let step2 = (window2.1 - window2.0) / (cfg.n_tau - 1) as f64;
                window1 = ((t1 - 2.0 * step1).max(0.0), (t1 + 2.0 * step1).min(1.0));
                window2 = ((t2 - 2.0 * step2).max(0.0), (t2 + 2.0 * step2).min(1.0));
            }
            if let Some((v, _, _)) = incumbent {
                best = best.min(v);
            }
        }
    }
    Ok(best)
}

/// The Hopf-Lax value at one point by dense grid search over the initial
/// position.
///
/// Exercises the minimization layer only: the action itself comes from
/// the closed form (which [`brute_force_d0`] validates separately). The
/// grid covers `[0, radius]` on every branch plus the vertex and the
/// target point itself.
pub fn brute_force_solve(
    jn: &Junction,
    u0: &InitialDatum,
    t: f64,
    x: Point,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.check()?;
    jn.check_point(x)?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let x_scaled = x.div_coord(t);
    let phi = |y: Point| -> Result<f64> {
        Ok(u0.eval(y) + t * d0(jn, y.div_coord(t), x_scaled)?.value)
    };
    let mut best = phi(Point::junction())?.min(phi(x)?);
    for b in jn.branch_ids() {
        for c in linspace(0.0, cfg.radius, cfg.n_y) {
            best = best.min(phi(Point::on_branch(b, c)?)?);
        }
    }
    Ok(best)
}

/// Lax-Oleinik value on the whole real line:
///
/// ```text
/// u(t, X) = min_Y { u0(Y) + t lambda((X - Y) / t) },
/// ```
///
/// by dense grid search over `[X - radius, X + radius]`, with `Y = 0` and
/// `Y = X` always included. The comparison against a two-branch junction
/// with matching costs is what ties the vertex condition back to a plain
/// conservation law.
pub fn line_lax_oleinik(
    lambda: &Lagrangian,
    u0: impl Fn(f64) -> f64,
    t: f64,
    x: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.check()?;
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("position must be finite, got {x}")));
    }
    let phi = |y: f64| u0(y) + t * lambda.eval((x - y) / t);
    let mut best = phi(0.0).min(phi(x));
    for y in linspace(x - cfg.radius, x + cfg.radius, cfg.n_y) {
        best = best.min(phi(y));
    }
    Ok(best)
}
