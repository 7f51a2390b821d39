//! Traffic junctions: concave flux laws per road, the induced
//! Hamilton-Jacobi junction, and density recovery.
//!
//! A junction of `m` incoming and `n` outgoing roads carrying densities
//! `rho` under conservation laws `rho_t + (f(rho))_X = 0` maps to a
//! Hamilton-Jacobi problem for cumulative vehicle counts. Each road sees
//! a fraction `gamma` of the vehicles through the vertex, and its flux
//! turns into a branch Hamiltonian
//!
//! ```text
//! incoming:  H(p) = -f(gamma p) / gamma,
//! outgoing:  H(p) = -f(-gamma p) / gamma,
//! ```
//!
//! whose convex conjugate is the branch cost. For the quadratic
//! ([`Flux::lwr`]) law this conjugation is closed-form; arbitrary
//! strictly concave laws are conjugated numerically. The vertex
//! condition of the junction problem then reproduces the classical
//! demand/supply coupling: the flux through the vertex is the least
//! normalized demand or supply, and the time derivative of the value
//! function at the vertex equals that flux.

use std::sync::Arc;

use crate::hopf_lax::{GridSolution, InitialDatum};
use crate::junction::Junction;
use crate::{Error, Lagrangian, Result};

/// Orientation of a road relative to the vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoadDirection {
    /// Traffic flows toward the vertex.
    Incoming,
    /// Traffic flows away from the vertex.
    Outgoing,
}

#[derive(Clone)]
enum FluxRepr {
    Lwr { vmax: f64, rhomax: f64 },
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, rho_c: f64, rhomax: f64, curv_max: f64 },
}

/// A concave flux law `f(rho)` on `[0, rhomax]` with `f(0) = f(rhomax) = 0`
/// and a single maximum at the critical density.
#[derive(Clone)]
pub struct Flux {
    repr: FluxRepr,
}

/// Probe resolution for validating and calibrating custom flux laws.
const FLUX_PROBES: usize = 129;

impl Flux {
    /// The quadratic law `f(rho) = rho vmax (1 - rho / rhomax)`.
    pub fn lwr(vmax: f64, rhomax: f64) -> Result<Self> {
        if !vmax.is_finite() || vmax <= 0.0 {
            return Err(Error::Invalid(format!("vmax must be positive, got {vmax}")));
        }
        if !rhomax.is_finite() || rhomax <= 0.0 {
            return Err(Error::Invalid(format!("rhomax must be positive, got {rhomax}")));
        }
        Ok(Self { repr: FluxRepr::Lwr { vmax, rhomax } })
    }

    /// An arbitrary strictly concave law with declared critical density.
    ///
    /// The law is probed on a grid: it must be finite, vanish at both
    /// ends, peak at `rho_c`, and be strictly concave (the junction
    /// theory needs uniformly convex costs, which is exactly strict
    /// concavity of the flux).
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rho_c: f64,
        rhomax: f64,
    ) -> Result<Self> {
        if !rhomax.is_finite() || rhomax <= 0.0 {
            return Err(Error::Invalid(format!("rhomax must be positive, got {rhomax}")));
        }
        if !rho_c.is_finite() || rho_c <= 0.0 || rho_c >= rhomax {
            return Err(Error::Invalid(format!(
                "critical density must lie strictly inside (0, {rhomax}), got {rho_c}"
            )));
        }
        let h = rhomax / (FLUX_PROBES - 1) as f64;
        let probes: Vec<f64> = (0..FLUX_PROBES).map(|k| f(h * k as f64)).collect();
        if probes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("flux must be finite on [0, rhomax]".into()));
        }
        if probes[0].abs() > 1e-9 || probes[FLUX_PROBES - 1].abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "flux must vanish at empty and jammed density, got f(0) = {} and f(rhomax) = {}",
                probes[0],
                probes[FLUX_PROBES - 1]
            )));
        }
        let scale = probes.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut curv_min = f64::INFINITY;
        let mut curv_max = f64::NEG_INFINITY;
        for k in 1..FLUX_PROBES - 1 {
            let second = (probes[k + 1] - 2.0 * probes[k] + probes[k - 1]) / (h * h);
            curv_min = curv_min.min(-second);
            curv_max = curv_max.max(-second);
        }
        if curv_min <= 1e-9 * scale {
            return Err(Error::Invalid(
                "flux must be strictly concave on [0, rhomax]".into(),
            ));
        }
        let fc = f(rho_c);
        if fc < f(rho_c - h) || fc < f(rho_c + h) {
            return Err(Error::Invalid(format!(
                "flux does not peak at the declared critical density {rho_c}"
            )));
        }
        Ok(Self { repr: FluxRepr::Custom { f: Arc::new(f), rho_c, rhomax, curv_max } })
    }

    /// Evaluates the flux; the density is clamped to `[0, rhomax]`.
    pub fn eval(&self, rho: f64) -> f64 {
        let rho = rho.clamp(0.0, self.rhomax());
        match &self.repr {
            FluxRepr::Lwr { vmax, rhomax } => rho * vmax * (1.0 - rho / rhomax),
            FluxRepr::Custom { f, .. } => f(rho),
        }
    }

    /// The density at which the flux peaks.
    pub fn rho_critical(&self) -> f64 {
        match &self.repr {
            FluxRepr::Lwr { rhomax, .. } => rhomax / 2.0,
            FluxRepr::Custom { rho_c, .. } => *rho_c,
        }
    }

    /// The jam density.
    pub fn rhomax(&self) -> f64 {
        match &self.repr {
            FluxRepr::Lwr { rhomax, .. } | FluxRepr::Custom { rhomax, .. } => *rhomax,
        }
    }

    /// The flux at the critical density (road capacity).
    pub fn max_flux(&self) -> f64 {
        self.eval(self.rho_critical())
    }

    /// `(vmax, rhomax)` when this is the quadratic law.
    pub(crate) fn lwr_params(&self) -> Option<(f64, f64)> {
        match &self.repr {
            FluxRepr::Lwr { vmax, rhomax } => Some((*vmax, *rhomax)),
            FluxRepr::Custom { .. } => None,
        }
    }
}

impl std::fmt::Debug for Flux {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.repr {
            FluxRepr::Lwr { vmax, rhomax } => {
                write!(f, "Flux::lwr(vmax = {vmax}, rhomax = {rhomax})")
            }
            FluxRepr::Custom { rho_c, rhomax, .. } => {
                write!(f, "Flux::custom(rho_c = {rho_c}, rhomax = {rhomax})")
            }
        }
    }
}

/// One road of a traffic junction.
#[derive(Clone, Debug)]
pub struct Road {
    direction: RoadDirection,
    gamma: f64,
    flux: Flux,
}

impl Road {
    /// A road with its direction, vehicle fraction `gamma` in `(0, 1]`,
    /// and flux law.
    pub fn new(direction: RoadDirection, gamma: f64, flux: Flux) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 || gamma > 1.0 {
            return Err(Error::Invalid(format!(
                "road fraction must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(Self { direction, gamma, flux })
    }

    /// The road's orientation.
    pub fn direction(&self) -> RoadDirection {
        self.direction
    }

    /// The fraction of vertex flow carried by this road.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The road's flux law.
    pub fn flux(&self) -> &Flux {
        &self.flux
    }
}

/// A junction of incoming and outgoing roads, with optional initial
/// densities for Riemann problems.
#[derive(Clone, Debug)]
pub struct TrafficScenario {
    roads: Vec<Road>,
    densities: Option<Vec<f64>>,
}

impl TrafficScenario {
    /// Builds a scenario from roads listed incoming-first.
    ///
    /// There must be at least one road in each direction, all incoming
    /// roads must precede all outgoing ones, and the fractions must sum
    /// to one on each side (within `1e-12`) so that vehicles are
    /// conserved through the vertex.
    pub fn new(roads: Vec<Road>) -> Result<Self> {
        let m = roads
            .iter()
            .take_while(|r| r.direction == RoadDirection::Incoming)
            .count();
        if m == 0 || m == roads.len() {
            return Err(Error::BadScenario(
                "need at least one incoming and one outgoing road".into(),
            ));
        }
        if roads[m..].iter().any(|r| r.direction == RoadDirection::Incoming) {
            return Err(Error::BadScenario(
                "incoming roads must be listed before outgoing roads".into(),
            ));
        }
        for (side, label) in [(&roads[..m], "incoming"), (&roads[m..], "outgoing")] {
            let total: f64 = side.iter().map(|r| r.gamma).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::BadScenario(format!(
                    "{label} fractions must sum to 1, got {total}"
                )));
            }
        }
        Ok(Self { roads, densities: None })
    }

    /// Attaches initial densities, one per road in road order.
    pub fn with_densities(mut self, densities: Vec<f64>) -> Result<Self> {
        self.check_densities(&densities)?;
        self.densities = Some(densities);
        Ok(self)
    }

    pub(crate) fn check_densities(&self, densities: &[f64]) -> Result<()> {
        if densities.len() != self.roads.len() {
            return Err(Error::BadScenario(format!(
                "need one density per road ({}), got {}",
                self.roads.len(),
                densities.len()
            )));
        }
        for (k, (rho, road)) in densities.iter().zip(&self.roads).enumerate() {
            if !rho.is_finite() || *rho < 0.0 || *rho > road.flux.rhomax() {
                return Err(Error::BadScenario(format!(
                    "density {rho} on road {} outside [0, {}]",
                    k + 1,
                    road.flux.rhomax()
                )));
            }
        }
        Ok(())
    }

    /// The roads, incoming first.
    pub fn roads(&self) -> &[Road] {
        &self.roads
    }

    /// Number of incoming roads.
    pub fn num_incoming(&self) -> usize {
        self.roads
            .iter()
            .filter(|r| r.direction == RoadDirection::Incoming)
            .count()
    }

    /// Number of outgoing roads.
    pub fn num_outgoing(&self) -> usize {
        self.roads.len() - self.num_incoming()
    }

    /// The attached initial densities, if any.
    pub fn densities(&self) -> Option<&[f64]> {
        self.densities.as_deref()
    }
}

/// The branch cost induced by one road.
fn road_lagrangian(road: &Road) -> Result<Lagrangian> {
    let gamma = road.gamma;
    let sign = match road.direction {
        RoadDirection::Incoming => 1.0,
        RoadDirection::Outgoing => -1.0,
    };
    match &road.flux.repr {
        // The conjugate of H(p) = -f(sign gamma p) / gamma for the
        // quadratic law is itself quadratic, with vertex at the free-flow
        // speed (signed toward the vertex).
        FluxRepr::Lwr { vmax, rhomax } => Lagrangian::quadratic(
            rhomax / (4.0 * vmax * gamma),
            -sign * vmax,
            0.0,
        ),
        FluxRepr::Custom { f, rhomax, curv_max, .. } => {
            custom_road_lagrangian(f.clone(), *rhomax, *curv_max, gamma, sign)
        }
    }
}

/// Numerical conjugation for custom flux laws.
///
/// The flux is extended beyond `[0, rhomax]` by quadratics with the
/// largest probed curvature, making its derivative globally decreasing
/// with full range; the conjugate is then evaluated by solving the
/// first-order condition for each velocity. The extension only shapes
/// the cost at speeds never attained inside the density range, but the
/// cost is approximate to the extent the probed curvature is.
fn custom_road_lagrangian(
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    rhomax: f64,
    curv_max: f64,
    gamma: f64,
    sign: f64,
) -> Result<Lagrangian> {
    let h0 = 1e-6 * (1.0 + rhomax);
    // Secant slope over a window clamped to the domain: continuous and
    // nonincreasing in rho because f is concave.
    let fd = {
        let f = f.clone();
        move |rho: f64| -> f64 {
            let a = (rho - h0).max(0.0);
            let b = (rho + h0).min(rhomax);
            (f(b) - f(a)) / (b - a)
        }
    };
    // One-sided three-point estimates at the endpoints: the clamped secant
    // equals the derivative half a window inside, which would shift the
    // extensions by O(h0); these are second-order at the boundary itself.
    let d_at_0 = (-3.0 * f(0.0) + 4.0 * f(h0) - f(2.0 * h0)) / (2.0 * h0);
    let d_at_max =
        (3.0 * f(rhomax) - 4.0 * f(rhomax - h0) + f(rhomax - 2.0 * h0)) / (2.0 * h0);
    let f_at_0 = f(0.0);
    let f_at_max = f(rhomax);

    let f_ext = {
        let f = f.clone();
        move |rho: f64| -> f64 {
            if rho < 0.0 {
                f_at_0 + d_at_0 * rho - 0.5 * curv_max * rho * rho
            } else if rho > rhomax {
                let s = rho - rhomax;
                f_at_max + d_at_max * s - 0.5 * curv_max * s * s
            } else {
                f(rho)
            }
        }
    };
    let fd_ext = move |rho: f64| -> f64 {
        if rho < 0.0 {
            d_at_0 - curv_max * rho
        } else if rho > rhomax {
            d_at_max - curv_max * (rho - rhomax)
        } else {
            fd(rho)
        }
    };

    // First-order condition: the maximizing slope p of q p - H(p)
    // satisfies -sign * f'(sign gamma p) = q; solve for the density
    // sign gamma p, where the negated derivative is increasing.
    let seed = rhomax.max(1.0);
    let solve_density = move |q: f64| -> Result<f64> {
        let g = |rho: f64| -fd_ext(rho) - sign * q;
        let (lo, hi) = crate::roots::expanding_bracket(&g, seed)
            .map_err(Error::NoConvergence)?;
        crate::roots::increasing_root(&g, None, lo, hi, 1e-12, 1e-12)
            .map_err(Error::NoConvergence)
    };

    let eval = {
        let solve = solve_density.clone();
        let f_ext = f_ext.clone();
        move |q: f64| -> f64 {
            let rho = solve(q).expect("flux derivative spans all slopes by construction");
            q * sign * rho / gamma + f_ext(rho) / gamma
        }
    };
    let deriv = move |q: f64| -> f64 {
        let rho = solve_density(q).expect("flux derivative spans all slopes by construction");
        sign * rho / gamma
    };
    // The cost's curvature is 1 / (gamma * |f''|), at least its value at
    // the most curved probe; 0.9 covers the probing error.
    let convexity = 0.9 / (gamma * curv_max);
    Lagrangian::custom(eval, deriv, convexity)
}

/// Builds the Hamilton-Jacobi junction for a traffic scenario, one
/// branch per road in road order.
pub fn traffic_junction(sc: &TrafficScenario) -> Result<Junction> {
    Junction::build(
        sc.roads
            .iter()
            .map(road_lagrangian)
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Demand and supply of a road at a given density:
///
/// the demand is the flux the road can send (`f` below the critical
/// density, capacity above), the supply is what it can absorb (capacity
/// below, `f` above).
pub fn demand_supply(road: &Road, rho: f64) -> Result<(f64, f64)> {
    let rhomax = road.flux.rhomax();
    if !rho.is_finite() || rho < 0.0 || rho > rhomax {
        return Err(Error::Domain(format!(
            "density must lie in [0, {rhomax}], got {rho}"
        )));
    }
    let cap = road.flux.max_flux();
    let value = road.flux.eval(rho);
    if rho <= road.flux.rho_critical() {
        Ok((value, cap))
    } else {
        Ok((cap, value))
    }
}

/// The flux through the vertex for given road densities, by the
/// demand/supply rule: the least normalized demand among incoming roads
/// and normalized supply among outgoing ones.
pub fn junction_flux(sc: &TrafficScenario, densities: &[f64]) -> Result<f64> {
    sc.check_densities(densities)?;
    let mut least = f64::INFINITY;
    for (road, &rho) in sc.roads.iter().zip(densities) {
        let (demand, supply) = demand_supply(road, rho)?;
        let normalized = match road.direction {
            RoadDirection::Incoming => demand / road.gamma,
            RoadDirection::Outgoing => supply / road.gamma,
        };
        least = least.min(normalized);
    }
    Ok(least)
}

/// The initial vehicle-count datum whose junction solution is the
/// Riemann problem with the given constant road densities.
///
/// Counts grow by `rho / gamma` per unit length against the flow: the
/// slope is `+rho / gamma` on incoming branches and `-rho / gamma` on
/// outgoing ones.
pub fn riemann_u0(sc: &TrafficScenario, densities: &[f64]) -> Result<InitialDatum> {
    sc.check_densities(densities)?;
    InitialDatum::linear_per_branch(
        sc.roads
            .iter()
            .zip(densities)
            .map(|(road, &rho)| match road.direction {
                RoadDirection::Incoming => rho / road.gamma,
                RoadDirection::Outgoing => -rho / road.gamma,
            })
            .collect(),
    )
}

/// Densities recovered from a solved vehicle-count table.
#[derive(Clone, Debug)]
pub struct DensityField {
    times: Vec<f64>,
    coords: Vec<Vec<f64>>,
    values: Vec<Vec<Vec<f64>>>,
    clamped: usize,
    max_overshoot: f64,
}

impl DensityField {
    /// The time rows.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Signed physical coordinates of one road, ascending: negative on
    /// incoming roads, positive on outgoing ones.
    pub fn road_coords(&self, road: usize) -> &[f64] {
        &self.coords[road]
    }

    /// Density at time row `t_idx`, road `road` (scenario order), node `k`.
    pub fn value(&self, t_idx: usize, road: usize, k: usize) -> f64 {
        self.values[t_idx][road][k]
    }

    /// Number of nodes clamped into `[0, rhomax]`.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// Largest distance outside `[0, rhomax]` before clamping.
    pub fn max_overshoot(&self) -> f64 {
        self.max_overshoot
    }
}

/// Recovers road densities from a solved vehicle-count table by finite
/// differences.
///
/// The count gradient along a branch is `rho / gamma` toward the vertex,
/// so `rho = gamma u_x` on incoming roads and `rho = -gamma u_x` on
/// outgoing ones. Differences are centered (the vertex value serves as
/// the left neighbor of the first node; the last node is one-sided), and
/// results are clamped to `[0, rhomax]` with the clamping reported.
pub fn density_field(sc: &TrafficScenario, sol: &GridSolution) -> Result<DensityField> {
    if sol.junction().num_branches() != sc.roads.len() {
        return Err(Error::BadScenario(format!(
            "table has {} branches but the scenario has {} roads",
            sol.junction().num_branches(),
            sc.roads.len()
        )));
    }
    let mut clamped = 0usize;
    let mut max_overshoot = 0.0f64;
    let mut coords = Vec::with_capacity(sc.roads.len());
    let mut values = vec![Vec::with_capacity(sc.roads.len()); sol.times().len()];
    for (idx, road) in sc.roads.iter().enumerate() {
        let b = crate::junction::BranchId::new(idx + 1);
        let xs = sol.branch_coords(b);
        let n = xs.len();
        let orientation = match road.direction {
            RoadDirection::Incoming => -1.0,
            RoadDirection::Outgoing => 1.0,
        };
        // Signed coordinates, ascending; incoming roads reverse.
        let signed: Vec<f64> = if orientation < 0.0 {
            xs.iter().rev().map(|&c| -c).collect()
        } else {
            xs.to_vec()
        };
        coords.push(signed);
        let rhomax = road.flux.rhomax();
        for (r, row) in values.iter_mut().enumerate() {
            let u = |k: isize| -> f64 {
                if k < 0 {
                    sol.vertex_value(r)
                } else {
                    sol.value(r, b, k as usize)
                }
            };
            let x = |k: isize| -> f64 {
                if k < 0 {
                    0.0
                } else {
                    xs[k as usize]
                }
            };
            let mut rho: Vec<f64> = (0..n as isize)
                .map(|k| {
                    let (lo, hi) = if k + 1 < n as isize { (k - 1, k + 1) } else { (k - 1, k) };
                    let slope = (u(hi) - u(lo)) / (x(hi) - x(lo));
                    // rho = gamma u_x incoming, -gamma u_x outgoing.
                    let value = -orientation * road.gamma * slope;
                    if value < 0.0 || value > rhomax {
                        clamped += 1;
                        max_overshoot =
                            max_overshoot.max((-value).max(value - rhomax).max(0.0));
                    }
                    value.clamp(0.0, rhomax)
                })
                .collect();
            if orientation < 0.0 {
                rho.reverse();
            }
            row.push(rho);
        }
    }
    Ok(DensityField {
        times: sol.times().to_vec(),
        coords,
        values,
        clamped,
        max_overshoot,
    })
}

/// The vertex flux trace of a solved table: the time derivative of the
/// vertex value, by centered differences on interior rows and one-sided
/// differences at the ends. For a traffic scenario this is the flow
/// through the junction.
pub fn flux_trace(sol: &GridSolution) -> Result<Vec<(f64, f64)>> {
    let nt = sol.times().len();
    if nt < 2 {
        return Err(Error::BadGrid("flux trace needs at least 2 time rows".into()));
    }
    let t = sol.times();
    let v = |r: usize| sol.vertex_value(r);
    Ok((0..nt)
        .map(|r| {
            let (lo, hi) = if r == 0 {
                (0, 1)
            } else if r + 1 == nt {
                (nt - 2, nt - 1)
            } else {
                (r - 1, r + 1)
            };
            (t[r], (v(hi) - v(lo)) / (t[hi] - t[lo]))
        })
        .collect())
}
