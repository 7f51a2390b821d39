//! Scenario files: the JSON schema and its conversion into solver types.
//!
//! A scenario holds exactly one of `branches` (explicit quadratic costs)
//! or `traffic` (roads that are transformed into costs), an optional
//! `initial` datum, and an optional `grid`:
//!
//! ```json
//! {
//!   "traffic": {
//!     "incoming": [{"vmax": 1.0, "rhomax": 1.0, "gamma": 1.0}],
//!     "outgoing": [{"vmax": 1.0, "rhomax": 1.0, "gamma": 1.0}]
//!   },
//!   "initial": {"type": "riemann", "densities": [0.3, 0.9]},
//!   "grid": {"t": [0.2, 1.0, 5], "x_per_branch": [2.0, 50]}
//! }
//! ```

use std::fs;
use std::path::Path;

use junction_hj::{
    riemann_u0, traffic_junction, Flux, GridSpec, InitialDatum, Junction, Lagrangian, Road,
    RoadDirection, TrafficScenario,
};
use serde::Deserialize;

use crate::{classify, Failure};

/// Time rows used when the scenario has no `grid` section.
const DEFAULT_T: (f64, f64, usize) = (0.2, 1.0, 5);
/// Branch extent and node count used when the scenario has no `grid`.
const DEFAULT_X: (f64, usize) = (2.0, 50);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    branches: Option<Vec<BranchSpec>>,
    #[serde(default)]
    traffic: Option<TrafficSpec>,
    #[serde(default)]
    initial: Option<InitialSpec>,
    #[serde(default)]
    grid: Option<GridSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchSpec {
    lagrangian: LagrangianSpec,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum LagrangianSpec {
    /// `a (q - b)^2 + c` with `a > 0`.
    Quadratic { a: f64, b: f64, c: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficSpec {
    incoming: Vec<RoadSpec>,
    outgoing: Vec<RoadSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadSpec {
    vmax: f64,
    rhomax: f64,
    gamma: f64,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum InitialSpec {
    Zero,
    LinearPerBranch { slopes: Vec<f64> },
    Riemann { densities: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    /// `[t0, t1, nt]`.
    t: (f64, f64, usize),
    /// `[xmax, nx]`, shared by every branch.
    x_per_branch: (f64, usize),
}

/// A scenario converted into solver types.
pub(crate) struct Loaded {
    pub junction: Junction,
    pub traffic: Option<TrafficScenario>,
    pub initial: InitialDatum,
    pub grid: GridSpec,
}

/// Reads and validates a scenario file.
pub(crate) fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Failure::scenario(format!("invalid scenario JSON: {e}")))?;
    build(file)
}

fn build(file: ScenarioFile) -> Result<Loaded, Failure> {
    let (junction, traffic) = match (file.branches, file.traffic) {
        (Some(branches), None) => {
            let costs = branches
                .into_iter()
                .map(|b| match b.lagrangian {
                    LagrangianSpec::Quadratic { a, b, c } => Lagrangian::quadratic(a, b, c),
                })
                .collect::<junction_hj::Result<Vec<_>>>()
                .map_err(classify)?;
            (Junction::build(costs).map_err(classify)?, None)
        }
        (None, Some(spec)) => {
            let mut roads = Vec::new();
            for (direction, list) in [
                (RoadDirection::Incoming, &spec.incoming),
                (RoadDirection::Outgoing, &spec.outgoing),
            ] {
                for r in list {
                    let flux = Flux::lwr(r.vmax, r.rhomax).map_err(classify)?;
                    roads.push(Road::new(direction, r.gamma, flux).map_err(classify)?);
                }
            }
            let sc = TrafficScenario::new(roads).map_err(classify)?;
            (traffic_junction(&sc).map_err(classify)?, Some(sc))
        }
        (Some(_), Some(_)) => {
            return Err(Failure::scenario(
                "scenario must contain exactly one of \"branches\" or \"traffic\", found both",
            ))
        }
        (None, None) => {
            return Err(Failure::scenario(
                "scenario must contain exactly one of \"branches\" or \"traffic\", found neither",
            ))
        }
    };

    let initial = match file.initial {
        None | Some(InitialSpec::Zero) => InitialDatum::zero(),
        Some(InitialSpec::LinearPerBranch { slopes }) => {
            if slopes.len() != junction.num_branches() {
                return Err(Failure::scenario(format!(
                    "\"linear_per_branch\" needs one slope per branch: got {} for {} branches",
                    slopes.len(),
                    junction.num_branches()
                )));
            }
            InitialDatum::linear_per_branch(slopes).map_err(classify)?
        }
        Some(InitialSpec::Riemann { densities }) => {
            let sc = traffic.as_ref().ok_or_else(|| {
                Failure::scenario(
                    "a \"riemann\" initial datum needs a \"traffic\" scenario \
                     (densities are per road)",
                )
            })?;
            riemann_u0(sc, &densities).map_err(classify)?
        }
    };

    let grid = match file.grid {
        Some(g) => {
            let (t0, t1, nt) = g.t;
            let (xmax, nx) = g.x_per_branch;
            if nt < 2 || nx < 2 {
                return Err(Failure::scenario(format!(
                    "grid counts must be at least 2, got nt = {nt}, nx = {nx}"
                )));
            }
            GridSpec::uniform_times(t0, t1, nt, xmax, nx).map_err(classify)?
        }
        None => {
            let (t0, t1, nt) = DEFAULT_T;
            let (xmax, nx) = DEFAULT_X;
            GridSpec::uniform_times(t0, t1, nt, xmax, nx).map_err(classify)?
        }
    };

    Ok(Loaded { junction, traffic, initial, grid })
}
