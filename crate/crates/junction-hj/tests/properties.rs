//! Property tests for structural invariants that must hold for *every*
//! admissible junction, not just the fixtures: the quadratic growth
//! floor, minimality of the regime dispatch, the dynamic-programming
//! triangle inequality under time splits, monotonicity of the
//! nonincreasing Hamiltonian envelope, decay of the dwell cost away
//! from the origin, and monotonicity of road demand and supply.

use junction_hj::{
    action, d0, d_junction, d_straight, demand_supply, BranchId, Flux, Junction, Lagrangian,
    Point, Road, RoadDirection,
};
use proptest::prelude::*;

fn lagrangian_params() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..2.0, -2.0f64..2.0, -1.0f64..2.0)
}

fn junction_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    proptest::collection::vec(lagrangian_params(), 1..=4)
}

fn build(params: &[(f64, f64, f64)]) -> Junction {
    Junction::build(
        params.iter().map(|&(a, b, c)| Lagrangian::quadratic(a, b, c).unwrap()).collect(),
    )
    .unwrap()
}

/// Map an unconstrained selector to a point: 0 mod (n+1) is the vertex,
/// the rest pick a branch.
fn pick(jn: &Junction, sel: usize, coord: f64) -> Point {
    let n = jn.num_branches();
    match sel % (n + 1) {
        0 => Point::junction(),
        b => jn.point(b, coord).unwrap(),
    }
}

proptest! {
    /// The action never falls below its quadratic growth floor.
    #[test]
    fn growth_floor(
        params in junction_params(),
        ys in 0usize..100, yc in 0.0f64..3.0,
        xs in 0usize..100, xc in 0.0f64..3.0,
    ) {
        let jn = build(&params);
        let y = pick(&jn, ys, yc);
        let x = pick(&jn, xs, xc);
        let d = jn.distance(y, x);
        let v = d0(&jn, y, x).unwrap().value;
        prop_assert!(
            v >= 0.25 * jn.gamma() * d * d - jn.c0() - 1e-12,
            "value {v} under floor {}", 0.25 * jn.gamma() * d * d - jn.c0()
        );
    }

    /// The dispatched value is the minimum of its descriptions: never
    /// above the straight path nor the vertex-crossing path.
    #[test]
    fn dispatch_is_a_minimum(
        params in junction_params(),
        ys in 0usize..100, yc in 0.0f64..3.0,
        xs in 0usize..100, xc in 0.0f64..3.0,
    ) {
        let jn = build(&params);
        let y = pick(&jn, ys, yc);
        let x = pick(&jn, xs, xc);
        let v = d0(&jn, y, x).unwrap().value;
        let straight = d_straight(&jn, y, x);
        let crossing = d_junction(&jn, y, x).unwrap().value;
        prop_assert!(v <= straight + 1e-12, "value {v} above straight {straight}");
        prop_assert!(v <= crossing + 1e-12, "value {v} above crossing {crossing}");
        prop_assert!(v >= straight.min(crossing) - 1e-12);
    }

    /// Dynamic programming: going through any intermediate point at an
    /// intermediate time never improves on the direct action.
    #[test]
    fn time_split_triangle_inequality(
        params in junction_params(),
        ys in 0usize..100, yc in 0.0f64..2.5,
        zs in 0usize..100, zc in 0.0f64..2.5,
        xs in 0usize..100, xc in 0.0f64..2.5,
        s0 in 0.0f64..1.0, frac in 0.1f64..0.9, dt in 0.2f64..2.0,
    ) {
        let jn = build(&params);
        let y = pick(&jn, ys, yc);
        let z = pick(&jn, zs, zc);
        let x = pick(&jn, xs, xc);
        let t1 = s0 + frac * dt;
        let t2 = s0 + dt;
        let direct = action(&jn, s0, y, t2, x).unwrap().value;
        let via = action(&jn, s0, y, t1, z).unwrap().value
            + action(&jn, t1, z, t2, x).unwrap().value;
        prop_assert!(direct <= via + 1e-9, "direct {direct} above split {via}");
    }

    /// The nonincreasing envelope of a Hamiltonian is nonincreasing and
    /// never above the Hamiltonian itself.
    #[test]
    fn envelope_is_monotone_and_below(
        (a, b, c) in lagrangian_params(),
        p_lo in -4.0f64..4.0, gap in 0.0f64..4.0,
    ) {
        let lag = Lagrangian::quadratic(a, b, c).unwrap();
        let p_hi = p_lo + gap;
        let lo = lag.h_minus(p_lo).unwrap();
        let hi = lag.h_minus(p_hi).unwrap();
        prop_assert!(lo >= hi - 1e-12, "envelope rose from {lo} to {hi}");
        prop_assert!(lo <= lag.hamiltonian(p_lo).unwrap() + 1e-12);
    }

    /// The dwell cost peaks at the origin and decays outward on each
    /// side, on every branch of every junction.
    #[test]
    fn dwell_cost_decays_outward(
        params in junction_params(),
        bsel in 0usize..100,
        near in 0.0f64..3.0, gap in 0.0f64..3.0, side in proptest::bool::ANY,
    ) {
        let jn = build(&params);
        let b = BranchId::new(bsel % jn.num_branches() + 1);
        let sign = if side { 1.0 } else { -1.0 };
        let xi_near = sign * near;
        let xi_far = sign * (near + gap);
        let k_near = jn.k_eval(b, xi_near).unwrap();
        let k_far = jn.k_eval(b, xi_far).unwrap();
        prop_assert!(k_near >= k_far - 1e-12, "dwell cost rose outward: {k_near} -> {k_far}");
        prop_assert!(jn.k_eval(b, 0.0).unwrap() >= k_near - 1e-12);
    }

    /// Demand never falls and supply never rises as density grows; the
    /// junction passes a flux no larger than either and not negative.
    #[test]
    fn demand_supply_monotone(
        vmax in 0.3f64..2.0, rhomax in 0.3f64..2.0,
        r_lo in 0.0f64..1.0, bump in 0.0f64..1.0,
    ) {
        let road =
            Road::new(RoadDirection::Incoming, 1.0, Flux::lwr(vmax, rhomax).unwrap()).unwrap();
        let rho_lo = r_lo * rhomax;
        let rho_hi = (r_lo + bump).min(1.0) * rhomax;
        let (d_lo, s_lo) = demand_supply(&road, rho_lo).unwrap();
        let (d_hi, s_hi) = demand_supply(&road, rho_hi).unwrap();
        prop_assert!(d_lo <= d_hi + 1e-12, "demand fell: {d_lo} -> {d_hi}");
        prop_assert!(s_lo >= s_hi - 1e-12, "supply rose: {s_lo} -> {s_hi}");
        let cap = road.flux().max_flux();
        prop_assert!(d_lo >= -1e-15 && d_lo <= cap + 1e-12);
        prop_assert!(s_lo >= -1e-15 && s_lo <= cap + 1e-12);
    }
}
