//! Safeguarded scalar root finding and line minimization.
//!
//! Everything here assumes very well-behaved inputs (strictly monotone or
//! locally unimodal functions produced by strongly convex Lagrangians), so
//! the emphasis is on never leaving the bracket rather than on exotic
//! convergence acceleration: Newton steps are taken when they stay inside
//! the current bracket and fall back to bisection otherwise.

const MAX_ITER: usize = 200;

/// Root of a strictly increasing function on a bracket `[lo, hi]`.
///
/// Requires `f(lo) <= 0 <= f(hi)`. When `df` is given, Newton steps from
/// the latest evaluation are used whenever they land strictly inside the
/// bracket; every rejected or absent step bisects instead, so the bracket
/// shrinks regardless of how flat `f` is. Terminates when `|f| <= f_tol`
/// (pass `0.0` to disable) or the bracket is narrower than `x_tol`.
pub(crate) fn increasing_root(
    f: impl Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    lo: f64,
    hi: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<f64, String> {
    debug_assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo.abs() <= f_tol || flo == 0.0 {
        return Ok(lo);
    }
    if fhi.abs() <= f_tol || fhi == 0.0 {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 || flo.is_nan() || fhi.is_nan() {
        return Err(format!(
            "bracket [{lo}, {hi}] does not straddle a root (f: {flo} .. {fhi})"
        ));
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let fx = f(x);
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= x_tol {
            return Ok(0.5 * (lo + hi));
        }
        let newton = df.and_then(|df| {
            let d = df(x);
            if !d.is_finite() || d <= 0.0 {
                return None;
            }
            let step = x - fx / d;
            (step > lo && step < hi).then_some(step)
        });
        x = newton.unwrap_or(0.5 * (lo + hi));
    }
    Err(format!(
        "no convergence in {MAX_ITER} iterations (bracket [{lo}, {hi}])"
    ))
}

/// Expands an initial guess geometrically until `f` changes sign.
///
/// Returns a bracket `[lo, hi]` with `f(lo) <= 0 <= f(hi)` for a strictly
/// increasing `f`, starting from `[0, seed]` or `[-seed, 0]` depending on
/// where the sign change lies. `f(0)` decides the side.
pub(crate) fn expanding_bracket(
    f: impl Fn(f64) -> f64,
    seed: f64,
) -> Result<(f64, f64), String> {
    debug_assert!(seed > 0.0);
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sign = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut edge = sign * seed;
    for _ in 0..MAX_ITER {
        let fe = f(edge);
        if !fe.is_finite() {
            return Err(format!("non-finite value at {edge} while bracketing"));
        }
        if fe == 0.0 {
            return Ok((edge, edge));
        }
        if (fe > 0.0) != (f0 > 0.0) {
            return Ok(if sign > 0.0 { (0.0, edge) } else { (edge, 0.0) });
        }
        edge *= 2.0;
    }
    Err("no sign change within the expansion range".into())
}

/// Golden-section minimization on `[a, b]`, returning the best point seen.
///
/// The function need not be exactly unimodal on the bracket; the best
/// evaluated pair is tracked throughout, so the result is never worse than
/// the better of the two interior probes.
pub(crate) fn golden_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..MAX_ITER {
        if b - a <= x_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}
