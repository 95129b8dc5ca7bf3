//! Adaptive Simpson quadrature for the one-dimensional limit integrals.

/// Simpson estimate on `[a, b]`.
#[inline]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adapt(f, a, fa, m, fm, left, lm, flm, 0.5 * eps, depth - 1)
            + adapt(f, m, fm, b, fb, right, rm, frm, 0.5 * eps, depth - 1)
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute accuracy
/// about `eps`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    adapt(&f, a, fa, b, fb, whole, m, fm, eps, 40)
}

/// Integration over `[a, b]` split into geometrically growing segments; the
/// Pareto-weighted integrands concentrate near the left endpoint, and the
/// pre-split keeps the adaptive recursion shallow on wide domains.
pub fn integrate_geometric<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut lo = a;
    let mut seg = 0;
    while lo < b {
        let hi = (lo * 2.0).min(b).max(lo + 1e-12);
        acc += integrate(&f, lo, hi, eps * 0.5f64.powi(seg.min(30)));
        lo = hi;
        seg += 1;
        if seg > 4000 {
            break;
        }
    }
    acc
}
