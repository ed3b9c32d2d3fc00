//! Numerical integration used throughout the crate.
//!
//! Two flavours are provided: an adaptive Simpson rule for smooth integrands
//! given as closures, and fixed composite rules for values already sampled on
//! a uniform grid.

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The tolerance is relative to the magnitude of a coarse first estimate; an
/// absolute floor of `1e-300` prevents endless refinement of zero integrands.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // Seed with four panels so that a symmetric integrand cannot fool the
    // first error estimate.
    let n = 4;
    let h = (hi - lo) / n as f64;
    let mut coarse = 0.0;
    let mut panels = Vec::with_capacity(n);
    for k in 0..n {
        let x0 = lo + k as f64 * h;
        let x1 = if k + 1 == n { hi } else { x0 + h };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        let s = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        coarse += s;
        panels.push((x0, x1, f0, fm, f1, s));
    }
    let abs_tol = (rel_tol * coarse.abs()).max(1e-300);
    let per_panel = abs_tol / n as f64;
    let total: f64 = panels
        .into_iter()
        .map(|(x0, x1, f0, fm, f1, s)| refine(&f, x0, x1, f0, fm, f1, s, per_panel, MAX_DEPTH))
        .sum();
    sign * total
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of uniformly spaced samples `ys` with spacing `h`.
///
/// Composite Simpson when the number of intervals is even; otherwise Simpson
/// on all but the last three intervals, which take the 3/8 rule. Two samples
/// fall back to the trapezoid.
pub fn uniform_simpson(ys: &[f64], h: f64) -> f64 {
    let n = ys.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (ys[0] + ys[1]),
        2 => h / 3.0 * (ys[0] + 4.0 * ys[1] + ys[2]),
        _ if n.is_multiple_of(2) => simpson_even(ys, h),
        _ => {
            let head = simpson_even(&ys[..n - 2], h);
            let t = &ys[n - 3..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_even(ys: &[f64], h: f64) -> f64 {
    let n = ys.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let mut acc = ys[0] + ys[n];
    for (k, y) in ys.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * y } else { 2.0 * y };
    }
    acc * h / 3.0
}

/// Running trapezoid integral of `ys` on a grid with spacing `h`; starts at zero.
pub fn cumulative_trapezoid(ys: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(ys.len());
    let mut acc = 0.0;
    for (k, y) in ys.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * h * (ys[k - 1] + y);
        }
        out.push(acc);
    }
    out
}

/// Running integral of `ys` on a grid with spacing `h`, starting at zero.
///
/// Each interval uses the three-point rule `h/12 (5 y0 + 8 y1 - y2)` with its
/// stencil leaning inward, so the running sum is third-order accurate.
/// Grids of fewer than three points fall back to the trapezoid.
pub fn cumulative_simpson(ys: &[f64], h: f64) -> Vec<f64> {
    let n = ys.len();
    if n < 3 {
        return cumulative_trapezoid(ys, h);
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..n {
        acc += if k + 1 < n {
            h / 12.0 * (5.0 * ys[k - 1] + 8.0 * ys[k] - ys[k + 1])
        } else {
            h / 12.0 * (-ys[k - 2] + 8.0 * ys[k - 1] + 5.0 * ys[k])
        };
        out.push(acc);
    }
    out
}
