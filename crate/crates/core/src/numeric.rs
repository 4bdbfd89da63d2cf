//! Small numeric helpers: reproducible summation, tolerance tests, bisection.

/// Pairwise (cascade) summation. Deterministic for a fixed input order and
/// accurate to O(log n) rounding errors, which keeps identity checks over
/// 10^4-10^5 terms inside a 1e-12 relative budget.
pub fn stable_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 32;
    if xs.len() <= BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    stable_sum(&xs[..mid]) + stable_sum(&xs[mid..])
}

/// |a - b| <= tol * (1 + max(|a|, |b|)).
pub fn relatively_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Root of a strictly increasing function on [lo, hi] with f(lo) < 0 <= f(hi),
/// bisected down to floating-point resolution (the midpoint stalls at the
/// bracket endpoints after ~60 steps; 200 is a safe cap).
pub fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(lo < hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Floating-point output format used by every file the crate writes:
/// 17 significant digits, enough to round-trip an f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Least-squares slope and intercept of y against x, with the RMS residual.
/// Returns None when fewer than two distinct x values are supplied.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    Some((slope, intercept, (rss / nf).sqrt()))
}
