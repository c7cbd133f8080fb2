//! Bracketed scalar root polishing.

/// Bisect `f` on `[lo, hi]` (opposite signs at the ends) until the bracket is
/// narrower than `tol`. Returns the midpoint of the final bracket.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Illinois-modified regula falsi on a sign-changing bracket. Keeps the
/// bracket at every step, so it never leaves `[lo, hi]`.
pub fn regula_falsi<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), E> {
    let mut side = 0i8;
    for it in 0..max_iter {
        if (hi - lo).abs() <= tol {
            return Ok((0.5 * (lo + hi), it));
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !x.is_finite() || x <= lo || x >= hi {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok((x, it + 1));
        }
        if (fx > 0.0) == (f_lo > 0.0) {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        // guarantee bracket shrinkage
        if (hi - lo).abs() > tol && it % 4 == 3 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid)?;
            if (fm > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
    }
    Ok((0.5 * (lo + hi), max_iter))
}
