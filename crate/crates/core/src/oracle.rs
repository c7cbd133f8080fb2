//! Independent reference solvers used only by tests.

/// Lowest `count` eigenvalues of `-1/2 d2/dx2 + V(x)` on `[-half, half]` with
/// hard walls, by a three-point finite-difference mesh of spacing `h` and
/// Sturm-sequence bisection on the tridiagonal matrix. The mesh is offset so
/// that `x = +-0.5` falls between nodes.
pub fn fd_levels(v: impl Fn(f64) -> f64, half: f64, h: f64, count: usize) -> Vec<f64> {
    let n = (2.0 * half / h).round() as usize - 1;
    let diag: Vec<f64> = (1..=n).map(|i| 1.0 / (h * h) + v(-half + i as f64 * h)).collect();
    let off = -0.5 / (h * h);
    let lo0 = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let hi0 = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    // number of eigenvalues below e
    let below = |e: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in diag.iter().enumerate() {
            q = d - e - if i == 0 { 0.0 } else { off * off / q };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    (0..count)
        .map(|j| {
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Richardson-extrapolated square-well levels (energy zero at the well top).
pub fn square_well_levels(depth: f64, half_box: f64, count: usize) -> Vec<f64> {
    let v = |x: f64| if x.abs() < 0.5 { -depth } else { 0.0 };
    // the well edge sits midway between nodes when 0.5/h is a half-integer
    let h1 = 1.0 / 401.0;
    let coarse = fd_levels(v, half_box, h1, count);
    let fine = fd_levels(v, half_box, h1 / 3.0, count);
    coarse.iter().zip(&fine).map(|(c, f)| (9.0 * f - c) / 8.0).collect()
}
