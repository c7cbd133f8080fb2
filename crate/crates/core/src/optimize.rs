//! Derivative-free minimizers for smooth low-dimensional objectives.

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    // the bracket ends may beat the interior when the minimum sits on the boundary
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization with standard coefficients. Stops when
/// the spread of function values and the simplex diameter both fall below
/// `tol`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, tol: f64, max_iter: usize) -> SimplexResult {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    for it in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= tol && diameter <= tol {
            return SimplexResult {
                x: simplex[0].clone(),
                value: values[0],
                iterations: it,
                converged: true,
            };
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let reflected = lerp(&centroid, &simplex[n], -1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = lerp(&centroid, &simplex[n], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = lerp(&centroid, &simplex[n], -0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &simplex[n], 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("non-empty");
    SimplexResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations: max_iter,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6 && (fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let (x, _) = golden_section(|x| x, 0.0, 1.0, 1e-10);
        assert!(x < 1e-9);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], 0.5, 1e-12, 5000);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    }
}
