//! Composite Gauss–Legendre rules over piecewise-smooth segments.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Points per panel; exact for polynomials of degree 31.
pub const PANEL_ORDER: usize = 16;

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(PANEL_ORDER)
            .expect("order >= 2")
            .into_node_weight_pairs()
    })
}

/// Flattened quadrature nodes and weights.
#[derive(Debug, Clone, Default)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Split each `[lo, hi]` segment into panels no longer than `max_panel`.
    pub fn composite(segments: &[(f64, f64)], max_panel: f64) -> Self {
        let rule = reference_rule();
        let mut grid = QuadratureGrid::default();
        for &(lo, hi) in segments {
            let len = hi - lo;
            if len <= 0.0 {
                continue;
            }
            let panels = ((len / max_panel).ceil() as usize).max(1);
            let h = len / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * h;
                let mid = a + 0.5 * h;
                for &(t, w) in rule {
                    grid.nodes.push(mid + 0.5 * h * t);
                    grid.weights.push(0.5 * h * w);
                }
            }
        }
        grid
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_oscillatory_segments() {
        let grid = QuadratureGrid::composite(&[(0.0, 0.5), (0.5, 3.0)], 0.25);
        let exact = (1.0 - (12.0f64).cos()) / 4.0;
        assert!((grid.integrate(|x| (4.0 * x).sin()) - exact).abs() < 1e-14);
    }

    #[test]
    fn empty_segments_are_skipped() {
        let grid = QuadratureGrid::composite(&[(1.0, 1.0)], 0.1);
        assert!(grid.is_empty());
    }
}
