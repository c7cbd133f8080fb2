//! Impenetrable bosons through the Bose-Fermi mapping.
//!
//! A Tonks gas of N bosons has the spectrum of N free fermions, so every
//! many-body level is a choice of N distinct single-particle bound modes and
//! its energy is the sum of theirs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CullError, Result};
use crate::model::WellSpec;
use crate::single_particle::{bound_state_count, solve_bound_states};

/// Default number of levels returned by [`tonks_bound_spectrum`].
pub const DEFAULT_LEVEL_CAP: usize = 50;

/// One many-body level. Mode indices are zero-based and sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonksLevel {
    pub n: usize,
    pub occupied: Vec<usize>,
    pub energy: f64,
    pub bound: bool,
}

/// Depth at which the well starts to bind `n` impenetrable bosons.
pub fn tonks_threshold(n: usize, width: f64) -> f64 {
    let m = n.saturating_sub(1) as f64;
    0.5 * (PI * m / width).powi(2)
}

/// Sum of the `n` lowest bound single-particle energies.
pub fn tonks_ground_energy(well: &WellSpec, n: usize) -> Result<f64> {
    let modes = occupied_energies(well, n)?;
    Ok(modes.iter().sum())
}

/// Separation energy `E(n) - E(n-1)`, i.e. the n-th bound single-particle energy.
pub fn tonks_separation_energy(well: &WellSpec, n: usize) -> Result<f64> {
    Ok(*occupied_energies(well, n)?.last().expect("n >= 1"))
}

fn occupied_energies(well: &WellSpec, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(CullError::param("n", "need at least one particle"));
    }
    if well.depth <= 0.0 {
        return Err(CullError::Unbound { n, count: 0 });
    }
    let states = solve_bound_states(well, n)?;
    if states.len() < n {
        return Err(CullError::Unbound { n, count: states.len() });
    }
    Ok(states.iter().map(|s| s.energy).collect())
}

/// The lowest `cap` levels of `n` bosons, sorted by energy. Empty when the
/// well holds fewer than `n` bound modes.
pub fn tonks_bound_spectrum(well: &WellSpec, n: usize, cap: usize) -> Result<Vec<TonksLevel>> {
    if n == 0 {
        return Err(CullError::param("n", "need at least one particle"));
    }
    if well.depth <= 0.0 || bound_state_count(well) < n {
        return Ok(Vec::new());
    }
    let energies: Vec<f64> = solve_bound_states(well, usize::MAX)?.iter().map(|s| s.energy).collect();
    if energies.len() < n {
        return Ok(Vec::new());
    }
    Ok(lowest_subsets(&energies, n, cap)
        .into_iter()
        .map(|occupied| {
            let energy = occupied.iter().map(|&j| energies[j]).sum();
            TonksLevel {
                n,
                occupied,
                energy,
                bound: true,
            }
        })
        .collect())
}

/// Best-first enumeration of the `cap` cheapest `n`-subsets of ascending `energies`.
fn lowest_subsets(energies: &[f64], n: usize, cap: usize) -> Vec<Vec<usize>> {
    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    let m = energies.len();
    let cost = |s: &[usize]| s.iter().map(|&j| energies[j]).sum::<f64>();
    let start: Vec<usize> = (0..n).collect();
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Reverse((Key(cost(&start)), start.clone())));
    seen.insert(start);
    let mut out = Vec::new();
    while let Some(Reverse((_, set))) = heap.pop() {
        for i in 0..n {
            let next = set[i] + 1;
            let blocked = if i + 1 < n { set[i + 1] == next } else { next >= m };
            if blocked {
                continue;
            }
            let mut child = set.clone();
            child[i] = next;
            if seen.insert(child.clone()) {
                heap.push(Reverse((Key(cost(&child)), child)));
            }
        }
        out.push(set);
        if out.len() >= cap {
            break;
        }
    }
    out
}

/// Depth at which the n-particle ground level merges with the (n-1)-particle
/// one, located from the sign of the separation energy on `[lo, hi]`.
pub fn merge_depth(n: usize, width: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let bound_at = |v: f64| -> Result<bool> {
        let well = WellSpec::with_box(v, width, 10.0 * width)?;
        match tonks_separation_energy(&well, n) {
            Ok(e) => Ok(e < 0.0),
            Err(CullError::Unbound { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if bound_at(lo)? || !bound_at(hi)? {
        return Err(CullError::NoBracket(format!(
            "{n}-particle Tonks level does not unbind inside [{lo}, {hi}]"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if bound_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binding energy of the n-particle ground level relative to n-1 particles,
/// evaluated where `n + 1` particles just unbind.
pub fn final_stage_gap_tonks(n: usize, width: f64) -> Result<f64> {
    if n == 0 {
        return Err(CullError::param("n", "need at least one particle"));
    }
    let depth = tonks_threshold(n + 1, width);
    let well = WellSpec::with_box(depth, width, 10.0 * width)?;
    let states = solve_bound_states(&well, n)?;
    if states.len() < n {
        return Err(CullError::Unbound { n, count: states.len() });
    }
    Ok(-states[n - 1].energy)
}

/// Large-n form of the final-stage gap, `pi^2 (n + 1/2) / L^2`.
pub fn gap_asymptote(n: usize, width: f64) -> f64 {
    PI * PI * (n as f64 + 0.5) / (width * width)
}

/// Depth window `V_{0,n+1} - V_{0,n} = pi^2 (n - 1/2) / L^2` in which exactly n bosons are bound.
pub fn depth_interval_tonks(n: usize, width: f64) -> f64 {
    tonks_threshold(n + 1, width) - tonks_threshold(n, width)
}

/// Upper bound `E_gap * (V_{0,n+1} - V_{0,n})` on the depth ramp rate.
pub fn max_rate_tonks(n: usize, width: f64) -> Result<f64> {
    Ok(final_stage_gap_tonks(n, width)? * depth_interval_tonks(n, width))
}

/// Least-squares line `gap = a n + b` through the exact gaps at `ns`.
pub fn gap_linear_fit(ns: &[usize], width: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| Ok((n as f64, final_stage_gap_tonks(n, width)?)))
        .collect::<Result<_>>()?;
    Ok(linear_fit(&pts))
}

pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    (slope, (sy - slope * sx) / m)
}

/// One row of a level sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub depth: f64,
    pub n: usize,
    pub level_index: usize,
    pub energy: f64,
    pub bound: bool,
}

/// Ground levels (and, if `excitations > 0`, that many excited levels) for
/// every `n <= n_max` at each depth.
pub fn tonks_sweep(well: &WellSpec, depths: &[f64], n_max: usize, excitations: usize) -> Result<Vec<LevelRow>> {
    let mut rows = Vec::new();
    for &v in depths {
        let w = well.at_depth(v);
        for n in 1..=n_max {
            let levels = tonks_bound_spectrum(&w, n, excitations + 1)?;
            for (i, l) in levels.iter().enumerate() {
                rows.push(LevelRow {
                    depth: v,
                    n,
                    level_index: i,
                    energy: l.energy,
                    bound: l.bound,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thresholds() {
        assert_eq!(tonks_threshold(1, 1.0), 0.0);
        assert_relative_eq!(tonks_threshold(2, 1.0), 4.9348, epsilon = 1e-4);
        assert_relative_eq!(tonks_threshold(5, 1.0), 78.957, epsilon = 1e-3);
        assert_relative_eq!(depth_interval_tonks(3, 1.0), PI * PI * 2.5, epsilon = 1e-12);
    }

    #[test]
    fn one_particle_is_the_single_particle_ground_state() {
        let well = WellSpec::new(7.0).unwrap();
        let e = solve_bound_states(&well, 1).unwrap()[0].energy;
        assert_eq!(tonks_ground_energy(&well, 1).unwrap(), e);
    }

    #[test]
    fn unbound_when_too_few_modes() {
        let well = WellSpec::new(4.0).unwrap();
        assert!(matches!(
            tonks_ground_energy(&well, 2),
            Err(CullError::Unbound { n: 2, count: 1 })
        ));
    }

    #[test]
    fn three_fermions_in_deep_well_against_grid_oracle() {
        let well = WellSpec::new(100.0).unwrap();
        let fd = crate::oracle::square_well_levels(100.0, 6.0, 3);
        assert!((tonks_ground_energy(&well, 3).unwrap() - fd.iter().sum::<f64>()).abs() < 1e-4);
    }

    #[test]
    fn nth_particle_energy_vanishes_at_merge() {
        let well = WellSpec::new(tonks_threshold(3, 1.0) + 1e-6).unwrap();
        let e = tonks_separation_energy(&well, 3).unwrap();
        assert!(e < 0.0 && e > -1e-6);
    }

    #[test]
    fn spectrum_counts() {
        // exactly three bound modes
        let well = WellSpec::new(0.5 * (2.5 * PI).powi(2)).unwrap();
        assert_eq!(bound_state_count(&well), 3);
        assert_eq!(tonks_bound_spectrum(&well, 3, 50).unwrap().len(), 1);
        let two = tonks_bound_spectrum(&well, 2, 50).unwrap();
        assert_eq!(two.len(), 3);
        assert_eq!(two[0].energy, tonks_ground_energy(&well, 2).unwrap());
        assert!(tonks_bound_spectrum(&well, 4, 50).unwrap().is_empty());
    }

    #[test]
    fn spectrum_matches_brute_force() {
        let well = WellSpec::new(300.0).unwrap();
        let e: Vec<f64> = solve_bound_states(&well, 100)
            .unwrap()
            .iter()
            .map(|s| s.energy)
            .collect();
        let mut all = Vec::new();
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                for k in j + 1..e.len() {
                    all.push(e[i] + e[j] + e[k]);
                }
            }
        }
        all.sort_by(f64::total_cmp);
        let levels = tonks_bound_spectrum(&well, 3, 20).unwrap();
        for (l, want) in levels.iter().zip(&all) {
            assert!((l.energy - want).abs() < 1e-9);
        }
        assert_eq!(levels.len(), 20);
    }

    #[test]
    fn gap_n1_is_binding_energy_at_second_threshold() {
        let well = WellSpec::new(PI * PI / 2.0).unwrap();
        let e = solve_bound_states(&well, 1).unwrap()[0].energy;
        assert_relative_eq!(final_stage_gap_tonks(1, 1.0).unwrap(), -e, epsilon = 1e-12);
    }

    #[test]
    fn gap_increases_with_n() {
        let gaps: Vec<f64> = (1..12).map(|n| final_stage_gap_tonks(n, 1.0).unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn merge_depth_bisection() {
        let v = merge_depth(2, 1.0, 1.0, 10.0, 1e-9).unwrap();
        assert!((v - tonks_threshold(2, 1.0)).abs() < 1e-6);
        assert!(merge_depth(2, 1.0, 6.0, 10.0, 1e-9).is_err());
    }

    #[test]
    fn sweep_rows() {
        let well = WellSpec::new(1.0).unwrap();
        let rows = tonks_sweep(&well, &[3.0, 30.0], 3, 0).unwrap();
        // 1 level at V0 = 3, 3 levels at V0 = 30
        assert_eq!(rows.len(), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn culling_is_deterministic(n in 1usize..7, frac in 0.001f64..0.999) {
                let lo = tonks_threshold(n, 1.0);
                let hi = tonks_threshold(n + 1, 1.0);
                let well = WellSpec::new(lo + frac * (hi - lo)).unwrap();
                prop_assert!(!tonks_bound_spectrum(&well, n, 1).unwrap().is_empty());
                prop_assert!(tonks_bound_spectrum(&well, n + 1, 1).unwrap().is_empty());
            }

            #[test]
            fn level_energy_ignores_order(seed in 0u64..1000) {
                let well = WellSpec::new(200.0).unwrap();
                let e: Vec<f64> = solve_bound_states(&well, 100).unwrap().iter().map(|s| s.energy).collect();
                let levels = tonks_bound_spectrum(&well, 3, 10).unwrap();
                let l = &levels[(seed % 10) as usize];
                let mut rev = l.occupied.clone();
                rev.reverse();
                let sum_rev: f64 = rev.iter().map(|&j| e[j]).sum();
                prop_assert!((sum_rev - l.energy).abs() < 1e-12);
            }
        }
    }
}
