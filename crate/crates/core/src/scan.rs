//! Phase diagrams, culling staircases and ramp-speed analysis built on the
//! threshold solvers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc::{unbinding_threshold_dmc, DmcThresholdScan};
use crate::error::{CullError, Result};
use crate::exact_diag::{separation_energy, threshold_scan_diag, DiagScan};
use crate::meanfield::{depth_interval_meanfield, final_stage_gap_meanfield, tf_regime_valid, tf_threshold};
use crate::model::{Method, PhasePoint, ScheduleSpec, WellSpec};
use crate::single_particle::bound_state_count;
use crate::tonks::{
    depth_interval_tonks, final_stage_gap_tonks, merge_depth, tonks_bound_spectrum, tonks_separation_energy,
    tonks_threshold,
};

/// Default safety factor turning `r / E_gap << dV` into `r <= eta E_gap dV`.
pub const DEFAULT_ETA: f64 = 0.1;

/// Threshold depths for N = 2..=N_max, sorted by `g` and then `N`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseBoundary {
    pub points: Vec<PhasePoint>,
}

impl PhaseBoundary {
    fn thresholds_at(&self, g: f64) -> Vec<&PhasePoint> {
        let mut pts: Vec<&PhasePoint> = self.points.iter().filter(|p| p.g == g).collect();
        pts.sort_by_key(|p| p.n);
        pts
    }

    /// Descriptions of every broken ordering: thresholds must rise strictly
    /// with N at fixed g and must not fall with g at fixed N.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            if w[1].g < w[0].g {
                out.push(format!("points not sorted by g at g = {}", w[1].g));
            }
        }
        let mut gs: Vec<f64> = self.points.iter().map(|p| p.g).collect();
        gs.dedup();
        for &g in &gs {
            for w in self.thresholds_at(g).windows(2) {
                if !(w[1].depth > w[0].depth) {
                    out.push(format!(
                        "g = {g}: threshold for N = {} does not exceed N = {}",
                        w[1].n, w[0].n
                    ));
                }
            }
        }
        let mut ns: Vec<usize> = self.points.iter().map(|p| p.n).collect();
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            let line: Vec<&PhasePoint> = self.points.iter().filter(|p| p.n == n).collect();
            for w in line.windows(2) {
                if w[1].depth + w[1].error + w[0].error < w[0].depth {
                    out.push(format!(
                        "N = {n}: threshold falls between g = {} and g = {}",
                        w[0].g, w[1].g
                    ));
                }
            }
        }
        out
    }

    /// Largest N whose threshold (and all lower ones) lie at or below `depth`
    /// for this `g`. Stops at the first missing N.
    pub fn n_max_at(&self, g: f64, depth: f64) -> usize {
        if depth <= 0.0 {
            return 0;
        }
        let mut n_max = 1;
        for p in self.thresholds_at(g) {
            if p.n != n_max + 1 || p.depth > depth {
                break;
            }
            n_max = p.n;
        }
        n_max
    }
}

/// A threshold that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub g: f64,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub g: f64,
    pub depth: f64,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub method: Method,
    pub boundary: PhaseBoundary,
    pub skipped: Vec<SkippedPoint>,
    pub regions: Vec<RegionCell>,
}

/// Backend settings shared by [`phase_diagram`] and [`culling_staircase`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseOptions {
    pub width: f64,
    pub box_size: f64,
    pub n_max: usize,
    /// Bisection tolerance for Tonks merge depths.
    pub tonks_tol: f64,
    pub diag: DiagScan,
    pub dmc: DmcThresholdScan,
    /// First depth of the DMC grid; defaults to one step above the Tonks threshold.
    pub dmc_start: Option<f64>,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            width: 1.0,
            box_size: 10.0,
            n_max: 5,
            tonks_tol: 1e-9,
            diag: DiagScan::default(),
            dmc: DmcThresholdScan::default(),
            dmc_start: None,
        }
    }
}

fn check_grid(name: &'static str, grid: &[f64], ascending: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(CullError::param(name, "empty grid"));
    }
    let ok = grid
        .windows(2)
        .all(|w| if ascending { w[1] > w[0] } else { w[1] < w[0] });
    if !ok {
        let order = if ascending { "increasing" } else { "decreasing" };
        return Err(CullError::param(name, format!("grid must be strictly {order}")));
    }
    Ok(())
}

/// Unbinding depth of the N-th boson at coupling `g` from one backend.
/// `bracket` limits the search for the diag backend.
pub fn threshold(n: usize, g: f64, method: Method, opts: &PhaseOptions, bracket: (f64, f64)) -> Result<PhasePoint> {
    if n < 2 {
        return Err(CullError::param("n", "thresholds start at N = 2"));
    }
    let w = opts.width;
    match method {
        Method::Tonks => {
            let lo = 0.5 * (tonks_threshold(n - 1, w) + tonks_threshold(n, w));
            let hi = 0.5 * (tonks_threshold(n, w) + tonks_threshold(n + 1, w));
            Ok(PhasePoint {
                g,
                depth: merge_depth(n, w, lo, hi, opts.tonks_tol)?,
                n,
                method,
                error: opts.tonks_tol,
                warning: None,
            })
        }
        Method::Tf => Ok(PhasePoint {
            g,
            depth: tf_threshold(n, g, w),
            n,
            method,
            error: 0.0,
            warning: (!tf_regime_valid(n, g, w))
                .then(|| format!("N g L = {:.3} is outside the Thomas-Fermi regime", n as f64 * g * w)),
        }),
        Method::Diag => {
            let scan = DiagScan {
                width: w,
                box_size: opts.box_size,
                ..opts.diag
            };
            threshold_scan_diag(n, g, bracket.0, bracket.1, &scan)
        }
        Method::Dmc => {
            let scan = DmcThresholdScan {
                width: w,
                box_size: opts.box_size,
                start: opts.dmc_start.unwrap_or(tonks_threshold(n, w) + opts.dmc.step),
                ..opts.dmc
            };
            Ok(unbinding_threshold_dmc(n, g, &scan)?.point)
        }
    }
}

/// Thresholds for N = 2..=n_max at every `g`, plus the bound-particle count
/// at every `(g, depth)` grid node. Failed points are listed, not fatal.
pub fn phase_diagram(g_grid: &[f64], depth_grid: &[f64], method: Method, opts: &PhaseOptions) -> Result<PhaseDiagram> {
    check_grid("g_grid", g_grid, true)?;
    check_grid("depth_grid", depth_grid, true)?;
    if opts.n_max < 2 {
        return Err(CullError::param("n_max", "need N_max >= 2"));
    }
    let bracket = (depth_grid[0].max(0.0), depth_grid[depth_grid.len() - 1]);
    let tasks: Vec<(f64, usize)> = g_grid
        .iter()
        .flat_map(|&g| (2..=opts.n_max).map(move |n| (g, n)))
        .collect();
    let results: Vec<Result<PhasePoint>> = tasks
        .par_iter()
        .map(|&(g, n)| threshold(n, g, method, opts, bracket))
        .collect();

    let mut boundary = PhaseBoundary::default();
    let mut skipped = Vec::new();
    for (&(g, n), r) in tasks.iter().zip(results) {
        match r {
            Ok(p) => boundary.points.push(p),
            Err(e) => skipped.push(SkippedPoint {
                g,
                n,
                reason: e.to_string(),
            }),
        }
    }
    let regions = g_grid
        .iter()
        .flat_map(|&g| depth_grid.iter().map(move |&depth| (g, depth)))
        .map(|(g, depth)| RegionCell {
            g,
            depth,
            n_max: boundary.n_max_at(g, depth),
        })
        .collect();
    Ok(PhaseDiagram {
        method,
        boundary,
        skipped,
        regions,
    })
}

/// One sample of a culling trace. Schedule-free staircases leave the time
/// and rate fields empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CullingSample {
    pub time: Option<f64>,
    pub depth: f64,
    pub n_max: usize,
    pub gap: Option<f64>,
    pub rate: Option<f64>,
    pub max_allowed_rate: Option<f64>,
    pub adiabatic: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CullingTrace {
    pub schedule: Option<ScheduleSpec>,
    pub samples: Vec<CullingSample>,
}

/// Where the bound count drops between consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// Last depth with the higher count.
    pub above: f64,
    /// First depth with the lower count.
    pub below: f64,
    pub from: usize,
    pub to: usize,
}

impl CullingTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].n_max <= w[0].n_max)
    }

    pub fn steps(&self) -> Vec<Step> {
        self.samples
            .windows(2)
            .filter(|w| w[1].n_max != w[0].n_max)
            .map(|w| Step {
                above: w[0].depth,
                below: w[1].depth,
                from: w[0].n_max,
                to: w[1].n_max,
            })
            .collect()
    }
}

/// Number of bosons bound at `depth`, judged directly from the sign of
/// `E_N - E_{N-1}` (Tonks and diag) or from threshold formulas (tf, dmc).
fn bound_count(g: f64, depth: f64, method: Method, opts: &PhaseOptions, thresholds: &[f64]) -> Result<usize> {
    if depth <= 0.0 {
        return Ok(0);
    }
    match method {
        Method::Tonks => {
            let well = WellSpec::with_box(depth, opts.width, opts.box_size)?;
            let cap = bound_state_count(&well).min(opts.n_max);
            let mut n = 0;
            while n < cap && tonks_separation_energy(&well, n + 1)? < 0.0 {
                n += 1;
            }
            Ok(n)
        }
        Method::Diag => {
            let well = WellSpec::with_box(depth, opts.width, opts.box_size)?;
            let mut n = 0;
            while n < opts.n_max && separation_energy(n + 1, g, &well, opts.diag.modes)? < 0.0 {
                n += 1;
            }
            Ok(n)
        }
        Method::Tf | Method::Dmc => Ok(1 + thresholds.iter().take_while(|&&t| t <= depth).count()),
    }
}

/// Bound-particle count along a descending depth path. The count only falls,
/// and each fall sits at a phase-boundary threshold.
pub fn culling_staircase(g: f64, path: &[f64], method: Method, opts: &PhaseOptions) -> Result<CullingTrace> {
    check_grid("path", path, false)?;
    let thresholds: Vec<f64> = match method {
        Method::Tf | Method::Dmc => (2..=opts.n_max)
            .map(|n| threshold(n, g, method, opts, (0.0, path[0])).map(|p| p.depth))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let counts: Vec<usize> = path
        .par_iter()
        .map(|&v| bound_count(g, v, method, opts, &thresholds))
        .collect::<Result<_>>()?;
    Ok(CullingTrace {
        schedule: None,
        samples: path
            .iter()
            .zip(counts)
            .map(|(&depth, n_max)| CullingSample {
                time: None,
                depth,
                n_max,
                gap: None,
                rate: None,
                max_allowed_rate: None,
                adiabatic: None,
            })
            .collect(),
    })
}

/// Which limiting model supplies gaps and depth windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Tonks,
    Meanfield,
}

/// Ramp requirements while exactly `n` bosons are bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub n: usize,
    /// Depth where the n-th boson unbinds.
    pub lower: f64,
    /// Depth where the (n+1)-th boson unbinds.
    pub upper: f64,
    pub gap: f64,
    pub interval: f64,
    /// `eta E_gap dV`.
    pub max_allowed_rate: f64,
    /// Fastest ramp the schedule applies inside this stage.
    pub peak_rate: f64,
    /// Smallest exponential time constant meeting the bound (exponential schedules only).
    pub min_tau: Option<f64>,
    pub adiabatic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub limit: Limit,
    pub eta: f64,
    pub g: f64,
    pub n_target: usize,
    pub stages: Vec<StageReport>,
    /// Largest stage requirement; the whole ramp is adiabatic above it.
    pub min_tau: Option<f64>,
    /// Stop at the deep edge of the target window: the gap that protects the
    /// target state closes at the shallow edge.
    pub recommended_stop_depth: f64,
    pub trace: CullingTrace,
}

struct StageModel {
    limit: Limit,
    g: f64,
    width: f64,
}

impl StageModel {
    fn threshold(&self, n: usize) -> f64 {
        match self.limit {
            Limit::Tonks => tonks_threshold(n, self.width),
            Limit::Meanfield => tf_threshold(n, self.g, self.width),
        }
    }

    fn gap(&self, n: usize) -> Result<f64> {
        match self.limit {
            Limit::Tonks => final_stage_gap_tonks(n, self.width),
            Limit::Meanfield => Ok(final_stage_gap_meanfield(n, self.g)),
        }
    }

    fn interval(&self, n: usize) -> f64 {
        match self.limit {
            Limit::Tonks => depth_interval_tonks(n, self.width),
            Limit::Meanfield => depth_interval_meanfield(self.g, self.width),
        }
    }

    fn n_at(&self, depth: f64) -> usize {
        if depth <= 0.0 {
            return 0;
        }
        let mut n = 1;
        while self.threshold(n + 1) < depth {
            n += 1;
        }
        n
    }
}

/// Checks a depth ramp against `r <= eta E_gap (V_{0,N+1} - V_{0,N})` in
/// every stage from the initial depth down to `n_target`, and samples the
/// trace at `samples` evenly spaced times until the target window is left.
pub fn adiabatic_analysis(
    schedule: &ScheduleSpec,
    n_target: usize,
    g: f64,
    limit: Limit,
    eta: f64,
    width: f64,
    samples: usize,
) -> Result<AdiabaticReport> {
    schedule.validate()?;
    if n_target == 0 {
        return Err(CullError::param("n_target", "need at least one boson"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(CullError::param("eta", format!("need eta > 0, got {eta}")));
    }
    if limit == Limit::Meanfield && !(g > 0.0) {
        return Err(CullError::param("g", "the mean-field limit needs g > 0"));
    }
    if samples < 2 {
        return Err(CullError::param("samples", "need at least two samples"));
    }
    let model = StageModel { limit, g, width };
    let n_start = model.n_at(schedule.initial_depth);
    if n_start < n_target {
        return Err(CullError::param(
            "initial_depth",
            format!(
                "{} binds only {n_start} bosons, fewer than the target {n_target}",
                schedule.initial_depth
            ),
        ));
    }

    let mut stages = Vec::new();
    for n in (n_target..=n_start).rev() {
        let lower = model.threshold(n);
        let upper = model.threshold(n + 1);
        let gap = model.gap(n)?;
        let interval = model.interval(n);
        let max_allowed_rate = eta * gap * interval;
        let top = upper.min(schedule.initial_depth);
        let t_top = schedule.time_to_depth(top).unwrap_or(0.0);
        let peak_rate = schedule.rate_at(t_top);
        let min_tau = match schedule.shape {
            crate::model::ScheduleShape::Exponential { .. } => Some(top / max_allowed_rate),
            crate::model::ScheduleShape::Linear { .. } => None,
        };
        stages.push(StageReport {
            n,
            lower,
            upper,
            gap,
            interval,
            max_allowed_rate,
            peak_rate,
            min_tau,
            adiabatic: peak_rate <= max_allowed_rate,
        });
    }
    let min_tau = stages.iter().filter_map(|s| s.min_tau).reduce(f64::max);

    let floor = model.threshold(n_target).max(1e-3 * schedule.initial_depth);
    let t_end = schedule.time_to_depth(floor).unwrap_or(0.0);
    let trace_samples = (0..samples)
        .map(|i| {
            let t = t_end * i as f64 / (samples - 1) as f64;
            let depth = schedule.depth_at(t);
            let n = model.n_at(depth);
            let stage = stages.iter().find(|s| s.n == n);
            let rate = schedule.rate_at(t);
            CullingSample {
                time: Some(t),
                depth,
                n_max: n,
                gap: stage.map(|s| s.gap),
                rate: Some(rate),
                max_allowed_rate: stage.map(|s| s.max_allowed_rate),
                adiabatic: stage.map(|s| rate <= s.max_allowed_rate),
            }
        })
        .collect();
    Ok(AdiabaticReport {
        limit,
        eta,
        g,
        n_target,
        stages,
        min_tau,
        recommended_stop_depth: model.threshold(n_target + 1),
        trace: CullingTrace {
            schedule: Some(*schedule),
            samples: trace_samples,
        },
    })
}

/// Excited levels of `m` bosons that still end with `n` bound bosons after an
/// adiabatic ramp into the `n`-boson window: `m - n`.
pub fn allowed_initial_excitations(m: usize, n: usize) -> Result<usize> {
    if n == 0 || m < n {
        return Err(CullError::param("m", format!("need M >= N >= 1, got M = {m}, N = {n}")));
    }
    Ok(m - n)
}

/// Fate of one initial Tonks level under a slow ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationFate {
    /// 0 is the ground level.
    pub index: usize,
    pub occupied: Vec<usize>,
    pub final_count: usize,
}

/// Follows the lowest `count` levels of `m` impenetrable bosons from
/// `initial_depth` down a descending depth grid. Each level keeps its
/// occupied modes; a boson leaves when its mode unbinds.
pub fn track_tonks_excitations(
    m: usize,
    count: usize,
    initial_depth: f64,
    path: &[f64],
    width: f64,
) -> Result<Vec<ExcitationFate>> {
    check_grid("path", path, false)?;
    if path[0] > initial_depth {
        return Err(CullError::param(
            "path",
            "the path must start at or below the initial depth",
        ));
    }
    let start = WellSpec::with_box(initial_depth, width, 10.0 * width)?;
    let levels = tonks_bound_spectrum(&start, m, count)?;
    if levels.len() < count {
        return Err(CullError::Unbound {
            n: m,
            count: bound_state_count(&start),
        });
    }
    let mut occupied: Vec<Vec<usize>> = levels.iter().map(|l| l.occupied.clone()).collect();
    for &depth in path {
        let bound = if depth > 0.0 {
            bound_state_count(&start.at_depth(depth))
        } else {
            0
        };
        for occ in &mut occupied {
            occ.retain(|&j| j < bound);
        }
    }
    Ok(levels
        .into_iter()
        .zip(occupied)
        .enumerate()
        .map(|(index, (level, left))| ExcitationFate {
            index,
            occupied: level.occupied,
            final_count: left.len(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tonks_opts() -> PhaseOptions {
        PhaseOptions {
            n_max: 4,
            ..PhaseOptions::default()
        }
    }

    #[test]
    fn tonks_phase_lines_are_flat() {
        let d = phase_diagram(&[0.5, 1.0, 2.0], &[0.0, 10.0, 30.0, 50.0], Method::Tonks, &tonks_opts()).unwrap();
        assert!(d.skipped.is_empty());
        for p in &d.boundary.points {
            assert!((p.depth - tonks_threshold(p.n, 1.0)).abs() < 1e-6, "{p:?}");
        }
        assert!(d.boundary.violations().is_empty());
        let cell = d.regions.iter().find(|c| c.g == 1.0 && c.depth == 30.0).unwrap();
        assert_eq!(cell.n_max, 3);
    }

    #[test]
    fn tf_line_for_fifth_boson() {
        let opts = PhaseOptions {
            n_max: 5,
            ..PhaseOptions::default()
        };
        let d = phase_diagram(&[1.0, 3.0], &[0.0, 50.0], Method::Tf, &opts).unwrap();
        let five: Vec<_> = d.boundary.points.iter().filter(|p| p.n == 5).collect();
        assert_eq!(five[0].depth, 8.0);
        assert_eq!(five[1].depth, 24.0);
        assert!(d
            .boundary
            .points
            .iter()
            .filter(|p| p.g == 1.0 && p.n == 2)
            .all(|p| p.warning.is_some()));
    }

    #[test]
    fn violations_catch_disorder() {
        let mk = |g, n, depth| PhasePoint {
            g,
            depth,
            n,
            method: Method::Tf,
            error: 0.0,
            warning: None,
        };
        let b = PhaseBoundary {
            points: vec![mk(1.0, 2, 3.0), mk(1.0, 3, 2.0), mk(2.0, 2, 1.0)],
        };
        assert_eq!(b.violations().len(), 2);
    }

    #[test]
    fn tonks_staircase_steps_at_thresholds() {
        let path: Vec<f64> = (0..=400).map(|i| 50.0 - 0.125 * i as f64).collect();
        let trace = culling_staircase(1.0, &path, Method::Tonks, &tonks_opts()).unwrap();
        assert!(trace.is_non_increasing());
        let steps = trace.steps();
        assert_eq!(steps.iter().map(|s| s.from).collect::<Vec<_>>(), vec![4, 3, 2, 1]);
        for s in steps.iter().filter(|s| s.to > 0) {
            let t = tonks_threshold(s.from, 1.0);
            assert!(s.below <= t && t <= s.above, "{s:?} vs {t}");
        }
    }

    #[test]
    fn staircase_above_all_thresholds_is_flat() {
        let trace = culling_staircase(1.0, &[60.0, 55.0, 50.0], Method::Tonks, &tonks_opts()).unwrap();
        assert!(trace.steps().is_empty());
        assert!(trace.samples.iter().all(|s| s.n_max == 4));
    }

    #[test]
    fn single_boson_stage_rate_is_order_unity() {
        let sched = ScheduleSpec::exponential(10.0, 1.0).unwrap();
        let r = adiabatic_analysis(&sched, 1, 0.0, Limit::Tonks, DEFAULT_ETA, 1.0, 50).unwrap();
        let last = r.stages.last().unwrap();
        assert_eq!(last.n, 1);
        assert!(last.max_allowed_rate > 0.3 && last.max_allowed_rate < 3.0, "{last:?}");
        assert!((r.recommended_stop_depth - tonks_threshold(2, 1.0)).abs() < 1e-12);
        let trace = &r.trace;
        assert!(trace.samples.windows(2).all(|w| w[1].n_max <= w[0].n_max));
    }

    #[test]
    fn meanfield_tau_scales_inverse_g2_n2() {
        let sched = ScheduleSpec::exponential(100.0, 1.0).unwrap();
        let tau = |g: f64, n: usize| {
            let r = adiabatic_analysis(&sched, n, g, Limit::Meanfield, DEFAULT_ETA, 1.0, 4).unwrap();
            let s = r.stages.iter().find(|s| s.n == n).unwrap();
            // peak-rate depth times the stage ratio, normalised to a common depth
            s.min_tau.unwrap() / s.upper.min(100.0)
        };
        let base = tau(1.0, 4);
        assert!((tau(2.0, 4) / base - 0.25).abs() < 1e-12);
        assert!((tau(1.0, 8) / base - 0.25).abs() < 1e-12);
    }

    #[test]
    fn strict_adiabaticity_needs_infinite_time() {
        let sched = ScheduleSpec::exponential(30.0, 1.0).unwrap();
        let t = |eta| {
            adiabatic_analysis(&sched, 2, 0.0, Limit::Tonks, eta, 1.0, 4)
                .unwrap()
                .min_tau
                .unwrap()
        };
        assert!(t(1e-6) > 1e4 * t(0.1) * 0.99);
    }

    #[test]
    fn excitation_counting() {
        assert_eq!(allowed_initial_excitations(3, 3).unwrap(), 0);
        assert_eq!(allowed_initial_excitations(4, 1).unwrap(), 3);
        assert!(allowed_initial_excitations(1, 2).is_err());
    }

    #[test]
    fn tracked_excitations_of_three_bosons() {
        // four bound modes at V0 = 50; the window for one boson is (0, pi^2/2)
        let path: Vec<f64> = (0..=96).map(|i| 50.0 - 0.5 * i as f64).collect();
        let fates = track_tonks_excitations(3, 4, 50.0, &path, 1.0).unwrap();
        let counts: Vec<usize> = fates.iter().map(|f| f.final_count).collect();
        assert_eq!(counts[..3], [1, 1, 1]);
        assert_eq!(fates[3].occupied, vec![1, 2, 3]);
        assert_eq!(counts[3], 0);
    }
}
