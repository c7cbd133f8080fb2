//! Diffusion Monte Carlo for N contact-interacting bosons in the boxed well.
//!
//! Walkers drift and diffuse under the guidance of a positive trial function
//! `prod_i f1(x_i) prod_{i<j} f2(|x_i - x_j|)`. The contact interaction never
//! acts on walkers directly: `f2` carries the exact derivative jump at
//! coincidence, so the delta function cancels out of the local energy.
//!
//! Every random number a walker draws comes from a ChaCha stream keyed by the
//! master seed, the step number and the walker's slot in the population, so
//! results do not depend on how the moves are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CullError, Result};
use crate::model::{Method, PhasePoint, WellSpec};
use crate::roots::bisect;
use crate::single_particle::{solve_box_states, SingleParticleState};
use crate::tonks::linear_fit;

/// Population-control strength: the walker count relaxes back to its target
/// over roughly `1 / POPULATION_FEEDBACK` steps.
const POPULATION_FEEDBACK: f64 = 0.01;

/// Weight of the newest step in the running energy that anchors `E_T`.
const REFERENCE_SMOOTHING: f64 = 0.01;

/// Walker slots are spaced this many words apart inside one ChaCha stream.
const WORDS_PER_WALKER: u32 = 32;

/// Largest particle number the walker kernels handle (stack buffers).
pub const MAX_PARTICLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialParams {
    /// Depth of the well whose box ground state is used as the envelope.
    /// Sets the envelope decay `sqrt(2 (V_T - e))` outside the well; `None`
    /// takes the actual depth.
    pub envelope_depth: Option<f64>,
    /// Jastrow cutoff `R`.
    pub cutoff: f64,
}

impl Default for TrialParams {
    fn default() -> Self {
        TrialParams {
            envelope_depth: None,
            cutoff: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmcConfig {
    pub walkers: usize,
    pub time_step: f64,
    pub blocks: usize,
    pub steps_per_block: usize,
    /// Blocks discarded before accumulation starts.
    pub equilibration_blocks: usize,
    pub seed: u64,
    pub trial: TrialParams,
    /// Repeat the run at half the time step to estimate the time-step bias.
    pub timestep_check: bool,
}

impl Default for DmcConfig {
    fn default() -> Self {
        DmcConfig {
            walkers: 1000,
            time_step: 1e-3,
            blocks: 50,
            steps_per_block: 2000,
            equilibration_blocks: 2,
            seed: 1,
            trial: TrialParams::default(),
            timestep_check: false,
        }
    }
}

impl DmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walkers < 100 {
            return Err(CullError::param(
                "walkers",
                format!("need >= 100, got {}", self.walkers),
            ));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(CullError::param(
                "time_step",
                format!("need a positive step, got {}", self.time_step),
            ));
        }
        if self.blocks < 10 {
            return Err(CullError::param("blocks", format!("need >= 10, got {}", self.blocks)));
        }
        if self.steps_per_block == 0 {
            return Err(CullError::param("steps_per_block", "need at least one step"));
        }
        if !(self.trial.cutoff > 0.0 && self.trial.cutoff.is_finite()) {
            return Err(CullError::param(
                "cutoff",
                format!("need R > 0, got {}", self.trial.cutoff),
            ));
        }
        if let Some(d) = self.trial.envelope_depth {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(CullError::param("envelope_depth", format!("need V_T >= 0, got {d}")));
            }
        }
        Ok(())
    }
}

/// Log amplitude, drift `grad log psi` and local energy at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEval {
    pub log_amplitude: f64,
    pub drift: Vec<f64>,
    pub local_energy: f64,
}

/// Product trial function with a box-ground-state envelope and a truncated
/// two-body scattering Jastrow factor `f2(r) = cos(k (R - r))` for `r < R`.
#[derive(Debug, Clone)]
pub struct TrialWavefunction {
    well: WellSpec,
    envelope_well: WellSpec,
    envelope: SingleParticleState,
    g: f64,
    /// Jastrow wavenumber solving `k tan(k R) = g / 2`.
    k: f64,
    cutoff: f64,
}

impl TrialWavefunction {
    pub fn new(g: f64, well: &WellSpec, params: &TrialParams) -> Result<Self> {
        well.validate()?;
        if !(g >= 0.0 && g.is_finite()) {
            return Err(CullError::param("g", format!("need g >= 0, got {g}")));
        }
        let r = params.cutoff;
        if !(r > 0.0 && r < well.half_box()) {
            return Err(CullError::param("cutoff", format!("need 0 < R < D/2, got {r}")));
        }
        let envelope_well = well.at_depth(params.envelope_depth.unwrap_or(well.depth));
        envelope_well.validate()?;
        let envelope = solve_box_states(&envelope_well, 1)?.remove(0);
        // relative motion has reduced mass 1/2, so the cusp is f2'(0+)/f2(0) = g/2
        let k = if g == 0.0 {
            0.0
        } else {
            let edge = std::f64::consts::FRAC_PI_2 / r;
            bisect(|k| k * (k * r).tan() - 0.5 * g, 0.0, edge * (1.0 - 1e-15), 1e-15)
        };
        Ok(TrialWavefunction {
            well: *well,
            envelope_well,
            envelope,
            g,
            k,
            cutoff: r,
        })
    }

    pub fn jastrow_wavenumber(&self) -> f64 {
        self.k
    }

    pub fn coupling(&self) -> f64 {
        self.g
    }

    /// `(ln f1, f1'/f1)` for the envelope.
    fn envelope_terms(&self, x: f64) -> (f64, f64) {
        let (f, df) = self.envelope.value_and_slope(x);
        (f.abs().ln(), df / f)
    }

    /// `(u, u', u'')` for `u = ln f2` at separation `r >= 0`.
    fn jastrow_terms(&self, r: f64) -> (f64, f64, f64) {
        if r >= self.cutoff || self.k == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let phase = self.k * (self.cutoff - r);
        let t = phase.tan();
        let du = self.k * t;
        (phase.cos().ln(), du, -self.k * self.k - du * du)
    }

    /// Fills `drift` and returns `(log amplitude, local energy)`. Positions
    /// must lie strictly inside the box.
    fn evaluate_into(&self, x: &[f64], drift: &mut [f64]) -> (f64, f64) {
        let n = x.len();
        let mut log_amp = 0.0;
        let mut laplacian = [0.0; MAX_PARTICLES];
        for i in 0..n {
            let (lf, df) = self.envelope_terms(x[i]);
            log_amp += lf;
            drift[i] = df;
            // f1''/f1 = 2 (V_T - e) for the envelope's own potential
            laplacian[i] = 2.0 * (self.envelope_well.potential(x[i]) - self.envelope.energy) - df * df;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = x[i] - x[j];
                let (u, du, d2u) = self.jastrow_terms(d.abs());
                log_amp += u;
                let s = if d >= 0.0 { 1.0 } else { -1.0 };
                drift[i] += s * du;
                drift[j] -= s * du;
                laplacian[i] += d2u;
                laplacian[j] += d2u;
            }
        }
        let mut energy = 0.0;
        for i in 0..n {
            energy += self.well.potential(x[i]) - 0.5 * (drift[i] * drift[i] + laplacian[i]);
        }
        (log_amp, energy)
    }

    /// Log amplitude, drift and local energy at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<TrialEval> {
        if x.len() > MAX_PARTICLES {
            return Err(CullError::param("n", format!("at most {MAX_PARTICLES} particles")));
        }
        let half = self.well.half_box();
        if let Some(&bad) = x.iter().find(|v| !(v.abs() < half)) {
            return Err(CullError::OutOfBox { x: bad, half });
        }
        let mut drift = vec![0.0; x.len()];
        let (log_amplitude, local_energy) = self.evaluate_into(x, &mut drift);
        Ok(TrialEval {
            log_amplitude,
            drift,
            local_energy,
        })
    }

    fn walker(&self, x: Vec<f64>) -> Walker {
        let mut drift = vec![0.0; x.len()];
        let (log_amp, e_local) = self.evaluate_into(&x, &mut drift);
        Walker {
            x,
            drift,
            log_amp,
            e_local,
        }
    }

    /// One drift-diffusion move with Metropolis correction. Returns whether
    /// the move was accepted.
    fn advance(&self, w: &mut Walker, tau: f64, rng: &mut ChaCha8Rng) -> bool {
        let n = w.x.len();
        let sqrt_tau = tau.sqrt();
        let half = self.well.half_box();
        let mut y = [0.0; MAX_PARTICLES];
        let mut forward = 0.0;
        for i in 0..n {
            let eta: f64 = rng.sample(StandardNormal);
            y[i] = w.x[i] + tau * limited_drift(w.drift[i], tau) + sqrt_tau * eta;
            forward += eta * eta;
        }
        let y = &y[..n];
        let u: f64 = rng.gen();
        if y.iter().any(|v| !(v.abs() < half)) {
            return false;
        }
        let mut drift_y = [0.0; MAX_PARTICLES];
        let drift_y = &mut drift_y[..n];
        let (log_amp_y, e_local_y) = self.evaluate_into(y, drift_y);
        let backward: f64 = (0..n)
            .map(|i| (w.x[i] - y[i] - tau * limited_drift(drift_y[i], tau)).powi(2))
            .sum::<f64>()
            / tau;
        let log_ratio = 2.0 * (log_amp_y - w.log_amp) + 0.5 * (forward - backward);
        if log_ratio >= 0.0 || u < log_ratio.exp() {
            w.x.copy_from_slice(y);
            w.drift.copy_from_slice(drift_y);
            w.log_amp = log_amp_y;
            w.e_local = e_local_y;
            true
        } else {
            false
        }
    }
}

/// Drift with the limiter `v (sqrt(1 + 2 v^2 tau) - 1) / (v^2 tau)`, which
/// keeps the step finite where the envelope vanishes at the walls.
fn limited_drift(v: f64, tau: f64) -> f64 {
    let z = v * v * tau;
    if z < 1e-8 {
        v
    } else {
        v * ((1.0 + 2.0 * z).sqrt() - 1.0) / z
    }
}

#[derive(Debug, Clone)]
struct Walker {
    x: Vec<f64>,
    drift: Vec<f64>,
    log_amp: f64,
    e_local: f64,
}

/// Half-time-step rerun and the linear extrapolation it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimestepCheck {
    pub half_step_energy: f64,
    pub half_step_stderr: f64,
    /// `2 E(tau/2) - E(tau)`.
    pub extrapolated_energy: f64,
    pub extrapolated_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcResult {
    pub n: usize,
    pub g: f64,
    pub well: WellSpec,
    pub config: DmcConfig,
    /// Mixed-estimator energy at the configured time step.
    pub energy: f64,
    /// Standard error of the block means.
    pub stderr: f64,
    pub block_energies: Vec<f64>,
    /// Fraction of accepted moves.
    pub acceptance: f64,
    /// Mean population of every block, equilibration included.
    pub population_history: Vec<f64>,
    /// `E(tau) - E(0)` under a linear time-step model.
    pub timestep_bias_estimate: Option<f64>,
    pub timestep_check: Option<TimestepCheck>,
}

impl DmcResult {
    /// Extrapolated energy and error when the time-step check ran, the raw
    /// ones otherwise.
    pub fn best_estimate(&self) -> (f64, f64) {
        match self.timestep_check {
            Some(c) => (c.extrapolated_energy, c.extrapolated_stderr),
            None => (self.energy, self.stderr),
        }
    }
}

struct RunSummary {
    energy: f64,
    stderr: f64,
    block_energies: Vec<f64>,
    acceptance: f64,
    population_history: Vec<f64>,
}

/// Mean and standard error of block averages. An exact trial function gives
/// identical blocks, in which case the error is floored at rounding level.
pub fn block_statistics(blocks: &[f64]) -> (f64, f64) {
    let b = blocks.len() as f64;
    let mean = blocks.iter().sum::<f64>() / b;
    let var = blocks.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (b - 1.0).max(1.0);
    let floor = f64::EPSILON * mean.abs().max(1.0);
    (mean, (var / b).sqrt().max(floor))
}

fn walker_rng(base: &ChaCha8Rng, stream: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng.set_word_pos(slot as u128 * WORDS_PER_WALKER as u128);
    rng
}

fn run_once(
    n: usize,
    trial: &TrialWavefunction,
    cfg: &DmcConfig,
    tau: f64,
    steps_per_block: usize,
) -> Result<RunSummary> {
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = cfg.walkers;
    let a = trial.well.half_width();

    // start uniformly inside the well; equilibration removes the memory
    let mut walkers: Vec<Walker> = (0..target)
        .map(|slot| {
            let mut rng = walker_rng(&base, u64::MAX, slot);
            let x = (0..n).map(|_| rng.gen_range(-a..a)).collect();
            trial.walker(x)
        })
        .collect();
    let mut e_ref = walkers.iter().map(|w| w.e_local).sum::<f64>() / target as f64;
    let mut e_trial = e_ref;
    let mut tau_eff = tau;

    let mut block_energies = Vec::with_capacity(cfg.blocks);
    let mut population_history = Vec::with_capacity(cfg.blocks + cfg.equilibration_blocks);
    let mut accepted_total = 0usize;
    let mut moves_total = 0usize;
    let mut step = 0u64;

    for block in 0..(cfg.equilibration_blocks + cfg.blocks) {
        let mut sum_we = 0.0;
        let mut sum_w = 0.0;
        let mut pop_sum = 0.0;
        let mut block_accepted = 0usize;
        let mut block_moves = 0usize;
        for _ in 0..steps_per_block {
            let moves: Vec<(bool, f64)> = walkers
                .par_iter_mut()
                .enumerate()
                .map(|(slot, w)| {
                    let mut rng = walker_rng(&base, 2 * step, slot);
                    let e_old = w.e_local;
                    let ok = trial.advance(w, tau, &mut rng);
                    (ok, e_old)
                })
                .collect();

            let mut branch_rng = walker_rng(&base, 2 * step + 1, 0);
            let mut next = Vec::with_capacity(walkers.len() + walkers.len() / 8);
            let mut step_we = 0.0;
            let mut step_w = 0.0;
            let mut implied = 0usize;
            for (w, (ok, e_old)) in walkers.into_iter().zip(moves) {
                block_moves += 1;
                block_accepted += ok as usize;
                let weight = (-tau_eff * (0.5 * (e_old + w.e_local) - e_trial)).exp();
                step_we += weight * w.e_local;
                step_w += weight;
                // a single huge weight would otherwise allocate without bound
                let copies = ((weight + branch_rng.gen::<f64>()) as usize).min(2 * target + 1);
                implied = implied.saturating_add(copies);
                if next.len() + copies > 2 * target + 1 {
                    continue;
                }
                for _ in 1..copies {
                    next.push(w.clone());
                }
                if copies > 0 {
                    next.push(w);
                }
            }
            walkers = next;
            let population = implied;
            if population < target / 2 {
                return Err(CullError::PopulationCollapse { population, target });
            }
            if population > 2 * target {
                return Err(CullError::PopulationExplosion { population, target });
            }
            sum_we += step_we;
            sum_w += step_w;
            pop_sum += population as f64;
            e_ref += REFERENCE_SMOOTHING * (step_we / step_w - e_ref);
            e_trial = e_ref + POPULATION_FEEDBACK / tau * (target as f64 / population as f64).ln();
            step += 1;
        }
        // moves rejected near the walls or by Metropolis shorten the effective diffusion time
        tau_eff = tau * block_accepted as f64 / block_moves as f64;
        population_history.push(pop_sum / steps_per_block as f64);
        if block >= cfg.equilibration_blocks {
            block_energies.push(sum_we / sum_w);
            accepted_total += block_accepted;
            moves_total += block_moves;
        }
    }
    let (energy, stderr) = block_statistics(&block_energies);
    Ok(RunSummary {
        energy,
        stderr,
        block_energies,
        acceptance: accepted_total as f64 / moves_total as f64,
        population_history,
    })
}

/// Ground-state energy of `n` bosons with coupling `g` in the boxed well.
pub fn run_dmc(n: usize, g: f64, well: &WellSpec, config: &DmcConfig) -> Result<DmcResult> {
    config.validate()?;
    if n == 0 || n > MAX_PARTICLES {
        return Err(CullError::param("n", format!("need 1 <= N <= {MAX_PARTICLES}")));
    }
    let trial = TrialWavefunction::new(g, well, &config.trial)?;
    let main = run_once(n, &trial, config, config.time_step, config.steps_per_block)?;
    let timestep_check = if config.timestep_check {
        let half = run_once(n, &trial, config, 0.5 * config.time_step, 2 * config.steps_per_block)?;
        Some(TimestepCheck {
            half_step_energy: half.energy,
            half_step_stderr: half.stderr,
            extrapolated_energy: 2.0 * half.energy - main.energy,
            extrapolated_stderr: (4.0 * half.stderr * half.stderr + main.stderr * main.stderr).sqrt(),
        })
    } else {
        None
    };
    Ok(DmcResult {
        n,
        g,
        well: *well,
        config: *config,
        energy: main.energy,
        stderr: main.stderr,
        block_energies: main.block_energies,
        acceptance: main.acceptance,
        population_history: main.population_history,
        timestep_bias_estimate: timestep_check.map(|c| main.energy - c.extrapolated_energy),
        timestep_check,
    })
}

/// Depth grid and run settings for [`unbinding_threshold_dmc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmcThresholdScan {
    pub width: f64,
    pub box_size: f64,
    /// First (deepest) depth of the descending grid.
    pub start: f64,
    pub step: f64,
    /// Grid stops here even if the separation energy is still negative.
    pub floor: f64,
    /// Points entering the linear fit.
    pub fit_points: usize,
    pub config: DmcConfig,
}

impl Default for DmcThresholdScan {
    fn default() -> Self {
        DmcThresholdScan {
            width: 1.0,
            box_size: 10.0,
            start: 3.0,
            step: 0.25,
            floor: 0.0,
            fit_points: 3,
            config: DmcConfig {
                blocks: 20,
                steps_per_block: 1000,
                walkers: 500,
                ..DmcConfig::default()
            },
        }
    }
}

/// Separation energy `E_N - E_{N-1}` at one depth with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationSample {
    pub depth: f64,
    pub separation: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmcThreshold {
    pub point: PhasePoint,
    pub samples: Vec<SeparationSample>,
    /// Root of a quadratic through one more point than the linear fit.
    pub quadratic_depth: Option<f64>,
    pub statistical_error: f64,
}

fn ground_energy_dmc(n: usize, g: f64, well: &WellSpec, cfg: &DmcConfig) -> Result<(f64, f64)> {
    match n {
        0 => Ok((0.0, 0.0)),
        // the envelope is exact for one particle
        1 => Ok((solve_box_states(well, 1)?[0].energy, 0.0)),
        _ => {
            let r = run_dmc(n, g, well, cfg)?;
            Ok(r.best_estimate())
        }
    }
}

/// Weighted straight-line fit `y = c0 + c1 x` with parameter covariance.
fn weighted_line(pts: &[(f64, f64, f64)]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, e) in pts {
        let w = 1.0 / (e * e);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    let c1 = (s * sxy - sx * sy) / det;
    let c0 = (sxx * sy - sx * sxy) / det;
    ([c0, c1], [[sxx / det, -sx / det], [-sx / det, s / det]])
}

/// Unbinding depth of the N-th particle from DMC separation energies on a
/// descending depth grid. The grid stops at the first depth where
/// `E_N - E_{N-1} >= 0`; a line through the last `fit_points` samples
/// (including that bracketing one) gives the crossing, and the distance to a
/// quadratic fit is folded into the error.
pub fn unbinding_threshold_dmc(n: usize, g: f64, scan: &DmcThresholdScan) -> Result<DmcThreshold> {
    if n < 2 {
        return Err(CullError::param("n", "need N >= 2"));
    }
    if !(scan.step > 0.0 && scan.start > scan.floor && scan.fit_points >= 2) {
        return Err(CullError::param(
            "scan",
            "need step > 0, start > floor and at least two fit points",
        ));
    }
    let mut samples: Vec<SeparationSample> = Vec::new();
    let mut depth = scan.start;
    while depth >= scan.floor - 1e-12 {
        let well = WellSpec::with_box(depth, scan.width, scan.box_size)?;
        let (e_n, s_n) = ground_energy_dmc(n, g, &well, &scan.config)?;
        let (e_prev, s_prev) = ground_energy_dmc(n - 1, g, &well, &scan.config)?;
        let sample = SeparationSample {
            depth,
            separation: e_n - e_prev,
            stderr: s_n.hypot(s_prev),
        };
        samples.push(sample);
        if sample.separation >= 0.0 {
            break;
        }
        depth -= scan.step;
    }
    if samples[0].separation >= 0.0 {
        return Err(CullError::NoBracket(format!(
            "E_N - E_(N-1) = {:.3e} is already non-negative at the deepest grid depth {}",
            samples[0].separation, scan.start
        )));
    }
    let crossed = samples.last().is_some_and(|s| s.separation >= 0.0);
    let tail = |count: usize| -> Vec<(f64, f64, f64)> {
        samples[samples.len().saturating_sub(count)..]
            .iter()
            .map(|s| (s.depth, s.separation, s.stderr.max(1e-12)))
            .collect()
    };
    let pts = tail(scan.fit_points);
    let ([c0, c1], cov) = weighted_line(&pts);
    let root = -c0 / c1;
    let var = (cov[0][0] + root * root * cov[1][1] + 2.0 * root * cov[0][1]) / (c1 * c1);
    let statistical_error = var.max(0.0).sqrt();

    let quadratic_depth = (samples.len() > scan.fit_points).then(|| {
        let q = tail(scan.fit_points + 1);
        quadratic_root(&q, root)
    });
    let sensitivity = quadratic_depth.flatten().map_or(0.0, |q| (q - root).abs());
    let mut warnings = Vec::new();
    if !crossed {
        warnings.push(format!(
            "grid ended at depth {} before the separation energy turned positive",
            scan.floor
        ));
    }
    if quadratic_depth.flatten().is_none() {
        warnings.push("quadratic sensitivity unavailable".to_string());
    }
    Ok(DmcThreshold {
        point: PhasePoint {
            g,
            depth: root,
            n,
            method: Method::Dmc,
            error: statistical_error.hypot(sensitivity),
            warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
        },
        samples,
        quadratic_depth: quadratic_depth.flatten(),
        statistical_error,
    })
}

/// Root of the least-squares parabola nearest to `guess`.
fn quadratic_root(pts: &[(f64, f64, f64)], guess: f64) -> Option<f64> {
    let rows = pts.len();
    let a = nalgebra::DMatrix::from_fn(rows, 3, |i, j| pts[i].0.powi(j as i32) / pts[i].2);
    let b = nalgebra::DVector::from_iterator(rows, pts.iter().map(|p| p.1 / p.2));
    let c = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    if c2.abs() < 1e-14 * c1.abs().max(1.0) {
        return Some(-c0 / c1);
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return None;
    }
    let r1 = (-c1 + disc.sqrt()) / (2.0 * c2);
    let r2 = (-c1 - disc.sqrt()) / (2.0 * c2);
    Some(if (r1 - guess).abs() < (r2 - guess).abs() {
        r1
    } else {
        r2
    })
}

/// Slope of `ln stderr` against `ln blocks` for a sequence of runs.
pub fn error_scaling_slope(results: &[DmcResult]) -> f64 {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .map(|r| ((r.block_energies.len() as f64).ln(), r.stderr.ln()))
        .collect();
    linear_fit(&pts).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(g: f64, depth: f64) -> TrialWavefunction {
        TrialWavefunction::new(g, &WellSpec::new(depth).unwrap(), &TrialParams::default()).unwrap()
    }

    #[test]
    fn jastrow_satisfies_cusp_and_matches_at_cutoff() {
        let t = trial(1.3, 30.0);
        let (_, du0, _) = t.jastrow_terms(0.0);
        assert!((du0 - 0.65).abs() < 1e-12);
        let (u, du, _) = t.jastrow_terms(t.cutoff - 1e-12);
        assert!(u.abs() < 1e-12 && du.abs() < 1e-10);
    }

    #[test]
    fn noninteracting_local_energy_is_constant() {
        let t = trial(0.0, 30.0);
        let e1 = t.envelope.energy;
        for x in [[0.1, -0.2, 0.3], [1.5, -2.0, 0.49], [4.0, 0.0, -4.4]] {
            let ev = t.evaluate(&x).unwrap();
            assert!(
                (ev.local_energy - 3.0 * e1).abs() < 1e-9 * e1.abs(),
                "{x:?}: {}",
                ev.local_energy
            );
        }
    }

    #[test]
    fn local_energy_matches_numerical_laplacian() {
        let t = TrialWavefunction::new(
            2.0,
            &WellSpec::new(10.0).unwrap(),
            &TrialParams {
                envelope_depth: Some(7.0),
                cutoff: 0.5,
            },
        )
        .unwrap();
        let x = [0.12, -0.05, 0.61];
        let h = 1e-4;
        let psi = |y: &[f64]| t.evaluate(y).unwrap().log_amplitude.exp();
        let p0 = psi(&x);
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        for i in 0..3 {
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            kinetic += -0.5 * (psi(&up) - 2.0 * p0 + psi(&dn)) / (h * h * p0);
            potential += t.well.potential(x[i]);
        }
        let ev = t.evaluate(&x).unwrap();
        assert!(
            (ev.local_energy - kinetic - potential).abs() < 1e-4,
            "{} vs {}",
            ev.local_energy,
            kinetic + potential
        );
        for i in 0..3 {
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            let slope = (psi(&up).ln() - psi(&dn).ln()) / (2.0 * h);
            assert!((slope - ev.drift[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_jump_at_contact_equals_g() {
        // relative coordinate r = x1 - x2 at fixed centre of mass
        let g = 1.7;
        let t = trial(g, 30.0);
        let h = 1e-4;
        let c = 0.1;
        let psi = |r: f64| t.evaluate(&[c + 0.5 * r, c - 0.5 * r]).unwrap().log_amplitude.exp();
        let right = (psi(2.0 * h) - psi(h)) / h;
        let left = (psi(-h) - psi(-2.0 * h)) / h;
        let jump = (right - left) / psi(0.0);
        assert!((jump - g).abs() < 1e-3 * g.max(1.0), "jump {jump}");
        // the local energy stays finite on approach to contact
        let e1 = t.evaluate(&[c + 0.5e-4, c - 0.5e-4]).unwrap().local_energy;
        let e2 = t.evaluate(&[c + 1e-4, c - 1e-4]).unwrap().local_energy;
        assert!((e1 - e2).abs() < 1e-3, "{e1} {e2}");
    }

    #[test]
    fn amplitude_is_permutation_symmetric() {
        let t = trial(1.0, 20.0);
        let a = t.evaluate(&[0.3, -0.1, 0.05]).unwrap();
        let b = t.evaluate(&[0.05, 0.3, -0.1]).unwrap();
        assert!((a.log_amplitude - b.log_amplitude).abs() < 1e-12);
        assert!((a.local_energy - b.local_energy).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_box_positions_and_bad_config() {
        let t = trial(1.0, 20.0);
        assert!(matches!(t.evaluate(&[0.0, 5.0]), Err(CullError::OutOfBox { .. })));
        let bad = DmcConfig {
            walkers: 10,
            ..DmcConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    fn quick() -> DmcConfig {
        DmcConfig {
            walkers: 200,
            blocks: 10,
            steps_per_block: 200,
            equilibration_blocks: 1,
            time_step: 2e-3,
            ..DmcConfig::default()
        }
    }

    #[test]
    fn seed_determinism() {
        let well = WellSpec::new(20.0).unwrap();
        let a = run_dmc(2, 1.0, &well, &quick()).unwrap();
        let b = run_dmc(2, 1.0, &well, &quick()).unwrap();
        assert_eq!(a, b);
        let c = run_dmc(2, 1.0, &well, &DmcConfig { seed: 2, ..quick() }).unwrap();
        assert_ne!(a.energy, c.energy);
    }

    #[test]
    fn poor_envelope_projects_to_noninteracting_energy() {
        let well = WellSpec::new(20.0).unwrap();
        let cfg = DmcConfig {
            trial: TrialParams {
                envelope_depth: Some(16.0),
                cutoff: 0.5,
            },
            ..quick()
        };
        let r = run_dmc(2, 0.0, &well, &cfg).unwrap();
        let e1 = solve_box_states(&well, 1).unwrap()[0].energy;
        assert!(
            (r.energy - 2.0 * e1).abs() < 4.0 * r.stderr + 5e-3,
            "{} vs {}",
            r.energy,
            2.0 * e1
        );
        assert!(r.population_history.iter().all(|&p| p > 100.0 && p < 400.0));
    }

    #[test]
    fn weighted_line_recovers_exact_data() {
        let pts: Vec<_> = (0..4).map(|i| (i as f64, 2.0 - 0.5 * i as f64, 0.1)).collect();
        let ([c0, c1], _) = weighted_line(&pts);
        assert!((c0 - 2.0).abs() < 1e-12 && (c1 + 0.5).abs() < 1e-12);
        let q = quadratic_root(
            &[(0.0, -1.0, 1.0), (1.0, 0.0, 1.0), (2.0, 3.0, 1.0), (3.0, 8.0, 1.0)],
            1.2,
        )
        .unwrap();
        assert!((q - 1.0).abs() < 1e-10);
    }
}
