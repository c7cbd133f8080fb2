//! Exact diagonalization of N contact-interacting bosons in the box basis.
//!
//! The many-body Hamiltonian is block diagonal in total parity. Each block is
//! assembled in sparse form and diagonalized for its lowest levels; the bosonic
//! ground state always lies in the even block.

pub mod basis;
pub mod eigen;
pub mod hamiltonian;

use serde::{Deserialize, Serialize};

pub use basis::{basis_dimension, FockBasis, FockState, DEFAULT_DIMENSION_CAP};
pub use eigen::{diagonalize, Eigenpairs};
pub use hamiltonian::{build_hamiltonian, InteractionTable, SectorHamiltonian, SparseSym};

use crate::error::{CullError, Result};
use crate::model::{Method, PhasePoint, WellSpec};
use crate::roots::regula_falsi;
use crate::single_particle::{solve_box_states, Parity, SingleParticleState};

/// Default number of box modes.
pub const DEFAULT_MODES: usize = 30;

/// Extra modes used for the basis-convergence error bar.
pub const CONVERGENCE_STEP: usize = 10;

/// Minimum fraction of the one-body density inside the well for a bound level.
pub const DEFAULT_THETA: f64 = 0.5;

/// Box growth factor for the stability check.
pub const STABILITY_FACTOR: f64 = 1.25;

/// Largest energy change under box growth for a level to count as stable.
pub const DEFAULT_STABILITY_TOL: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisMeta {
    pub n: usize,
    pub m: usize,
    pub box_size: f64,
    pub g: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManyBodySpectrum {
    pub meta: BasisMeta,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Coefficients over the full Fock basis, one vector per level.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub parities: Vec<Parity>,
    pub residuals: Vec<f64>,
    /// Fraction of the one-body density inside the well.
    pub localization: Vec<f64>,
    pub bound_flags: Vec<bool>,
    /// Levels that pass the energy and localization tests but move with the box.
    pub ambiguous: Vec<bool>,
}

/// Modes, basis and interaction table for one `(N, M, well)` combination.
pub struct DiagProblem {
    pub well: WellSpec,
    pub modes: Vec<SingleParticleState>,
    pub basis: FockBasis,
    pub table: Option<InteractionTable>,
}

impl DiagProblem {
    pub fn new(n: usize, m: usize, well: &WellSpec) -> Result<Self> {
        let basis = FockBasis::new(n, m)?;
        let modes = solve_box_states(well, m)?;
        let table = if n >= 2 {
            Some(InteractionTable::new(&modes)?)
        } else {
            None
        };
        Ok(DiagProblem {
            well: *well,
            modes,
            basis,
            table,
        })
    }

    fn sectors(&self, g: f64) -> Result<Vec<SectorHamiltonian>> {
        build_hamiltonian(&self.basis, &self.modes, self.table.as_ref(), g)
    }

    /// Lowest level of the even sector.
    pub fn ground_energy(&self, g: f64) -> Result<f64> {
        let sectors = self.sectors(g)?;
        let even = sectors
            .iter()
            .find(|s| s.parity == Parity::Even)
            .expect("the all-in-mode-0 state is even");
        Ok(diagonalize(&even.matrix, 1)?.values[0])
    }

    /// The `k` lowest levels over both parity sectors, with localization.
    pub fn spectrum(&self, g: f64, k: usize) -> Result<ManyBodySpectrum> {
        let sectors = self.sectors(g)?;
        let mut levels: Vec<(f64, Parity, Vec<f64>, f64)> = Vec::new();
        for sector in &sectors {
            let pairs = diagonalize(&sector.matrix, k)?;
            for ((value, local), res) in pairs.values.iter().zip(&pairs.vectors).zip(&pairs.residuals) {
                let mut full = vec![0.0; self.basis.len()];
                for (li, &gi) in sector.members.iter().enumerate() {
                    full[gi] = local[li];
                }
                levels.push((*value, sector.parity, full, *res));
            }
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        levels.truncate(k);
        let well_overlaps = self.well_overlaps();
        let localization = levels
            .iter()
            .map(|l| localization(&self.basis, &self.modes, &well_overlaps, &l.2))
            .collect();
        let count = levels.len();
        Ok(ManyBodySpectrum {
            meta: BasisMeta {
                n: self.basis.n,
                m: self.basis.m,
                box_size: self.well.box_size,
                g,
                depth: self.well.depth,
            },
            eigenvalues: levels.iter().map(|l| l.0).collect(),
            parities: levels.iter().map(|l| l.1).collect(),
            residuals: levels.iter().map(|l| l.3).collect(),
            eigenvectors: levels.into_iter().map(|l| l.2).collect(),
            localization,
            bound_flags: vec![false; count],
            ambiguous: vec![false; count],
        })
    }

    fn well_overlaps(&self) -> Vec<Vec<f64>> {
        let m = self.modes.len();
        let mut w = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..=i {
                let v = self.modes[i].well_overlap(&self.modes[j]);
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        w
    }
}

/// `sum_ij <a+_i a_j> W_ij / N` with `W_ij` the overlap of modes i, j inside the well.
fn localization(basis: &FockBasis, modes: &[SingleParticleState], w: &[Vec<f64>], coeffs: &[f64]) -> f64 {
    let m = basis.m;
    let mut total = 0.0;
    let mut work: FockState = vec![0; m];
    for (b, occ) in basis.states.iter().enumerate() {
        let cb = coeffs[b];
        if cb == 0.0 {
            continue;
        }
        work.copy_from_slice(occ);
        for j in 0..m {
            if occ[j] == 0 {
                continue;
            }
            work[j] -= 1;
            for i in 0..m {
                if modes[i].parity != modes[j].parity || w[i][j] == 0.0 {
                    continue;
                }
                let amp = (occ[j] as f64).sqrt() * (work[i] as f64 + 1.0).sqrt();
                work[i] += 1;
                let a = basis.index_of(&work).expect("number conserving");
                work[i] -= 1;
                total += coeffs[a] * cb * amp * w[i][j];
            }
            work[j] += 1;
        }
    }
    (total / basis.n as f64).clamp(0.0, 1.0)
}

/// Inputs to [`classify_bound`].
#[derive(Debug, Clone)]
pub struct BoundCriteria<'a> {
    /// Ground energy of N-1 particles in the same box (zero for N = 1).
    pub reference_energy: f64,
    pub theta: f64,
    /// Spectrum of the same problem in the enlarged box.
    pub enlarged: Option<&'a ManyBodySpectrum>,
    /// Reference energy in the enlarged box.
    pub enlarged_reference: f64,
    pub stability_tol: f64,
}

/// Flag levels that lie below the N-1 particle ground energy (and below the
/// well top), keep more than `theta` of their density inside the well, and
/// keep both properties with an energy shift below `stability_tol` when the
/// box grows.
pub fn classify_bound(mut spec: ManyBodySpectrum, criteria: &BoundCriteria) -> ManyBodySpectrum {
    let threshold = criteria.reference_energy.min(0.0);
    for i in 0..spec.eigenvalues.len() {
        let e = spec.eigenvalues[i];
        let candidate = e < threshold && spec.localization[i] > criteria.theta;
        let stable = criteria.enlarged.is_none_or(|big| {
            let big_threshold = criteria.enlarged_reference.min(0.0);
            nearest_level(big, e, spec.parities[i]).is_some_and(|j| {
                (big.eigenvalues[j] - e).abs() < criteria.stability_tol
                    && big.eigenvalues[j] < big_threshold
                    && big.localization[j] > criteria.theta
            })
        });
        spec.bound_flags[i] = candidate && stable;
        spec.ambiguous[i] = candidate && !stable;
    }
    spec
}

fn nearest_level(spec: &ManyBodySpectrum, e: f64, parity: Parity) -> Option<usize> {
    (0..spec.eigenvalues.len())
        .filter(|&j| spec.parities[j] == parity)
        .min_by(|&a, &b| {
            (spec.eigenvalues[a] - e)
                .abs()
                .total_cmp(&(spec.eigenvalues[b] - e).abs())
        })
}

/// Spectrum with boundness flags, computed in the box `D` and in `1.25 D`
/// (with proportionally more modes).
pub fn bound_spectrum(n: usize, g: f64, well: &WellSpec, m: usize, k: usize) -> Result<ManyBodySpectrum> {
    let base = DiagProblem::new(n, m, well)?;
    let spec = base.spectrum(g, k)?;
    let big_well = well.with_box_size(STABILITY_FACTOR * well.box_size);
    let big_m = (STABILITY_FACTOR * m as f64).round() as usize;
    let big = DiagProblem::new(n, big_m, &big_well)?.spectrum(g, 2 * k)?;
    let (reference, big_reference) = if n == 1 {
        (0.0, 0.0)
    } else {
        (
            DiagProblem::new(n - 1, m, well)?.ground_energy(g)?,
            DiagProblem::new(n - 1, big_m, &big_well)?.ground_energy(g)?,
        )
    };
    Ok(classify_bound(
        spec,
        &BoundCriteria {
            reference_energy: reference,
            theta: DEFAULT_THETA,
            enlarged: Some(&big),
            enlarged_reference: big_reference,
            stability_tol: DEFAULT_STABILITY_TOL,
        },
    ))
}

/// `E_N - E_{N-1}` of the ground levels with `m` modes.
pub fn separation_energy(n: usize, g: f64, well: &WellSpec, m: usize) -> Result<f64> {
    let e_n = DiagProblem::new(n, m, well)?.ground_energy(g)?;
    let e_prev = if n == 1 {
        0.0
    } else {
        DiagProblem::new(n - 1, m, well)?.ground_energy(g)?
    };
    Ok(e_n - e_prev)
}

/// Ground energy extrapolated to an infinite basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisExtrapolation {
    pub energy: f64,
    /// Largest shift of `energy` when any single basis size is left out.
    pub error: f64,
    /// Coefficients `a, b` of `E(K) = E_inf + a/K + b/K^2`.
    pub coefficients: [f64; 2],
    /// `(M, K, E(M))` for every basis size used.
    pub samples: Vec<(usize, f64, f64)>,
}

fn fit_inverse_k(samples: &[(usize, f64, f64)]) -> [f64; 3] {
    let rows = samples.len();
    let a = nalgebra::DMatrix::from_fn(rows, 3, |i, j| samples[i].1.powi(-(j as i32)));
    let b = nalgebra::DVector::from_iterator(rows, samples.iter().map(|s| s.2));
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .expect("svd computed with both factors");
    [x[0], x[1], x[2]]
}

/// Ground energies for each basis size in `ms`, fitted to
/// `E_inf + a/K + b/K^2` with `K` the highest mode wavenumber. The contact
/// cusp makes the truncation error fall off only as `1/K`, so raw energies at
/// a few dozen modes are off by ~1e-2.
pub fn extrapolated_ground_energy(n: usize, g: f64, well: &WellSpec, ms: &[usize]) -> Result<BasisExtrapolation> {
    if ms.len() < 4 {
        return Err(CullError::param("ms", "need at least four basis sizes"));
    }
    let mut samples = Vec::with_capacity(ms.len());
    for &m in ms {
        let problem = DiagProblem::new(n, m, well)?;
        let k = problem.modes.last().expect("m >= 1").k;
        samples.push((m, k, problem.ground_energy(g)?));
    }
    let [energy, a, b] = fit_inverse_k(&samples);
    let error = (0..samples.len())
        .map(|skip| {
            let rest: Vec<_> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, s)| *s)
                .collect();
            (fit_inverse_k(&rest)[0] - energy).abs()
        })
        .fold(0.0, f64::max);
    Ok(BasisExtrapolation {
        energy,
        error,
        coefficients: [a, b],
        samples,
    })
}

/// Options for [`threshold_scan_diag`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagScan {
    pub modes: usize,
    pub width: f64,
    pub box_size: f64,
    pub tol: f64,
}

impl Default for DiagScan {
    fn default() -> Self {
        DiagScan {
            modes: DEFAULT_MODES,
            width: 1.0,
            box_size: 10.0,
            tol: 1e-4,
        }
    }
}

/// Root of the separation energy in `depth` on `[lo, hi]` with `m` modes.
/// Unbinding depth with exactly `m` modes, without basis extrapolation.
pub fn fixed_basis_threshold(n: usize, g: f64, scan: &DiagScan, m: usize, lo: f64, hi: f64) -> Result<f64> {
    let f = |v: f64| -> Result<f64> {
        let well = WellSpec::with_box(v, scan.width, scan.box_size)?;
        separation_energy(n, g, &well, m)
    };
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo >= 0.0 && f_hi < 0.0) {
        return Err(CullError::BracketFailure {
            lo,
            hi,
            reason: format!("separation energy {f_lo:.3e} at lo and {f_hi:.3e} at hi do not bracket an unbinding"),
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let (root, _) = regula_falsi(f, lo, hi, f_lo, f_hi, scan.tol, 200)?;
    Ok(root)
}

/// Smallest depth whose N-particle ground level is bound, found from the sign
/// of `E_N - E_{N-1}` with `M` and `M + 10` modes. The reported depth is the
/// infinite-basis value from a `1/K` law in the highest mode wavenumber `K`;
/// the error bar is the correction still applied to the `M + 10` result.
pub fn threshold_scan_diag(n: usize, g: f64, lo: f64, hi: f64, scan: &DiagScan) -> Result<PhasePoint> {
    if n == 0 {
        return Err(CullError::param("n", "need N >= 1"));
    }
    let m0 = scan.modes;
    let m1 = m0 + CONVERGENCE_STEP;
    let t0 = fixed_basis_threshold(n, g, scan, m0, lo, hi)?;
    let t1 = fixed_basis_threshold(n, g, scan, m1, lo, hi)?;
    let top_k = |m: usize, depth: f64| -> Result<f64> {
        let well = WellSpec::with_box(depth, scan.width, scan.box_size)?;
        Ok(solve_box_states(&well, m)?.last().expect("m >= 1").k)
    };
    let (k0, k1) = (top_k(m0, t0)?, top_k(m1, t1)?);
    // t(K) = t_inf + c/K through both points
    let t_inf = (t1 * k1 - t0 * k0) / (k1 - k0);
    Ok(PhasePoint {
        g,
        depth: t_inf,
        n,
        method: Method::Diag,
        error: (t1 - t_inf).abs().max(scan.tol),
        warning: None,
    })
}

/// One row of a level sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagLevelRow {
    pub depth: f64,
    pub n: usize,
    pub level: usize,
    pub energy: f64,
    pub bound: bool,
}

/// Bound-level data over a depth grid for `n = 1..=n_max`.
pub fn diag_sweep(
    well: &WellSpec,
    g: f64,
    depths: &[f64],
    n_max: usize,
    m: usize,
    k: usize,
) -> Result<Vec<DiagLevelRow>> {
    let mut rows = Vec::new();
    for &v in depths {
        let w = well.at_depth(v);
        for n in 1..=n_max {
            let spec = bound_spectrum(n, g, &w, m, k)?;
            for (level, (&energy, &bound)) in spec.eigenvalues.iter().zip(&spec.bound_flags).enumerate() {
                rows.push(DiagLevelRow {
                    depth: v,
                    n,
                    level,
                    energy,
                    bound,
                });
            }
        }
    }
    Ok(rows)
}
