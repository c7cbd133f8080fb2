//! Weak-coupling treatments of N bosons in the well.
//!
//! The two-orbital ansatz puts N-1 particles in `phi1 = sqrt(k1) exp(-k1 |x|)`
//! and one in `phi2 = sqrt(k2) exp(-k2 |x|)`, symmetrized over particles.
//! The orbitals are not orthogonal, so every matrix element carries powers of
//! `s = <phi1|phi2>`. All integrals are closed-form on the infinite line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CullError, Result};
use crate::model::WellSpec;
use crate::optimize::{golden_section, nelder_mead};

/// Smallest decay constant explored by the minimizer.
pub const KAPPA_MIN: f64 = 1e-4;

/// Below this `kappa2` the second orbital is reported as delocalized.
pub const DELOCALIZED_KAPPA: f64 = 1e-3;

const RESTARTS: usize = 5;
const ARGMIN_TOL: f64 = 1e-4;

/// One-body and contact integrals of the exponential orbitals.
#[derive(Debug, Clone, Copy)]
struct Integrals {
    s: f64,
    h11: f64,
    h12: f64,
    h22: f64,
    u1111: f64,
    u1112: f64,
    u1122: f64,
}

fn overlap(ka: f64, kb: f64) -> f64 {
    2.0 * (ka * kb).sqrt() / (ka + kb)
}

/// `<a| -1/2 d2/dx2 - V0 1_well |b>`.
fn one_body(ka: f64, kb: f64, well: &WellSpec) -> f64 {
    let sum = ka + kb;
    let kinetic = 0.5 * ka * kb * overlap(ka, kb);
    let potential = -well.depth * (ka * kb).sqrt() * 2.0 * (-(-sum * well.half_width()).exp_m1()) / sum;
    kinetic + potential
}

fn contact(k: [f64; 4]) -> f64 {
    (k[0] * k[1] * k[2] * k[3]).sqrt() * 2.0 / (k[0] + k[1] + k[2] + k[3])
}

impl Integrals {
    fn new(k1: f64, k2: f64, well: &WellSpec) -> Self {
        Integrals {
            s: overlap(k1, k2),
            h11: one_body(k1, k1, well),
            h12: one_body(k1, k2, well),
            h22: one_body(k2, k2, well),
            u1111: contact([k1; 4]),
            u1112: contact([k1, k1, k1, k2]),
            u1122: contact([k1, k1, k2, k2]),
        }
    }
}

fn choose2(n: f64) -> f64 {
    0.5 * n * (n - 1.0)
}

/// `<Psi|H|Psi> / <Psi|Psi>` for the symmetrized two-orbital state.
/// `kappa2 = 0` gives the limit of a fully delocalized second particle.
pub fn two_orbital_energy(kappa1: f64, kappa2: f64, n: usize, g: f64, well: &WellSpec) -> Result<f64> {
    if !(kappa1 > 0.0) || !(kappa2 >= 0.0) {
        return Err(CullError::param(
            "kappa",
            format!("need kappa > 0, got ({kappa1}, {kappa2})"),
        ));
    }
    if n < 2 {
        return Err(CullError::param("n", "two-orbital ansatz needs N >= 2"));
    }
    if kappa2 == 0.0 {
        return Ok(delocalized_energy(kappa1, n, g, well));
    }
    Ok(energy_unchecked(kappa1, kappa2, n, g, well))
}

fn energy_unchecked(k1: f64, k2: f64, n: usize, g: f64, well: &WellSpec) -> f64 {
    let ints = Integrals::new(k1, k2, well);
    let nf = n as f64;
    let s2 = ints.s * ints.s;
    let norm = nf + nf * (nf - 1.0) * s2;
    let one = nf * (ints.h22 + (nf - 1.0) * ints.h11)
        + nf * (nf - 1.0) * (2.0 * ints.s * ints.h12 + (nf - 2.0) * s2 * ints.h11);
    let two = nf * (choose2(nf - 1.0) * ints.u1111 + (nf - 1.0) * ints.u1122)
        + nf * (nf - 1.0) * (ints.u1122 + 2.0 * (nf - 2.0) * ints.s * ints.u1112 + choose2(nf - 2.0) * s2 * ints.u1111);
    (one + g * two) / norm
}

/// Energy of N-1 particles in `phi1` with the last one spread over all space.
fn delocalized_energy(k1: f64, n: usize, g: f64, well: &WellSpec) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * one_body(k1, k1, well) + g * choose2(nf - 1.0) * contact([k1; 4])
}

/// All N particles in one orbital: `N k^2/2 - N V0 (1 - e^{-kL}) + g N (N-1) k / 4`.
pub fn single_orbital_energy(kappa: f64, n: usize, g: f64, well: &WellSpec) -> f64 {
    let nf = n as f64;
    nf * one_body(kappa, kappa, well) + g * choose2(nf) * contact([kappa; 4])
}

/// Search range `[KAPPA_MIN, 10 sqrt(2 V0)]`, widened for very shallow wells.
fn kappa_max(well: &WellSpec) -> f64 {
    (10.0 * (2.0 * well.depth).sqrt()).max(1.0)
}

/// Minimum of the single-orbital energy, `(kappa, energy)`.
pub fn minimize_single_orbital(n: usize, g: f64, well: &WellSpec) -> (f64, f64) {
    let f = |u: f64| single_orbital_energy(u.exp(), n, g, well);
    let (u, e) = golden_section(f, KAPPA_MIN.ln(), kappa_max(well).ln(), 1e-12);
    (u.exp(), e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult {
    pub depth: f64,
    pub kappa1: f64,
    /// Zero when the second orbital has delocalized.
    pub kappa2: f64,
    pub energy: f64,
    pub single_orbital_kappa: f64,
    pub single_orbital_energy: f64,
    pub converged: bool,
    /// `kappa2` hit the lower edge of the search domain.
    pub delocalized: bool,
    /// Restarts ended at minima further apart than the argmin tolerance.
    pub multimodal: bool,
    /// `kappa1` and `kappa2` coincide (the ansatz collapsed to one orbital).
    pub degenerate: bool,
}

/// Minimize the two-orbital energy over `(kappa1, kappa2)`.
pub fn minimize_two_orbital(n: usize, g: f64, well: &WellSpec) -> Result<VariationalResult> {
    if n < 2 {
        return Err(CullError::param("n", "two-orbital ansatz needs N >= 2"));
    }
    if !(g >= 0.0) {
        return Err(CullError::param("g", "need g >= 0"));
    }
    let (u_lo, u_hi) = (KAPPA_MIN.ln(), kappa_max(well).ln());
    let clamp = |u: f64| u.clamp(u_lo, u_hi);
    let objective = |p: &[f64]| energy_unchecked(clamp(p[0]).exp(), clamp(p[1]).exp(), n, g, well);

    // nested golden-section in log kappa, then a simplex polish
    let inner = |u1: f64| golden_section(|u2| objective(&[u1, u2]), u_lo, u_hi, 1e-8);
    let (u1, _) = golden_section(|u1| inner(u1).1, u_lo, u_hi, 1e-8);
    let (u2, _) = inner(u1);
    let polish = nelder_mead(objective, &[u1, u2], 0.05, 1e-13, 4000);

    let (k_single, e_single) = minimize_single_orbital(n, g, well);
    let mut best = polish.clone();
    let mut minima = vec![polish.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<[f64; 2]> = vec![[k_single.ln(), k_single.ln()]];
    for _ in 1..RESTARTS {
        starts.push([rng.gen_range(u_lo..u_hi), rng.gen_range(u_lo..u_hi)]);
    }
    for s in starts {
        let r = nelder_mead(objective, &s, 0.5, 1e-13, 4000);
        if r.value < best.value {
            best = r.clone();
        }
        minima.push(r);
    }
    let converged = best.converged || polish.converged;
    let k1 = clamp(best.x[0]).exp();
    let mut k2 = clamp(best.x[1]).exp();
    let mut energy = best.value;

    // compare against the kappa2 = 0 boundary
    let (u1_deloc, e_deloc) = golden_section(|u| delocalized_energy(u.exp(), n, g, well), u_lo, u_hi, 1e-12);
    let mut k1 = k1;
    let delocalized = k2 < DELOCALIZED_KAPPA || e_deloc < energy;
    if delocalized {
        k2 = 0.0;
        if e_deloc <= energy {
            energy = e_deloc;
            k1 = u1_deloc.exp();
        } else {
            energy = delocalized_energy(k1, n, g, well);
        }
    }
    // any converged restart that settles elsewhere marks a second basin
    let multimodal = minima.iter().any(|m| {
        let far = (clamp(m.x[0]).exp() - clamp(best.x[0]).exp()).abs() > ARGMIN_TOL
            || (clamp(m.x[1]).exp() - clamp(best.x[1]).exp()).abs() > ARGMIN_TOL;
        far && m.converged
    });
    let degenerate = k2 > 0.0 && (k1 - k2).abs() <= 1e-3 * k1;
    Ok(VariationalResult {
        depth: well.depth,
        kappa1: k1,
        kappa2: k2,
        energy: energy.min(e_single),
        single_orbital_kappa: k_single,
        single_orbital_energy: e_single,
        converged,
        delocalized,
        multimodal,
        degenerate: degenerate || e_single <= energy,
    })
}

/// Two-orbital minimization at each depth.
pub fn variational_scan(n: usize, g: f64, well: &WellSpec, depths: &[f64]) -> Result<Vec<VariationalResult>> {
    depths
        .iter()
        .map(|&v| minimize_two_orbital(n, g, &well.at_depth(v)))
        .collect()
}

/// Depth `2 g (N-1) / L` below which the second orbital no longer binds.
pub fn tf_threshold(n: usize, g: f64, width: f64) -> f64 {
    2.0 * g * n.saturating_sub(1) as f64 / width
}

/// Depth `g (N-1) / L` at which a single Thomas-Fermi condensate reaches the well top.
pub fn gp_single_orbital_threshold(n: usize, g: f64, width: f64) -> f64 {
    g * n.saturating_sub(1) as f64 / width
}

/// Thomas-Fermi treatments need `N g >> 1/L`; this uses `N g L >= 10`.
pub fn tf_regime_valid(n: usize, g: f64, width: f64) -> bool {
    n as f64 * g * width >= 10.0
}

/// Final-stage gap `3 g N^2 / 2` in the mean-field limit.
pub fn final_stage_gap_meanfield(n: usize, g: f64) -> f64 {
    1.5 * g * (n * n) as f64
}

/// N-independent depth window `2 g / L`.
pub fn depth_interval_meanfield(g: f64, width: f64) -> f64 {
    2.0 * g / width
}

pub fn max_rate_meanfield(n: usize, g: f64, width: f64) -> f64 {
    final_stage_gap_meanfield(n, g) * depth_interval_meanfield(g, width)
}

/// Grid-sampled self-consistent orbitals of the coupled equations
/// `(h + g(N-2)|phi1|^2 + 2g|phi2|^2) phi1 = mu1 phi1` and
/// `(h + 2g(N-1)|phi1|^2) phi2 = mu2 phi2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalPair {
    /// Interior mesh points; the orbitals vanish at the walls.
    pub grid: Vec<f64>,
    pub spacing: f64,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Residual after each iteration.
    pub residual_history: Vec<f64>,
}

/// Uniform mesh for [`solve_coupled_orbitals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    /// Points per unit length.
    pub density: usize,
    pub tolerance: f64,
    pub max_iter: usize,
    pub mixing: f64,
}

impl Default for Mesh {
    fn default() -> Self {
        Mesh {
            density: 100,
            tolerance: 1e-8,
            max_iter: 5000,
            mixing: 0.3,
        }
    }
}

/// Solve `(a_i + d_i) x_i + c (x_{i-1} + x_{i+1}) = b_i` for constant off-diagonal `c`.
fn tridiagonal_solve(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    c_prime[0] = off / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c_prime[i - 1];
        c_prime[i] = off / m;
        d_prime[i] = (rhs[i] - off * d_prime[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

struct GridOp<'a> {
    h: f64,
    base: &'a [f64],
}

impl GridOp<'_> {
    /// `(H phi)_i` with the kinetic stencil and a local potential `base + extra`.
    fn apply(&self, extra: &[f64], phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        let t = 0.5 / (self.h * self.h);
        (0..n)
            .map(|i| {
                let left = if i > 0 { phi[i - 1] } else { 0.0 };
                let right = if i + 1 < n { phi[i + 1] } else { 0.0 };
                t * (2.0 * phi[i] - left - right) + (self.base[i] + extra[i]) * phi[i]
            })
            .collect()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    fn normalize(&self, phi: &mut [f64]) {
        let norm = self.dot(phi, phi).sqrt();
        phi.iter_mut().for_each(|v| *v /= norm);
    }

    /// One implicit imaginary-time step `(H - shift) phi_new = phi` (inverse iteration).
    fn implicit_step(&self, extra: &[f64], phi: &[f64], shift: f64) -> Vec<f64> {
        let t = 0.5 / (self.h * self.h);
        let diag: Vec<f64> = self
            .base
            .iter()
            .zip(extra)
            .map(|(b, e)| 2.0 * t + b + e - shift)
            .collect();
        let mut out = tridiagonal_solve(&diag, -t, phi);
        self.normalize(&mut out);
        out
    }

    fn residual(&self, extra: &[f64], phi: &[f64]) -> (f64, f64) {
        let hphi = self.apply(extra, phi);
        let mu = self.dot(phi, &hphi);
        let r: Vec<f64> = hphi.iter().zip(phi).map(|(a, p)| a - mu * p).collect();
        (mu, self.dot(&r, &r).sqrt())
    }
}

pub fn solve_coupled_orbitals(n: usize, g: f64, well: &WellSpec, mesh: Mesh) -> Result<OrbitalPair> {
    if n < 2 {
        return Err(CullError::param("n", "coupled orbitals need N >= 2"));
    }
    if !(mesh.mixing > 0.0 && mesh.mixing <= 1.0) {
        return Err(CullError::param("mixing", "need 0 < mixing <= 1"));
    }
    well.validate()?;
    // the well edges fall midway between mesh points
    let a = well.half_width();
    let h = a / ((a * mesh.density as f64).round() + 0.5);
    let cells = 2 * (well.half_box() / h).round() as usize;
    let half = 0.5 * cells as f64 * h;
    let grid: Vec<f64> = (1..cells).map(|i| (i as f64 - 0.5 * cells as f64) * h).collect();
    let base: Vec<f64> = grid.iter().map(|&x| well.potential(x)).collect();
    let op = GridOp { h, base: &base };
    let nf = n as f64;

    let zeros = vec![0.0; grid.len()];
    let mut phi1: Vec<f64> = grid
        .iter()
        .map(|&x| (std::f64::consts::PI * x / (2.0 * half)).cos())
        .collect();
    op.normalize(&mut phi1);
    let shift = -well.depth - 1.0;
    for _ in 0..50 {
        phi1 = op.implicit_step(&zeros, &phi1, shift);
    }
    let mut phi2 = phi1.clone();

    let potentials = |p1: &[f64], p2: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let w1 = p1
            .iter()
            .zip(p2)
            .map(|(a, b)| g * (nf - 2.0) * a * a + 2.0 * g * b * b)
            .collect();
        let w2 = p1.iter().map(|a| 2.0 * g * (nf - 1.0) * a * a).collect();
        (w1, w2)
    };
    let (mut w1, mut w2) = potentials(&phi1, &phi2);
    let mut history = Vec::new();
    for it in 0..mesh.max_iter {
        // relax each orbital in its current mean-field potential
        for _ in 0..3 {
            phi1 = op.implicit_step(&w1, &phi1, shift);
            phi2 = op.implicit_step(&w2, &phi2, shift);
        }
        let (t1, t2) = potentials(&phi1, &phi2);
        for i in 0..w1.len() {
            w1[i] += mesh.mixing * (t1[i] - w1[i]);
            w2[i] += mesh.mixing * (t2[i] - w2[i]);
        }
        let (e1, e2) = potentials(&phi1, &phi2);
        let (mu1, r1) = op.residual(&e1, &phi1);
        let (mu2, r2) = op.residual(&e2, &phi2);
        let res = r1.max(r2);
        history.push(res);
        if res <= mesh.tolerance {
            return Ok(OrbitalPair {
                grid,
                spacing: h,
                phi1,
                phi2,
                mu1,
                mu2,
                residual: res,
                iterations: it + 1,
                residual_history: history,
            });
        }
    }
    Err(CullError::NonConverged {
        what: "coupled orbital iteration",
        iterations: mesh.max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}

/// Depth on `[lo, hi]` where the second orbital's chemical potential crosses
/// the top of the well.
pub fn coupled_unbinding_depth(
    n: usize,
    g: f64,
    well: &WellSpec,
    mesh: Mesh,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let mu2 = |v: f64| solve_coupled_orbitals(n, g, &well.at_depth(v), mesh).map(|p| p.mu2);
    let (mut lo, mut hi) = (lo, hi);
    if mu2(lo)? < 0.0 || mu2(hi)? >= 0.0 {
        return Err(CullError::NoBracket(format!(
            "mu2 does not change sign on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mu2(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Generic symmetrized-product expectation value by summing over all
    /// permutation pairs, using the same closed-form one-body and contact
    /// integrals.
    fn permanent_energy(kappas: &[f64], g: f64, well: &WellSpec) -> f64 {
        let n = kappas.len();
        let perms = permutations(n);
        let (mut num, mut den) = (0.0, 0.0);
        for p in &perms {
            for q in &perms {
                let bra: Vec<f64> = p.iter().map(|&i| kappas[i]).collect();
                let ket: Vec<f64> = q.iter().map(|&i| kappas[i]).collect();
                let ov: Vec<f64> = (0..n).map(|i| overlap(bra[i], ket[i])).collect();
                let prod = |skip: &[usize]| -> f64 { (0..n).filter(|i| !skip.contains(i)).map(|i| ov[i]).product() };
                den += prod(&[]);
                for i in 0..n {
                    num += one_body(bra[i], ket[i], well) * prod(&[i]);
                    for j in i + 1..n {
                        num += g * contact([bra[i], bra[j], ket[i], ket[j]]) * prod(&[i, j]);
                    }
                }
            }
        }
        num / den
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Brute-force quadrature of <H>/<Psi|Psi> for N = 3 over R^3.
    fn quadrature_energy_n3(k1: f64, k2: f64, g: f64, well: &WellSpec) -> f64 {
        use crate::quadrature::QuadratureGrid;
        let a = well.half_width();
        // panels double in length away from the well, out to 40 decay lengths
        let mut segs = vec![(-a, 0.0), (0.0, a)];
        let (mut lo, mut len) = (a, 0.5 / k1.max(k2));
        while lo < a + 40.0 / k1.min(k2) {
            segs.push((lo, lo + len));
            segs.push((-lo - len, -lo));
            lo += len;
            len *= 2.0;
        }
        let grid = QuadratureGrid::composite(&segs, f64::INFINITY);
        let m = grid.len();
        let phi = |k: f64, x: f64| k.sqrt() * (-k * x.abs()).exp();
        let tab = |k: f64| -> (Vec<f64>, Vec<f64>) {
            let v: Vec<f64> = grid.nodes.iter().map(|&x| phi(k, x)).collect();
            let d = grid.nodes.iter().zip(&v).map(|(&x, &p)| -k * x.signum() * p).collect();
            (v, d)
        };
        let (p1, d1) = tab(k1);
        let (p2, d2) = tab(k2);
        let pot: Vec<f64> = grid.nodes.iter().map(|&x| well.potential(x)).collect();
        let w = &grid.weights;
        let (mut norm, mut kin, mut vpot, mut cont) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let wt = w[i] * w[j] * w[k];
                    // particle t sits in phi2 in term t
                    let psi = p2[i] * p1[j] * p1[k] + p1[i] * p2[j] * p1[k] + p1[i] * p1[j] * p2[k];
                    let di = d2[i] * p1[j] * p1[k] + d1[i] * p2[j] * p1[k] + d1[i] * p1[j] * p2[k];
                    let dj = p2[i] * d1[j] * p1[k] + p1[i] * d2[j] * p1[k] + p1[i] * d1[j] * p2[k];
                    let dk = p2[i] * p1[j] * d1[k] + p1[i] * p2[j] * d1[k] + p1[i] * p1[j] * d2[k];
                    norm += wt * psi * psi;
                    kin += wt * 0.5 * (di * di + dj * dj + dk * dk);
                    vpot += wt * psi * psi * (pot[i] + pot[j] + pot[k]);
                }
                // contact of particles 1 and 2 at x_1 = x_2 = node i; the three pairs are equivalent
                let psi = 2.0 * p2[i] * p1[i] * p1[j] + p1[i] * p1[i] * p2[j];
                cont += w[i] * w[j] * psi * psi;
            }
        }
        (kin + vpot + g * 3.0 * cont) / norm
    }

    #[test]
    fn closed_form_matches_three_dimensional_quadrature() {
        let well = WellSpec::new(12.0).unwrap();
        for &(k1, k2) in &[(1.7, 0.6), (2.3, 1.1), (0.9, 3.0)] {
            let closed = two_orbital_energy(k1, k2, 3, 1.0, &well).unwrap();
            let brute = quadrature_energy_n3(k1, k2, 1.0, &well);
            assert!((closed - brute).abs() < 1e-6, "({k1}, {k2}): {closed} vs {brute}");
        }
    }

    #[test]
    fn closed_form_matches_permanent_sum() {
        let well = WellSpec::new(7.0).unwrap();
        for n in 2..=5 {
            for &(k1, k2, g) in &[(1.2, 0.4, 0.7), (3.0, 2.0, 2.5), (0.5, 1.5, 0.0)] {
                let mut ks = vec![k1; n - 1];
                ks.push(k2);
                let want = permanent_energy(&ks, g, &well);
                let got = two_orbital_energy(k1, k2, n, g, &well).unwrap();
                assert_relative_eq!(got, want, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn equal_kappas_reduce_to_single_orbital() {
        let well = WellSpec::new(9.0).unwrap();
        for n in 2..6 {
            let e = two_orbital_energy(1.3, 1.3, n, 0.8, &well).unwrap();
            assert_relative_eq!(e, single_orbital_energy(1.3, n, 0.8, &well), epsilon = 1e-12);
        }
    }

    #[test]
    fn no_interaction_is_sum_of_single_particle_terms() {
        let well = WellSpec::new(40.0).unwrap();
        let (k1, k2) = (2.0, 2.0);
        let e = two_orbital_energy(k1, k2, 4, 0.0, &well).unwrap();
        assert_relative_eq!(e, 4.0 * one_body(k1, k1, &well), epsilon = 1e-12);
    }

    #[test]
    fn small_kappa2_approaches_delocalized_limit() {
        let well = WellSpec::new(6.0).unwrap();
        let lim = two_orbital_energy(1.5, 0.0, 3, 1.0, &well).unwrap();
        let near = two_orbital_energy(1.5, 1e-9, 3, 1.0, &well).unwrap();
        assert!((lim - near).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_kappa() {
        let well = WellSpec::new(6.0).unwrap();
        assert!(two_orbital_energy(0.0, 1.0, 3, 1.0, &well).is_err());
        assert!(two_orbital_energy(1.0, -1.0, 3, 1.0, &well).is_err());
    }

    #[test]
    fn deep_well_orbitals_are_comparable() {
        let well = WellSpec::new(60.0).unwrap();
        let r = minimize_two_orbital(3, 1.0, &well).unwrap();
        assert!(r.converged && !r.delocalized);
        assert!((r.kappa1 - r.kappa2).abs() / r.kappa1 < 0.25, "{r:?}");
        assert!(r.energy <= r.single_orbital_energy + 1e-12);
    }

    #[test]
    fn shallow_well_delocalizes_second_orbital() {
        let r = minimize_two_orbital(3, 1.0, &WellSpec::new(1.5).unwrap()).unwrap();
        assert!(r.kappa2 < 0.05 && r.kappa1 > 0.5, "{r:?}");
    }

    #[test]
    fn no_interaction_is_degenerate() {
        let r = minimize_two_orbital(3, 0.0, &WellSpec::new(10.0).unwrap()).unwrap();
        assert!(r.degenerate, "{r:?}");
    }

    #[test]
    fn thresholds_and_gaps() {
        assert_eq!(tf_threshold(1, 1.0, 1.0), 0.0);
        assert_eq!(tf_threshold(5, 1.0, 1.0), 8.0);
        assert_eq!(tf_threshold(5, 2.0, 1.0), 16.0);
        assert_eq!(gp_single_orbital_threshold(5, 1.0, 1.0), 4.0);
        assert_eq!(final_stage_gap_meanfield(10, 0.1), 15.000000000000002);
        assert_eq!(max_rate_meanfield(7, 2.0, 1.0) / max_rate_meanfield(7, 1.0, 1.0), 4.0);
        assert_eq!(depth_interval_meanfield(0.4, 1.0), 0.8);
    }

    #[test]
    fn coupled_orbitals_without_interaction() {
        let well = WellSpec::new(8.0).unwrap();
        let pair = solve_coupled_orbitals(3, 0.0, &well, Mesh::default()).unwrap();
        let e1 = crate::single_particle::solve_box_states(&well, 1).unwrap()[0].energy;
        assert!(
            (pair.mu1 - e1).abs() < 1e-3 && (pair.mu2 - e1).abs() < 1e-3,
            "{} {} {e1}",
            pair.mu1,
            pair.mu2
        );
        let diff: f64 = pair
            .phi1
            .iter()
            .zip(&pair.phi2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6);
    }

    #[test]
    fn coupled_orbitals_are_even_and_nodeless() {
        let well = WellSpec::new(20.0).unwrap();
        let pair = solve_coupled_orbitals(3, 1.0, &well, Mesh::default()).unwrap();
        assert!(pair.residual <= 1e-8);
        let n = pair.phi1.len();
        for i in 0..n {
            assert!((pair.phi1[i] - pair.phi1[n - 1 - i]).abs() < 1e-8);
            assert!((pair.phi2[i] - pair.phi2[n - 1 - i]).abs() < 1e-8);
        }
        let sign = pair.phi1[n / 2].signum();
        assert!(pair.phi1.iter().all(|v| v * sign > 0.0));
        let sign2 = pair.phi2[n / 2].signum();
        assert!(pair.phi2.iter().all(|v| v * sign2 > 0.0));
        // the residual settles into a decreasing tail after burn-in
        let tail = &pair.residual_history[pair.residual_history.len() / 2..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)));
    }

    #[test]
    fn two_particles_drop_the_self_term() {
        // with N = 2 and phi2 = phi1 the two potentials differ by exactly 2x
        let well = WellSpec::new(15.0).unwrap();
        let pair = solve_coupled_orbitals(2, 0.5, &well, Mesh::default()).unwrap();
        assert!(pair.mu1 < pair.mu2 + 1e-12);
    }

    #[test]
    fn coupled_unbinding_near_tf_threshold() {
        let (n, g) = (5, 2.0);
        let well = WellSpec::new(1.0).unwrap();
        let mesh = Mesh {
            density: 80,
            tolerance: 1e-7,
            ..Mesh::default()
        };
        let tf = tf_threshold(n, g, 1.0);
        let v = coupled_unbinding_depth(n, g, &well, mesh, 0.5 * tf, 1.5 * tf, 0.01 * tf).unwrap();
        assert!((v - tf).abs() / tf < 0.1, "{v} vs {tf}");
    }
}
