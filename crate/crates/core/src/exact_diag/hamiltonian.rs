//! Second-quantized Hamiltonian in the box basis.
//!
//! `H = sum_j E_j n_j + (g/2) sum_{pqrs} U_{rspq} a+_r a+_s a_q a_p` with
//! `U_{rspq}` the quartic overlap of the box modes.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::FockBasis;
use crate::error::{CullError, Result};
use crate::single_particle::{half_box_grid, Parity, SingleParticleState};

/// Quartic overlaps `U_{pqrs}` of M box modes, stored densely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionTable {
    pub m: usize,
    pub depth: f64,
    pub box_size: f64,
    values: Vec<f64>,
}

impl InteractionTable {
    /// Integrates over `[0, D/2]` and doubles, using mode parities.
    pub fn new(modes: &[SingleParticleState]) -> Result<Self> {
        let m = modes.len();
        if m == 0 {
            return Err(CullError::param("modes", "empty mode list"));
        }
        let h = modes[0]
            .half_box
            .ok_or_else(|| CullError::param("modes", "interaction table needs box modes"))?;
        let grid = half_box_grid(modes, 4);
        let npts = grid.len();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|p| (p..m).map(move |q| (p, q))).collect();
        let samples: Vec<Vec<f64>> = modes
            .iter()
            .map(|s| grid.nodes.iter().map(|&x| s.value(x)).collect())
            .collect();
        let prod = DMatrix::from_fn(pairs.len(), npts, |i, k| {
            let (p, q) = pairs[i];
            samples[p][k] * samples[q][k]
        });
        let weighted = DMatrix::from_fn(pairs.len(), npts, |i, k| prod[(i, k)] * grid.weights[k]);
        let gram = &weighted * prod.transpose();
        let mut values = vec![0.0; m * m * m * m];
        let parity: Vec<Parity> = modes.iter().map(|s| s.parity).collect();
        for (a, &(p, q)) in pairs.iter().enumerate() {
            for (b, &(r, s)) in pairs.iter().enumerate() {
                let even = parity[p].combine(parity[q]) == parity[r].combine(parity[s]);
                let v = if even { 2.0 * gram[(a, b)] } else { 0.0 };
                for (i, j) in [(p, q), (q, p)] {
                    for (k, l) in [(r, s), (s, r)] {
                        values[((i * m + j) * m + k) * m + l] = v;
                    }
                }
            }
        }
        Ok(InteractionTable {
            m,
            depth: depth_hint(modes),
            box_size: 2.0 * h,
            values,
        })
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let m = self.m;
        self.values[((p * m + q) * m + r) * m + s]
    }
}

/// Depth recovered from a mode: `k^2/2 - E`.
fn depth_hint(modes: &[SingleParticleState]) -> f64 {
    let s = &modes[0];
    0.5 * s.k * s.k - s.energy
}

/// Symmetric sparse matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl SparseSym {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        SparseSym {
            dim,
            indptr,
            indices,
            data,
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let rows = (0..a.nrows())
            .map(|i| {
                (0..a.ncols())
                    .filter(|&j| a[(i, j)] != 0.0)
                    .map(|j| (j, a[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let lo = self.indptr[i];
            let hi = self.indptr[i + 1];
            *yi = self.indices[lo..hi]
                .iter()
                .zip(&self.data[lo..hi])
                .map(|(&j, &v)| v * x[j])
                .sum();
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.indptr[i]..self.indptr[i + 1] {
                a[(i, self.indices[k])] += self.data[k];
            }
        }
        a
    }

    /// True when every stored entry lies on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.indices[self.indptr[i]..self.indptr[i + 1]].iter().all(|&j| j == i))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                (self.indptr[i]..self.indptr[i + 1])
                    .filter(|&k| self.indices[k] == i)
                    .map(|k| self.data[k])
                    .sum()
            })
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                let back = (self.indptr[j]..self.indptr[j + 1])
                    .find(|&t| self.indices[t] == i)
                    .map_or(0.0, |t| self.data[t]);
                worst = worst.max((self.data[k] - back).abs());
            }
        }
        worst
    }
}

/// The Hamiltonian restricted to one total-parity sector.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub parity: Parity,
    /// Positions in the full basis of the sector's states.
    pub members: Vec<usize>,
    pub matrix: SparseSym,
}

/// Build the Hamiltonian in both parity sectors. Sectors with no states are omitted.
pub fn build_hamiltonian(
    basis: &FockBasis,
    modes: &[SingleParticleState],
    table: Option<&InteractionTable>,
    g: f64,
) -> Result<Vec<SectorHamiltonian>> {
    if modes.len() != basis.m {
        return Err(CullError::ModeMismatch {
            expected: basis.m,
            got: modes.len(),
        });
    }
    if let Some(t) = table {
        if t.m != basis.m {
            return Err(CullError::ModeMismatch {
                expected: basis.m,
                got: t.m,
            });
        }
    }
    let needs_table = g != 0.0 && basis.n >= 2;
    let owned;
    let table = match (needs_table, table) {
        (false, _) => None,
        (true, Some(t)) => Some(t),
        (true, None) => {
            owned = InteractionTable::new(modes)?;
            Some(&owned)
        }
    };
    let parities: Vec<Parity> = modes.iter().map(|s| s.parity).collect();
    let energies: Vec<f64> = modes.iter().map(|s| s.energy).collect();
    let state_parity: Vec<Parity> = basis
        .states
        .iter()
        .map(|s| FockBasis::parity_of(s, &parities))
        .collect();

    let mut sectors = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let members: Vec<usize> = (0..basis.len()).filter(|&i| state_parity[i] == parity).collect();
        if members.is_empty() {
            continue;
        }
        let mut local = vec![usize::MAX; basis.len()];
        for (li, &gi) in members.iter().enumerate() {
            local[gi] = li;
        }
        let rows: Vec<Vec<(usize, f64)>> = members
            .par_iter()
            .map(|&gi| row(basis, &energies, table, g, gi, &local))
            .collect();
        sectors.push(SectorHamiltonian {
            parity,
            members,
            matrix: SparseSym::from_rows(rows),
        });
    }
    Ok(sectors)
}

fn row(
    basis: &FockBasis,
    energies: &[f64],
    table: Option<&InteractionTable>,
    g: f64,
    gi: usize,
    local: &[usize],
) -> Vec<(usize, f64)> {
    let occ = &basis.states[gi];
    let m = basis.m;
    let diag: f64 = occ.iter().zip(energies).map(|(&n, e)| n as f64 * e).sum();
    let mut entries = vec![(local[gi], diag)];
    if let Some(t) = table {
        let occupied: Vec<usize> = (0..m).filter(|&j| occ[j] > 0).collect();
        let mut work = occ.clone();
        for (ai, &p) in occupied.iter().enumerate() {
            for &q in &occupied[ai..] {
                let (amp_pq, c_pq) = if p == q {
                    if occ[p] < 2 {
                        continue;
                    }
                    (((occ[p] as f64) * (occ[p] as f64 - 1.0)).sqrt(), 1.0)
                } else {
                    ((occ[p] as f64 * occ[q] as f64).sqrt(), 2.0)
                };
                work[p] -= 1;
                work[q] -= 1;
                for r in 0..m {
                    for s in r..m {
                        let u = t.get(r, s, p, q);
                        if u == 0.0 {
                            continue;
                        }
                        let (amp_rs, c_rs) = if r == s {
                            (((work[r] as f64 + 1.0) * (work[r] as f64 + 2.0)).sqrt(), 1.0)
                        } else {
                            (((work[r] as f64 + 1.0) * (work[s] as f64 + 1.0)).sqrt(), 2.0)
                        };
                        work[r] += 1;
                        work[s] += 1;
                        let target = basis.index_of(&work).expect("particle number conserved");
                        work[r] -= 1;
                        work[s] -= 1;
                        let v = 0.5 * g * c_pq * c_rs * amp_pq * amp_rs * u;
                        entries.push((local[target], v));
                    }
                }
                work[p] += 1;
                work[q] += 1;
            }
        }
    }
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (j, v) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => merged.push((j, v)),
        }
    }
    merged
}
