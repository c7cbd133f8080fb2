//! Lowest eigenpairs of a real symmetric matrix.
//!
//! Small problems go to a dense solver. Larger ones use Lanczos with full
//! reorthogonalization, restarted from the current Ritz vectors if the Krylov
//! space reaches its size limit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::hamiltonian::SparseSym;
use crate::error::{CullError, Result};

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 1000;

/// Required residual `||H v - E v||` per returned pair.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_basis: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_basis: 600,
            max_restarts: 30,
            tol: RESIDUAL_TOL,
        }
    }
}

/// The `k` lowest eigenpairs of `h` (fewer if `h` is smaller).
pub fn diagonalize(h: &SparseSym, k: usize) -> Result<Eigenpairs> {
    diagonalize_with(h, k, LanczosOptions::default())
}

pub fn diagonalize_with(h: &SparseSym, k: usize, opts: LanczosOptions) -> Result<Eigenpairs> {
    let k = k.min(h.dim);
    if k == 0 {
        return Ok(Eigenpairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
        });
    }
    if h.is_diagonal() {
        return Ok(diagonal_pairs(h, k));
    }
    let pairs = if h.dim <= DENSE_LIMIT {
        dense_pairs(&h.to_dense(), k)
    } else {
        lanczos(h, k, opts)?
    };
    let worst = pairs.residuals.iter().cloned().fold(0.0, f64::max);
    if worst > opts.tol {
        return Err(CullError::EigenBreakdown { residual: worst });
    }
    Ok(pairs)
}

fn diagonal_pairs(h: &SparseSym, k: usize) -> Eigenpairs {
    let d = h.diagonal();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let vectors = order[..k]
        .iter()
        .map(|&i| {
            let mut v = vec![0.0; d.len()];
            v[i] = 1.0;
            v
        })
        .collect();
    Eigenpairs {
        values: order[..k].iter().map(|&i| d[i]).collect(),
        vectors,
        residuals: vec![0.0; k],
    }
}

/// Dense symmetric eigendecomposition, lowest `k` pairs.
pub fn dense_pairs(a: &DMatrix<f64>, k: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &i in &order[..k] {
        let v = eig.eigenvectors.column(i).into_owned();
        let lambda = eig.eigenvalues[i];
        residuals.push((a * &v - &v * lambda).norm());
        values.push(lambda);
        vectors.push(v.as_slice().to_vec());
    }
    Eigenpairs {
        values,
        vectors,
        residuals,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Deterministic start vector with no special symmetry.
fn start_vector(dim: usize, salt: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.618_033_988_75 + salt as f64 * 0.414_213_562)).sin())
        .collect();
    normalize(&mut v);
    v
}

fn lanczos(h: &SparseSym, k: usize, opts: LanczosOptions) -> Result<Eigenpairs> {
    let dim = h.dim;
    let max_basis = opts.max_basis.max(2 * k + 20).min(dim);
    let mut start = start_vector(dim, 0);
    let mut best: Option<Eigenpairs> = None;
    let mut w = vec![0.0; dim];

    for restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut next_check = (2 * k + 10).min(max_basis);
        loop {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = normalize(&mut w);
            let m = basis.len();
            let exhausted = m == max_basis || m == dim;
            let invariant = b < 1e-12 * a.abs().max(1.0);
            if m >= next_check || exhausted || invariant {
                let (pairs, estimates) = ritz(h, &basis, &alpha, &beta, b, k);
                let converged = estimates.iter().all(|&e| e <= 0.1 * opts.tol);
                if converged || exhausted || invariant {
                    let pairs = polish_check(h, pairs);
                    let worst = pairs.residuals.iter().cloned().fold(0.0, f64::max);
                    if worst <= opts.tol {
                        return Ok(pairs);
                    }
                    let better = best
                        .as_ref()
                        .is_none_or(|p| worst < p.residuals.iter().cloned().fold(0.0, f64::max));
                    // restart from the sum of the Ritz vectors, nudged off any invariant subspace
                    let mut s = vec![0.0; dim];
                    for v in &pairs.vectors {
                        axpy(1.0, v, &mut s);
                    }
                    if invariant {
                        axpy(1e-3, &start_vector(dim, restart + 1), &mut s);
                    }
                    normalize(&mut s);
                    if better {
                        best = Some(pairs);
                    }
                    start = s;
                    break;
                }
                next_check = (next_check + next_check / 2).min(max_basis);
            }
            beta.push(b);
            basis.push(w.clone());
        }
    }
    let residual = best.map_or(f64::INFINITY, |p| p.residuals.iter().cloned().fold(0.0, f64::max));
    Err(CullError::EigenBreakdown { residual })
}

/// Ritz pairs from the tridiagonal projection and their residual estimates `|b y_m|`.
fn ritz(
    h: &SparseSym,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    b_last: f64,
    k: usize,
) -> (Eigenpairs, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let kk = k.min(m);
    let small = dense_pairs(&t, kk);
    let estimates: Vec<f64> = small.vectors.iter().map(|y| (b_last * y[m - 1]).abs()).collect();
    let vectors: Vec<Vec<f64>> = small
        .vectors
        .iter()
        .map(|y| {
            let mut v = vec![0.0; h.dim];
            for (c, q) in y.iter().zip(basis) {
                axpy(*c, q, &mut v);
            }
            normalize(&mut v);
            v
        })
        .collect();
    (
        Eigenpairs {
            values: small.values,
            vectors,
            residuals: vec![f64::INFINITY; kk],
        },
        estimates,
    )
}

/// Replace estimated residuals with true ones.
fn polish_check(h: &SparseSym, mut pairs: Eigenpairs) -> Eigenpairs {
    let mut w = vec![0.0; h.dim];
    for (i, v) in pairs.vectors.iter().enumerate() {
        h.apply(v, &mut w);
        let rq = dot(v, &w);
        pairs.values[i] = rq;
        axpy(-rq, v, &mut w);
        pairs.residuals[i] = dot(&w, &w).sqrt();
    }
    pairs
}

/// `H v - E v` norm, for callers that want to double-check.
pub fn residual(h: &SparseSym, value: f64, vector: &[f64]) -> f64 {
    let mut w = vec![0.0; h.dim];
    h.apply(vector, &mut w);
    axpy(-value, vector, &mut w);
    DVector::from_vec(w).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    /// Eigenvalues by Jacobi rotations, independent of the library solver.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| a[(i, j)].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0, 0.5]));
        let p = diagonalize(&SparseSym::from_dense(&a), 4).unwrap();
        assert_eq!(p.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (1.5, 0.7, -0.4);
        let m = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
        let p = diagonalize(&SparseSym::from_dense(&m), 2).unwrap();
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        assert!((p.values[0] - (mid - rad)).abs() < 1e-14);
        assert!((p.values[1] - (mid + rad)).abs() < 1e-14);
    }

    #[test]
    fn random_50_against_jacobi() {
        let a = random_symmetric(50, 7);
        let want = jacobi_eigenvalues(a.clone());
        let got = diagonalize(&SparseSym::from_dense(&a), 50).unwrap();
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        // a sparse banded matrix above the dense limit
        let n = 1500;
        let mut rows = vec![Vec::new(); n];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..n {
            rows[i].push((i, (i as f64).sqrt() + rng.gen_range(0.0..0.1)));
        }
        for i in 0..n {
            for d in [1usize, 7, 31] {
                if i + d < n {
                    let v = rng.gen_range(-0.5..0.5);
                    rows[i].push((i + d, v));
                    rows[i + d].push((i, v));
                }
            }
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
        }
        let h = SparseSym::from_rows(rows);
        let lz = diagonalize(&h, 4).unwrap();
        let dense = dense_pairs(&h.to_dense(), 4);
        for (a, b) in lz.values.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(lz.residuals.iter().all(|&r| r <= RESIDUAL_TOL));
        // orthonormal Ritz vectors
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&lz.vectors[i], &lz.vectors[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }
}
