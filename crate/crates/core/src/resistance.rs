//! Exact effective resistances from Laplacian solves.
//!
//! Small graphs (at most [`DENSE_MAX_VERTICES`]) are handled by a Cholesky
//! factorisation of the Laplacian with one vertex grounded. Larger graphs
//! use Jacobi-preconditioned conjugate gradients on the zero-sum subspace.
//! Either way, all-pairs quantities are assembled from `N` solves through
//! `R(u, v) = K_uu + K_vv - 2 K_uv`, where `K` is any generalised inverse
//! of `L` that is symmetric on the relevant subspace.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Graphs up to this size are solved densely.
pub const DENSE_MAX_VERTICES: usize = 500;

/// Values within this relative distance of the maximum count as ties for
/// the argmax; the lexicographically smallest candidate wins.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Iterative solver settings. The dense path ignores them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Relative residual `||b - Lx|| / ||b||` at which CG stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tolerance: 1e-10, max_iterations: 20_000 }
    }
}

impl SolveConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::Config(format!("solver tolerance must be positive, got {tolerance}")));
        }
        if max_iterations == 0 {
            return Err(Error::Config("max iterations must be at least 1".into()));
        }
        Ok(SolveConfig { tolerance, max_iterations })
    }
}

/// Resistance between `u` and `v`; exactly zero when `u == v`.
pub fn effective_resistance(g: &Graph, u: usize, v: usize, cfg: &SolveConfig) -> Result<f64> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    g.ensure_connected()?;
    if u == v {
        return Ok(0.0);
    }
    let n = g.num_vertices();
    if n <= DENSE_MAX_VERTICES {
        // Ground the extraction vertex: L_g x = e_u, then R = x_u.
        let chol = grounded_laplacian(g, v)
            .cholesky()
            .expect("grounded Laplacian of a connected graph is positive definite");
        let mut rhs = nalgebra::DVector::zeros(n - 1);
        rhs[reduced_index(u, v)] = 1.0;
        let x = chol.solve(&rhs);
        Ok(x[reduced_index(u, v)])
    } else {
        let mut rhs = vec![0.0; n];
        rhs[u] = 1.0;
        rhs[v] = -1.0;
        let x = conjugate_gradient(g, &rhs, cfg)?;
        Ok(x[u] - x[v])
    }
}

/// `(1 / 2N^2) * sum over ordered pairs of R(u, v)`.
pub fn average_resistance(g: &Graph, cfg: &SolveConfig) -> Result<f64> {
    g.ensure_connected()?;
    let n = g.num_vertices();
    if n == 1 {
        return Ok(0.0);
    }
    let total = if n <= DENSE_MAX_VERTICES {
        let k = dense_kernel(g);
        let trace: f64 = (0..n).map(|i| k[(i, i)]).sum();
        let sum: f64 = k.iter().sum();
        2.0 * n as f64 * trace - 2.0 * sum
    } else {
        // Only the diagonal and column sums of the pseudo-inverse are needed.
        let cols: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|u| {
                let x = pseudo_inverse_column(g, u, cfg)?;
                Ok((x[u], x.iter().sum::<f64>()))
            })
            .collect::<Result<_>>()?;
        let trace: f64 = cols.iter().map(|c| c.0).sum();
        let sum: f64 = cols.iter().map(|c| c.1).sum();
        2.0 * n as f64 * trace - 2.0 * sum
    };
    Ok(total / (2.0 * (n * n) as f64))
}

/// Largest resistance over unordered pairs and a pair attaining it.
pub fn max_resistance(g: &Graph, cfg: &SolveConfig) -> Result<(f64, (usize, usize))> {
    let r = resistance_matrix(g, cfg)?;
    Ok(r.max())
}

/// All pairwise resistances of a connected graph.
#[derive(Debug, Clone)]
pub struct ResistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ResistanceMatrix {
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    /// Eq.-(1)-style average over ordered pairs, summed in index order.
    pub fn average(&self) -> f64 {
        let total: f64 = self.values.iter().sum();
        total / (2.0 * (self.n * self.n) as f64)
    }

    /// Maximum over `u < v`; ties broken towards the smallest `(u, v)`.
    pub fn max(&self) -> (f64, (usize, usize)) {
        let n = self.n;
        let best = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .map(|(u, v)| self.get(u, v))
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = best - TIE_RELATIVE_TOLERANCE * best.abs();
        (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .find(|&(u, v)| self.get(u, v) >= threshold)
            .map(|pair| (best, pair))
            .unwrap_or((0.0, (0, 0)))
    }
}

pub fn resistance_matrix(g: &Graph, cfg: &SolveConfig) -> Result<ResistanceMatrix> {
    g.ensure_connected()?;
    let n = g.num_vertices();
    let kernel: Vec<f64> = if n <= DENSE_MAX_VERTICES {
        dense_kernel(g).transpose().as_slice().to_vec()
    } else {
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|u| pseudo_inverse_column(g, u, cfg))
            .collect::<Result<_>>()?;
        cols.concat()
    };
    let diag: Vec<f64> = (0..n).map(|i| kernel[i * n + i]).collect();
    let mut values = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                // Symmetrise so R(u, v) and R(v, u) are bitwise equal.
                let cross = 0.5 * (kernel[u * n + v] + kernel[v * n + u]);
                values[u * n + v] = diag[u] + diag[v] - 2.0 * cross;
            }
        }
    }
    Ok(ResistanceMatrix { n, values })
}

fn reduced_index(v: usize, ground: usize) -> usize {
    if v < ground { v } else { v - 1 }
}

/// Laplacian with row and column `ground` removed.
fn grounded_laplacian(g: &Graph, ground: usize) -> DMatrix<f64> {
    let n = g.num_vertices();
    let mut l = DMatrix::zeros(n - 1, n - 1);
    for v in (0..n).filter(|&v| v != ground) {
        let i = reduced_index(v, ground);
        l[(i, i)] = g.degree(v) as f64;
        for &w in g.neighbors(v).iter().filter(|&&w| w != ground) {
            l[(i, reduced_index(w, ground))] = -1.0;
        }
    }
    l
}

/// Inverse of the Laplacian grounded at vertex 0, padded with a zero row
/// and column for the ground.
fn dense_kernel(g: &Graph) -> DMatrix<f64> {
    let n = g.num_vertices();
    let inv = grounded_laplacian(g, 0)
        .cholesky()
        .expect("grounded Laplacian of a connected graph is positive definite")
        .inverse();
    let mut k = DMatrix::zeros(n, n);
    k.view_mut((1, 1), (n - 1, n - 1)).copy_from(&inv);
    k
}

/// Column `u` of the pseudo-inverse: solves `L x = e_u - 1/N` with `sum x = 0`.
fn pseudo_inverse_column(g: &Graph, u: usize, cfg: &SolveConfig) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    let mut rhs = vec![-1.0 / n as f64; n];
    rhs[u] += 1.0;
    conjugate_gradient(g, &rhs, cfg)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_zero_sum(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Jacobi-preconditioned CG for `L x = b` with `b` and `x` zero-sum.
pub(crate) fn conjugate_gradient(g: &Graph, b: &[f64], cfg: &SolveConfig) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    let mut r = b.to_vec();
    project_zero_sum(&mut r);
    let b_norm = dot(&r, &r).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_deg: Vec<f64> = (0..n).map(|v| 1.0 / g.degree(v) as f64).collect();
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&inv_deg).map(|(a, b)| a * b).collect();
        project_zero_sum(&mut z);
        z
    };
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;
    for _ in 0..cfg.max_iterations {
        let lp = crate::graph::laplacian_apply(g, &p)?;
        let alpha = rz / dot(&p, &lp);
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&lp).for_each(|(ri, li)| *ri -= alpha * li);
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= cfg.tolerance {
            project_zero_sum(&mut x);
            return Ok(x);
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::Convergence { iterations: cfg.max_iterations, residual })
}
