//! Closed-form Laplacian spectrum of `T_{M^d}`.
//!
//! The torus Laplacian is diagonalised by characters indexed by frequency
//! vectors `k in {0..M-1}^d`, with eigenvalue
//! `lambda_k = 2d - 2 * sum_i cos(2 pi k_i / M)`. Resistances follow from
//! sums of `1 / lambda_k` over `k != 0`, so nothing here solves a linear
//! system.
//!
//! Frequency vectors are visited in the same mixed-radix order as vertex
//! indices (coordinate 0 fastest), keeping every sum in a fixed order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::TorusSpec;
use crate::resistance::TIE_RELATIVE_TOLERANCE;

/// Sums with more terms than this use compensated accumulation.
pub const COMPENSATION_THRESHOLD: usize = 1_000_000;

/// Hard cap on terms in a single spectral sum.
pub const MAX_SPECTRAL_TERMS: usize = 1 << 34;

/// Hard cap on `N^2` for the brute-force displacement search.
pub const MAX_PAIR_SEARCH_WORK: u128 = 1 << 36;

/// Lattice frequency `k`, one component per axis, each in `0..M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector(pub Vec<usize>);

impl FrequencyVector {
    pub fn zero(dim: usize) -> Self {
        FrequencyVector(vec![0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    fn validate(&self, spec: &TorusSpec) -> Result<()> {
        validate_tuple(&self.0, spec, "frequency")
    }
}

fn validate_tuple(v: &[usize], spec: &TorusSpec, what: &str) -> Result<()> {
    if v.len() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), actual: v.len() });
    }
    if let Some((i, &c)) = v.iter().enumerate().find(|(_, &c)| c >= spec.side()) {
        return Err(Error::Range(format!(
            "{what} component {i} = {c} not in 0..{}",
            spec.side()
        )));
    }
    Ok(())
}

fn cos_table(m: usize) -> Vec<f64> {
    (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()).collect()
}

/// `2d - 2 sum_i cos(2 pi k_i / M)`.
pub fn torus_eigenvalue(spec: &TorusSpec, k: &FrequencyVector) -> Result<f64> {
    k.validate(spec)?;
    if k.is_zero() {
        return Ok(0.0);
    }
    let table = cos_table(spec.side());
    Ok(eigenvalue_from_table(&table, &k.0))
}

fn eigenvalue_from_table(table: &[f64], k: &[usize]) -> f64 {
    // Summing (1 - cos) per axis keeps small eigenvalues accurate.
    k.iter().map(|&ki| 2.0 - 2.0 * table[ki]).sum()
}

/// Running sum, compensated (Neumaier) when asked to.
struct Accumulator {
    sum: f64,
    carry: f64,
    compensated: bool,
}

impl Accumulator {
    fn new(compensated: bool) -> Self {
        Accumulator { sum: 0.0, carry: 0.0, compensated }
    }

    fn add(&mut self, x: f64) {
        if self.compensated {
            let t = self.sum + x;
            if self.sum.abs() >= x.abs() {
                self.carry += (self.sum - t) + x;
            } else {
                self.carry += (x - t) + self.sum;
            }
            self.sum = t;
        } else {
            self.sum += x;
        }
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

fn for_each_nonzero_eigenvalue(spec: &TorusSpec, mut f: impl FnMut(f64)) {
    for_each_nonzero_frequency(spec, |_, lambda| f(lambda));
}

/// Visits every nonzero frequency vector in mixed-radix order, passing the
/// highest axis that changed in this odometer step and the eigenvalue.
/// Per-axis terms are updated incrementally.
fn for_each_nonzero_frequency(spec: &TorusSpec, mut f: impl FnMut(usize, f64)) {
    let m = spec.side();
    let d = spec.dim();
    let axis_term: Vec<f64> = cos_table(m).iter().map(|c| 2.0 - 2.0 * c).collect();
    let mut k = vec![0usize; d];
    let mut terms = vec![0.0f64; d];
    for _ in 1..spec.num_vertices() {
        let mut i = 0;
        loop {
            k[i] += 1;
            if k[i] == m {
                k[i] = 0;
                terms[i] = 0.0;
                i += 1;
            } else {
                terms[i] = axis_term[k[i]];
                break;
            }
        }
        f(i, terms.iter().sum());
    }
}

/// Whether [`average_resistance_spectral`] uses compensated summation for
/// this torus.
pub fn uses_compensation(spec: &TorusSpec) -> bool {
    spec.num_vertices() > COMPENSATION_THRESHOLD
}

fn check_budget(spec: &TorusSpec) -> Result<()> {
    if spec.num_vertices() > MAX_SPECTRAL_TERMS {
        return Err(Error::Capacity(format!(
            "spectral sum over {} terms exceeds the limit of {MAX_SPECTRAL_TERMS}",
            spec.num_vertices()
        )));
    }
    Ok(())
}

/// Average resistance `(1/N) sum_{k != 0} 1 / lambda_k`.
pub fn average_resistance_spectral(spec: &TorusSpec) -> Result<f64> {
    check_budget(spec)?;
    let mut acc = Accumulator::new(uses_compensation(spec));
    for_each_nonzero_eigenvalue(spec, |lambda| acc.add(1.0 / lambda));
    Ok(acc.total() / spec.num_vertices() as f64)
}

/// All `1 / lambda_k` in mixed-radix order, zero for `k = 0`.
fn inverse_eigenvalues(spec: &TorusSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.num_vertices());
    out.push(0.0);
    for_each_nonzero_eigenvalue(spec, |lambda| out.push(1.0 / lambda));
    out
}

/// `(delta_0 + ... + delta_i) mod M` for each axis `i`.
fn phase_increments(spec: &TorusSpec, delta: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    delta
        .iter()
        .map(|&c| {
            acc = (acc + c) % spec.side();
            acc
        })
        .collect()
}

/// `sum_k (2 - 2 cos(2 pi k.delta / M)) * inv[k]` with `k.delta` tracked
/// modulo `M` as the odometer advances. Every coordinate that changes in a
/// step (increment or wrap to 0) shifts `k.delta` by `+delta_i mod M`.
fn pair_sum(spec: &TorusSpec, inv: &[f64], delta: &[usize], axis_term: &[f64]) -> f64 {
    let m = spec.side();
    let d = spec.dim();
    let prefix = phase_increments(spec, delta);
    let mut k = vec![0usize; d];
    let mut phase = 0usize;
    let mut sum = Accumulator::new(uses_compensation(spec));
    for &w in &inv[1..] {
        let mut i = 0;
        loop {
            k[i] += 1;
            if k[i] == m {
                k[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
        phase = (phase + prefix[i]) % m;
        sum.add(axis_term[phase] * w);
    }
    sum.total() / spec.num_vertices() as f64
}

/// Resistance between any two vertices whose coordinates differ by `delta`
/// (mod M).
pub fn pair_resistance_spectral(spec: &TorusSpec, delta: &[usize]) -> Result<f64> {
    validate_tuple(delta, spec, "displacement")?;
    check_budget(spec)?;
    if delta.iter().all(|&c| c == 0) {
        return Ok(0.0);
    }
    let axis_term: Vec<f64> = cos_table(spec.side()).iter().map(|c| 2.0 - 2.0 * c).collect();
    let prefix = phase_increments(spec, delta);
    let m = spec.side();
    let mut phase = 0usize;
    let mut sum = Accumulator::new(uses_compensation(spec));
    for_each_nonzero_frequency(spec, |axis, lambda| {
        phase = (phase + prefix[axis]) % m;
        sum.add(axis_term[phase] / lambda);
    });
    Ok(sum.total() / spec.num_vertices() as f64)
}

/// Maximum pairwise resistance on `T_{M^d}` by brute force over all
/// nonzero displacements, with the lexicographically smallest maximiser
/// (coordinate 0 compared first).
pub fn max_resistance_spectral(spec: &TorusSpec) -> Result<(f64, Vec<usize>)> {
    check_budget(spec)?;
    let n = spec.num_vertices();
    if (n as u128) * (n as u128) > MAX_PAIR_SEARCH_WORK {
        return Err(Error::Capacity(format!(
            "displacement search over {n}^2 terms exceeds the limit of {MAX_PAIR_SEARCH_WORK}"
        )));
    }
    let inv = inverse_eigenvalues(spec);
    let axis_term: Vec<f64> = cos_table(spec.side()).iter().map(|c| 2.0 - 2.0 * c).collect();
    let values: Vec<f64> = (1..n)
        .into_par_iter()
        .map(|index| {
            let delta = spec.decode(index).expect("index in range");
            pair_sum(spec, &inv, &delta, &axis_term)
        })
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - TIE_RELATIVE_TOLERANCE * best.abs();
    let argmax = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold)
        .map(|(i, _)| spec.decode(i + 1).expect("index in range"))
        .min()
        .expect("at least one nonzero displacement");
    Ok((best, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_torus;
    use crate::resistance::{self, SolveConfig};
    use nalgebra::DMatrix;

    fn spec(m: usize, d: usize) -> TorusSpec {
        TorusSpec::new(m, d).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(torus_eigenvalue(&spec(3, 2), &FrequencyVector::zero(2)).unwrap(), 0.0);
        let l = torus_eigenvalue(&spec(3, 1), &FrequencyVector(vec![1])).unwrap();
        assert!((l - 3.0).abs() < 1e-14);
        let l = torus_eigenvalue(&spec(4, 1), &FrequencyVector(vec![2])).unwrap();
        assert!((l - 4.0).abs() < 1e-14);
        assert!(torus_eigenvalue(&spec(4, 1), &FrequencyVector(vec![4])).is_err());
        assert!(torus_eigenvalue(&spec(4, 2), &FrequencyVector(vec![1])).is_err());
    }

    /// Dense symmetric eigendecomposition of the torus Laplacian.
    fn dense_spectrum(s: &TorusSpec) -> Vec<f64> {
        let g = build_torus(s).unwrap();
        let n = g.num_vertices();
        let mut l = DMatrix::zeros(n, n);
        for v in 0..n {
            l[(v, v)] = g.degree(v) as f64;
            for &w in g.neighbors(v) {
                l[(v, w)] = -1.0;
            }
        }
        let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn eigenvalues_match_dense_decomposition() {
        for (m, d) in [(3, 1), (4, 2), (5, 2), (3, 3)] {
            let s = spec(m, d);
            let mut closed: Vec<f64> = (0..s.num_vertices())
                .map(|i| torus_eigenvalue(&s, &FrequencyVector(s.decode(i).unwrap())).unwrap())
                .collect();
            closed.sort_by(f64::total_cmp);
            for (a, b) in closed.iter().zip(dense_spectrum(&s)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalue_trace() {
        for (m, d) in [(3, 4), (7, 3), (16, 2), (5, 5)] {
            let s = spec(m, d);
            let mut total = 0.0;
            for_each_nonzero_eigenvalue(&s, |l| total += l);
            let trace = (2 * d * s.num_vertices()) as f64;
            assert!((total - trace).abs() / trace < 1e-8);
        }
    }

    #[test]
    fn streamed_eigenvalues_are_positive_and_match_table() {
        let s = spec(5, 3);
        let table = cos_table(5);
        let mut index = 1;
        for_each_nonzero_eigenvalue(&s, |l| {
            let k = s.decode(index).unwrap();
            assert!(l > 0.0);
            assert!((l - eigenvalue_from_table(&table, &k)).abs() < 1e-12);
            index += 1;
        });
        assert_eq!(index, 125);
    }

    #[test]
    fn average_examples() {
        assert!((average_resistance_spectral(&spec(3, 1)).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((average_resistance_spectral(&spec(4, 1)).unwrap() - 0.3125).abs() < 1e-15);
        let exact = resistance::average_resistance(
            &build_torus(&spec(3, 2)).unwrap(),
            &SolveConfig::default(),
        )
        .unwrap();
        assert!((average_resistance_spectral(&spec(3, 2)).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn pair_examples() {
        assert_eq!(pair_resistance_spectral(&spec(4, 1), &[0]).unwrap(), 0.0);
        assert!((pair_resistance_spectral(&spec(4, 1), &[1]).unwrap() - 0.75).abs() < 1e-14);
        let s = spec(3, 2);
        let g = build_torus(&s).unwrap();
        let v = s.encode(&[1, 1]).unwrap();
        let exact = resistance::effective_resistance(&g, 0, v, &SolveConfig::default()).unwrap();
        assert!((pair_resistance_spectral(&s, &[1, 1]).unwrap() - exact).abs() < 1e-10);
        assert!(pair_resistance_spectral(&s, &[3, 0]).is_err());
    }

    #[test]
    fn max_examples() {
        let (r, arg) = max_resistance_spectral(&spec(4, 1)).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert_eq!(arg, vec![2]);
        let (r, arg) = max_resistance_spectral(&spec(3, 1)).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(arg, vec![1]);
        let s = spec(3, 3);
        let (r, _) = max_resistance_spectral(&s).unwrap();
        let (exact, _) = resistance::max_resistance(&build_torus(&s).unwrap(), &SolveConfig::default()).unwrap();
        assert!((r - exact).abs() < 1e-10);
    }

    #[test]
    fn cycle_pair_resistances() {
        for m in 3..25 {
            let s = spec(m, 1);
            for k in 0..m {
                let expected = (k * (m - k)) as f64 / m as f64;
                assert!((pair_resistance_spectral(&s, &[k]).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_symmetries() {
        let s = spec(5, 3);
        for index in 0..s.num_vertices() {
            let delta = s.decode(index).unwrap();
            let r = pair_resistance_spectral(&s, &delta).unwrap();
            let mirrored: Vec<_> = delta.iter().map(|&c| (5 - c) % 5).collect();
            assert!((pair_resistance_spectral(&s, &mirrored).unwrap() - r).abs() < 1e-12);
            let rotated = vec![delta[2], delta[0], delta[1]];
            assert!((pair_resistance_spectral(&s, &rotated).unwrap() - r).abs() < 1e-12);
            let swapped = vec![delta[1], delta[0], delta[2]];
            assert!((pair_resistance_spectral(&s, &swapped).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_on_tested_grid() {
        // The 1/(4d) lower bound fails only for the triangle (2/9 < 1/4).
        for d in 1..=8 {
            for m in [3, 4, 5, 8] {
                let s = spec(m, d);
                if s.num_vertices() > 500_000 {
                    continue;
                }
                let r = average_resistance_spectral(&s).unwrap();
                let bound = 1.0 / (4.0 * d as f64);
                if (m, d) == (3, 1) {
                    assert!(r < bound);
                } else {
                    assert!(r >= bound, "M = {m}, d = {d}: {r} < {bound}");
                }
            }
        }
    }

    #[test]
    fn compensated_sum_agrees_with_plain() {
        let s = spec(102, 3);
        assert!(uses_compensation(&s));
        let mut plain = 0.0;
        for_each_nonzero_eigenvalue(&s, |l| plain += 1.0 / l);
        let comp = average_resistance_spectral(&s).unwrap();
        assert!((plain / s.num_vertices() as f64 - comp).abs() < 1e-9);
    }
}
