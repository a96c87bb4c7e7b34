//! Simple random walk: transition law, stationary distribution, exact
//! hitting and commute times, average hitting time, and a reproducible
//! Monte Carlo hitting-time estimator.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::resistance::{self, SolveConfig};

/// Largest graph for which hitting times are solved densely.
pub const DENSE_HITTING_MAX_VERTICES: usize = 2000;

/// Name of the per-replicate generator, reported in CLI metadata.
pub const RNG_NAME: &str = "chacha8 (seed = master_seed, stream = replicate index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkConfig {
    pub master_seed: u64,
    pub replicates: usize,
    /// Walks still short of the target after this many steps are abandoned.
    pub step_cap: u64,
}

impl WalkConfig {
    pub fn new(master_seed: u64, replicates: usize, step_cap: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if step_cap == 0 {
            return Err(Error::Config("step cap must be at least 1".into()));
        }
        Ok(WalkConfig { master_seed, replicates, step_cap })
    }

    /// Step cap of `100 N^2`.
    pub fn with_default_cap(g: &Graph, master_seed: u64, replicates: usize) -> Result<Self> {
        let n = g.num_vertices() as u64;
        Self::new(master_seed, replicates, 100u64.saturating_mul(n).saturating_mul(n).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replicates_used: usize,
    /// Replicates that reached the step cap; excluded from the mean.
    pub capped: usize,
}

/// `P(v, .)`: uniform over the neighbours of `v`, as `(neighbour, prob)`.
pub fn transition_probabilities(g: &Graph, v: usize) -> Result<Vec<(usize, f64)>> {
    g.check_vertex(v)?;
    let deg = g.degree(v);
    if deg == 0 {
        return Err(Error::Degenerate(v));
    }
    let p = 1.0 / deg as f64;
    Ok(g.neighbors(v).iter().map(|&w| (w, p)).collect())
}

/// `pi_v = d_v / 2|E|`.
pub fn stationary_distribution(g: &Graph) -> Result<Vec<f64>> {
    g.ensure_connected()?;
    let two_e = 2.0 * g.num_edges() as f64;
    Ok((0..g.num_vertices()).map(|v| g.degree(v) as f64 / two_e).collect())
}

/// `H_{v, target}` for every start `v`, from the first-step equations
/// `H_tt = 0`, `H_vt = 1 + sum_u P_vu H_ut`.
pub fn hitting_time_exact(g: &Graph, target: usize) -> Result<Vec<f64>> {
    g.check_vertex(target)?;
    g.ensure_connected()?;
    let n = g.num_vertices();
    if n > DENSE_HITTING_MAX_VERTICES {
        return Err(Error::Capacity(format!(
            "dense hitting-time solve on {n} vertices (limit {DENSE_HITTING_MAX_VERTICES})"
        )));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    // (I - P) restricted to non-target rows and columns.
    let idx = |v: usize| if v < target { v } else { v - 1 };
    let mut a = DMatrix::<f64>::identity(n - 1, n - 1);
    for v in (0..n).filter(|&v| v != target) {
        let p = 1.0 / g.degree(v) as f64;
        for &w in g.neighbors(v).iter().filter(|&&w| w != target) {
            a[(idx(v), idx(w))] -= p;
        }
    }
    let h = a
        .lu()
        .solve(&DVector::from_element(n - 1, 1.0))
        .ok_or(Error::Convergence { iterations: 0, residual: f64::INFINITY })?;
    let mut out = Vec::with_capacity(n);
    out.extend(h.iter().take(target));
    out.push(0.0);
    out.extend(h.iter().skip(target));
    Ok(out)
}

/// `C_vw = H_vw + H_wv`.
pub fn commute_time(g: &Graph, v: usize, w: usize) -> Result<f64> {
    g.check_vertex(v)?;
    let to_w = hitting_time_exact(g, w)?;
    let to_v = hitting_time_exact(g, v)?;
    Ok(to_w[v] + to_v[w])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommuteResidual {
    pub pair: (usize, usize),
    pub commute_time: f64,
    /// `2|E| R_eff(v, w)`.
    pub electrical: f64,
    /// `|C - 2|E| R| / (2|E| R)`, or absolute when `v == w`.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommuteReport {
    pub residuals: Vec<CommuteResidual>,
    pub max_residual: f64,
}

impl CommuteReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual < tolerance
    }
}

/// Compares commute times from first-step analysis against `2|E| R_eff`
/// from Laplacian solves for each requested pair.
pub fn commute_identity_check(
    g: &Graph,
    pairs: &[(usize, usize)],
    cfg: &SolveConfig,
) -> Result<CommuteReport> {
    for &(v, w) in pairs {
        g.check_vertex(v)?;
        g.check_vertex(w)?;
    }
    let n = g.num_vertices();
    let mut targets: Vec<usize> = pairs.iter().flat_map(|&(v, w)| [v, w]).collect();
    targets.sort_unstable();
    targets.dedup();
    let solved: Vec<(usize, Vec<f64>)> = targets
        .par_iter()
        .map(|&t| hitting_time_exact(g, t).map(|h| (t, h)))
        .collect::<Result<_>>()?;
    let mut hitting = vec![None; n];
    for (t, h) in solved {
        hitting[t] = Some(h);
    }
    let resistances = resistance::resistance_matrix(g, cfg)?;
    let two_e = 2.0 * g.num_edges() as f64;
    let residuals: Vec<CommuteResidual> = pairs
        .iter()
        .map(|&(v, w)| {
            let c = hitting[w].as_ref().expect("solved")[v] + hitting[v].as_ref().expect("solved")[w];
            let e = two_e * resistances.get(v, w);
            let diff = (c - e).abs();
            let relative_residual = if e == 0.0 { diff } else { diff / e };
            CommuteResidual { pair: (v, w), commute_time: c, electrical: e, relative_residual }
        })
        .collect();
    let max_residual = residuals.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
    Ok(CommuteReport { residuals, max_residual })
}

/// All ordered pairs `(v, w)` with `v < w`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|v| (v + 1..n).map(move |w| (v, w))).collect()
}

/// Average hitting time `tau_0 = sum_{v,w} pi_v pi_w H_vw`, from `N`
/// first-step solves, reduced in index order.
pub fn tau0(g: &Graph) -> Result<f64> {
    let pi = stationary_distribution(g)?;
    let n = g.num_vertices();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|w| hitting_time_exact(g, w))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (w, h) in columns.iter().enumerate() {
        for v in 0..n {
            total += pi[v] * pi[w] * h[v];
        }
    }
    Ok(total)
}

/// Steps for one walk from `start` to `target`, or `None` at the cap.
fn walk_once(g: &Graph, start: usize, target: usize, cap: u64, rng: &mut ChaCha8Rng) -> Option<u64> {
    let mut at = start;
    for step in 1..=cap {
        let nbrs = g.neighbors(at);
        at = nbrs[rng.random_range(0..nbrs.len())];
        if at == target {
            return Some(step);
        }
    }
    None
}

/// Monte Carlo estimate of `H_{v,w}`.
///
/// Replicate `i` draws from its own ChaCha stream `i` under
/// `master_seed`, and the results are reduced in replicate order, so the
/// estimate is bitwise identical under any thread count.
pub fn hitting_time_mc(g: &Graph, v: usize, w: usize, cfg: &WalkConfig) -> Result<HittingEstimate> {
    g.check_vertex(v)?;
    g.check_vertex(w)?;
    if v == w {
        return Err(Error::Range(format!("start and target are both {v}")));
    }
    g.ensure_connected()?;
    let steps: Vec<Option<u64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
            rng.set_stream(i as u64);
            walk_once(g, v, w, cfg.step_cap, &mut rng)
        })
        .collect();
    let done: Vec<f64> = steps.iter().flatten().map(|&s| s as f64).collect();
    let capped = cfg.replicates - done.len();
    if done.is_empty() {
        return Err(Error::EstimationFailed { replicates: cfg.replicates, step_cap: cfg.step_cap });
    }
    let k = done.len() as f64;
    let mean = done.iter().sum::<f64>() / k;
    let standard_error = if done.len() > 1 {
        let var = done.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(HittingEstimate { mean, standard_error, replicates_used: done.len(), capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_torus, TorusSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn transition_examples() {
        assert_eq!(transition_probabilities(&Graph::cycle(3), 0).unwrap(), vec![(1, 0.5), (2, 0.5)]);
        let t = build_torus(&TorusSpec::new(3, 2).unwrap()).unwrap();
        for v in 0..9 {
            let p = transition_probabilities(&t, v).unwrap();
            assert_eq!(p.len(), 4);
            assert!(p.iter().all(|&(_, x)| x == 0.25));
        }
        assert_eq!(transition_probabilities(&Graph::path(2), 0).unwrap(), vec![(1, 1.0)]);
        let iso = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(transition_probabilities(&iso, 2), Err(Error::Degenerate(2))));
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary_distribution(&Graph::path(3)).unwrap(), vec![0.25, 0.5, 0.25]);
        let tri = stationary_distribution(&Graph::cycle(3)).unwrap();
        assert!(tri.iter().all(|&p| close(p, 1.0 / 3.0, 1e-15)));
        let t = build_torus(&TorusSpec::new(4, 3).unwrap()).unwrap();
        assert!(stationary_distribution(&t).unwrap().iter().all(|&p| p == 1.0 / 64.0));
        let broken = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(stationary_distribution(&broken).is_err());
    }

    #[test]
    fn detailed_balance() {
        for seed in 0..20 {
            let g = Graph::random_connected(12, 0.25, seed);
            let pi = stationary_distribution(&g).unwrap();
            assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for v in 0..12 {
                for (w, pvw) in transition_probabilities(&g, v).unwrap() {
                    let pwv = transition_probabilities(&g, w)
                        .unwrap()
                        .into_iter()
                        .find(|&(x, _)| x == v)
                        .unwrap()
                        .1;
                    assert!((pi[v] * pvw - pi[w] * pwv).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hitting_examples() {
        assert_eq!(hitting_time_exact(&Graph::path(2), 1).unwrap(), vec![1.0, 0.0]);
        let tri = hitting_time_exact(&Graph::cycle(3), 1).unwrap();
        assert!(close(tri[0], 2.0, 1e-14) && tri[1] == 0.0 && close(tri[2], 2.0, 1e-14));
        let path = hitting_time_exact(&Graph::path(3), 2).unwrap();
        assert!(close(path[0], 4.0, 1e-14) && close(path[1], 3.0, 1e-14));
    }

    #[test]
    fn hitting_times_at_least_one() {
        for seed in 0..10 {
            let g = Graph::random_connected(15, 0.2, seed);
            for t in 0..15 {
                let h = hitting_time_exact(&g, t).unwrap();
                for (v, &x) in h.iter().enumerate() {
                    if v == t {
                        assert_eq!(x, 0.0);
                    } else {
                        assert!(x.is_finite() && x >= 1.0 - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn commute_examples() {
        assert!(close(commute_time(&Graph::path(2), 0, 1).unwrap(), 2.0, 1e-14));
        assert!(close(commute_time(&Graph::cycle(3), 0, 2).unwrap(), 4.0, 1e-14));
        assert!(close(commute_time(&Graph::path(3), 0, 2).unwrap(), 8.0, 1e-14));
        let g = Graph::random_connected(10, 0.3, 7);
        assert!(close(commute_time(&g, 2, 7).unwrap(), commute_time(&g, 7, 2).unwrap(), 1e-12));
    }

    #[test]
    fn commute_identity_examples() {
        let cfg = SolveConfig::default();
        let p2 = commute_identity_check(&Graph::path(2), &[(0, 1)], &cfg).unwrap();
        assert!(p2.max_residual < 1e-15);
        assert_eq!(p2.residuals[0].electrical, 2.0);
        let tri = commute_identity_check(&Graph::cycle(3), &all_pairs(3), &cfg).unwrap();
        assert!(tri.residuals.iter().all(|r| close(r.commute_time, 4.0, 1e-13)));
        assert!(tri.passes(1e-8));
        let t = build_torus(&TorusSpec::new(3, 2).unwrap()).unwrap();
        let rep = commute_identity_check(&t, &all_pairs(9), &cfg).unwrap();
        assert_eq!(rep.residuals.len(), 36);
        assert!(rep.passes(1e-8), "max residual {}", rep.max_residual);
    }

    #[test]
    fn commute_identity_random_graphs() {
        let cfg = SolveConfig::default();
        for seed in 0..15 {
            let n = 3 + seed as usize * 6;
            let g = Graph::random_connected(n, 0.1, 1000 + seed);
            let rep = commute_identity_check(&g, &all_pairs(n), &cfg).unwrap();
            assert!(rep.passes(1e-8), "seed {seed}: {}", rep.max_residual);
        }
    }

    #[test]
    fn tau0_examples() {
        assert!(close(tau0(&Graph::cycle(3)).unwrap(), 4.0 / 3.0, 1e-14));
        assert!(close(tau0(&Graph::path(2)).unwrap(), 0.5, 1e-14));
        let t = build_torus(&TorusSpec::new(3, 3).unwrap()).unwrap();
        let r = resistance::average_resistance(&t, &SolveConfig::default()).unwrap();
        assert!(close(tau0(&t).unwrap(), 2.0 * 3.0 * 27.0 * r, 1e-8));
    }

    #[test]
    fn tau0_irregular_graph_differs() {
        // A star is not regular; delta N R_ave is not defined by a single delta,
        // and max-degree scaling does not reproduce tau0.
        let g = Graph::star(6);
        assert_eq!(g.regular_degree(), None);
        let t = tau0(&g).unwrap();
        let r = resistance::average_resistance(&g, &SolveConfig::default()).unwrap();
        assert!((t - 5.0 * 6.0 * r).abs() > 1e-3);
    }

    #[test]
    fn mc_deterministic_walk() {
        let g = Graph::path(2);
        let est = hitting_time_mc(&g, 0, 1, &WalkConfig::new(99, 500, 10).unwrap()).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.standard_error, 0.0);
        assert_eq!(est.replicates_used, 500);
        assert_eq!(est.capped, 0);
    }

    #[test]
    fn mc_triangle() {
        let g = Graph::cycle(3);
        let est = hitting_time_mc(&g, 0, 1, &WalkConfig::new(2024, 100_000, 10_000).unwrap()).unwrap();
        assert!((est.mean - 2.0).abs() < 3.0 * est.standard_error, "{est:?}");
    }

    #[test]
    fn mc_torus() {
        let s = TorusSpec::new(3, 2).unwrap();
        let g = build_torus(&s).unwrap();
        let exact = hitting_time_exact(&g, 7).unwrap()[2];
        let cfg = WalkConfig::with_default_cap(&g, 5, 100_000).unwrap();
        let est = hitting_time_mc(&g, 2, 7, &cfg).unwrap();
        assert!((est.mean - exact).abs() < 3.0 * est.standard_error, "{est:?} vs {exact}");
    }

    #[test]
    fn mc_step_cap() {
        let g = Graph::path(30);
        let partial = hitting_time_mc(&g, 0, 29, &WalkConfig::new(1, 200, 900).unwrap()).unwrap();
        assert!(partial.capped > 0);
        assert_eq!(partial.capped + partial.replicates_used, 200);
        let none = hitting_time_mc(&g, 0, 29, &WalkConfig::new(1, 50, 5).unwrap());
        assert!(matches!(none, Err(Error::EstimationFailed { replicates: 50, step_cap: 5 })));
    }

    #[test]
    fn mc_reproducible_across_threads() {
        let g = Graph::random_connected(20, 0.15, 3);
        let cfg = WalkConfig::new(77, 5_000, 1_000_000).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| hitting_time_mc(&g, 0, 19, &cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.standard_error.to_bits(), b.standard_error.to_bits());
        assert_eq!(a, run(3));
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig::new(0, 0, 10).is_err());
        assert!(WalkConfig::new(0, 10, 0).is_err());
        let g = Graph::path(3);
        assert_eq!(WalkConfig::with_default_cap(&g, 0, 1).unwrap().step_cap, 900);
        assert!(hitting_time_mc(&g, 1, 1, &WalkConfig::new(0, 1, 1).unwrap()).is_err());
    }
}
