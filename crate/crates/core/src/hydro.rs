//! The lattice integral
//! `R_hydro(d) = int_{[0,1]^d} 1 / (2d - 2 sum_i cos(2 pi x_i)) dx`,
//! the `M -> infinity` limit of the torus average resistance for `d >= 3`.
//!
//! Two independent quadratures are provided:
//!
//! * `laplace-1d` writes `1/lambda = int_0^inf e^{-lambda t} dt`; the cosine
//!   integral then factorises per axis into modified Bessel functions,
//!   leaving `int_0^inf (e^{-2t} I_0(2t))^d dt`, done by adaptive
//!   Gauss-Kronrod on a geometric partition plus a bounded tail.
//! * `midpoint-dd` is the tensor midpoint rule with Richardson
//!   extrapolation; cost grows as `n^d`, so it stops at `d = 5`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::TorusSpec;
use crate::spectral;

pub const DEFAULT_TARGET_ERROR: f64 = 1e-6;

/// Highest dimension the tensor midpoint rule accepts.
pub const MIDPOINT_MAX_DIM: usize = 5;

/// Below this argument `e^{-s} I_0(s)` is summed from the power series.
const BESSEL_SERIES_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMethod {
    Laplace1d,
    MidpointDd,
}

impl QuadMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            QuadMethod::Laplace1d => "laplace-1d",
            QuadMethod::MidpointDd => "midpoint-dd",
        }
    }
}

impl fmt::Display for QuadMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for QuadMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace-1d" => Ok(QuadMethod::Laplace1d),
            "midpoint-dd" => Ok(QuadMethod::MidpointDd),
            other => Err(Error::Config(format!("unknown quadrature method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// Heuristic; see each method for how it is formed.
    pub error_estimate: f64,
    pub method: QuadMethod,
    pub nodes_used: usize,
}

/// `1 / (2d - 2 sum_i cos(2 pi x_i))` for `x` in `[0,1]^d`.
pub fn hydro_integrand(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Dimension { expected: 1, actual: 0 });
    }
    if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Range(format!("coordinate {bad} outside [0, 1]")));
    }
    let denom: f64 = x.iter().map(|&xi| 2.0 - 2.0 * (2.0 * PI * xi).cos()).sum();
    if denom <= 0.0 {
        return Err(Error::Singular(x.to_vec()));
    }
    Ok(1.0 / denom)
}

/// Exponentially scaled modified Bessel function `e^{-s} I_0(s)`, `s >= 0`.
///
/// Power series below [`BESSEL_SERIES_LIMIT`], Hankel asymptotic expansion
/// above it.
pub fn scaled_bessel_i0(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s < BESSEL_SERIES_LIMIT {
        let q = 0.25 * s * s;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-s).exp()
    } else {
        // sum_k ((2k-1)!!)^2 / (k! 8^k s^k), truncated at the smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0f64;
        loop {
            let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * s);
            if next >= term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * s).sqrt()
    }
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights on nodes 1, 3, 5 and the centre.
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK15_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK15_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += GK15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * h, error: ((kronrod - gauss) * h).abs() }
}

/// Globally adaptive G7/K15 starting from the given breakpoints. Returns
/// `(value, error estimate, function evaluations)`.
fn adaptive_integrate(
    f: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    tolerance: f64,
    max_segments: usize,
) -> (f64, f64, usize) {
    let mut segments: Vec<Segment> = breakpoints
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    let mut evals = 15 * segments.len();
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tolerance || segments.len() >= max_segments {
            break;
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gauss_kronrod(&f, s.a, mid));
        segments.push(gauss_kronrod(&f, mid, s.b));
        evals += 30;
    }
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    (value, error, evals)
}

/// Upper bound on `int_T^inf (e^{-2t} I_0(2t))^d dt`, using
/// `e^{-s} I_0(s) <= (1 + 1/(4s)) / sqrt(2 pi s)` for `s >= 1`.
fn laplace_tail_bound(d: usize, t: f64) -> f64 {
    let half = d as f64 / 2.0;
    let c = ((1.0 + 1.0 / (8.0 * t)) / (4.0 * PI).sqrt()).powi(d as i32);
    c * t.powf(1.0 - half) / (half - 1.0)
}

fn laplace_1d(d: usize, target_error: f64) -> QuadResult {
    let mut cutoff = 1.0;
    while laplace_tail_bound(d, cutoff) >= target_error / 10.0 {
        cutoff *= 2.0;
    }
    let tail = laplace_tail_bound(d, cutoff);
    let mut breakpoints = vec![0.0];
    let mut b = 1.0;
    while b <= cutoff {
        breakpoints.push(b);
        b *= 2.0;
    }
    let exponent = d as i32;
    let (value, error, evals) = adaptive_integrate(
        |t| scaled_bessel_i0(2.0 * t).powi(exponent),
        &breakpoints,
        0.5 * target_error,
        10_000,
    );
    QuadResult {
        value,
        error_estimate: error + tail,
        method: QuadMethod::Laplace1d,
        nodes_used: evals,
    }
}

/// Midpoint rule with `n` (even) nodes per axis. The integrand is symmetric
/// under `x_i -> 1 - x_i`, so only the lower half of each axis is visited.
fn midpoint_sum(d: usize, n: usize) -> (f64, usize) {
    let half = n / 2;
    let axis: Vec<f64> = (0..half)
        .map(|j| 2.0 - 2.0 * (2.0 * PI * (j as f64 + 0.5) / n as f64).cos())
        .collect();
    let inner_count = half.pow(d as u32 - 1);
    let partials: Vec<f64> = axis
        .par_iter()
        .map(|&first| {
            let mut idx = vec![0usize; d - 1];
            let mut sum = 0.0;
            for _ in 0..inner_count {
                let denom: f64 = first + idx.iter().map(|&j| axis[j]).sum::<f64>();
                sum += 1.0 / denom;
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < half {
                        break;
                    }
                    *slot = 0;
                }
            }
            sum
        })
        .collect();
    let total: f64 = partials.iter().sum();
    (total / (half as f64).powi(d as i32), half.pow(d as u32))
}

/// Coarse node count per axis for the midpoint rule; levels used are
/// `n0/2`, `n0` and `2 n0`.
fn midpoint_base_nodes(d: usize) -> usize {
    match d {
        3 => 128,
        4 => 32,
        _ => 16,
    }
}

/// Richardson-extrapolates the pair `(n0, 2 n0)` assuming a leading error
/// of order `h^{d-2}` from the singular cell. The error estimate is the
/// distance to the extrapolation from `(n0/2, n0)`.
fn midpoint_dd(d: usize) -> Result<QuadResult> {
    if d > MIDPOINT_MAX_DIM {
        return Err(Error::Capacity(format!(
            "midpoint-dd supports d <= {MIDPOINT_MAX_DIM}, got {d}"
        )));
    }
    let n0 = midpoint_base_nodes(d);
    let (coarse, c1) = midpoint_sum(d, n0 / 2);
    let (mid, c2) = midpoint_sum(d, n0);
    let (fine, c3) = midpoint_sum(d, 2 * n0);
    let factor = 2f64.powi(d as i32 - 2);
    let extrapolate = |lo: f64, hi: f64| (factor * hi - lo) / (factor - 1.0);
    let value = extrapolate(mid, fine);
    let previous = extrapolate(coarse, mid);
    Ok(QuadResult {
        value,
        error_estimate: (value - previous).abs(),
        method: QuadMethod::MidpointDd,
        nodes_used: c1 + c2 + c3,
    })
}

/// `R_hydro(d)` by the chosen method. Diverges (error) for `d < 3`.
pub fn hydro_integral(d: usize, method: QuadMethod, target_error: f64) -> Result<QuadResult> {
    if d < 3 {
        return Err(Error::Divergent(d));
    }
    if !(target_error > 0.0) {
        return Err(Error::Config(format!("target error must be positive, got {target_error}")));
    }
    match method {
        QuadMethod::Laplace1d => Ok(laplace_1d(d, target_error)),
        QuadMethod::MidpointDd => midpoint_dd(d),
    }
}

/// Runs both methods and fails unless they agree within the sum of their
/// error estimates.
pub fn cross_validate(d: usize, target_error: f64) -> Result<(QuadResult, QuadResult)> {
    let a = hydro_integral(d, QuadMethod::Laplace1d, target_error)?;
    let b = hydro_integral(d, QuadMethod::MidpointDd, target_error)?;
    let allowed = a.error_estimate + b.error_estimate;
    if (a.value - b.value).abs() > allowed {
        return Err(Error::CrossValidation { d, a: a.value, b: b.value, allowed });
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeGap {
    pub side: usize,
    pub lattice: f64,
    pub integral: f64,
    pub gap: f64,
}

/// `|R_ave(T_{M^d}) - R_hydro(d)|` along `sides`, plus whether the gaps
/// strictly decrease.
pub fn lattice_limit_check(d: usize, sides: &[usize], target_error: f64) -> Result<(Vec<LatticeGap>, bool)> {
    let integral = hydro_integral(d, QuadMethod::Laplace1d, target_error)?.value;
    let gaps = sides
        .iter()
        .map(|&m| {
            let lattice = spectral::average_resistance_spectral(&TorusSpec::new(m, d)?)?;
            Ok(LatticeGap { side: m, lattice, integral, gap: (lattice - integral).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = gaps.windows(2).all(|w| w[1].gap < w[0].gap);
    Ok((gaps, decreasing))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_examples() {
        assert!((hydro_integrand(&[0.5, 0.5, 0.5]).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((hydro_integrand(&[0.25, 0.25, 0.25]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((hydro_integrand(&[0.5]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(hydro_integrand(&[0.0, 1.0, 0.0]), Err(Error::Singular(_))));
        assert!(matches!(hydro_integrand(&[1.5, 0.2, 0.2]), Err(Error::Range(_))));
    }

    #[test]
    fn integrand_symmetries() {
        let x = [0.13, 0.71, 0.42, 0.05];
        let base = hydro_integrand(&x).unwrap();
        let reflected: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        assert!((hydro_integrand(&reflected).unwrap() - base).abs() < 1e-14);
        let permuted = [x[3], x[1], x[0], x[2]];
        assert!((hydro_integrand(&permuted).unwrap() - base).abs() < 1e-14);
    }

    /// Trapezoid rule on the periodic integrand: exponentially convergent.
    fn bessel_by_quadrature(s: f64) -> f64 {
        let n = 4096;
        (0..n)
            .map(|j| (s * ((2.0 * PI * j as f64 / n as f64).cos() - 1.0)).exp())
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn scaled_bessel_matches_quadrature() {
        for &s in &[0.0, 1e-3, 0.5, 1.0, 5.0, 17.3, 29.99, 30.0, 30.01, 45.0, 120.0, 800.0] {
            let got = scaled_bessel_i0(s);
            let want = bessel_by_quadrature(s);
            assert!((got - want).abs() <= 1e-13 * want.max(1e-300) + 1e-15, "s = {s}: {got} vs {want}");
        }
    }

    #[test]
    fn scaled_bessel_tail_envelope() {
        let mut s = 1.0;
        while s < 1e8 {
            let lhs = scaled_bessel_i0(s) * (2.0 * PI * s).sqrt();
            assert!(lhs <= 1.0 + 0.25 / s, "s = {s}");
            assert!(lhs >= 1.0);
            s *= 1.37;
        }
    }

    #[test]
    fn tail_bound_below_target() {
        for d in 3..=12 {
            let r = hydro_integral(d, QuadMethod::Laplace1d, 1e-6).unwrap();
            assert!(r.error_estimate <= 1e-6, "d = {d}: {}", r.error_estimate);
        }
    }

    #[test]
    fn gauss_kronrod_polynomials_and_smooth() {
        let s = gauss_kronrod(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((s.value - 1.0 / 21.0).abs() < 1e-15);
        let (v, e, _) = adaptive_integrate(|x: f64| (-x).exp() * x.sin(), &[0.0, 50.0], 1e-12, 500);
        assert!((v - 0.5).abs() < 1e-12 && e < 1e-12);
    }

    #[test]
    fn divergence_and_validation() {
        for d in 0..3 {
            assert!(matches!(hydro_integral(d, QuadMethod::Laplace1d, 1e-6), Err(Error::Divergent(_))));
        }
        assert!(matches!(hydro_integral(6, QuadMethod::MidpointDd, 1e-6), Err(Error::Capacity(_))));
        assert!(hydro_integral(3, QuadMethod::Laplace1d, 0.0).is_err());
        assert_eq!("midpoint-dd".parse::<QuadMethod>().unwrap(), QuadMethod::MidpointDd);
        assert!("simpson".parse::<QuadMethod>().is_err());
    }

    #[test]
    fn three_dimensional_reference() {
        // Reference from an independent run (SciPy quad on the Bessel
        // representation, then cross-checked against Watson's simple cubic
        // integral W = 0.505462...; R_hydro(3) = W / 2).
        let r = hydro_integral(3, QuadMethod::Laplace1d, 1e-8).unwrap();
        assert!((r.value - 0.252_731_009_858_662_9).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn methods_agree_low_dimensions() {
        for d in 3..=5 {
            let (a, b) = cross_validate(d, 1e-7).unwrap();
            assert!((a.value - b.value).abs() < 2e-6, "d = {d}: {a:?} {b:?}");
        }
    }

    #[test]
    fn bounds_hold() {
        for d in 3..=12 {
            let r = hydro_integral(d, QuadMethod::Laplace1d, DEFAULT_TARGET_ERROR).unwrap();
            let df = d as f64;
            assert!(r.value >= 1.0 / (4.0 * df) && r.value <= 4.0 / df);
        }
    }

    #[test]
    fn lattice_gaps_shrink() {
        let (gaps, decreasing) = lattice_limit_check(4, &[4, 8, 16], 1e-8).unwrap();
        assert!(decreasing, "{gaps:?}");
        assert!(lattice_limit_check(2, &[4], 1e-6).is_err());
    }
}
