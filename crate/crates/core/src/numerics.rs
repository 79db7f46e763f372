//! Quadrature and series engines.
//!
//! A globally adaptive Gauss–Kronrod 7/15 rule handles one-dimensional
//! integrals; two-dimensional regions are integrated as iterated 1-D
//! integrals (the angle simplex is first mapped onto a square so that no
//! sliver subdivisions appear near the `x + y = π` edge). Inverse-
//! square-root endpoint singularities — the `1/√Δ` factor in every side
//! density — are removed exactly by the sine substitution before the
//! adaptive rule ever sees the integrand.

use crate::specfun::SpecTolerance;
use std::cell::Cell;
use std::f64::consts::PI;

/// Result of a quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub err_est: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: u64,
}

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any single interval.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 40 }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    /// Cutoff radius for semi-infinite Gaussian-weighted integrals: the
    /// smallest integer R with `exp(-R²/4)·R⁴ < abs_tol/100`, plus one
    /// unit of margin. The defaults give R = 14.
    pub fn truncation_radius(&self) -> f64 {
        let mut r = 4.0_f64;
        while (-r * r / 4.0).exp() * r.powi(4) >= self.abs_tol / 100.0 && r < 60.0 {
            r += 1.0;
        }
        r + 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// The adaptive engine hit `max_depth` before reaching tolerance;
    /// carries the best estimate obtained.
    NoConvergence { best: QuadResult },
    /// A series hit its term cap without converging.
    SeriesNoConvergence { terms: usize },
    /// A series converged but cancellation destroyed the result: the
    /// partial sum is smaller than the roundoff floor of its largest term.
    SeriesCancellation { largest_term: f64, sum: f64 },
    /// Invalid integration bounds or region.
    BadDomain(String),
}

impl std::fmt::Display for QuadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadError::NoConvergence { best } => write!(
                f,
                "quadrature did not reach tolerance (best {} ± {})",
                best.value, best.err_est
            ),
            QuadError::SeriesNoConvergence { terms } => {
                write!(f, "series did not converge within {terms} terms")
            }
            QuadError::SeriesCancellation { largest_term, sum } => write!(
                f,
                "series cancellation: sum {sum} below roundoff floor of largest term {largest_term}"
            ),
            QuadError::BadDomain(msg) => write!(f, "bad domain: {msg}"),
        }
    }
}

impl std::error::Error for QuadError {}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK values).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 application on [a, b]; returns (value, err_est).
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv = [0.0_f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let value = kronrod * half;
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err)
}

/// Adaptive 1-D integration of `f` over the finite interval `(lo, hi)`.
///
/// Globally adaptive: the subinterval with the largest error estimate is
/// bisected until `Σ err <= max(abs_tol, rel_tol · |Σ value|)` or an
/// interval would exceed `max_depth` bisections.
pub fn integrate_1d(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(QuadError::BadDomain(format!("bad interval ({lo}, {hi})")));
    }
    let evals = Cell::new(0u64);
    let mut count_f = |x: f64| {
        evals.set(evals.get() + 1);
        f(x)
    };

    // (value, err, a, b, depth); plain vec scanned for the worst interval —
    // interval counts stay small enough that a heap buys nothing.
    let mut segs: Vec<(f64, f64, f64, f64, u32)> = Vec::with_capacity(64);
    let (v, e) = gk15(&mut count_f, lo, hi);
    segs.push((v, e, lo, hi, 0));

    loop {
        let total: f64 = segs.iter().map(|s| s.0).sum();
        let err: f64 = segs.iter().map(|s| s.1).sum();
        let target = self::tolerance(cfg, total);
        if err <= target {
            return Ok(QuadResult { value: total, err_est: err, evaluations: evals.get() });
        }
        // split worst interval
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("non-empty");
        let (_, _, a, b, depth) = segs.swap_remove(idx);
        if depth >= cfg.max_depth {
            let err_full = err;
            return Err(QuadError::NoConvergence {
                best: QuadResult { value: total, err_est: err_full, evaluations: evals.get() },
            });
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut count_f, a, mid);
        let (v2, e2) = gk15(&mut count_f, mid, b);
        segs.push((v1, e1, a, mid, depth + 1));
        segs.push((v2, e2, mid, b, depth + 1));
        if segs.len() > 100_000 {
            let total: f64 = segs.iter().map(|s| s.0).sum();
            let err: f64 = segs.iter().map(|s| s.1).sum();
            return Err(QuadError::NoConvergence {
                best: QuadResult { value: total, err_est: err, evaluations: evals.get() },
            });
        }
    }
}

fn tolerance(cfg: &QuadConfig, value: f64) -> f64 {
    cfg.abs_tol.max(cfg.rel_tol * value.abs())
}

/// Two-dimensional integration region.
#[derive(Debug, Clone, Copy)]
pub enum Region2d {
    Rectangle { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
    /// The open triangle `{x > 0, y > 0, x + y < π}` of valid angle pairs.
    AngleSimplex,
}

/// Iterated adaptive 2-D integration of `f(x, y)` over `region`.
///
/// The simplex is mapped to `[0,π] × [0,1]` via `y = (π - x)·s` with
/// Jacobian `(π - x)`, which keeps integrands bounded along `x + y = π`.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    region: Region2d,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    match region {
        Region2d::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
            if !(x_lo < x_hi && y_lo < y_hi) {
                return Err(QuadError::BadDomain(format!(
                    "bad rectangle ({x_lo}, {x_hi}) x ({y_lo}, {y_hi})"
                )));
            }
            integrate_iterated(&f, x_lo, x_hi, |_| (y_lo, y_hi), cfg)
        }
        Region2d::AngleSimplex => {
            let g = |x: f64, s: f64| f(x, (PI - x) * s) * (PI - x);
            integrate_iterated(&g, 0.0, PI, |_| (0.0, 1.0), cfg)
        }
    }
}

/// Outer adaptive integral over x of the inner adaptive integral over y.
fn integrate_iterated(
    f: &impl Fn(f64, f64) -> f64,
    x_lo: f64,
    x_hi: f64,
    y_range: impl Fn(f64) -> (f64, f64),
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    let inner_evals = Cell::new(0u64);
    let inner_err = Cell::new(0.0f64);
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / (x_hi - x_lo) * 0.25,
        rel_tol: (cfg.rel_tol * 0.1).max(1e-14),
        max_depth: cfg.max_depth,
    };
    let outer = |x: f64| {
        let (lo, hi) = y_range(x);
        match integrate_1d(|y| f(x, y), lo, hi, &inner_cfg) {
            Ok(r) => {
                inner_evals.set(inner_evals.get() + r.evaluations);
                inner_err.set(inner_err.get().max(r.err_est));
                r.value
            }
            // Propagate the best estimate; the outer error control will
            // reflect the roughness.
            Err(QuadError::NoConvergence { best }) => {
                inner_evals.set(inner_evals.get() + best.evaluations);
                inner_err.set(inner_err.get().max(best.err_est));
                best.value
            }
            Err(_) => f64::NAN,
        }
    };
    let mut result = integrate_1d(outer, x_lo, x_hi, cfg)?;
    result.evaluations += inner_evals.get();
    result.err_est += inner_err.get() * (x_hi - x_lo);
    Ok(result)
}

/// Integrates `h(y) / sqrt((y - y_lo)(y_hi - y))` over `(y_lo, y_hi)` for
/// smooth `h`, removing both endpoint singularities exactly with the
/// substitution `y = m + r·sin t`, `m = (y_lo+y_hi)/2`, `r = (y_hi-y_lo)/2`:
/// the transformed integral is `∫ h(m + r sin t) dt` over `(-π/2, π/2)`.
pub fn integrate_sqrt_singular(
    h: impl Fn(f64) -> f64,
    y_lo: f64,
    y_hi: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    integrate_sqrt_singular_segment(h, y_lo, y_hi, y_lo, y_hi, cfg)
}

/// Same transform as [`integrate_sqrt_singular`] restricted to the
/// subinterval `(a, b)` of `(y_lo, y_hi)`; used when integrating a side
/// density over one histogram cell of its support.
pub fn integrate_sqrt_singular_segment(
    h: impl Fn(f64) -> f64,
    y_lo: f64,
    y_hi: f64,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    if !(y_lo < y_hi) || !y_lo.is_finite() || !y_hi.is_finite() {
        return Err(QuadError::BadDomain(format!("bad interval ({y_lo}, {y_hi})")));
    }
    if !(a >= y_lo && b <= y_hi && a < b) {
        return Err(QuadError::BadDomain(format!(
            "segment ({a}, {b}) not inside ({y_lo}, {y_hi})"
        )));
    }
    let m = 0.5 * (y_lo + y_hi);
    let r = 0.5 * (y_hi - y_lo);
    // asin amplifies rounding near ±1; pin the interval endpoints to ±π/2.
    let t_of = |y: f64| {
        if y == y_lo {
            -std::f64::consts::FRAC_PI_2
        } else if y == y_hi {
            std::f64::consts::FRAC_PI_2
        } else {
            ((y - m) / r).clamp(-1.0, 1.0).asin()
        }
    };
    integrate_1d(|t| h(m + r * t.sin()), t_of(a), t_of(b), cfg)
}

/// Sums `Σ_k ε_k · term(k)` with the Neumann weights `ε_0 = 1`, `ε_k = 2`,
/// truncating once three consecutive weighted terms fall below
/// `abs_tol · |partial sum|`.
///
/// Fails with [`QuadError::SeriesNoConvergence`] when `max_terms` is hit,
/// and with [`QuadError::SeriesCancellation`] when the sum converged to
/// something smaller than the roundoff floor of its largest term — the
/// alternating correlated-Rice series does exactly that as `ρ → 1`.
pub fn sum_bessel_series(
    term: impl Fn(usize) -> f64,
    tol: &SpecTolerance,
) -> Result<f64, QuadError> {
    let mut sum = 0.0;
    let mut largest = 0.0_f64;
    let mut quiet = 0;
    for k in 0..tol.max_terms {
        let eps = if k == 0 { 1.0 } else { 2.0 };
        let t = eps * term(k);
        sum += t;
        largest = largest.max(t.abs());
        if t.abs() <= tol.abs_tol * sum.abs().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 3 {
                if sum.abs() < largest * f64::EPSILON / tol.abs_tol.min(1.0) {
                    return Err(QuadError::SeriesCancellation { largest_term: largest, sum });
                }
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(QuadError::SeriesNoConvergence { terms: tol.max_terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun;

    #[test]
    fn integrate_sin_over_half_period() {
        let r = integrate_1d(|x| x.sin(), 0.0, PI, &QuadConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.err_est < 1e-10);
        assert!(r.evaluations >= 15);
    }

    #[test]
    fn integrate_rejects_bad_interval() {
        assert!(integrate_1d(|x| x, 1.0, 1.0, &QuadConfig::default()).is_err());
        assert!(integrate_1d(|x| x, 0.0, f64::INFINITY, &QuadConfig::default()).is_err());
    }

    #[test]
    fn integrate_reports_non_convergence_with_best_estimate() {
        // A needle the rule cannot resolve at depth 3.
        let cfg = QuadConfig { max_depth: 3, ..QuadConfig::default() };
        let needle = |x: f64| (-(x * x) * 1e8).exp();
        match integrate_1d(needle, -1.0, 1.0, &cfg) {
            Err(QuadError::NoConvergence { best }) => {
                assert!(best.value.is_finite());
                assert!(best.err_est > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_cross_check() {
        // ∫_0^{π/2} sqrt(1 - sin²θ/4) dθ = E(1/2)
        let r = integrate_1d(
            |t| (1.0 - 0.25 * t.sin() * t.sin()).sqrt(),
            0.0,
            PI / 2.0,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - specfun::ellip_e(0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn integrate_2d_constant_over_unit_square() {
        let r = integrate_2d(
            |_, _| 1.0,
            Region2d::Rectangle { x_lo: 0.0, x_hi: 1.0, y_lo: 0.0, y_hi: 1.0 },
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_2d_simplex_area() {
        let r = integrate_2d(|_, _| 1.0, Region2d::AngleSimplex, &QuadConfig::default()).unwrap();
        assert!((r.value - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn sqrt_singular_arcsine_integral() {
        // h ≡ 1 integrates to π for any interval.
        let r = integrate_sqrt_singular(|_| 1.0, 0.3, 1.9, &QuadConfig::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-13);
    }

    #[test]
    fn sqrt_singular_arcsine_random_intervals() {
        // Deterministic LCG fuzz over 100 intervals.
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let lo = next() * 10.0 - 5.0;
            let hi = lo + next() * 10.0 + 1e-3;
            let r = integrate_sqrt_singular(|_| 1.0, lo, hi, &QuadConfig::default()).unwrap();
            assert!((r.value - PI).abs() < 1e-12, "({lo}, {hi})");
        }
    }

    #[test]
    fn sqrt_singular_linear_h() {
        // h(y) = y on (0, 2): midpoint 1, integral π.
        let r = integrate_sqrt_singular(|y| y, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
    }

    #[test]
    fn sqrt_singular_segment_splits_consistently() {
        let cfg = QuadConfig::default();
        let h = |y: f64| (1.0 + y * y).ln() + 1.0;
        let whole = integrate_sqrt_singular(&h, -1.0, 3.0, &cfg).unwrap().value;
        let left = integrate_sqrt_singular_segment(&h, -1.0, 3.0, -1.0, 0.7, &cfg).unwrap().value;
        let right = integrate_sqrt_singular_segment(&h, -1.0, 3.0, 0.7, 3.0, &cfg).unwrap().value;
        assert!((whole - left - right).abs() < 1e-11);
    }

    #[test]
    fn appendix_inner_integral_identity_at_x2() {
        // ∫_{|x-1|}^{x+1} y² / sqrt((x+y+1)(-x+y+1)(x-y+1)(x+y-1)) dy
        //   = (x+1) E(2 sqrt x / (x+1))   at x = 2.
        let x = 2.0_f64;
        let (lo, hi) = ((x - 1.0).abs(), x + 1.0);
        let h = |y: f64| y * y / ((y + lo) * (y + hi)).sqrt();
        let r = integrate_sqrt_singular(h, lo, hi, &QuadConfig::default()).unwrap();
        let rhs = (x + 1.0) * specfun::ellip_e(2.0 * x.sqrt() / (x + 1.0)).unwrap();
        assert!((r.value - rhs).abs() < 1e-11, "{} vs {}", r.value, rhs);
    }

    #[test]
    fn bessel_series_trivial_and_geometric() {
        let tol = SpecTolerance::default();
        // only k = 0 contributes
        let s = sum_bessel_series(|k| if k == 0 { 5.0 } else { 0.0 }, &tol).unwrap();
        assert_eq!(s, 5.0);
        // geometric with Neumann weights: 1 + 2 r/(1-r) = 3 at r = 1/2
        let s = sum_bessel_series(|k| 0.5_f64.powi(k as i32), &tol).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_series_failure_modes() {
        let tol = SpecTolerance { abs_tol: 1e-12, max_terms: 50 };
        assert!(matches!(
            sum_bessel_series(|_| 1.0, &tol),
            Err(QuadError::SeriesNoConvergence { terms: 50 })
        ));
        // Alternating catastrophic cancellation: huge terms, zero-ish sum.
        let cancel = |k: usize| {
            if k < 30 {
                (-1.0_f64).powi(k as i32) * 1e10 / (1.0 + k as f64 * 1e-14)
            } else {
                0.0
            }
        };
        assert!(matches!(
            sum_bessel_series(cancel, &SpecTolerance::default()),
            Err(QuadError::SeriesCancellation { .. })
        ));
    }

    #[test]
    fn truncation_radius_policy() {
        assert_eq!(QuadConfig::default().truncation_radius(), 14.0);
        // Looser tolerance allows a smaller box.
        let loose = QuadConfig::with_tol(1e-4, 1e-4);
        assert!(loose.truncation_radius() < 14.0);
        // Tighter tolerance never shrinks it.
        let tight = QuadConfig::with_tol(1e-14, 1e-14);
        assert!(tight.truncation_radius() >= 14.0);
    }
}
