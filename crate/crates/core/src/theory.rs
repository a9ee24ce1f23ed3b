//! Closed-form rates, capacities and thresholds.
//!
//! Rates are in bits per test. The density parameter `theta` describes the
//! sparsity regime `K ~ N^theta`; every rate function takes `theta` in (0, 1).

use std::f64::consts::{E, LN_2};

use num_bigint::BigUint;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest `N` for which [`log2_binomial`] uses exact integer arithmetic.
pub const EXACT_BINOMIAL_LIMIT: u64 = 1000;

/// Grid step for the outer maximisation in [`bernoulli_capacity`].
const NU_GRID_STEP: f64 = 0.01;
const NU_GRID_MAX: f64 = 10.0;

/// A rate curve sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePoint {
    pub theta: f64,
    pub value: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("theta must lie in (0, 1), got {theta}")))
    }
}

/// `log2 C(N, K)`.
pub fn log2_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::param(format!("K = {k} exceeds N = {n}")));
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        Ok(log2_binomial_exact(n, k))
    } else {
        Ok(log2_binomial_lgamma(n, k))
    }
}

pub(crate) fn log2_binomial_exact(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c = BigUint::from(1u32);
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    big_log2(&c)
}

fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    // Keep the top 64 bits; the discarded tail changes the log by < 2^-63.
    let shift = bits - 64;
    let top = (x >> shift).iter_u64_digits().next().unwrap();
    (top as f64).log2() + shift as f64
}

pub(crate) fn log2_binomial_lgamma(n: u64, k: u64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / LN_2
}

/// Bits learned per test, `log2 C(N, K) / T`.
pub fn rate(n: u64, k: u64, tests: u64) -> Result<f64> {
    if tests == 0 {
        return Err(Error::param("T must be at least 1"));
    }
    Ok(log2_binomial(n, k)? / tests as f64)
}

/// Counting bound on the success probability of any scheme with `tests`
/// tests: `min(1, 2^T / C(N, K))`.
pub fn counting_bound(n: u64, k: u64, tests: u64) -> Result<f64> {
    let exponent = tests as f64 - log2_binomial(n, k)?;
    Ok(if exponent >= 0.0 { 1.0 } else { exponent.exp2() })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Objective of the Bernoulli capacity maximisation at a given `nu`.
pub fn bernoulli_capacity_objective(theta: f64, nu: f64) -> f64 {
    let q = (-nu).exp();
    let counting = nu * q / LN_2 * (1.0 - theta) / theta;
    counting.min(binary_entropy(q))
}

/// Capacity of nonadaptive testing with Bernoulli designs,
/// `max_nu min{ nu e^-nu / ln 2 * (1-theta)/theta, h(e^-nu) }`.
///
/// Grid search over `nu` in (0, 10] followed by ternary refinement on the
/// bracket around the best grid point.
pub fn bernoulli_capacity(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let f = |nu: f64| bernoulli_capacity_objective(theta, nu);

    let steps = (NU_GRID_MAX / NU_GRID_STEP).round() as usize;
    let (best_i, mut best) = (1..=steps)
        .map(|i| (i, f(i as f64 * NU_GRID_STEP)))
        .fold((1, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });

    let mut lo = (best_i as f64 - 1.0) * NU_GRID_STEP;
    let mut hi = (best_i as f64 + 1.0) * NU_GRID_STEP;
    lo = lo.max(1e-9);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best = best.max(f(0.5 * (lo + hi)));
    Ok(best)
}

/// COMP with a Bernoulli design: `(1 - theta) / (e ln 2)`.
pub fn comp_bernoulli_rate(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((1.0 - theta) / (E * LN_2))
}

/// COMP with a constant column weight design at `nu = ln 2`: `ln 2 (1 - theta)`.
pub fn comp_ccw_rate(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(LN_2 * (1.0 - theta))
}

/// COMP rate with a constant column weight design for an arbitrary `nu`.
///
/// COMP succeeds once `N (1 - e^-nu)^(nu T / K)` vanishes, i.e. for
/// `T > K ln N / (-nu ln(1 - e^-nu))`; dividing `log2 C(N, K) ~ (1 - theta) K log2 N`
/// by that threshold gives this rate. It peaks at `nu = ln 2`, where it equals
/// [`comp_ccw_rate`].
pub fn comp_ccw_rate_for_nu(theta: f64, nu: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param(format!("nu must be positive, got {nu}")));
    }
    let positive_fraction = -(-nu).exp_m1();
    Ok((1.0 - theta) * nu * -positive_fraction.ln() / LN_2)
}

/// Upper bound on the rate of any algorithm with a constant column weight
/// design: `min{1, ln 2 (1 - theta) / theta}`.
pub fn ccw_converse(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((LN_2 * (1.0 - theta) / theta).min(1.0))
}

/// Ratio of the two COMP rates, `e (ln 2)^2`.
pub fn comp_rate_gain() -> f64 {
    E * LN_2 * LN_2
}

/// Density above which CCW COMP beats every Bernoulli-design algorithm:
/// `1 / (e (ln 2)^2)`.
pub fn comp_beats_bernoulli_capacity_above() -> f64 {
    1.0 / comp_rate_gain()
}

/// Density below which CCW COMP beats the best previously known practical
/// rate, `1 / (e ln 2)`: `1 - 1 / (e (ln 2)^2)`.
pub fn comp_beats_practical_below() -> f64 {
    1.0 - 1.0 / comp_rate_gain()
}

/// Tests needed by COMP with a constant column weight design:
/// `K log2 N / ln 2`.
pub fn t_star_comp(n: u64, k: u64) -> Result<f64> {
    if n < 2 || k < 1 {
        return Err(Error::param("T*_COMP needs N >= 2 and K >= 1"));
    }
    Ok(k as f64 * (n as f64).log2() / LN_2)
}

/// Algorithm-independent threshold for constant column weight designs:
/// `max{K log2(N/K), K log2 K / ln 2}`.
pub fn t_star_converse(n: u64, k: u64) -> Result<f64> {
    if k < 1 || n <= k {
        return Err(Error::param("T* needs N > K >= 1"));
    }
    let (n, k) = (n as f64, k as f64);
    Ok((k * (n / k).log2()).max(k * k.log2() / LN_2))
}

/// Expected number of distinct coupons after `selections` uniform draws from
/// `population`: `(1 - (1 - 1/T)^c) T`.
pub fn coupon_expected_distinct(population: u64, selections: u64) -> Result<f64> {
    if population == 0 {
        return Err(Error::param("coupon population must be at least 1"));
    }
    let t = population as f64;
    let miss = (1.0 - 1.0 / t).powf(selections as f64);
    Ok((1.0 - miss) * t)
}

/// Tail bound `min(1, 2 exp(-eps^2 T / alpha))` on
/// `|W(alpha T) - (1 - e^-alpha) T| >= eps T`.
pub fn coupon_concentration_bound(population: u64, alpha: f64, eps: f64) -> Result<f64> {
    if population == 0 || !(alpha > 0.0) || !(eps > 0.0) {
        return Err(Error::param("need T >= 1, alpha > 0 and eps > 0"));
    }
    Ok((2.0 * (-eps * eps * population as f64 / alpha).exp()).min(1.0))
}

/// COMP success probability given `M` positive tests, for designs whose
/// columns are `L` independent uniform draws: `(1 - (M/T)^L)^(N-K)`.
pub fn comp_success_given_m(
    positives: u64,
    tests: u64,
    weight: u64,
    n: u64,
    k: u64,
) -> Result<f64> {
    if positives > tests || tests == 0 || weight == 0 || k >= n {
        return Err(Error::param(
            "need 0 <= M <= T, T >= 1, L >= 1 and N > K",
        ));
    }
    let all_positive = (positives as f64 / tests as f64).powf(weight as f64);
    Ok((1.0 - all_positive).powf((n - k) as f64))
}

/// Samples a rate function on an inclusive `theta` grid.
pub fn sample_curve<F>(thetas: &[f64], f: F) -> Result<Vec<RatePoint>>
where
    F: Fn(f64) -> Result<f64>,
{
    thetas
        .iter()
        .map(|&theta| Ok(RatePoint { theta, value: f(theta)? }))
        .collect()
}

/// Root of a continuous `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)`
/// must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    if f_lo.signum() == f(hi).signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn binomial_logs() {
        assert!(close(log2_binomial(4, 2).unwrap(), 6f64.log2(), 1e-12));
        assert_eq!(log2_binomial(17, 0).unwrap(), 0.0);
        assert!(log2_binomial(3, 4).is_err());
        // C(500, 10) = 245810588801891098700, log2 = 67.736...
        let exact = 245_810_588_801_891_098_700f64.log2();
        assert!(close(log2_binomial(500, 10).unwrap(), exact, 1e-9));
    }

    #[test]
    fn binomial_paths_agree_on_overlap() {
        for &(n, k) in &[(1000, 1), (1000, 10), (1000, 100), (1000, 500), (900, 333), (200, 7)] {
            let a = log2_binomial_exact(n, k);
            let b = log2_binomial_lgamma(n, k);
            assert!(((a - b) / a).abs() < 1e-9, "{n} {k}: {a} vs {b}");
        }
    }

    #[test]
    fn rate_and_counting_bound() {
        assert!(close(rate(4, 2, 1).unwrap(), 6f64.log2(), 1e-12));
        assert_eq!(rate(10, 0, 3).unwrap(), 0.0);
        let l = log2_binomial(500, 10).unwrap();
        assert!(close(rate(500, 10, 136).unwrap(), l / 136.0, 1e-12));
        assert!(close(counting_bound(4, 2, 1).unwrap(), 1.0 / 3.0, 1e-12));
        assert_eq!(counting_bound(500, 10, 68).unwrap(), 1.0);
        assert!(close(counting_bound(500, 10, 60).unwrap(), (60.0 - l).exp2(), 1e-15));
    }

    #[test]
    fn capacity_is_one_in_sparse_regime() {
        for theta in [0.05, 0.1, 0.25, 1.0 / 3.0] {
            assert!(close(bernoulli_capacity(theta).unwrap(), 1.0, 1e-6), "{theta}");
        }
    }

    #[test]
    fn capacity_in_dense_regime_matches_dense_grid() {
        // Independent check: brute-force grid with step 1e-5 over nu.
        for theta in [0.5, 0.7, 0.9] {
            let brute = (1..=1_000_000)
                .map(|i| bernoulli_capacity_objective(theta, i as f64 * 1e-5))
                .fold(f64::NEG_INFINITY, f64::max);
            let c = bernoulli_capacity(theta).unwrap();
            assert!(close(c, brute, 1e-6), "{theta}: {c} vs {brute}");
        }
        // For theta = 0.9 the first branch binds at nu = 1: (1/9) / (e ln 2).
        assert!(close(bernoulli_capacity(0.9).unwrap(), 1.0 / 9.0 / (E * LN_2), 1e-6));
    }

    #[test]
    fn comp_rates() {
        assert!(close(comp_bernoulli_rate(1e-12).unwrap(), 0.5307, 1e-4));
        assert!(close(comp_bernoulli_rate(0.5).unwrap(), 0.2654, 1e-4));
        assert!(close(comp_ccw_rate(1e-12).unwrap(), 0.6931, 1e-4));
        assert!(close(comp_ccw_rate(0.5).unwrap(), 0.3466, 1e-4));
        assert!(comp_ccw_rate(1.0 - 1e-12).unwrap() < 1e-11);
        assert!(comp_ccw_rate(0.0).is_err());
    }

    #[test]
    fn nu_ln2_maximises_comp_rate() {
        let at_ln2 = comp_ccw_rate_for_nu(0.3, LN_2).unwrap();
        assert!(close(at_ln2, comp_ccw_rate(0.3).unwrap(), 1e-12));
        let (best_nu, _) = (1..=5000)
            .map(|i| i as f64 * 1e-3)
            .map(|nu| (nu, comp_ccw_rate_for_nu(0.3, nu).unwrap()))
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        assert!((best_nu - LN_2).abs() <= 1e-3, "{best_nu}");
    }

    #[test]
    fn converse_values() {
        assert_eq!(ccw_converse(0.3).unwrap(), 1.0);
        assert!(close(ccw_converse(0.5).unwrap(), LN_2, 1e-12));
        let crossover = LN_2 / (1.0 + LN_2);
        assert!(close(ccw_converse(crossover).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn thresholds() {
        assert!(close(t_star_comp(1024, 10).unwrap(), 100.0 / LN_2, 1e-9));
        assert!(close(t_star_comp(2, 1).unwrap(), 1.0 / LN_2, 1e-12));
        assert!(close(t_star_comp(500, 10).unwrap(), 129.349, 1e-3));
        assert!(close(t_star_converse(500, 10).unwrap(), 10.0 * 50f64.log2(), 1e-9));
        assert!(close(t_star_converse(64, 1).unwrap(), 6.0, 1e-12));
        assert!(close(t_star_converse(2000, 100).unwrap(), 958.5, 0.05));
        assert!(t_star_converse(5, 5).is_err());
    }

    #[test]
    fn comp_threshold_dominates_converse() {
        for n in 2..300u64 {
            for k in 1..n {
                assert!(t_star_comp(n, k).unwrap() >= t_star_converse(n, k).unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn coupon_values() {
        assert_eq!(coupon_expected_distinct(9, 0).unwrap(), 0.0);
        assert_eq!(coupon_expected_distinct(1, 5).unwrap(), 1.0);
        assert!(close(coupon_expected_distinct(2, 2).unwrap(), 1.5, 1e-15));
        assert!(close(
            coupon_concentration_bound(100, 0.5, 0.1).unwrap(),
            2.0 * (-2f64).exp(),
            1e-12
        ));
        assert_eq!(coupon_concentration_bound(1, 1.0, 1e-9).unwrap(), 1.0);
        assert!(coupon_concentration_bound(100, 1.0, 10.0).unwrap() < 1e-100);
    }

    #[test]
    fn comp_conditional_success() {
        assert_eq!(comp_success_given_m(0, 10, 3, 20, 2).unwrap(), 1.0);
        assert_eq!(comp_success_given_m(10, 10, 3, 20, 2).unwrap(), 0.0);
        assert!(close(comp_success_given_m(5, 10, 2, 5, 2).unwrap(), 0.421875, 1e-15));
        let series: Vec<f64> =
            (0..=40).map(|m| comp_success_given_m(m, 40, 5, 100, 4).unwrap()).collect();
        assert!(series.windows(2).all(|w| w[1] <= w[0]));
        assert!(comp_success_given_m(11, 10, 2, 5, 2).is_err());
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!(close(r, 2f64.sqrt(), 1e-11));
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-6).is_none());
    }
}
