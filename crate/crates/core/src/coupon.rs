//! Coupon-collector self-checks.
//!
//! The number of distinct tests hit by the `K L` draws of the defective columns
//! is a coupon-collector count, so the closed forms in [`crate::theory`] are
//! checked here against exhaustive enumeration and Monte Carlo.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_for};
use crate::theory::{coupon_concentration_bound, coupon_expected_distinct};

/// Exhaustive enumeration is limited to populations and draw counts of this size.
pub const MAX_EXHAUSTIVE: u64 = 8;

/// Exact `E W(c)` by enumerating all `T^c` equally likely selection sequences.
pub fn enumerate_expected_distinct(population: u64, selections: u64) -> f64 {
    assert!(population >= 1);
    let total = population.pow(selections as u32);
    let mut sum = 0u64;
    let mut seq = vec![0u64; selections as usize];
    for _ in 0..total {
        let mut seen = 0u64;
        for &s in &seq {
            seen |= 1 << s;
        }
        sum += seen.count_ones() as u64;
        // odometer increment
        for digit in seq.iter_mut() {
            *digit += 1;
            if *digit < population {
                break;
            }
            *digit = 0;
        }
    }
    sum as f64 / total as f64
}

/// Number of distinct coupons after `selections` uniform draws.
pub fn sample_distinct<R: Rng + ?Sized>(rng: &mut R, population: usize, selections: usize) -> usize {
    let mut seen = vec![false; population];
    let mut distinct = 0;
    for _ in 0..selections {
        let s = rng.random_range(0..population);
        if !seen[s] {
            seen[s] = true;
            distinct += 1;
        }
    }
    distinct
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Exhaustive comparison of the closed form with enumeration for every
/// `1 <= T <= t_max`, `0 <= c <= c_max`.
pub fn exhaustive_check(t_max: u64, c_max: u64, tol: f64) -> Result<Vec<CheckLine>> {
    if t_max == 0 || t_max > MAX_EXHAUSTIVE || c_max > MAX_EXHAUSTIVE {
        return Err(Error::param(format!(
            "exhaustive check needs 1 <= T <= {MAX_EXHAUSTIVE} and c <= {MAX_EXHAUSTIVE}"
        )));
    }
    let mut lines = Vec::new();
    for t in 1..=t_max {
        for c in 0..=c_max {
            let formula = coupon_expected_distinct(t, c)?;
            let exact = enumerate_expected_distinct(t, c);
            lines.push(CheckLine {
                name: format!("exhaustive T={t} c={c}"),
                passed: (formula - exact).abs() <= tol,
                detail: format!("formula {formula:.12} enumeration {exact:.12}"),
            });
        }
    }
    Ok(lines)
}

/// Monte Carlo mean and tail checks at `c = alpha T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCheck {
    pub population: usize,
    pub alpha: f64,
    pub eps: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub expected_mean: f64,
    pub tail_frequency: f64,
    pub tail_bound: f64,
}

pub fn tail_check(population: usize, alpha: f64, eps: f64, trials: u64, seed: u64) -> Result<TailCheck> {
    if population == 0 || trials < 2 || !(alpha > 0.0) || !(eps > 0.0) {
        return Err(Error::param("need T >= 1, trials >= 2, alpha > 0 and eps > 0"));
    }
    let selections = (alpha * population as f64).round() as usize;
    let asymptotic = (1.0 - (-alpha).exp()) * population as f64;
    let counts: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(derive_seed(seed, &[j]));
            sample_distinct(&mut rng, population, selections) as f64
        })
        .collect();
    let n = trials as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let tail = counts
        .iter()
        .filter(|&&w| (w - asymptotic).abs() >= eps * population as f64)
        .count() as f64
        / n;
    Ok(TailCheck {
        population,
        alpha,
        eps,
        mean,
        mean_se: (var / n).sqrt(),
        expected_mean: coupon_expected_distinct(population as u64, selections as u64)?,
        tail_frequency: tail,
        tail_bound: coupon_concentration_bound(population as u64, alpha, eps)?,
    })
}

impl TailCheck {
    pub fn lines(&self) -> Vec<CheckLine> {
        let z = (self.mean - self.expected_mean).abs() / self.mean_se.max(1e-12);
        vec![
            CheckLine {
                name: format!("monte-carlo mean T={} alpha={}", self.population, self.alpha),
                passed: z <= 4.0,
                detail: format!(
                    "empirical {:.4} (se {:.4}) formula {:.4}",
                    self.mean, self.mean_se, self.expected_mean
                ),
            },
            CheckLine {
                name: format!(
                    "concentration T={} alpha={} eps={}",
                    self.population, self.alpha, self.eps
                ),
                passed: self.tail_frequency <= self.tail_bound,
                detail: format!(
                    "empirical tail {:.5} bound {:.5}",
                    self.tail_frequency, self.tail_bound
                ),
            },
        ]
    }
}
