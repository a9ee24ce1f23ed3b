//! Monte Carlo estimation of success probabilities.
//!
//! Each trial draws a fresh design and a fresh uniform defective set, decodes,
//! and counts exact recovery as success. Trial `j` of a cell is seeded by
//! `(seed, T, design id, decoder id, j)`, so results are identical whatever
//! the thread count or scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::decoders::{DecodeResult, Decoder, DEFAULT_SSS_BUDGET};
use crate::design::{column_weight, generate_ccw, DesignSpec, Replacement};
use crate::error::{Error, Result};
use crate::model::{compute_outcomes, sample_defective_set};
use crate::rng::derive_seed;
use crate::theory::comp_success_given_m;

/// Header of the sweep CSV, in column order.
pub const CSV_HEADER: [&str; 13] = [
    "design",
    "design_params",
    "decoder",
    "N",
    "K",
    "T",
    "trials",
    "successes",
    "declared_errors",
    "success_rate",
    "ci_low",
    "ci_high",
    "seed",
];

const DESIGN_STREAM: u64 = 0;
const DEFECTIVE_STREAM: u64 = 1;
const MIXTURE_TAG: u64 = 0x4d49_5854;

fn default_budget() -> u64 {
    DEFAULT_SSS_BUDGET
}

/// A sweep over test counts, designs and decoders for one `(N, K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub k: usize,
    pub t_values: Vec<usize>,
    pub designs: Vec<DesignSpec>,
    pub decoders: Vec<Decoder>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub sss_budget: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.t_values.is_empty() || self.t_values.contains(&0) {
            return Err(Error::param("t_values must be a non-empty list of positive counts"));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::param(format!(
                "need 1 <= K < N, got N = {}, K = {}",
                self.n, self.k
            )));
        }
        if self.designs.is_empty() {
            return Err(Error::param("designs must not be empty"));
        }
        if self.decoders.is_empty() {
            return Err(Error::param("decoders must not be empty"));
        }
        self.designs.iter().try_for_each(DesignSpec::validate)
    }

    /// Cells in output order: by `T`, then design, then decoder, each in the
    /// order given in the config.
    pub fn cells(&self) -> Vec<Cell> {
        let mut t_values = self.t_values.clone();
        t_values.sort_unstable();
        t_values.dedup();
        let mut cells = Vec::new();
        for &t in &t_values {
            for &design in &self.designs {
                for &decoder in &self.decoders {
                    cells.push(Cell {
                        n: self.n,
                        k: self.k,
                        t,
                        design,
                        decoder,
                    });
                }
            }
        }
        cells
    }
}

/// One point of a success curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub design: DesignSpec,
    pub decoder: Decoder,
}

impl Cell {
    fn describe(&self) -> String {
        format!(
            "N={} K={} T={} design={}({}) decoder={}",
            self.n,
            self.k,
            self.t,
            self.design.label(),
            self.design.params(),
            self.decoder
        )
    }

    pub fn trial_seed(&self, seed: u64, trial: u64) -> u64 {
        derive_seed(
            seed,
            &[self.t as u64, self.design.stable_id(), self.decoder.id(), trial],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Success,
    /// Wrong estimate.
    Failure,
    /// The decoder gave up (SSS tie or budget).
    DeclaredError,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialStats {
    pub successes: u64,
    pub failures: u64,
    /// Failures where the decoder declared an error; subset of `failures`.
    pub declared_errors: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TrialStats {
    pub fn from_counts(successes: u64, declared_errors: u64, trials: u64) -> Self {
        assert!(trials >= 1 && successes + declared_errors <= trials);
        let (ci_low, ci_high) = wilson_interval(successes, trials, 0.95);
        TrialStats {
            successes,
            failures: trials - successes,
            declared_errors,
            trials,
            success_rate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let count = |o| outcomes.iter().filter(|&&x| x == o).count() as u64;
        Self::from_counts(
            count(TrialOutcome::Success),
            count(TrialOutcome::DeclaredError),
            outcomes.len() as u64,
        )
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    assert!(confidence > 0.0 && confidence < 1.0);
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let high = if successes == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (low, high)
}

/// Runs trial `trial` of `cell`.
pub fn run_trial(cell: &Cell, seed: u64, trial: u64, sss_budget: u64) -> Result<TrialOutcome> {
    let trial_seed = cell.trial_seed(seed, trial);
    let design = cell.design.generate(
        cell.n,
        cell.t,
        cell.k,
        derive_seed(trial_seed, &[DESIGN_STREAM]),
    )?;
    let instance = sample_defective_set(
        cell.n,
        cell.k,
        derive_seed(trial_seed, &[DEFECTIVE_STREAM]),
    )?;
    let outcomes = compute_outcomes(&design, &instance.defective_set)?;
    Ok(match cell.decoder.decode(&design, &outcomes, sss_budget)? {
        DecodeResult::DeclaredError { .. } => TrialOutcome::DeclaredError,
        est if est.recovers(&instance.defective_set) => TrialOutcome::Success,
        _ => TrialOutcome::Failure,
    })
}

fn check_cell(cell: &Cell) -> Result<()> {
    if cell.k == 0 || cell.k >= cell.n || cell.t == 0 {
        return Err(Error::param("need 1 <= K < N and T >= 1"));
    }
    cell.design.validate()?;
    if matches!(cell.design, DesignSpec::ConstantColumnWeight { .. }) {
        let weight = column_weight(&cell.design, cell.t, cell.k)?;
        if weight > cell.t {
            return Err(Error::param(format!(
                "column weight {weight} exceeds T = {}",
                cell.t
            )));
        }
    }
    Ok(())
}

/// Estimates the success probability of one cell from `trials` trials.
pub fn run_cell(cell: &Cell, trials: u64, seed: u64, sss_budget: u64) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    check_cell(cell)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|j| run_trial(cell, seed, j, sss_budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialStats::from_outcomes(&outcomes))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub cell: Cell,
    pub stats: TrialStats,
}

/// Runs every cell of `config`, returning rows in [`SimConfig::cells`] order.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config
        .cells()
        .into_par_iter()
        .map(|cell| {
            run_cell(&cell, config.trials, config.seed, config.sss_budget)
                .map(|stats| SweepRow { cell, stats })
                .map_err(|e| Error::Cell {
                    cell: cell.describe(),
                    source: Box::new(e),
                })
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    design: &'a str,
    design_params: String,
    decoder: &'a str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "T")]
    t: usize,
    trials: u64,
    successes: u64,
    declared_errors: u64,
    success_rate: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
}

/// Writes sweep rows as CSV, header first.
pub fn write_csv<W: Write>(rows: &[SweepRow], seed: u64, out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record(CSV_HEADER)?;
    }
    for row in rows {
        writer.serialize(CsvRecord {
            design: row.cell.design.label(),
            design_params: row.cell.design.params(),
            decoder: row.cell.decoder.name(),
            n: row.cell.n,
            k: row.cell.k,
            t: row.cell.t,
            trials: row.stats.trials,
            successes: row.stats.successes,
            declared_errors: row.stats.declared_errors,
            success_rate: row.stats.success_rate,
            ci_low: row.stats.ci_low,
            ci_high: row.stats.ci_high,
            seed,
        })?;
    }
    writer.flush()
}

/// Number of positive tests when `k` defectives each make `weight` uniform
/// draws over `tests` tests.
pub fn sample_positive_count(k: usize, tests: usize, weight: usize, seed: u64) -> Result<usize> {
    let defectives = generate_ccw(k, tests, weight, Replacement::With, seed)?;
    let mut hit = vec![false; tests];
    for col in defectives.columns() {
        for &t in col {
            hit[t] = true;
        }
    }
    Ok(hit.into_iter().filter(|&h| h).count())
}

/// Empirical COMP success against the conditional formula averaged over
/// simulated positive counts.
#[derive(Clone, Debug, PartialEq)]
pub struct CompMixtureCheck {
    pub weight: usize,
    pub empirical: TrialStats,
    pub mixture_mean: f64,
    /// Normal-approximation 95% interval of the mixture mean.
    pub mixture_ci: (f64, f64),
}

impl CompMixtureCheck {
    pub fn intervals_overlap(&self) -> bool {
        self.empirical.ci_low <= self.mixture_ci.1 && self.mixture_ci.0 <= self.empirical.ci_high
    }
}

/// Compares simulated COMP success on a with-replacement CCW design against
/// `E[(1 - (M/T)^L)^(N-K)]`, with `M` drawn from an independent stream.
pub fn comp_mixture_check(
    n: usize,
    k: usize,
    tests: usize,
    nu: f64,
    trials: u64,
    seed: u64,
) -> Result<CompMixtureCheck> {
    let design = DesignSpec::ccw(nu);
    let cell = Cell {
        n,
        k,
        t: tests,
        design,
        decoder: Decoder::Comp,
    };
    let empirical = run_cell(&cell, trials, seed, DEFAULT_SSS_BUDGET)?;
    let weight = column_weight(&design, tests, k)?;

    let values = (0..trials)
        .into_par_iter()
        .map(|j| {
            let m = sample_positive_count(k, tests, weight, derive_seed(seed, &[MIXTURE_TAG, j]))?;
            comp_success_given_m(m as u64, tests as u64, weight as u64, n as u64, k as u64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    let half = 1.959_963_984_540_054 * (var / count).sqrt();

    Ok(CompMixtureCheck {
        weight,
        empirical,
        mixture_mean: mean,
        mixture_ci: (mean - half, mean + half),
    })
}
