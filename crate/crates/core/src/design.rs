//! Random pooling designs.
//!
//! A [`DesignMatrix`] is the binary test-by-item matrix `X`, stored sparsely in
//! both orientations plus a dense row-major bit view for membership queries.
//! Two random families are provided: Bernoulli designs, where every entry is
//! an independent coin flip, and constant column weight designs, where each
//! item picks `L` tests uniformly at random.
//!
//! Every column is drawn from its own ChaCha stream keyed by `(seed, item)`,
//! so a matrix is a pure function of its arguments no matter how many threads
//! build it.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, sample_subset, stream_rng};

/// Below this many items columns are generated sequentially.
const PARALLEL_COLUMNS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignMatrix {
    num_tests: usize,
    num_items: usize,
    item_tests: Vec<Vec<usize>>,
    test_items: Vec<Vec<usize>>,
    dense: FixedBitSet,
}

impl DesignMatrix {
    /// Builds a matrix from per-item test lists. Lists are sorted and
    /// deduplicated; any index outside `0..num_tests` is rejected.
    pub fn from_item_tests(
        num_tests: usize,
        num_items: usize,
        mut item_tests: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if num_tests == 0 || num_items == 0 {
            return Err(Error::param("a design needs at least one test and one item"));
        }
        if item_tests.len() != num_items {
            return Err(Error::param(format!(
                "expected {num_items} columns, got {}",
                item_tests.len()
            )));
        }
        for (item, tests) in item_tests.iter_mut().enumerate() {
            tests.sort_unstable();
            tests.dedup();
            if let Some(&t) = tests.last() {
                if t >= num_tests {
                    return Err(Error::param(format!(
                        "item {item} references test {t} but there are only {num_tests} tests"
                    )));
                }
            }
        }

        let mut test_items = vec![Vec::new(); num_tests];
        let mut dense = FixedBitSet::with_capacity(num_tests * num_items);
        for (item, tests) in item_tests.iter().enumerate() {
            for &t in tests {
                test_items[t].push(item);
                dense.insert(t * num_items + item);
            }
        }

        Ok(DesignMatrix {
            num_tests,
            num_items,
            item_tests,
            test_items,
            dense,
        })
    }

    /// Builds a matrix from per-test pools.
    pub fn from_test_items(
        num_tests: usize,
        num_items: usize,
        test_items: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if test_items.len() != num_tests {
            return Err(Error::param(format!(
                "expected {num_tests} pools, got {}",
                test_items.len()
            )));
        }
        let mut item_tests = vec![Vec::new(); num_items];
        for (t, pool) in test_items.iter().enumerate() {
            for &item in pool {
                if item >= num_items {
                    return Err(Error::param(format!(
                        "test {t} references item {item} but there are only {num_items} items"
                    )));
                }
                item_tests[item].push(t);
            }
        }
        Self::from_item_tests(num_tests, num_items, item_tests)
    }

    pub fn num_tests(&self) -> usize {
        self.num_tests
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// Sorted tests containing `item`.
    pub fn item_tests(&self, item: usize) -> &[usize] {
        &self.item_tests[item]
    }

    /// Sorted items pooled in test `test`.
    pub fn test_items(&self, test: usize) -> &[usize] {
        &self.test_items[test]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.item_tests
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.test_items
    }

    /// `x_ti`.
    #[inline]
    pub fn contains(&self, test: usize, item: usize) -> bool {
        test < self.num_tests && item < self.num_items && self.dense[test * self.num_items + item]
    }

    /// Number of distinct tests item `item` is placed in.
    pub fn column_weight(&self, item: usize) -> usize {
        self.item_tests[item].len()
    }

    /// Total number of ones in the matrix.
    pub fn ones(&self) -> usize {
        self.item_tests.iter().map(Vec::len).sum()
    }

    /// Debug text format: a `T N` header, then one line per item with its
    /// sorted test indices separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_tests, self.num_items);
        for tests in &self.item_tests {
            let mut first = true;
            for t in tests {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{t}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::param("empty design text"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::param(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [num_tests, num_items] = dims[..] else {
            return Err(Error::param(format!("header must be `T N`, got {header:?}")));
        };
        let columns = lines
            .take(num_items)
            .map(|line| {
                line.split_whitespace()
                    .map(|v| v.parse().map_err(|_| Error::param(format!("bad test index {v:?}"))))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_item_tests(num_tests, num_items, columns)
    }
}

/// Sampling mode for constant column weight designs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    /// `L` independent uniform draws; repeats collapse, so weights are at most `L`.
    #[default]
    With,
    /// A uniform `L`-subset of tests; weights are exactly `L`.
    Without,
}

impl Replacement {
    pub fn as_str(self) -> &'static str {
        match self {
            Replacement::With => "with",
            Replacement::Without => "without",
        }
    }
}

/// Which random design family to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    Bernoulli {
        p: f64,
    },
    #[serde(rename = "ccw")]
    ConstantColumnWeight {
        nu: f64,
        #[serde(default)]
        replacement: Replacement,
    },
}

impl DesignSpec {
    pub fn ccw(nu: f64) -> Self {
        DesignSpec::ConstantColumnWeight {
            nu,
            replacement: Replacement::With,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DesignSpec::Bernoulli { p } if !(p > 0.0 && p < 1.0) => {
                Err(Error::param(format!("Bernoulli p must lie in (0, 1), got {p}")))
            }
            DesignSpec::ConstantColumnWeight { nu, .. } if !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::param(format!("nu must be positive and finite, got {nu}")))
            }
            _ => Ok(()),
        }
    }

    /// Short family name used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            DesignSpec::Bernoulli { .. } => "bernoulli",
            DesignSpec::ConstantColumnWeight { .. } => "ccw",
        }
    }

    /// Parameter string used in CSV output; never contains a comma.
    pub fn params(&self) -> String {
        match self {
            DesignSpec::Bernoulli { p } => format!("p={p}"),
            DesignSpec::ConstantColumnWeight { nu, replacement } => {
                format!("nu={nu};replacement={}", replacement.as_str())
            }
        }
    }

    /// Identifier that depends only on the parameters, used for seeding.
    pub fn stable_id(&self) -> u64 {
        match *self {
            DesignSpec::Bernoulli { p } => derive_seed(1, &[p.to_bits()]),
            DesignSpec::ConstantColumnWeight { nu, replacement } => {
                derive_seed(2, &[nu.to_bits(), replacement as u64])
            }
        }
    }

    /// Draws an `num_tests × num_items` matrix for a problem with
    /// `num_defectives` defectives (which sets `L` for the CCW family).
    pub fn generate(
        &self,
        num_items: usize,
        num_tests: usize,
        num_defectives: usize,
        seed: u64,
    ) -> Result<DesignMatrix> {
        match *self {
            DesignSpec::Bernoulli { p } => generate_bernoulli(num_items, num_tests, p, seed),
            DesignSpec::ConstantColumnWeight { replacement, .. } => {
                let weight = column_weight(self, num_tests, num_defectives)?;
                generate_ccw(num_items, num_tests, weight, replacement, seed)
            }
        }
    }
}

fn build_columns<F>(num_items: usize, column: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> Vec<usize> + Sync + Send,
{
    if num_items >= PARALLEL_COLUMNS {
        (0..num_items).into_par_iter().map(column).collect()
    } else {
        (0..num_items).map(column).collect()
    }
}

/// Bernoulli design: each `x_ti` is an independent Bernoulli(`p`) draw.
///
/// Ones in a column are located by sampling geometric gaps, which has the same
/// law as `T` independent flips but costs O(pT) per column.
pub fn generate_bernoulli(
    num_items: usize,
    num_tests: usize,
    p: f64,
    seed: u64,
) -> Result<DesignMatrix> {
    if num_items == 0 || num_tests == 0 {
        return Err(Error::param("N and T must both be at least 1"));
    }
    DesignSpec::Bernoulli { p }.validate()?;
    let log_q = (-p).ln_1p();
    let columns = build_columns(num_items, |item| {
        let mut rng = stream_rng(seed, item as u64);
        let mut tests = Vec::new();
        let mut next = 0.0f64;
        loop {
            // 1 - U lies in (0, 1], so the log is finite.
            let u: f64 = 1.0 - rng.random::<f64>();
            next += (u.ln() / log_q).floor();
            if next >= num_tests as f64 {
                break;
            }
            tests.push(next as usize);
            next += 1.0;
        }
        tests
    });
    DesignMatrix::from_item_tests(num_tests, num_items, columns)
}

/// Column weight `L = max(1, round(nu * T / K))` for a CCW spec.
pub fn column_weight(spec: &DesignSpec, num_tests: usize, num_defectives: usize) -> Result<usize> {
    let DesignSpec::ConstantColumnWeight { nu, .. } = *spec else {
        return Err(Error::Usage("column weight is only defined for CCW designs".into()));
    };
    spec.validate()?;
    if num_tests == 0 || num_defectives == 0 {
        return Err(Error::param("T and K must both be at least 1"));
    }
    let weight = (nu * num_tests as f64 / num_defectives as f64).round();
    Ok((weight as usize).max(1))
}

/// Constant column weight design: each item independently picks `weight`
/// tests, with or without replacement.
pub fn generate_ccw(
    num_items: usize,
    num_tests: usize,
    weight: usize,
    replacement: Replacement,
    seed: u64,
) -> Result<DesignMatrix> {
    if num_items == 0 || num_tests == 0 {
        return Err(Error::param("N and T must both be at least 1"));
    }
    if weight == 0 {
        return Err(Error::param("column weight must be at least 1"));
    }
    if replacement == Replacement::Without && weight > num_tests {
        return Err(Error::param(format!(
            "cannot pick {weight} distinct tests out of {num_tests}"
        )));
    }
    let columns = build_columns(num_items, |item| {
        let mut rng = stream_rng(seed, item as u64);
        match replacement {
            Replacement::With => {
                let mut tests: Vec<usize> =
                    (0..weight).map(|_| rng.random_range(0..num_tests)).collect();
                tests.sort_unstable();
                tests.dedup();
                tests
            }
            Replacement::Without => sample_subset(&mut rng, num_tests, weight),
        }
    });
    DesignMatrix::from_item_tests(num_tests, num_items, columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::f64::consts::LN_2;

    fn three_by_four() -> DesignMatrix {
        DesignMatrix::from_test_items(3, 4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap()
    }

    #[test]
    fn transposes_agree() {
        let d = three_by_four();
        assert_eq!(d.item_tests(1), &[0, 1]);
        assert_eq!(d.item_tests(3), &[2]);
        assert!(d.contains(1, 2));
        assert!(!d.contains(0, 2));
        let rebuilt = DesignMatrix::from_item_tests(3, 4, d.columns().to_vec()).unwrap();
        assert_eq!(rebuilt, d);
    }

    #[test]
    fn rejects_out_of_range_indices() {
        assert!(DesignMatrix::from_item_tests(2, 1, vec![vec![2]]).is_err());
        assert!(DesignMatrix::from_test_items(1, 2, vec![vec![5]]).is_err());
    }

    #[test]
    fn text_format() {
        let d = three_by_four();
        let text = d.to_text();
        assert_eq!(text, "3 4\n0\n0 1\n1 2\n2\n");
        assert_eq!(DesignMatrix::from_text(&text).unwrap(), d);
        assert!(DesignMatrix::from_text("3\n").is_err());
    }

    #[test]
    fn bernoulli_is_deterministic() {
        let a = generate_bernoulli(3, 2, 0.37, 99).unwrap();
        let b = generate_bernoulli(3, 2, 0.37, 99).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn bernoulli_total_ones_within_five_sigma() {
        // mean 1000*100*0.5 = 50000, sigma = sqrt(25000) = 158.1
        let d = generate_bernoulli(1000, 100, 0.5, 2024).unwrap();
        let ones = d.ones();
        assert!((49208..=50791).contains(&ones), "{ones}");
    }

    #[test]
    fn bernoulli_two_by_two_is_uniform() {
        let seeds = 32_000u64;
        let mut counts: HashMap<String, usize> = HashMap::new();
        for seed in 0..seeds {
            let d = generate_bernoulli(2, 2, 0.5, seed).unwrap();
            *counts.entry(d.to_text()).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let expected = seeds as f64 / 16.0;
        let sd = (seeds as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for (m, c) in &counts {
            assert!((*c as f64 - expected).abs() < 5.0 * sd, "{m:?} {c}");
        }
    }

    #[test]
    fn bernoulli_rejects_bad_p() {
        assert!(generate_bernoulli(3, 3, 0.0, 1).is_err());
        assert!(generate_bernoulli(3, 3, 1.0, 1).is_err());
        assert!(generate_bernoulli(0, 3, 0.5, 1).is_err());
    }

    #[test]
    fn column_weight_rounding() {
        let spec = DesignSpec::ccw(LN_2);
        assert_eq!(column_weight(&spec, 100, 10).unwrap(), 7);
        assert_eq!(column_weight(&spec, 10, 10).unwrap(), 1);
        assert_eq!(column_weight(&spec, 1, 10).unwrap(), 1);
        assert_eq!(column_weight(&DesignSpec::ccw(1.0), 50, 5).unwrap(), 10);
        assert!(matches!(
            column_weight(&DesignSpec::Bernoulli { p: 0.1 }, 10, 1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn full_weight_without_replacement_is_all_ones() {
        let d = generate_ccw(20, 6, 6, Replacement::Without, 3).unwrap();
        assert!((0..20).all(|i| d.item_tests(i) == [0, 1, 2, 3, 4, 5]));
        assert!(generate_ccw(20, 6, 7, Replacement::Without, 3).is_err());
    }

    #[test]
    fn unit_weight_gives_single_test() {
        for mode in [Replacement::With, Replacement::Without] {
            let d = generate_ccw(500, 9, 1, mode, 5).unwrap();
            assert!((0..500).all(|i| d.column_weight(i) == 1));
        }
    }

    #[test]
    fn column_weights_respect_mode() {
        let with = generate_ccw(2000, 30, 7, Replacement::With, 8).unwrap();
        assert!((0..2000).all(|i| (1..=7).contains(&with.column_weight(i))));
        let without = generate_ccw(2000, 30, 7, Replacement::Without, 8).unwrap();
        assert!((0..2000).all(|i| without.column_weight(i) == 7));
    }

    #[test]
    fn mean_distinct_weight_matches_coupon_mean() {
        // (1 - 0.99^7) * 100 = 6.793...
        let n = 20_000;
        let d = generate_ccw(n, 100, 7, Replacement::With, 11).unwrap();
        let weights: Vec<f64> = (0..n).map(|i| d.column_weight(i) as f64).collect();
        let mean = weights.iter().sum::<f64>() / n as f64;
        let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected = (1.0 - 0.99f64.powi(7)) * 100.0;
        assert!((mean - expected).abs() < 4.0 * (var / n as f64).sqrt(), "{mean} vs {expected}");
    }

    #[test]
    fn generation_does_not_depend_on_parallelism() {
        // 5000 items crosses the parallel threshold; the first 100 columns
        // must match a sequentially built 100-item design with the same seed.
        let big = generate_ccw(5000, 50, 4, Replacement::With, 21).unwrap();
        let small = generate_ccw(100, 50, 4, Replacement::With, 21).unwrap();
        assert_eq!(&big.columns()[..100], small.columns());
    }

    #[test]
    fn spec_serde_shape() {
        let spec: DesignSpec = serde_json::from_str(r#"{"kind":"ccw","nu":0.5}"#).unwrap();
        assert_eq!(spec, DesignSpec::ccw(0.5));
        let spec: DesignSpec = serde_json::from_str(r#"{"kind":"bernoulli","p":0.1}"#).unwrap();
        assert_eq!(spec.params(), "p=0.1");
        assert!(serde_json::from_str::<DesignSpec>(r#"{"kind":"bernoulli","q":0.1}"#).is_err());
    }
}
