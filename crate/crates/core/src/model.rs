//! Defective sets and noiseless test outcomes.

use fixedbitset::FixedBitSet;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::rng::{rng_for, sample_subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub num_items: usize,
    /// Sorted defective item indices.
    pub defective_set: Vec<usize>,
}

impl ProblemInstance {
    pub fn new(num_items: usize, mut defective_set: Vec<usize>) -> Result<Self> {
        defective_set.sort_unstable();
        defective_set.dedup();
        if let Some(&i) = defective_set.last() {
            if i >= num_items {
                return Err(Error::param(format!("defective {i} is not below N = {num_items}")));
            }
        }
        Ok(ProblemInstance {
            num_items,
            defective_set,
        })
    }

    pub fn num_defectives(&self) -> usize {
        self.defective_set.len()
    }
}

/// Uniformly random `K`-subset of `0..N`.
pub fn sample_defective_set(
    num_items: usize,
    num_defectives: usize,
    seed: u64,
) -> Result<ProblemInstance> {
    if num_defectives > num_items {
        return Err(Error::param(format!(
            "cannot choose K = {num_defectives} defectives from N = {num_items} items"
        )));
    }
    let mut rng = rng_for(seed);
    Ok(ProblemInstance {
        num_items,
        defective_set: sample_subset(&mut rng, num_items, num_defectives),
    })
}

/// Test outcomes `y` together with the positive count `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeVector {
    bits: FixedBitSet,
    positives: usize,
}

impl OutcomeVector {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut set = FixedBitSet::with_capacity(bits.len());
        for (t, &b) in bits.iter().enumerate() {
            set.set(t, b);
        }
        Self::from_bitset(set)
    }

    pub fn from_bitset(bits: FixedBitSet) -> Self {
        let positives = bits.count_ones(..);
        OutcomeVector { bits, positives }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len() == 0
    }

    #[inline]
    pub fn is_positive(&self, test: usize) -> bool {
        self.bits[test]
    }

    /// `M`, the number of positive tests.
    pub fn positive_count(&self) -> usize {
        self.positives
    }

    pub fn positive_tests(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn negative_tests(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.zeroes()
    }

    pub fn as_bitset(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|t| self.bits[t]).collect()
    }
}

/// `y_t = OR_{i in defectives} x_ti`.
pub fn compute_outcomes(design: &DesignMatrix, defectives: &[usize]) -> Result<OutcomeVector> {
    let mut bits = FixedBitSet::with_capacity(design.num_tests());
    for &item in defectives {
        if item >= design.num_items() {
            return Err(Error::param(format!(
                "item {item} is out of range for a design with {} items",
                design.num_items()
            )));
        }
        for &t in design.item_tests(item) {
            bits.insert(t);
        }
    }
    Ok(OutcomeVector::from_bitset(bits))
}
