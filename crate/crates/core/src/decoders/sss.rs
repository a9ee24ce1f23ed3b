//! Smallest satisfying set search.
//!
//! A set is satisfying iff it avoids every negative test and hits every
//! positive one. Avoiding negative tests means living inside PD, and every
//! test of a PD item is positive, so the problem reduces to a minimum set cover
//! of the positive tests by the columns of PD items. Items in no test cover
//! nothing and never belong to a smallest set.
//!
//! The cover is found by branch and bound. At each node the uncovered test with
//! the fewest remaining candidates is picked and the search branches on which
//! candidate covers it; branch `j` includes candidate `j` and forbids
//! candidates `0..j`. That partitions the covers below the node, so every
//! cover is reached at most once and counting equal-size leaves detects ties.
//! Bounds: a greedy cover gives the initial incumbent size; the number of
//! uncovered tests with pairwise-disjoint candidate sets is a lower bound on
//! the items still needed.

use fixedbitset::FixedBitSet;

use super::{possible_defectives, DeclaredError, DecodeResult};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::model::OutcomeVector;

/// Default node limit for [`decode_sss`].
pub const DEFAULT_SSS_BUDGET: u64 = 10_000_000;

/// SSS: the unique minimum-size satisfying set, or a declared error when the
/// minimum is shared or `budget` search nodes do not suffice to certify it.
pub fn decode_sss(
    design: &DesignMatrix,
    outcomes: &OutcomeVector,
    budget: u64,
) -> Result<DecodeResult> {
    let pd = possible_defectives(design, outcomes)?;

    let mut local_test = vec![usize::MAX; design.num_tests()];
    let positives: Vec<usize> = outcomes.positive_tests().collect();
    for (local, &t) in positives.iter().enumerate() {
        local_test[t] = local;
    }
    let num_positive = positives.len();
    if num_positive == 0 {
        return Ok(DecodeResult::Estimate { items: Vec::new() });
    }

    let items: Vec<usize> = pd
        .into_iter()
        .filter(|&i| !design.item_tests(i).is_empty())
        .collect();
    let mut candidates = vec![Vec::new(); num_positive];
    let covers: Vec<FixedBitSet> = items
        .iter()
        .enumerate()
        .map(|(local_item, &item)| {
            let mut cover = FixedBitSet::with_capacity(num_positive);
            for &t in design.item_tests(item) {
                cover.insert(local_test[t]);
                candidates[local_test[t]].push(local_item);
            }
            cover
        })
        .collect();
    if let Some(local) = candidates.iter().position(Vec::is_empty) {
        return Err(Error::Inconsistent {
            test: positives[local],
        });
    }

    let mut search = CoverSearch::new(covers, candidates, budget);
    search.run();

    Ok(match search.verdict() {
        Verdict::Unique(set) => {
            let mut est: Vec<usize> = set.into_iter().map(|l| items[l]).collect();
            est.sort_unstable();
            DecodeResult::Estimate { items: est }
        }
        Verdict::Tied => DecodeResult::DeclaredError {
            reason: DeclaredError::NonUniqueSmallestSet,
        },
        Verdict::OutOfBudget => DecodeResult::DeclaredError {
            reason: DeclaredError::BudgetExhausted,
        },
    })
}

enum Verdict {
    Unique(Vec<usize>),
    Tied,
    OutOfBudget,
}

struct CoverSearch {
    num_tests: usize,
    covers: Vec<FixedBitSet>,
    candidates: Vec<Vec<usize>>,
    /// Tests sorted by candidate count, scanned when packing disjoint tests.
    bound_order: Vec<usize>,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    stamp: Vec<u32>,
    generation: u32,
    best_size: usize,
    best_count: usize,
    best_set: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl CoverSearch {
    fn new(covers: Vec<FixedBitSet>, candidates: Vec<Vec<usize>>, budget: u64) -> Self {
        let num_tests = candidates.len();
        let mut bound_order: Vec<usize> = (0..num_tests).collect();
        bound_order.sort_by_key(|&t| (candidates[t].len(), t));
        let num_items = covers.len();
        let mut search = CoverSearch {
            num_tests,
            covers,
            candidates,
            bound_order,
            excluded: vec![false; num_items],
            chosen: Vec::new(),
            stamp: vec![0; num_items],
            generation: 0,
            best_size: num_items,
            best_count: 0,
            best_set: Vec::new(),
            nodes: 0,
            budget,
            exhausted: false,
        };
        search.best_size = search.greedy_size();
        search
    }

    /// Size of a max-coverage greedy cover. Used as the initial incumbent size
    /// only: the set itself is not counted, the search rediscovers it if optimal.
    fn greedy_size(&self) -> usize {
        let mut covered = FixedBitSet::with_capacity(self.num_tests);
        let mut size = 0;
        while covered.count_ones(..) < self.num_tests {
            let best = self
                .covers
                .iter()
                .map(|c| c.difference_count(&covered))
                .enumerate()
                .max_by_key(|&(i, gain)| (gain, std::cmp::Reverse(i)))
                .map(|(i, _)| i)
                .expect("at least one item");
            covered.union_with(&self.covers[best]);
            size += 1;
        }
        size
    }

    fn run(&mut self) {
        let covered = FixedBitSet::with_capacity(self.num_tests);
        self.visit(&covered);
    }

    fn verdict(self) -> Verdict {
        if self.exhausted {
            Verdict::OutOfBudget
        } else if self.best_count >= 2 {
            Verdict::Tied
        } else {
            debug_assert_eq!(self.best_count, 1, "the greedy-size cover must be rediscovered");
            Verdict::Unique(self.best_set)
        }
    }

    /// Disjoint-test packing bound over non-excluded candidates, or `None` if
    /// some uncovered test has no candidate left.
    fn lower_bound(&mut self, covered: &FixedBitSet) -> Option<usize> {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let gen = self.generation;
        let mut bound = 0;
        for &t in &self.bound_order {
            if covered[t] {
                continue;
            }
            let mut any = false;
            let mut clash = false;
            for &c in &self.candidates[t] {
                if self.excluded[c] {
                    continue;
                }
                any = true;
                if self.stamp[c] == gen {
                    clash = true;
                    break;
                }
            }
            if !any {
                return None;
            }
            if !clash {
                bound += 1;
                for &c in &self.candidates[t] {
                    if !self.excluded[c] {
                        self.stamp[c] = gen;
                    }
                }
            }
        }
        Some(bound)
    }

    fn visit(&mut self, covered: &FixedBitSet) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }

        let size = self.chosen.len();
        if covered.count_ones(..) == self.num_tests {
            if size < self.best_size || self.best_count == 0 {
                self.best_size = size;
                self.best_count = 1;
                self.best_set = self.chosen.clone();
            } else if size == self.best_size {
                self.best_count += 1;
            }
            return;
        }

        let Some(bound) = self.lower_bound(covered) else {
            return;
        };
        // With a tie already on record only strictly smaller covers matter.
        let limit = if self.best_count >= 2 {
            self.best_size.saturating_sub(1)
        } else {
            self.best_size
        };
        if size + bound > limit {
            return;
        }

        let branch_test = covered
            .zeroes()
            .min_by_key(|&t| {
                self.candidates[t]
                    .iter()
                    .filter(|&&c| !self.excluded[c])
                    .count()
            })
            .expect("an uncovered test exists");

        let mut options: Vec<(usize, usize)> = self.candidates[branch_test]
            .iter()
            .filter(|&&c| !self.excluded[c])
            .map(|&c| (self.covers[c].difference_count(covered), c))
            .collect();
        options.sort_by_key(|&(gain, c)| (std::cmp::Reverse(gain), c));

        for &(_, c) in &options {
            self.chosen.push(c);
            let mut next = covered.clone();
            next.union_with(&self.covers[c]);
            self.visit(&next);
            self.chosen.pop();
            self.excluded[c] = true;
            if self.exhausted {
                break;
            }
        }
        for &(_, c) in &options {
            self.excluded[c] = false;
        }
    }
}
