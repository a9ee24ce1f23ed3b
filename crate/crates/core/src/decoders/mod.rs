//! Detection algorithms.
//!
//! All decoders start from the same observation: an item that sits in a
//! negative test cannot be defective. The survivors form the set of possible
//! defectives (PD), and every decoder here returns a subset of PD.
//!
//! | decoder | estimate                                         | errors            |
//! |---------|--------------------------------------------------|-------------------|
//! | COMP    | all of PD                                        | never             |
//! | DD      | PD items alone (within PD) in some positive test | never             |
//! | SCOMP   | DD, greedily extended until every positive test is explained | never |
//! | SSS     | the unique smallest satisfying set               | ties, node budget |

mod sss;

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::model::OutcomeVector;

pub use sss::{decode_sss, DEFAULT_SSS_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredError {
    /// Two or more satisfying sets share the minimum size.
    NonUniqueSmallestSet,
    /// The search hit its node limit before certifying an answer.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeResult {
    /// Sorted estimate of the defective set.
    Estimate { items: Vec<usize> },
    DeclaredError { reason: DeclaredError },
}

impl DecodeResult {
    pub fn estimate(&self) -> Option<&[usize]> {
        match self {
            DecodeResult::Estimate { items } => Some(items),
            DecodeResult::DeclaredError { .. } => None,
        }
    }

    /// Exact recovery of `truth` (which must be sorted).
    pub fn recovers(&self, truth: &[usize]) -> bool {
        self.estimate() == Some(truth)
    }
}

/// Decoder selector used by the simulation engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decoder {
    #[serde(rename = "COMP", alias = "comp")]
    Comp,
    #[serde(rename = "DD", alias = "dd")]
    Dd,
    #[serde(rename = "SCOMP", alias = "scomp")]
    Scomp,
    #[serde(rename = "SSS", alias = "sss")]
    Sss,
}

impl Decoder {
    pub const ALL: [Decoder; 4] = [Decoder::Comp, Decoder::Dd, Decoder::Scomp, Decoder::Sss];

    pub fn name(self) -> &'static str {
        match self {
            Decoder::Comp => "COMP",
            Decoder::Dd => "DD",
            Decoder::Scomp => "SCOMP",
            Decoder::Sss => "SSS",
        }
    }

    pub fn id(self) -> u64 {
        self as u64
    }

    pub fn decode(
        self,
        design: &DesignMatrix,
        outcomes: &OutcomeVector,
        sss_budget: u64,
    ) -> Result<DecodeResult> {
        match self {
            Decoder::Comp => decode_comp(design, outcomes),
            Decoder::Dd => decode_dd(design, outcomes),
            Decoder::Scomp => decode_scomp(design, outcomes),
            Decoder::Sss => decode_sss(design, outcomes, sss_budget),
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Decoder::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown decoder {s:?}")))
    }
}

fn check_shape(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<()> {
    if design.num_tests() != outcomes.len() {
        return Err(Error::ShapeMismatch {
            expected: design.num_tests(),
            found: outcomes.len(),
        });
    }
    Ok(())
}

/// PD as an item mask.
fn pd_mask(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<FixedBitSet> {
    check_shape(design, outcomes)?;
    let mut pd = FixedBitSet::with_capacity(design.num_items());
    pd.insert_range(..);
    for t in outcomes.negative_tests() {
        for &item in design.test_items(t) {
            pd.set(item, false);
        }
    }
    Ok(pd)
}

/// Items that appear in no negative test, sorted. Untested items are included.
pub fn possible_defectives(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<Vec<usize>> {
    Ok(pd_mask(design, outcomes)?.ones().collect())
}

/// COMP: declare every possible defective defective.
pub fn decode_comp(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    Ok(DecodeResult::Estimate {
        items: possible_defectives(design, outcomes)?,
    })
}

fn dd_mask(design: &DesignMatrix, outcomes: &OutcomeVector, pd: &FixedBitSet) -> FixedBitSet {
    let mut definite = FixedBitSet::with_capacity(design.num_items());
    for t in outcomes.positive_tests() {
        let mut sole = None;
        let mut count = 0;
        for &item in design.test_items(t) {
            if pd[item] {
                count += 1;
                if count > 1 {
                    break;
                }
                sole = Some(item);
            }
        }
        if count == 1 {
            definite.insert(sole.unwrap());
        }
    }
    definite
}

/// DD: a possible defective that is the only one in some positive test must
/// be defective; everything else is declared non-defective.
pub fn decode_dd(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    let pd = pd_mask(design, outcomes)?;
    Ok(DecodeResult::Estimate {
        items: dd_mask(design, outcomes, &pd).ones().collect(),
    })
}

/// SCOMP: start from DD, then repeatedly add the possible defective that
/// explains the most still-unexplained positive tests (lowest index on ties).
///
/// On outcomes produced by a real defective set the result is always
/// satisfying. If some positive test contains no possible defective, no
/// satisfying set exists and the greedy loop stops with that test unexplained.
pub fn decode_scomp(design: &DesignMatrix, outcomes: &OutcomeVector) -> Result<DecodeResult> {
    let pd = pd_mask(design, outcomes)?;
    let mut estimate = dd_mask(design, outcomes, &pd);

    let mut unexplained: Vec<usize> = outcomes
        .positive_tests()
        .filter(|&t| !design.test_items(t).iter().any(|&i| estimate[i]))
        .collect();

    let mut counts = vec![0usize; design.num_items()];
    while !unexplained.is_empty() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &t in &unexplained {
            for &item in design.test_items(t) {
                if pd[item] {
                    counts[item] += 1;
                }
            }
        }
        // max_by_key keeps the last maximum, so scan in reverse to prefer low indices.
        let Some((best, &hits)) = counts.iter().enumerate().rev().max_by_key(|&(_, c)| *c) else {
            break;
        };
        if hits == 0 {
            break;
        }
        estimate.insert(best);
        unexplained.retain(|&t| !design.contains(t, best));
    }

    Ok(DecodeResult::Estimate {
        items: estimate.ones().collect(),
    })
}

/// Whether `candidate` as the defective set would reproduce `outcomes` exactly.
pub fn is_satisfying(
    design: &DesignMatrix,
    outcomes: &OutcomeVector,
    candidate: &[usize],
) -> Result<bool> {
    check_shape(design, outcomes)?;
    let induced = crate::model::compute_outcomes(design, candidate)?;
    Ok(induced.as_bitset() == outcomes.as_bitset())
}
