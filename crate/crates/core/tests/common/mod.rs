//! Test-only oracles and instance generators.

#![allow(dead_code)]

use grouptest::design::{generate_bernoulli, generate_ccw, DesignMatrix, Replacement};
use grouptest::model::{compute_outcomes, sample_defective_set, OutcomeVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What an exhaustive search over all `2^N` candidate sets concludes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteSss {
    Unique(Vec<usize>),
    Tied,
}

/// Smallest satisfying set by enumerating every subset of items. Outcomes are
/// recomputed here as test bitmasks, independent of the library's OR routine.
pub fn brute_force_sss(design: &DesignMatrix, y: &OutcomeVector) -> BruteSss {
    let n = design.num_items();
    let t = design.num_tests();
    assert!(n <= 20 && t <= 64);
    let columns: Vec<u64> = (0..n)
        .map(|i| design.item_tests(i).iter().fold(0u64, |m, &t| m | (1 << t)))
        .collect();
    let target = (0..t).filter(|&s| y.is_positive(s)).fold(0u64, |m, s| m | (1 << s));

    let mut best_size = usize::MAX;
    let mut best = Vec::new();
    let mut count = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > best_size {
            continue;
        }
        let induced = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .fold(0u64, |m, i| m | columns[i]);
        if induced != target {
            continue;
        }
        if size < best_size {
            best_size = size;
            best = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            count = 1;
        } else {
            count += 1;
        }
    }
    assert!(count > 0, "the true defective set is always satisfying");
    if count == 1 {
        BruteSss::Unique(best)
    } else {
        BruteSss::Tied
    }
}

pub struct Instance {
    pub design: DesignMatrix,
    pub truth: Vec<usize>,
    pub y: OutcomeVector,
}

/// Random small instance: Bernoulli or CCW design (either replacement mode)
/// with random parameters, plus a uniform defective set.
pub fn random_instance(seed: u64, max_n: usize, max_t: usize, max_k: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let t = rng.random_range(1..=max_t);
    let k = rng.random_range(0..=max_k.min(n));
    let design_seed = rng.random();
    let design = match rng.random_range(0..3) {
        0 => generate_bernoulli(n, t, rng.random_range(0.05..0.7), design_seed).unwrap(),
        1 => generate_ccw(n, t, rng.random_range(1..=t), Replacement::With, design_seed).unwrap(),
        _ => generate_ccw(n, t, rng.random_range(1..=t), Replacement::Without, design_seed).unwrap(),
    };
    let truth = sample_defective_set(n, k, rng.random()).unwrap().defective_set;
    let y = compute_outcomes(&design, &truth).unwrap();
    Instance { design, truth, y }
}

/// Outcomes a candidate set would produce, recomputed with plain loops.
pub fn induced_outcomes(design: &DesignMatrix, candidate: &[usize]) -> Vec<bool> {
    let mut y = vec![false; design.num_tests()];
    for &i in candidate {
        for &t in design.item_tests(i) {
            y[t] = true;
        }
    }
    y
}

fn explains(design: &DesignMatrix, y: &OutcomeVector, candidate: &[usize]) -> bool {
    induced_outcomes(design, candidate) == y.to_bools()
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|i| big.binary_search(i).is_ok())
}

/// Checks the structural relations between the decoders on one instance and
/// returns a description of every violation found.
pub fn invariant_violations(inst: &Instance, sss_budget: u64) -> Vec<String> {
    use grouptest::decoders::{decode_sss, possible_defectives, Decoder};

    let Instance { design, truth, y } = inst;
    let mut bad = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            bad.push(format!("{what} (truth {truth:?})"));
        }
    };

    let pd = possible_defectives(design, y).unwrap();
    // PD recomputed from scratch: items in no negative test.
    let y_bits = y.to_bools();
    let pd_oracle: Vec<usize> = (0..design.num_items())
        .filter(|&i| design.item_tests(i).iter().all(|&t| y_bits[t]))
        .collect();
    check(pd == pd_oracle, "PD differs from the brute-force definition");

    let comp = Decoder::Comp.decode(design, y, sss_budget).unwrap();
    let dd = Decoder::Dd.decode(design, y, sss_budget).unwrap();
    let scomp = Decoder::Scomp.decode(design, y, sss_budget).unwrap();
    let comp = comp.estimate().unwrap().to_vec();
    let dd = dd.estimate().unwrap().to_vec();
    let scomp = scomp.estimate().unwrap().to_vec();

    check(explains(design, y, truth), "true set is not satisfying");
    check(comp == pd, "COMP estimate is not PD");
    check(is_subset(truth, &comp), "truth not inside COMP");
    check(is_subset(&dd, truth), "DD declared a non-defective");
    check(is_subset(&dd, &scomp), "SCOMP dropped a DD item");
    check(is_subset(&scomp, &comp), "SCOMP left PD");
    check(explains(design, y, &scomp), "SCOMP estimate not satisfying");
    check(explains(design, y, &comp), "COMP estimate not satisfying");
    let every_clean_item_caught = (0..design.num_items())
        .filter(|i| truth.binary_search(i).is_err())
        .all(|i| design.item_tests(i).iter().any(|&t| !y_bits[t]));
    check(
        (comp == *truth) == every_clean_item_caught,
        "COMP success does not match every non-defective sitting in a negative test",
    );

    let sss = decode_sss(design, y, sss_budget).unwrap();
    if let Some(est) = sss.estimate() {
        check(explains(design, y, est), "SSS estimate not satisfying");
        check(est.len() <= truth.len(), "SSS estimate larger than truth");
        check(est.len() <= scomp.len(), "SSS estimate larger than SCOMP");
    }

    // Decoding is a pure function of (design, y).
    for d in Decoder::ALL {
        let again = d.decode(design, y, sss_budget).unwrap();
        let first = d.decode(design, y, sss_budget).unwrap();
        check(again == first, "decoder is not deterministic");
    }
    bad
}
