//! COMP success on a CCW design around its predicted threshold, next to the
//! closed-form success probability given the number of positive tests.

use std::f64::consts::LN_2;

use grouptest::decoders::{Decoder, DEFAULT_SSS_BUDGET};
use grouptest::sim::{comp_mixture_check, run_cell, Cell};
use grouptest::{theory, DesignSpec};

fn main() -> grouptest::Result<()> {
    let (n, k) = (2000, 8);
    let t_star = theory::t_star_comp(n as u64, k as u64)?;
    println!("T*_COMP = {t_star:.1}");
    for factor in [0.7, 0.85, 1.0, 1.15, 1.3] {
        let t = (factor * t_star).ceil() as usize;
        let cell = Cell { n, k, t, design: DesignSpec::ccw(LN_2), decoder: Decoder::Comp };
        let stats = run_cell(&cell, 300, 9, DEFAULT_SSS_BUDGET)?;
        println!(
            "T = {t:4}  success {:.3}  [{:.3}, {:.3}]",
            stats.success_rate, stats.ci_low, stats.ci_high
        );
    }

    let check = comp_mixture_check(500, 10, 100, LN_2, 1000, 4)?;
    println!(
        "\nN=500 K=10 T=100: simulated {:.4}, mixture formula {:.4}, intervals overlap: {}",
        check.empirical.success_rate,
        check.mixture_mean,
        check.intervals_overlap()
    );
    Ok(())
}
