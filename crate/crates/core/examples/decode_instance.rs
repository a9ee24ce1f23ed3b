//! Draw one random instance and run every decoder on it.

use std::f64::consts::LN_2;

use grouptest::decoders::{Decoder, DEFAULT_SSS_BUDGET};
use grouptest::model::{compute_outcomes, sample_defective_set};
use grouptest::DesignSpec;

fn main() -> grouptest::Result<()> {
    let (n, k, t, seed) = (200, 5, 45, 7);
    let design = DesignSpec::ccw(LN_2).generate(n, t, k, seed)?;
    let truth = sample_defective_set(n, k, seed + 1)?;
    let y = compute_outcomes(&design, &truth.defective_set)?;

    println!("defectives {:?}", truth.defective_set);
    println!("{} of {t} tests positive", y.positive_count());
    for decoder in Decoder::ALL {
        let result = decoder.decode(&design, &y, DEFAULT_SSS_BUDGET)?;
        let verdict = if result.recovers(&truth.defective_set) { "exact" } else { "wrong" };
        match result.estimate() {
            Some(items) => println!("{decoder:<6} {verdict}  {} items {items:?}", items.len()),
            None => println!("{decoder:<6} {verdict}  declared error: {result:?}"),
        }
    }
    Ok(())
}
