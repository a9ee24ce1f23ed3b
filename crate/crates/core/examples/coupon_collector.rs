//! Compare the expected number of distinct coupons with enumeration and
//! simulation.

use grouptest::coupon::{enumerate_expected_distinct, tail_check};
use grouptest::theory::coupon_expected_distinct;

fn main() -> grouptest::Result<()> {
    for (t, c) in [(3, 2), (5, 5), (6, 4)] {
        println!(
            "T={t} c={c}: formula {:.10}  enumeration {:.10}",
            coupon_expected_distinct(t, c)?,
            enumerate_expected_distinct(t, c)
        );
    }
    let check = tail_check(1000, std::f64::consts::LN_2, 0.05, 1000, 3)?;
    for line in check.lines() {
        println!("{line}");
    }
    Ok(())
}
