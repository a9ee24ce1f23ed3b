//! Print the rate curves and the landmark thresholds.

use grouptest::theory;

fn main() -> grouptest::Result<()> {
    println!("theta  bern_cap  comp_bern  comp_ccw  ccw_conv");
    for i in 1..10 {
        let theta = i as f64 / 10.0;
        println!(
            "{theta:.1}    {:.4}    {:.4}     {:.4}    {:.4}",
            theory::bernoulli_capacity(theta)?,
            theory::comp_bernoulli_rate(theta)?,
            theory::comp_ccw_rate(theta)?,
            theory::ccw_converse(theta)?,
        );
    }
    println!();
    println!("COMP rate gain from CCW      {:.6}", theory::comp_rate_gain());
    println!(
        "COMP-CCW beats Bernoulli capacity for theta > {:.4}",
        theory::comp_beats_bernoulli_capacity_above()
    );
    println!(
        "COMP-CCW beats practical Bernoulli for theta < {:.4}",
        theory::comp_beats_practical_below()
    );
    for (n, k) in [(500, 10), (10_000, 10), (2000, 100)] {
        println!(
            "N={n:<6} K={k:<4} log2 C(N,K) = {:8.3}  T*_COMP = {:8.2}",
            theory::log2_binomial(n, k)?,
            theory::t_star_comp(n, k)?
        );
    }
    Ok(())
}
