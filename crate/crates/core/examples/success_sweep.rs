//! Small Monte Carlo sweep written as CSV to stdout.

use std::f64::consts::LN_2;

use grouptest::decoders::{Decoder, DEFAULT_SSS_BUDGET};
use grouptest::sim::{run_sweep, write_csv};
use grouptest::{DesignSpec, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimConfig {
        n: 100,
        k: 4,
        t_values: vec![20, 30, 40],
        designs: vec![DesignSpec::Bernoulli { p: LN_2 / 4.0 }, DesignSpec::ccw(LN_2)],
        decoders: vec![Decoder::Comp, Decoder::Dd, Decoder::Sss],
        trials: 200,
        seed: 1,
        sss_budget: DEFAULT_SSS_BUDGET,
    };
    let rows = run_sweep(&config)?;
    write_csv(&rows, config.seed, std::io::stdout().lock())?;
    Ok(())
}
