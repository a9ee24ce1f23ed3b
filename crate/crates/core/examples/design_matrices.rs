//! Generate Bernoulli and constant-column-weight designs and compare their
//! row and column statistics.

use std::f64::consts::LN_2;

use grouptest::design::{column_weight, DesignSpec, Replacement};

fn summarize(name: &str, d: &grouptest::DesignMatrix) {
    let weights: Vec<usize> = (0..d.num_items()).map(|i| d.column_weight(i)).collect();
    let rows: Vec<usize> = d.rows().iter().map(Vec::len).collect();
    let (wmin, wmax) = (weights.iter().min().unwrap(), weights.iter().max().unwrap());
    let mean_row = rows.iter().sum::<usize>() as f64 / rows.len() as f64;
    println!(
        "{name:<24} ones={:<6} column weight {wmin}..={wmax}  mean tests per row {mean_row:.1}",
        d.ones()
    );
}

fn main() -> grouptest::Result<()> {
    let (n, t, k, seed) = (500, 120, 10, 42);

    let bernoulli = DesignSpec::Bernoulli { p: LN_2 / k as f64 };
    summarize("bernoulli p=ln2/K", &bernoulli.generate(n, t, k, seed)?);

    for replacement in [Replacement::With, Replacement::Without] {
        let spec = DesignSpec::ConstantColumnWeight { nu: LN_2, replacement };
        let l = column_weight(&spec, t, k)?;
        let name = format!("ccw L={l} {}", replacement.as_str());
        summarize(&name, &spec.generate(n, t, k, seed)?);
    }

    // Tiny design in the plain-text exchange format.
    let small = DesignSpec::ccw(LN_2).generate(6, 5, 2, seed)?;
    print!("\n{}", small.to_text());
    Ok(())
}
