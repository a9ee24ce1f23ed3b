//! Command implementations behind the `grouptest` binary.
//!
//! Each command reads and writes files only; argument parsing lives in the
//! binary. Errors carry the process exit code: 2 for usage and validation
//! problems, 1 for runtime failures.

use std::f64::consts::LN_2;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupon::{exhaustive_check, tail_check, CheckLine};
use crate::decoders::{Decoder, DEFAULT_SSS_BUDGET};
use crate::design::DesignSpec;
use crate::error::Error;
use crate::sim::{run_sweep, write_csv, SimConfig, CSV_HEADER};
use crate::theory;

/// Above this `N * K` the presets leave SSS out; the exact search stops being
/// practical long before `N = 2000, K = 100`.
pub const SSS_PRODUCT_LIMIT: usize = 50_000;

pub const THEORY_HEADER: [&str; 6] = [
    "theta",
    "bernoulli_capacity",
    "comp_bernoulli",
    "comp_ccw",
    "ccw_converse",
    "counting",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let validation = match &e {
            Error::Cell { source, .. } => {
                matches!(**source, Error::InvalidParameter(_) | Error::Usage(_))
            }
            Error::InvalidParameter(_) | Error::Usage(_) | Error::ShapeMismatch { .. } => true,
            Error::Inconsistent { .. } => false,
        };
        if validation {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Flag overrides applied on top of a config file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub sss_budget: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut SimConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(budget) = self.sss_budget {
            config.sss_budget = budget;
        }
    }
}

/// Metadata written next to every sweep CSV. It can be passed back as
/// `--config` to regenerate the same CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub config: SimConfig,
}

impl Sidecar {
    pub fn new(config: SimConfig) -> Self {
        Sidecar {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Parses a sweep config. Accepts either a bare config object or a sidecar
/// written by a previous run. Unknown keys are rejected.
pub fn parse_config(text: &str) -> CliResult<SimConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid JSON: {e}")))?;
    let is_sidecar = value
        .as_object()
        .is_some_and(|o| o.contains_key("config") && o.contains_key("tool"));
    let invalid = |e: serde_path_to_error::Error<serde_json::Error>| {
        CliError::Usage(format!("invalid config at `{}`: {}", e.path(), e.inner()))
    };
    if is_sidecar {
        serde_path_to_error::deserialize::<_, Sidecar>(value)
            .map(|s| s.config)
            .map_err(invalid)
    } else {
        serde_path_to_error::deserialize::<_, SimConfig>(value).map_err(invalid)
    }
}

pub fn load_config(path: &Path) -> CliResult<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| io_error(path, e))
}

/// Runs a sweep and writes its CSV, sidecar and gnuplot stub. Returns the
/// number of data rows.
pub fn run_and_write(config: &SimConfig, out: &Path) -> CliResult<usize> {
    config.validate()?;
    let rows = run_sweep(config)?;
    let mut file = create(out)?;
    write_csv(&rows, config.seed, &mut file).map_err(|e| io_error(out, e))?;
    file.flush().map_err(|e| io_error(out, e))?;

    let meta = serde_json::to_string_pretty(&Sidecar::new(config.clone()))
        .expect("config serialises");
    write_text(&sidecar_path(out), &(meta + "\n"))?;
    write_text(&out.with_extension("gp"), &sweep_plot_stub(config, out))?;
    Ok(rows.len())
}

pub fn cmd_simulate(config_path: &Path, out: &Path, overrides: Overrides) -> CliResult<usize> {
    let mut config = load_config(config_path)?;
    overrides.apply(&mut config);
    run_and_write(&config, out)
}

fn csv_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn sweep_plot_stub(config: &SimConfig, csv: &Path) -> String {
    let col = |name: &str| CSV_HEADER.iter().position(|h| *h == name).unwrap() + 1;
    let mut plots = Vec::new();
    for design in &config.designs {
        for decoder in &config.decoders {
            plots.push(format!(
                "  '{file}' using (strcol({d}) eq '{label}' && strcol({p}) eq '{params}' && strcol({dec}) eq '{name}' ? ${t} : 1/0):{rate} with linespoints title '{name} {label}'",
                file = csv_name(csv),
                d = col("design"),
                p = col("design_params"),
                dec = col("decoder"),
                t = col("T"),
                rate = col("success_rate"),
                label = design.label(),
                params = design.params(),
                name = decoder.name(),
            ));
        }
    }
    format!(
        "# gnuplot -p {gp}\nset datafile separator ','\nset xlabel 'number of tests T'\nset ylabel 'success probability'\nset title 'N = {n}, K = {k}'\nset yrange [0:1]\nplot \\\n{plots}\n",
        gp = csv_name(&csv.with_extension("gp")),
        n = config.n,
        k = config.k,
        plots = plots.join(", \\\n"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryRow {
    pub theta: f64,
    pub bernoulli_capacity: f64,
    pub comp_bernoulli: f64,
    pub comp_ccw: f64,
    pub ccw_converse: f64,
    pub counting: f64,
}

/// Inclusive grid `theta_min, theta_min + step, ...` up to `theta_max`.
pub fn theta_grid(theta_min: f64, theta_max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(theta_min > 0.0 && theta_min <= theta_max && theta_max < 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 < theta_min <= theta_max < 1, got {theta_min}, {theta_max}"
        )));
    }
    if !(step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    let count = ((theta_max - theta_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((theta_min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn theory_rows(theta_min: f64, theta_max: f64, step: f64) -> CliResult<Vec<TheoryRow>> {
    theta_grid(theta_min, theta_max, step)?
        .into_iter()
        .map(|theta| {
            Ok(TheoryRow {
                theta,
                bernoulli_capacity: theory::bernoulli_capacity(theta)?,
                comp_bernoulli: theory::comp_bernoulli_rate(theta)?,
                comp_ccw: theory::comp_ccw_rate(theta)?,
                ccw_converse: theory::ccw_converse(theta)?,
                counting: 1.0,
            })
        })
        .collect()
}

pub fn write_theory_csv<W: Write>(rows: &[TheoryRow], out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(THEORY_HEADER)?;
    for r in rows {
        writer.write_record([
            format!("{}", r.theta),
            format!("{:.9}", r.bernoulli_capacity),
            format!("{:.9}", r.comp_bernoulli),
            format!("{:.9}", r.comp_ccw),
            format!("{:.9}", r.ccw_converse),
            format!("{}", r.counting),
        ])?;
    }
    writer.flush()
}

fn theory_plot_stub(csv: &Path) -> String {
    let file = csv_name(csv);
    format!(
        "# gnuplot -p {gp}\nset datafile separator ','\nset key autotitle columnhead\nset xlabel 'density parameter theta'\nset ylabel 'rate (bits per test)'\nset yrange [0:1.05]\nplot for [c=2:6] '{file}' using 1:c with lines\n",
        gp = csv_name(&csv.with_extension("gp")),
    )
}

pub fn cmd_theory_curves(theta_min: f64, theta_max: f64, step: f64, out: &Path) -> CliResult<usize> {
    let rows = theory_rows(theta_min, theta_max, step)?;
    let mut file = create(out)?;
    write_theory_csv(&rows, &mut file).map_err(|e| io_error(out, e))?;
    file.flush().map_err(|e| io_error(out, e))?;
    write_text(&out.with_extension("gp"), &theory_plot_stub(out))?;
    Ok(rows.len())
}

/// Exhaustive and Monte Carlo checks of the coupon-collector formulas.
pub fn cmd_coupon_check(t_max: u64, c_max: u64, mc_trials: u64, seed: u64) -> CliResult<Vec<CheckLine>> {
    let mut lines = exhaustive_check(t_max, c_max, 1e-12)?;
    if mc_trials > 0 {
        for (population, alpha, eps) in [(1000, LN_2, 0.05), (5000, 0.5, 0.02)] {
            lines.extend(tail_check(population, alpha, eps, mc_trials, seed)?.lines());
        }
    }
    Ok(lines)
}

/// Bernoulli parameter used against the CCW design in the presets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BernoulliParam {
    /// `p = ln 2 / K`, so an item's expected test count `pT` equals the CCW weight `ln 2 T / K`.
    #[default]
    Ln2OverK,
    /// `p = 1 / K`.
    OneOverK,
}

impl BernoulliParam {
    pub fn p(self, k: usize) -> f64 {
        match self {
            BernoulliParam::Ln2OverK => LN_2 / k as f64,
            BernoulliParam::OneOverK => 1.0 / k as f64,
        }
    }
}

/// Options shared by the reproduction presets.
#[derive(Clone, Copy, Debug)]
pub struct PresetOptions {
    pub seed: u64,
    pub trials: u64,
    pub sss_budget: u64,
    pub bernoulli: BernoulliParam,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            seed: 2016,
            trials: 1000,
            sss_budget: DEFAULT_SSS_BUDGET,
            bernoulli: BernoulliParam::default(),
        }
    }
}

fn preset(n: usize, k: usize, t_values: Vec<usize>, decoders: &[Decoder], opts: &PresetOptions) -> SimConfig {
    let mut decoders = decoders.to_vec();
    if n * k > SSS_PRODUCT_LIMIT {
        decoders.retain(|d| *d != Decoder::Sss);
    }
    SimConfig {
        n,
        k,
        t_values,
        designs: vec![
            DesignSpec::Bernoulli {
                p: opts.bernoulli.p(k),
            },
            DesignSpec::ccw(LN_2),
        ],
        decoders,
        trials: opts.trials,
        seed: opts.seed,
        sss_budget: opts.sss_budget,
    }
}

/// Small sparse regime: `N = 500`, `K = 10`, decoders COMP, DD and SSS.
pub fn fig2_small_config(opts: &PresetOptions) -> SimConfig {
    preset(
        500,
        10,
        (5..=17).map(|i| i * 10).collect(),
        &[Decoder::Comp, Decoder::Dd, Decoder::Sss],
        opts,
    )
}

/// Larger dense regime: `N = 2000`, `K = 100`, decoders COMP, DD and SCOMP.
pub fn fig2_large_config(opts: &PresetOptions) -> SimConfig {
    preset(
        2000,
        100,
        (5..=20).map(|i| i * 100).collect(),
        &[Decoder::Comp, Decoder::Dd, Decoder::Scomp, Decoder::Sss],
        opts,
    )
}

/// Writes `fig2_small.csv` and `fig2_large.csv` (with sidecars and plot
/// stubs) into `out_dir`.
pub fn repro_fig2(out_dir: &Path, opts: &PresetOptions) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, config) in [
        ("fig2_small.csv", fig2_small_config(opts)),
        ("fig2_large.csv", fig2_large_config(opts)),
    ] {
        let path = out_dir.join(name);
        run_and_write(&config, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the rate curves over `theta` in [0.01, 0.99] to `out_dir/fig1.csv`.
pub fn repro_fig1(out_dir: &Path) -> CliResult<PathBuf> {
    let path = out_dir.join("fig1.csv");
    cmd_theory_curves(0.01, 0.99, 0.01, &path)?;
    Ok(path)
}
