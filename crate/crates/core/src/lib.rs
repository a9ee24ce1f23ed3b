//! Nonadaptive group testing with random pooling designs.
//!
//! `N` items, `K` of them defective, are screened with `T` pooled tests; a test
//! is positive iff its pool holds a defective. This crate provides
//!
//! - [`design`]: Bernoulli and constant column weight (CCW) random designs,
//! - [`model`]: uniform defective sets and noiseless outcomes,
//! - [`decoders`]: COMP, DD, SCOMP and the exact smallest-satisfying-set (SSS) search,
//! - [`theory`]: rates, capacities, thresholds and coupon-collector formulas,
//! - [`sim`]: a seeded, parallel Monte Carlo engine producing success curves,
//! - [`coupon`]: enumeration and Monte Carlo checks of the coupon formulas,
//! - [`cli`]: the commands behind the `grouptest` binary.
//!
//! ```
//! use grouptest::{decoders, design::DesignSpec, model};
//!
//! let (n, k, t) = (200, 4, 60);
//! let design = DesignSpec::ccw(std::f64::consts::LN_2).generate(n, t, k, 1).unwrap();
//! let truth = model::sample_defective_set(n, k, 2).unwrap();
//! let y = model::compute_outcomes(&design, &truth.defective_set).unwrap();
//! let est = decoders::decode_dd(&design, &y).unwrap();
//! // DD never reports a non-defective
//! assert!(est.estimate().unwrap().iter().all(|i| truth.defective_set.contains(i)));
//! ```
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example <name>`.

pub mod cli;
pub mod coupon;
pub mod decoders;
pub mod design;
pub mod error;
pub mod model;
pub mod rng;
pub mod sim;
pub mod theory;

pub use decoders::{DecodeResult, Decoder};
pub use design::{DesignMatrix, DesignSpec, Replacement};
pub use error::{Error, Result};
pub use model::{OutcomeVector, ProblemInstance};
pub use sim::{SimConfig, TrialStats};
