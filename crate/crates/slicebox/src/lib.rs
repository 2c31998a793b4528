//! One-dimensional slice sampling on the unit interval.
//!
//! An unbounded variable x is mapped onto p ∈ (0,1) by a scaled sigmoid for
//! the real line or the ratio map p/(1-p) for positive variables, and slice
//! sampling runs as a probabilistic binary search over (0,1), with a
//! log-Jacobian correction so the draws target the original density. The
//! classical stepping-out procedure is included as a baseline, along with
//! the benchmark targets, a density expression parser, and run diagnostics.
//!
//! ```
//! use slicebox::rng::RngStream;
//! use slicebox::samplers::{run_chain, SamplerConfig};
//! use slicebox::targets::LogDensity;
//!
//! let mut target = LogDensity::builtin("gauss500").unwrap();
//! let cfg = SamplerConfig::unbounded(100.0).unwrap();
//! let draws = run_chain(&mut target, &cfg, 0.0, 2000, 100, RngStream::new(1)).unwrap();
//! let mean = draws.iter().map(|d| d.x).sum::<f64>() / draws.len() as f64;
//! assert!((mean - 500.0).abs() < 1.0);
//! ```

pub mod diagnostics;
pub mod rng;
pub mod samplers;
pub mod targets;
pub mod transforms;

#[doc(hidden)]
pub mod testing;

pub use diagnostics::{summarize, ReportOptions, RunReport};
pub use rng::RngStream;
pub use samplers::{run_chain, ChainState, DrawRecord, Method, SamplerConfig};
pub use targets::{LogDensity, Support};
pub use transforms::Transform;
