//! Toolkit for video instance matting benchmarks.
//!
//! * [`compositor`] builds multi-instance clips by iterative alpha compositing
//!   and validates stored clips against the composition equation.
//! * [`metrics`] evaluates predictions with VIMQ = RQ · TQ · MQ and the
//!   conventional MAD / MSE / Grad / dtSSD video-matting metrics.
//! * [`augment`] perturbs mask guidance sequences.
//! * [`linker`] turns instance-agnostic mattes into tracked instances.
//! * [`io`] reads and writes the on-disk dataset layout.
//! * [`report`] holds the JSON report and table rendering; [`sweep`] runs
//!   guidance-noise robustness sweeps.

pub mod assignment;
pub mod augment;
pub mod compositor;
pub mod error;
pub mod io;
pub mod linker;
pub mod matte;
pub mod metrics;
mod reduce;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
pub use matte::{AlphaMatte, BinaryMask, InstanceSet, MaskSequence, MatteSequence, RgbImage};
pub use metrics::{MetricConfig, VimqReport};
