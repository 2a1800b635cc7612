//! Subcommands of the `vimbench` binary, callable as a library.

pub mod args;
mod dataset;
pub mod error;
mod evaluate;
mod masks;
pub mod run;

pub use dataset::{cmd_composite, cmd_validate, ClipEntry, CompositeFile};
pub use error::{CliError, CliResult};
pub use evaluate::{cmd_evaluate, EvaluateOptions};
pub use masks::{cmd_augment, cmd_link, AugmentMode};
