//! Batch front-end: `simulate`, `verify` and `bench`.

pub mod commands;
pub mod output;

pub use commands::{
    bench, compare_paths, load_config, random_states, simulate, verify, verify_config, CliError, PathReport, VerifyOptions,
    VERIFY_TOLERANCE,
};
