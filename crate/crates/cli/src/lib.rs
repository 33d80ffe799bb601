//! Command implementations behind the `renormlab` binary, exposed as a
//! library so integration tests drive them directly with captured
//! output.

pub mod commands;
pub mod config;
pub mod fmt;
pub mod record;
pub mod verify;

pub use commands::{
    cmd_find_cycle, cmd_fixed_point, cmd_oracle, cmd_sweep_alpha, cmd_verify, render_oracle_csv,
    CmdError, CmdResult,
};
pub use config::{RunConfig, SigmaSpec, Tolerances, OUT_DIR_ENV};
pub use record::{pair_of_document, FixedPointDocument, Provenance};
pub use verify::{run_criterion, run_suite, CriterionOutcome, Workbench, CRITERION_NAMES};
