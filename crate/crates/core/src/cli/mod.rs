//! Configuration, scenario catalog and subcommands behind the `dualrisk`
//! binary.

mod commands;
mod config;
mod scenarios;

pub use commands::{
    beta_c_levels, cmd_asymptotics, cmd_curve, cmd_heatmap, cmd_simulate, cmd_solve, cmd_verify, fmt_sig,
    state_check_grid, verify_report, Check, CommandOutput, VerifyReport, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK,
    EXIT_VERIFY_FAILED,
};
pub use config::{ControlSpec, Format, Grid, HeatAxis, LawKind, RunConfig, KEYS};
pub use scenarios::{resolve, scenario, FIG1_X0S, SCENARIOS};
