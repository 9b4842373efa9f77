//! Run configuration, command dispatch, and report files.

mod config;
mod expr;
mod output;
mod run;

pub use config::{
    parse_config, parse_config_with, Anchors, DomainSpec, FormSource, FrenetSpec, OutputFormat, Outputs, Overrides,
    RunConfig, SymmetryInputs, Tolerances,
};
pub use expr::{parse_expr, Expr, Func, Op};
pub use output::{csv_string, dat_string, emit_outputs, format_f64, report_document, to_json_string};
pub use run::{
    read_result_values, run_command, Command, ErrorInfo, RunReport, Status, Table, DEVELOP_TOL, ROUNDTRIP_TOL,
    SYMMETRY_TOL, VALIDATE_TOL,
};
