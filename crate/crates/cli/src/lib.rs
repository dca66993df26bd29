//! Scenario scripts, trace encodings and the script runner behind the
//! `qledger` binary.

pub mod output;
pub mod runner;
pub mod script;

pub use output::{Format, Table};
pub use runner::{run, RunError, ScriptRun};
pub use script::{parse_script, render, ScenarioScript, ScriptError};
