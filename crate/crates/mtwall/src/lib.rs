//! std front end for `mtwall-core`: JSON input with pointer-located errors,
//! versioned JSON reports, DOT export and the subcommands behind the
//! `mtwall` binary.
//!
//! Every command is a pure function from a loaded map and [`Params`] to an
//! [`Output`], so the binary only parses flags and writes bytes.

#![forbid(unsafe_code)]

pub mod commands;
pub mod dot;
pub mod input;

use mtwall_core::rational::{self, Q};
use mtwall_core::Error;
use serde_json::{json, Value};
use std::fmt;

pub use commands::{run, Command, Output, Params};
pub use input::{load_path, load_str, InputError, Loaded};

/// Version stamped into every report header.
pub const SCHEMA_VERSION: u32 = 1;

/// Output format of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    /// A JSON report.
    #[default]
    Json,
    /// A Graphviz graph.
    Dot,
}

/// Why a command did not produce a report.
#[derive(Debug)]
pub enum Failure {
    /// The input document is malformed or inconsistent.
    Input(InputError),
    /// Bad flags or an unsupported combination.
    Usage(String),
    /// The computation itself failed.
    Core(Error),
}

impl Failure {
    /// Process exit status: 1 for a violated hypothesis, 2 for bad input or
    /// usage, 3 when a resource cap was hit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) | Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Structural(_) | Error::IndexOutOfRange { .. } | Error::InverseRequired(_) => 2,
                Error::ResourceCap { .. } | Error::Truncated(_) | Error::Overflow => 3,
                Error::FiltrationNotMaximal(_) | Error::Singular(_) | Error::Bust(_) | Error::Degenerate(_) => 1,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error at {e}"),
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

/// Report header: schema name, version and the seed that drove any sampling.
pub fn header(command: &str, seed: u64) -> Value {
    json!({ "schema": format!("mtwall/{command}"), "version": SCHEMA_VERSION, "seed": seed })
}

/// Rational as `"num/den"`.
pub fn qjson(s: &Q) -> Value {
    Value::String(rational::to_string(s))
}

/// Float that stays valid JSON: non-finite values become `null`.
pub fn fjson(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Serializes with two-space indentation and a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}
