//! Error type carried by every command, mapped onto the process exit codes:
//! 2 for rejected input, 3 for an exploration envelope that admits no design,
//! 4 for a broken internal invariant. Every failure is reported to stderr as
//! one machine-readable JSON object.

use std::fmt;
use std::path::Path;

use dcim_core::costmodel::CostError;
use dcim_core::dse::DseError;
use dcim_core::funcsim::SimError;
use dcim_core::rtlgen::RtlError;
use dcim_core::techlib::TechError;

/// One failed run. The variants mirror the exit-code contract.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Rejected input: configuration text, flag values, file contents, or a
    /// domain object that fails validation. Also covers unreadable and
    /// unwritable paths. Exit code 2.
    Validation {
        message: String,
        /// Configuration key at fault, when one can be named.
        key: Option<String>,
        /// Line in the source file, when the fault has one.
        line: Option<usize>,
    },
    /// The exploration bounds admit no design at all. Exit code 3.
    Infeasible { message: String },
    /// An internal invariant failed; this is a bug, not a user error.
    /// Exit code 4.
    Internal { message: String },
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> CliError {
        CliError::Validation { message: message.into(), key: None, line: None }
    }

    /// Validation failure attributed to one configuration key.
    pub fn for_key(key: &str, line: Option<usize>, message: impl Into<String>) -> CliError {
        CliError::Validation {
            message: message.into(),
            key: Some(key.to_string()),
            line,
        }
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError::Internal { message: message.into() }
    }

    /// Wraps a filesystem failure with the path it concerns.
    pub fn io(action: &str, path: &Path, err: &std::io::Error) -> CliError {
        CliError::validation(format!("cannot {action} `{}`: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Infeasible { .. } => 3,
            CliError::Internal { .. } => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::Infeasible { .. } => "infeasible",
            CliError::Internal { .. } => "internal",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation { message, .. }
            | CliError::Infeasible { message }
            | CliError::Internal { message } => message,
        }
    }

    /// Machine-readable report written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = serde_json::Map::new();
        body.insert("code".into(), self.code().into());
        body.insert("exit".into(), self.exit_code().into());
        body.insert("message".into(), self.message().into());
        if let CliError::Validation { key, line, .. } = self {
            if let Some(key) = key {
                body.insert("key".into(), key.as_str().into());
            }
            if let Some(line) = line {
                body.insert("line".into(), (*line).into());
            }
        }
        serde_json::Value::Object(
            [("error".to_string(), serde_json::Value::Object(body))]
                .into_iter()
                .collect(),
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { message, key: Some(key), line: Some(line) } => {
                write!(f, "key `{key}` (line {line}): {message}")
            }
            CliError::Validation { message, key: Some(key), line: None } => {
                write!(f, "key `{key}`: {message}")
            }
            _ => f.write_str(self.message()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DseError> for CliError {
    fn from(err: DseError) -> CliError {
        match err {
            DseError::NoFeasibleDesign { .. } => CliError::Infeasible { message: err.to_string() },
            _ => CliError::validation(err.to_string()),
        }
    }
}

impl From<CostError> for CliError {
    fn from(err: CostError) -> CliError {
        CliError::validation(err.to_string())
    }
}

impl From<TechError> for CliError {
    fn from(err: TechError) -> CliError {
        CliError::validation(err.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(err: SimError) -> CliError {
        CliError::validation(err.to_string())
    }
}

impl From<RtlError> for CliError {
    fn from(err: RtlError) -> CliError {
        match err {
            // A design rejected before generation is the caller's input.
            RtlError::Design(_) => CliError::validation(err.to_string()),
            // Anything wrong inside a netlist we generated ourselves is a bug.
            _ => CliError::internal(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::validation("x").exit_code(), 2);
        assert_eq!(CliError::Infeasible { message: "x".into() }.exit_code(), 3);
        assert_eq!(CliError::internal("x").exit_code(), 4);
    }

    #[test]
    fn json_report_names_key_and_line() {
        let err = CliError::for_key("w_store", Some(3), "must be at least 1");
        let json = err.to_json();
        assert_eq!(json["error"]["code"], "validation");
        assert_eq!(json["error"]["exit"], 2);
        assert_eq!(json["error"]["key"], "w_store");
        assert_eq!(json["error"]["line"], 3);
        assert_eq!(json["error"]["message"], "must be at least 1");
    }

    #[test]
    fn infeasible_bounds_map_to_exit_three() {
        let err = DseError::NoFeasibleDesign {
            weight_capacity: 16,
            weight_bits: 8,
            height_max: 2,
            share_max: 1,
            columns_min_exclusive: 32,
        };
        let cli: CliError = err.into();
        assert_eq!(cli.exit_code(), 3);
        assert_eq!(cli.code(), "infeasible");
    }
}
