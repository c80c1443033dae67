use std::fmt::Write as _;

use pdlkit::calculus::ProofError;
use pdlkit::fixtures::FixtureError;
use pdlkit::large_programs::LargeError;
use pdlkit::model_search::SearchError;
use pdlkit::normal_form::NormalFormError;
use pdlkit::semantics::SemanticsError;
use pdlkit::syntax::SyntaxError;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Countermodel,
    NoModelBounded,
    Refuted,
    ProofError,
    ParseError,
    Internal,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Countermodel => "countermodel",
            Status::NoModelBounded => "no-model-bounded",
            Status::Refuted => "refuted",
            Status::ProofError => "proof-error",
            Status::ParseError => "parse-error",
            Status::Internal => "internal-error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Countermodel | Status::NoModelBounded | Status::Refuted | Status::ProofError => 1,
            Status::ParseError => 2,
            Status::Internal => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: Status,
    pub payload: Value,
    /// Human-readable rendering of the payload.
    pub text: String,
    pub timing_ms: u128,
}

impl RunReport {
    pub fn new(status: Status, payload: Value, text: impl Into<String>) -> Self {
        RunReport {
            status,
            payload,
            text: text.into(),
            timing_ms: 0,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.name(),
            "payload": self.payload,
            "timing_ms": self.timing_ms as u64,
        })
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            return serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        }
        let mut s = self.text.trim_end().to_string();
        if !s.is_empty() {
            s.push('\n');
        }
        let _ = write!(s, "status: {} ({} ms)", self.status.name(), self.timing_ms);
        s
    }
}

/// Errors caused by the input map to exit code 2; broken invariants and
/// anything unrecognised map to 3.
pub fn classify(err: &anyhow::Error) -> Status {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SearchError>() {
            return match e {
                SearchError::Internal(_) => Status::Internal,
                _ => Status::ParseError,
            };
        }
        if let Some(e) = cause.downcast_ref::<FixtureError>() {
            return match e {
                FixtureError::Search(SearchError::Internal(_)) => Status::Internal,
                _ => Status::ParseError,
            };
        }
        if cause.is::<SyntaxError>()
            || cause.is::<SemanticsError>()
            || cause.is::<LargeError>()
            || cause.is::<ProofError>()
            || cause.is::<NormalFormError>()
            || cause.is::<serde_json::Error>()
            || cause.is::<std::io::Error>()
            || cause.is::<UsageError>()
        {
            return Status::ParseError;
        }
    }
    Status::Internal
}

/// Bad flags or input detected by the CLI itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
