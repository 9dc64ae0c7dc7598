//! Validation reports: one entry per law, with the first failures and a few
//! sample witnesses. Serialised with keys in sorted order.

use serde::Serialize;
use serde_json::Value;

/// Failures and witnesses kept per check.
pub const MAX_RECORDED: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub instances: usize,
    pub failed: usize,
    pub failures: Vec<Value>,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Pass,
            instances: 0,
            failed: 0,
            failures: Vec::new(),
            witnesses: Vec::new(),
            note: None,
        }
    }

    pub fn pass(&mut self, witness: impl FnOnce() -> Value) {
        self.instances += 1;
        if self.witnesses.len() < MAX_RECORDED {
            self.witnesses.push(witness());
        }
    }

    pub fn fail(&mut self, detail: impl FnOnce() -> Value) {
        self.instances += 1;
        self.failed += 1;
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
        if self.failures.len() < MAX_RECORDED {
            self.failures.push(detail());
        }
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.status = Status::Error;
        self.note = Some(message.into());
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn has_error(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Error)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// JSON with object keys sorted.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report serialises")
    }
}
