//! Violation reports shared by the checkers.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checked: usize,
    /// Configurations left out because they fall outside the bound.
    pub skipped: usize,
    pub violations: Vec<Finding>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, kind: &str, detail: impl Into<String>) {
        self.violations.push(Finding { kind: kind.to_string(), detail: detail.into() });
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations.iter().filter(|f| f.kind == kind).count()
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.violations.extend(other.violations);
    }
}
