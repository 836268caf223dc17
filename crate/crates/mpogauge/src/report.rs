//! Verification reports: named identities with residuals and tolerances.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Record {
    pub identity: String,
    /// The relation being checked, written out in symbols.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
    pub meta: BTreeMap<String, String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, identity: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) {
        self.records.push(Record {
            identity: identity.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass: residual < tolerance,
        });
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.insert(key.into(), value.to_string());
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
        self.meta.extend(other.meta);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Stable ordering by identity name, then anchor.
    pub fn sort(&mut self) {
        self.records
            .sort_by(|a, b| (&a.identity, &a.anchor).cmp(&(&b.identity, &b.anchor)));
    }
}

/// Tolerance from `MPOGAUGE_TOL` if set and parseable, else the default.
pub fn tolerance_from_env() -> f64 {
    std::env::var("MPOGAUGE_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .unwrap_or(crate::DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_strict_inequality() {
        let mut r = Report::new();
        r.push("a", "x = y", 1e-10, 1e-9);
        r.push("b", "x = y", 1e-9, 1e-9);
        assert!(r.records[0].pass);
        assert!(!r.records[1].pass);
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
    }
}
