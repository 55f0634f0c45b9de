//! Structured check results with counterexample witnesses.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// At most this many witnesses are kept per check; the total is still counted.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        })
    }
}

/// Named values that make a check outcome concrete.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Witness(pub BTreeMap<String, String>);

impl Witness {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Builds a [`Witness`] from `key => value` pairs.
#[macro_export]
macro_rules! witness {
    ($($key:expr => $value:expr),* $(,)?) => {
        $crate::report::Witness::new()$(.with($key, $value))*
    };
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    #[serde(default)]
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckRecord {
    pub fn info(check: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckRecord {
            check: check.into(),
            stage: None,
            status: Status::Info,
            detail: Some(detail.into()),
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn at_stage(mut self, stage: impl Into<String>) -> Self {
        self.stage = Some(stage.into());
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }
}

/// Accumulates violations of one universally quantified claim.
#[derive(Debug)]
pub struct Check {
    record: CheckRecord,
}

impl Check {
    pub fn new(check: impl Into<String>) -> Self {
        Check {
            record: CheckRecord {
                check: check.into(),
                stage: None,
                status: Status::Pass,
                detail: None,
                violations: 0,
                witnesses: Vec::new(),
            },
        }
    }

    pub fn stage(mut self, stage: impl Into<String>) -> Self {
        self.record.stage = Some(stage.into());
        self
    }

    pub fn detail(&mut self, detail: impl Into<String>) {
        self.record.detail = Some(detail.into());
    }

    pub fn violation(&mut self, w: Witness) {
        self.record.status = Status::Fail;
        self.record.violations += 1;
        if self.record.witnesses.len() < MAX_WITNESSES {
            self.record.witnesses.push(w);
        }
    }

    /// Records `w` as a violation when `ok` is false.
    pub fn require(&mut self, ok: bool, w: impl FnOnce() -> Witness) {
        if !ok {
            self.violation(w());
        }
    }

    pub fn violations(&self) -> usize {
        self.record.violations
    }

    pub fn finish(self) -> CheckRecord {
        self.record
    }

    /// Like [`Check::finish`], but violations are downgraded to `info`.
    pub fn finish_as_info(mut self) -> CheckRecord {
        if self.record.status == Status::Fail {
            self.record.status = Status::Info;
        }
        self.record
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn find(&self, check: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn find_all<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a CheckRecord> {
        self.checks.iter().filter(move |c| c.check == check)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "[{}] {}", c.status, c.check)?;
            if let Some(stage) = &c.stage {
                write!(f, " @ {stage}")?;
            }
            if let Some(detail) = &c.detail {
                write!(f, ": {detail}")?;
            }
            if c.violations > 0 {
                write!(f, " ({} violations)", c.violations)?;
            }
            writeln!(f)?;
            for w in &c.witnesses {
                let parts: Vec<String> = w.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(f, "    witness: {}", parts.join(", "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_check_keeps_bounded_witnesses() {
        let mut c = Check::new("demo");
        for i in 0..20 {
            c.violation(witness! {"i" => i});
        }
        let r = c.finish();
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.violations, 20);
        assert_eq!(r.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn report_fails_iff_some_record_fails() {
        let mut report = Report::new();
        report.push(Check::new("ok").finish());
        report.push(CheckRecord::info("note", "just saying"));
        assert!(report.passed());
        let mut bad = Check::new("bad");
        bad.require(false, || witness! {"x" => "0"});
        report.push(bad.finish());
        assert!(!report.passed());
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn serializes_status_in_lowercase() {
        let r = CheckRecord::info("n", "d");
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"status\":\"info\""), "{text}");
    }
}
