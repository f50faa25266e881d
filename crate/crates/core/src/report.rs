use serde::{Deserialize, Serialize};

/// One checked condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub check: String,
    pub subject: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Pass/fail per checked condition, in the order the checks ran.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        check: impl Into<String>,
        subject: impl Into<String>,
        passed: bool,
        detail: impl Into<String>,
    ) {
        self.findings.push(Finding {
            check: check.into(),
            subject: subject.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn pass(&mut self, check: impl Into<String>, subject: impl Into<String>) {
        self.record(check, subject, true, "");
    }

    pub fn fail(&mut self, check: impl Into<String>, subject: impl Into<String>, detail: impl Into<String>) {
        self.record(check, subject, false, detail);
    }

    /// Appends another report, prefixing each subject.
    pub fn merge(&mut self, prefix: &str, other: ValidationReport) {
        for mut f in other.findings {
            f.subject = if f.subject.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}/{}", f.subject)
            };
            self.findings.push(f);
        }
    }

    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| !f.passed)
    }

    /// Whether every finding for `check` passed (vacuously true if none ran).
    pub fn check_passed(&self, check: &str) -> bool {
        self.findings.iter().filter(|f| f.check == check).all(|f| f.passed)
    }
}
