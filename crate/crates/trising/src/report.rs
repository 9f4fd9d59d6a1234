//! Machine-readable verification reports.

use crate::series::Series;
use serde::{Deserialize, Serialize};

/// Classification of a check: anchored to a stated closed form, or an
/// internal cross-validation between two independent routes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    ClosedForm,
    Oracle,
}

/// One verification item.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub class: CheckClass,
    pub passed: bool,
    /// Largest integer order through which two series agreed, when relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees_to: Option<i64>,
    /// First mismatching order (quarter units), when a mismatch exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>, class: CheckClass) -> Self {
        Check {
            name: name.into(),
            class,
            passed: true,
            agrees_to: None,
            first_mismatch: None,
            details: None,
        }
    }

    pub fn series_compare(
        name: impl Into<String>,
        class: CheckClass,
        a: &Series,
        b: &Series,
        through: i64,
    ) -> Self {
        let diff = a.first_difference(b);
        let passed = diff.map_or(true, |e| e.0 > 4 * through);
        Check {
            name: name.into(),
            class,
            passed,
            agrees_to: Some(match diff {
                Some(e) => (e.0 - 1).div_euclid(4),
                None => (a.prec().0.min(b.prec().0) - 1).div_euclid(4),
            }),
            first_mismatch: diff.map(|e| e.0),
            details: None,
        }
    }

    pub fn with_details(mut self, details: impl Into<String>) -> Self {
        self.details = Some(details.into());
        self
    }
}

/// A named batch of checks.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = format!("{}\n", self.title);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let class = match c.class {
                CheckClass::ClosedForm => "closed-form",
                CheckClass::Oracle => "oracle",
            };
            out.push_str(&format!("  [{status}] ({class}) {}", c.name));
            if let Some(n) = c.agrees_to {
                out.push_str(&format!("  agrees_to=p^{n}"));
            }
            if let Some(e) = c.first_mismatch {
                out.push_str(&format!("  first_mismatch={e}/4"));
            }
            if let Some(d) = &c.details {
                out.push_str(&format!("  {d}"));
            }
            out.push('\n');
        }
        out
    }
}
