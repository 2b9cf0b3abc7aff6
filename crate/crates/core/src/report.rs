//! Law-by-law validation reports.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of checking one named law over all of its instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawCheck {
    pub law: String,
    pub passed: bool,
    /// First counterexample found, rendered for humans.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

/// A list of law checks about one subject (a lattice, groupoid, module, ...).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<LawCheck>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    /// Records a law. `witness` is `None` when the law holds.
    pub fn record(&mut self, law: impl Into<String>, witness: Option<String>) {
        self.checks.push(LawCheck {
            law: law.into(),
            passed: witness.is_none(),
            witness,
        });
    }

    /// Records a law by searching `cases` for the first failing instance.
    pub fn check_all<T, I, F>(&mut self, law: impl Into<String>, cases: I, mut holds: F)
    where
        I: IntoIterator<Item = T>,
        T: fmt::Debug,
        F: FnMut(&T) -> bool,
    {
        let witness = cases
            .into_iter()
            .find(|c| !holds(c))
            .map(|c| format!("{c:?}"));
        self.record(law, witness);
    }

    pub fn merge(&mut self, other: ValidationReport) {
        let prefix = other.subject;
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.law = format!("{prefix}: {}", c.law);
            }
            self.checks.push(c);
        }
    }

    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&LawCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self, law: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.law == law).map(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.is_valid() { "valid" } else { "INVALID" };
        writeln!(f, "{}: {verdict}", self.subject)?;
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            match &c.witness {
                Some(w) => writeln!(f, "  [{mark}] {} (witness: {w})", c.law)?,
                None => writeln!(f, "  [{mark}] {}", c.law)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_reported() {
        let mut r = ValidationReport::new("demo");
        r.check_all("even", [2, 4, 5, 7], |x| x % 2 == 0);
        r.check_all("positive", [1, 2], |x| *x > 0);
        assert!(!r.is_valid());
        let f = r.first_failure().unwrap();
        assert_eq!(f.law, "even");
        assert_eq!(f.witness.as_deref(), Some("5"));
        assert_eq!(r.passed("positive"), Some(true));
    }
}
