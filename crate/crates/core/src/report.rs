use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    /// Recorded but does not make the report fail.
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub level: Option<usize>,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Info => "info",
        };
        match self.level {
            Some(level) => write!(f, "{tag} level {level} {}: {}", self.subject, self.message),
            None => write!(f, "{tag} {}: {}", self.subject, self.message),
        }
    }
}

/// Collected invariant violations. Empty of errors means the checked
/// object satisfies every selected condition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn error(&mut self, level: Option<usize>, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Error,
            level,
            subject: subject.into(),
            message: message.into(),
        });
    }

    pub fn info(&mut self, level: Option<usize>, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Info,
            level,
            subject: subject.into(),
            message: message.into(),
        });
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// First error, rendered for one-line summaries.
    pub fn first_error(&self) -> Option<String> {
        self.errors().next().map(|v| v.to_string())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
