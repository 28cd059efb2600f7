use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Error,
    Warning,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Error => "ERROR",
            Level::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagCode {
    SyntaxError,
    MissingMain,
    MainCalled,
    DuplicateName,
    DuplicateLabel,
    ReservedLabel,
    UnknownVariable,
    UnknownProcedure,
    UnknownLabel,
    ArityMismatch,
    AssignArityMismatch,
    DuplicateAssignTarget,
    NondeterministicAssertGuard,
    NondeterministicAssumeGuard,
    NondeterministicGuard,
    NondeterministicExpression,
    LoopBodyNotSkip,
    EmptyBody,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Rendered as `LEVEL:FILE:LINE:COL:CODE:message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub level: Level,
    pub line: usize,
    pub col: usize,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, pos: (usize, usize), message: impl Into<String>) -> Self {
        Diagnostic {
            level: Level::Error,
            line: pos.0,
            col: pos.1,
            code,
            message: message.into(),
        }
    }

    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}:{}:{}:{}",
            self.level, file, self.line, self.col, self.code, self.message
        )
    }
}

/// Non-empty list of diagnostics returned when a program is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn has_code(&self, code: DiagCode) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    pub fn render(&self, file: &str) -> String {
        self.0
            .iter()
            .map(|d| d.render(file))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("<input>"))
    }
}

impl std::error::Error for Diagnostics {}
