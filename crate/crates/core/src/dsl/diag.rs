use std::fmt;

/// A location in a source file; columns are 1-based and `col_end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, col_start: usize, col_end: usize) -> Self {
        Self {
            file: file.to_string(),
            line,
            col_start,
            col_end: col_end.max(col_start),
        }
    }

    /// From the start of `self` to the end of `other` when both sit on one line.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        if self.line == other.line && other.col_end >= self.col_start {
            SourceSpan::new(&self.file, self.line, self.col_start, other.col_end)
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    /// Short category: `syntax`, a validation rule such as `H0`, `compose`, ...
    pub code: String,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseDiagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(code, message, span)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: error[code]: message`, then the source line and a caret
    /// underline when `source` is given.
    pub fn render(&self, source: Option<&str>) -> String {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let mut out = format!("{}: {level}[{}]: {}", self.span, self.code, self.message);
        if let Some(line) = source.and_then(|s| s.lines().nth(self.span.line.saturating_sub(1))) {
            let width = (self.span.col_end - self.span.col_start).max(1);
            out.push_str(&format!(
                "\n  | {line}\n  | {}{}",
                " ".repeat(self.span.col_start.saturating_sub(1)),
                "^".repeat(width)
            ));
        }
        out
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}
