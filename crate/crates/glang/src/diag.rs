//! Source locations and diagnostics.
//!
//! Diagnostics print in the fixed `FILE:LINE:` format followed by the
//! message body on its own lines.

use std::fmt;
use std::rc::Rc;

/// A 1-based line/column position in a named source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Loc {
    pub file: Rc<str>,
    pub line: u32,
    pub column: u32,
}

impl Loc {
    pub fn new(file: Rc<str>, line: u32, column: u32) -> Loc {
        Loc { file, line, column }
    }

    pub fn builtin() -> Loc {
        Loc {
            file: Rc::from("<builtin>"),
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A single diagnostic. `message` may span multiple lines; it is printed
/// verbatim below the `FILE:LINE:` header.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub loc: Loc,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(loc: Loc, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            loc,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    /// Renders as `FILE:LINE:` newline, then the message.
    pub fn render(&self) -> String {
        format!("{}:{}:\n{}\n", self.loc.file, self.loc.line, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Accumulates diagnostics across phases.
#[derive(Debug, Default)]
pub struct Diagnostics {
    pub items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn new() -> Diagnostics {
        Diagnostics { items: Vec::new() }
    }

    pub fn error(&mut self, loc: Loc, message: impl Into<String>) {
        self.items.push(Diagnostic::error(loc, message));
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.items.push(d);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.items.extend(other.items);
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn render_all(&self) -> String {
        let mut out = String::new();
        for d in &self.items {
            out.push_str(&d.render());
        }
        out
    }
}
