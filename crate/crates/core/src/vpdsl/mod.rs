//! The visual-program language: straight-line programs of typed cell calls
//! that segment the image, lift pixels to 3D, fit primitives and wrap the
//! final primitive in an anchor.
//!
//! ```text
//! program   = statement+
//! statement = IDENT "=" CELL "(" [arg ("," arg)*] ")"
//! arg       = NAME "=" value
//! value     = STRING | IDENT ["." ATTR] | NULL
//! ```
//!
//! Cell, argument and attribute names are case-insensitive. Identifiers are
//! exact tokens.

mod check;
pub mod corpus;
mod interp;
mod lexer;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use check::{cell_signature, typecheck_program, CellSignature, ValueType, CELL_NAMES};
pub use interp::{
    interpret_program, Extraction, InterpretOptions, LandmarkDetector, ProgramValue, Segmenter,
    ServiceError, Services,
};
pub use parser::parse_program;
pub use corpus::{CorpusProgram, CORPUS};

/// Byte range `[start, end)` in the program source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Str { text: String, span: Span },
    Ref { ident: Ident, attr: Option<Ident> },
    Null { span: Span },
}

impl Value {
    pub fn span(&self) -> Span {
        match self {
            Value::Str { span, .. } | Value::Null { span } => *span,
            Value::Ref { ident, attr } => match attr {
                Some(a) => ident.span.join(a.span),
                None => ident.span,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arg {
    pub name: Ident,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub target: Ident,
    pub cell: Ident,
    pub args: Vec<Arg>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualProgram {
    pub statements: Vec<Statement>,
    pub source: String,
}

impl VisualProgram {
    pub fn terminal(&self) -> Option<&Statement> {
        self.statements.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    ParseError,
    UnknownCell,
    TypeMismatch,
    UndefinedIdentifier,
    NotAnchorTerminal,
    RuntimeFailure { cell: String, cause: String },
    UnknownArgument,
    MissingArgument,
    UnknownAttribute,
    DuplicateTarget,
}

impl DiagnosticKind {
    pub fn name(&self) -> &'static str {
        match self {
            DiagnosticKind::ParseError => "ParseError",
            DiagnosticKind::UnknownCell => "UnknownCell",
            DiagnosticKind::TypeMismatch => "TypeMismatch",
            DiagnosticKind::UndefinedIdentifier => "UndefinedIdentifier",
            DiagnosticKind::NotAnchorTerminal => "NotAnchorTerminal",
            DiagnosticKind::RuntimeFailure { .. } => "RuntimeFailure",
            DiagnosticKind::UnknownArgument => "UnknownArgument",
            DiagnosticKind::MissingArgument => "MissingArgument",
            DiagnosticKind::UnknownAttribute => "UnknownAttribute",
            DiagnosticKind::DuplicateTarget => "DuplicateTarget",
        }
    }

    fn from_parts(name: &str, cell: Option<String>, cause: Option<String>) -> Option<Self> {
        Some(match name {
            "ParseError" => DiagnosticKind::ParseError,
            "UnknownCell" => DiagnosticKind::UnknownCell,
            "TypeMismatch" => DiagnosticKind::TypeMismatch,
            "UndefinedIdentifier" => DiagnosticKind::UndefinedIdentifier,
            "NotAnchorTerminal" => DiagnosticKind::NotAnchorTerminal,
            "RuntimeFailure" => DiagnosticKind::RuntimeFailure {
                cell: cell.unwrap_or_default(),
                cause: cause.unwrap_or_default(),
            },
            "UnknownArgument" => DiagnosticKind::UnknownArgument,
            "MissingArgument" => DiagnosticKind::MissingArgument,
            "UnknownAttribute" => DiagnosticKind::UnknownAttribute,
            "DuplicateTarget" => DiagnosticKind::DuplicateTarget,
            _ => return None,
        })
    }
}

/// A located problem with a program. Serializes as
/// `{"kind", "statement", "span": [a, b], "message"}`, plus `cell` and
/// `cause` for runtime failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DiagnosticRepr", try_from = "DiagnosticRepr")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub statement: usize,
    pub span: Span,
    pub message: String,
}

#[derive(Serialize, Deserialize)]
struct DiagnosticRepr {
    kind: String,
    statement: usize,
    span: [usize; 2],
    message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cause: Option<String>,
}

impl From<Diagnostic> for DiagnosticRepr {
    fn from(d: Diagnostic) -> Self {
        let (cell, cause) = match &d.kind {
            DiagnosticKind::RuntimeFailure { cell, cause } => (Some(cell.clone()), Some(cause.clone())),
            _ => (None, None),
        };
        Self {
            kind: d.kind.name().to_string(),
            statement: d.statement,
            span: [d.span.start, d.span.end],
            message: d.message,
            cell,
            cause,
        }
    }
}

impl TryFrom<DiagnosticRepr> for Diagnostic {
    type Error = String;

    fn try_from(r: DiagnosticRepr) -> Result<Self, String> {
        let kind = DiagnosticKind::from_parts(&r.kind, r.cell, r.cause)
            .ok_or_else(|| format!("unknown diagnostic kind '{}'", r.kind))?;
        Ok(Self {
            kind,
            statement: r.statement,
            span: Span::new(r.span[0], r.span[1]),
            message: r.message,
        })
    }
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, statement: usize, span: Span, message: impl Into<String>) -> Self {
        Self {
            kind,
            statement,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} in statement {} at {}..{}: {}",
            self.kind.name(),
            self.statement,
            self.span.start,
            self.span.end,
            self.message
        )
    }
}

/// Parses and type-checks; returns every diagnostic found.
pub fn validate_program(text: &str) -> Result<VisualProgram, Vec<Diagnostic>> {
    let prog = parse_program(text)?;
    let diags = typecheck_program(&prog);
    if diags.is_empty() {
        Ok(prog)
    } else {
        Err(diags)
    }
}
