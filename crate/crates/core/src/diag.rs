//! Diagnostics and per-file reports.

use std::fmt;

use serde::Serialize;

use crate::ast::Loc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    #[serde(rename = "error")]
    Error,
    #[serde(rename = "warning")]
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagKind {
    LexError,
    ParseError,
    SortError,
    UnboundStaticVar,
    UnboundVar,
    TypeError,
    UnsolvedConstraint,
    NonExhaustiveMatch,
    RedundantArm,
    ProofInProgramPosition,
    ProgramInProofPosition,
    DuplicateConstructor,
    DuplicateLemma,
    DuplicateDeclaration,
}

impl DiagKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagKind::LexError => "LexError",
            DiagKind::ParseError => "ParseError",
            DiagKind::SortError => "SortError",
            DiagKind::UnboundStaticVar => "UnboundStaticVar",
            DiagKind::UnboundVar => "UnboundVar",
            DiagKind::TypeError => "TypeError",
            DiagKind::UnsolvedConstraint => "UnsolvedConstraint",
            DiagKind::NonExhaustiveMatch => "NonExhaustiveMatch",
            DiagKind::RedundantArm => "RedundantArm",
            DiagKind::ProofInProgramPosition => "ProofInProgramPosition",
            DiagKind::ProgramInProofPosition => "ProgramInProofPosition",
            DiagKind::DuplicateConstructor => "DuplicateConstructor",
            DiagKind::DuplicateLemma => "DuplicateLemma",
            DiagKind::DuplicateDeclaration => "DuplicateDeclaration",
        }
    }

    pub fn from_name(name: &str) -> Option<DiagKind> {
        ALL_KINDS.iter().copied().find(|k| k.name() == name)
    }
}

const ALL_KINDS: &[DiagKind] = &[
    DiagKind::LexError,
    DiagKind::ParseError,
    DiagKind::SortError,
    DiagKind::UnboundStaticVar,
    DiagKind::UnboundVar,
    DiagKind::TypeError,
    DiagKind::UnsolvedConstraint,
    DiagKind::NonExhaustiveMatch,
    DiagKind::RedundantArm,
    DiagKind::ProofInProgramPosition,
    DiagKind::ProgramInProofPosition,
    DiagKind::DuplicateConstructor,
    DiagKind::DuplicateLemma,
    DiagKind::DuplicateDeclaration,
];

impl fmt::Display for DiagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub loc: Loc,
    pub severity: Severity,
    pub kind: DiagKind,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagKind, loc: &Loc, message: impl Into<String>) -> Self {
        Diagnostic { loc: loc.clone(), severity: Severity::Error, kind, message: message.into() }
    }

    pub fn warning(kind: DiagKind, loc: &Loc, message: impl Into<String>) -> Self {
        Diagnostic { loc: loc.clone(), severity: Severity::Warning, kind, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn record(&self) -> DiagRecord {
        DiagRecord {
            file: self.loc.file.to_string(),
            line: self.loc.line,
            col: self.loc.col,
            kind: self.kind.name().to_string(),
            message: self.message.clone(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}: {}", self.loc, self.severity, self.kind, self.message)
    }
}

/// Machine-readable form used by `--json-report`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagRecord {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub kind: String,
    pub message: String,
}

/// Outcome of checking one file.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub diagnostics: Vec<Diagnostic>,
    /// Every emitted constraint in the dump format, in emission order.
    pub constraints: Vec<String>,
    /// Constraints the solver could not decide.
    pub undecided: usize,
}

impl Report {
    pub fn accepted(&self) -> bool {
        !self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn has_kind(&self, kind: DiagKind) -> bool {
        self.errors().any(|d| d.kind == kind)
    }
}
