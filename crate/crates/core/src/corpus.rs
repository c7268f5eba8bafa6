//! The bundled prelude and corpus, plus file-level checking.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::ast::{Declaration, Loc};
use crate::checker::{Checker, Env, SiteKey};
use crate::diag::{DiagKind, Diagnostic, Report};
use crate::parser::{parse_source, SyntaxError};
use crate::statics::StaticTerm;

pub const PRELUDE_FILE: &str = "prelude.mats";

const PRELUDE_BASE: &str = include_str!("../corpus/prelude.mats");
const INSORT_LEMMAS: &str = include_str!("../corpus/prelude_insort_lemmas.mats");
const QSORT_LEMMAS: &str = include_str!("../corpus/prelude_qsort_lemmas.mats");

/// The default prelude: ambient declarations and both lemma sets.
pub fn default_prelude() -> String {
    format!("{PRELUDE_BASE}\n{INSORT_LEMMAS}\n{QSORT_LEMMAS}")
}

/// Ambient declarations without either lemma set.
pub fn base_prelude() -> &'static str {
    PRELUDE_BASE
}

/// Directory holding the corpus sources of this crate.
pub fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Accept,
    Reject,
}

/// Which prelude a manifest entry is checked against.
#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PreludeMode {
    None,
    Base,
    #[default]
    Full,
}

impl PreludeMode {
    pub fn source(self) -> Option<String> {
        match self {
            PreludeMode::None => None,
            PreludeMode::Base => Some(PRELUDE_BASE.to_string()),
            PreludeMode::Full => Some(default_prelude()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub expected: Expected,
    /// Diagnostic kind a rejected file must report.
    pub kind: Option<String>,
    pub provenance: String,
    /// The verified or plain counterpart of this program.
    pub pair: Option<String>,
    pub note: Option<String>,
    #[serde(default)]
    pub prelude: PreludeMode,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Manifest {
    #[serde(rename = "entry")]
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load() -> Result<Manifest, String> {
        let path = corpus_dir().join("manifest.toml");
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        Manifest::parse(&text)
    }

    pub fn get(&self, file: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.file == file)
    }

    pub fn parse(text: &str) -> Result<Manifest, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// A file checked together with its prelude.
#[derive(Debug)]
pub struct Checked {
    pub prelude: Vec<Declaration>,
    pub decls: Vec<Declaration>,
    pub report: Report,
    pub env: Env,
    pub sites: BTreeMap<SiteKey, Vec<StaticTerm>>,
}

impl Checked {
    pub fn accepted(&self) -> bool {
        self.report.accepted()
    }
}

pub(crate) fn syntax_diagnostic(e: &SyntaxError) -> Diagnostic {
    match e {
        SyntaxError::Lex(l) => Diagnostic::error(DiagKind::LexError, &l.loc, l.message.clone()),
        SyntaxError::Parse(p) => Diagnostic::error(
            DiagKind::ParseError,
            &p.loc,
            format!("expected {}, found {}", p.expected.join(" or "), p.found),
        ),
    }
}

/// Parses `src`, reporting a syntax error as a diagnostic.
pub fn parse_or_report(src: &str, file: &str) -> Result<Vec<Declaration>, Diagnostic> {
    parse_source(src, file).map_err(|e| syntax_diagnostic(&e))
}

/// Cuts the prelude at the first declaration whose name `file` declares
/// again, so a file may restate a tail of the prelude (the lemma files and
/// the prelude itself do).
pub fn without_redeclared(mut prelude: Vec<Declaration>, file: &[Declaration]) -> Vec<Declaration> {
    let declared: HashSet<&str> = file.iter().filter_map(Declaration::name).collect();
    if let Some(cut) = prelude.iter().position(|d| d.name().is_some_and(|n| declared.contains(n))) {
        prelude.truncate(cut);
    }
    prelude
}

/// Parses and checks `src` after `prelude`. Prelude diagnostics are
/// reported like any other.
pub fn check_source(prelude: Option<&str>, src: &str, file: &str) -> Checked {
    let mut checker = Checker::new();
    let mut report = Report::default();
    let parsed = parse_or_report(src, file);
    let mut prelude_decls = Vec::new();
    if let Some(p) = prelude {
        match parse_or_report(p, PRELUDE_FILE) {
            Ok(ds) => {
                let ds = without_redeclared(ds, parsed.as_deref().unwrap_or(&[]));
                checker.check_decls(&ds, &mut report);
                prelude_decls = ds;
            }
            Err(d) => report.diagnostics.push(d),
        }
    }
    let decls = match parsed {
        Ok(ds) => {
            checker.check_decls(&ds, &mut report);
            ds
        }
        Err(d) => {
            report.diagnostics.push(d);
            Vec::new()
        }
    };
    Checked { prelude: prelude_decls, decls, report, env: checker.env, sites: checker.sites }
}

/// Location used for whole-file diagnostics.
pub fn file_loc(file: &str) -> Loc {
    Loc::new(&std::sync::Arc::from(file), 1, 1)
}
