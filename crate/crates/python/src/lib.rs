//! Python bindings: tokenize, check, erase, run and audit.

use miniats_core::audit::{audit_all, builtin_models, load_lemmas, AuditBounds, Verdict};
use miniats_core::corpus::{check_source, default_prelude, Checked};
use miniats_core::erase::{erase as erase_checked, Erased};
use miniats_core::eval::{EvalError, Interpreter, Value};
use miniats_core::lexer::{self, TokenKind};
use miniats_core::printer::print_program;
use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(miniats, MiniatsError, PyException, "A rejected program or a failed operation.");
create_exception!(miniats, FuelExhausted, MiniatsError, "Evaluation ran out of fuel.");

const EVAL_STACK: usize = 512 << 20;

fn prelude_text(prelude: bool) -> Option<String> {
    prelude.then(default_prelude)
}

fn err(e: impl ToString) -> PyErr {
    MiniatsError::new_err(e.to_string())
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "miniats")]
#[derive(Clone)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub kind: String,
    pub message: String,
}

#[pymethods]
impl Diagnostic {
    fn __repr__(&self) -> String {
        format!("{}:{}:{}: {}: {}", self.file, self.line, self.col, self.kind, self.message)
    }
}

/// Result of `check`.
#[pyclass(frozen, get_all, module = "miniats")]
pub struct Report {
    pub accepted: bool,
    pub diagnostics: Vec<Diagnostic>,
    /// Every emitted constraint, one line each.
    pub constraints: Vec<String>,
}

#[pymethods]
impl Report {
    fn __bool__(&self) -> bool {
        self.accepted
    }

    fn __repr__(&self) -> String {
        format!("Report(accepted={}, diagnostics={})", self.accepted, self.diagnostics.len())
    }
}

/// One audited lemma. `cases` is set on a pass, `counterexample` on a failure.
#[pyclass(frozen, get_all, module = "miniats")]
pub struct LemmaResult {
    pub name: String,
    pub passed: bool,
    pub cases: Option<BigUint>,
    pub counterexample: Vec<(String, String)>,
}

#[pymethods]
impl LemmaResult {
    fn __repr__(&self) -> String {
        match &self.cases {
            Some(n) => format!("{} PASS n={n}", self.name),
            None => {
                let cex: Vec<String> = self.counterexample.iter().map(|(v, x)| format!("{v}={x}")).collect();
                format!("{} FAIL {}", self.name, cex.join(", "))
            }
        }
    }
}

/// `(kind, lexeme, line, col)` for each token.
#[pyfunction]
fn tokenize(src: &str) -> PyResult<Vec<(&'static str, String, u32, u32)>> {
    let tokens = lexer::tokenize(src).map_err(err)?;
    Ok(tokens
        .into_iter()
        .map(|t| {
            let kind = match t.kind {
                TokenKind::Keyword(_) => "keyword",
                TokenKind::Ident(_) => "ident",
                TokenKind::Int(_) => "int",
                TokenKind::Symbol(_) => "symbol",
                TokenKind::Brace(_) => "brace",
            };
            (kind, t.lexeme, t.loc.line, t.loc.col)
        })
        .collect())
}

fn checked(src: &str, file: &str, prelude: bool) -> Checked {
    check_source(prelude_text(prelude).as_deref(), src, file)
}

#[pyfunction]
#[pyo3(signature = (src, file = "<input>", prelude = true))]
fn check(py: Python<'_>, src: &str, file: &str, prelude: bool) -> Report {
    let c = py.detach(|| checked(src, file, prelude));
    Report {
        accepted: c.accepted(),
        diagnostics: c
            .report
            .diagnostics
            .iter()
            .map(|d| {
                let r = d.record();
                Diagnostic { file: r.file, line: r.line, col: r.col, kind: r.kind, message: r.message }
            })
            .collect(),
        constraints: c.report.constraints.clone(),
    }
}

fn accepted_and_erased(src: &str, prelude: bool) -> PyResult<Erased> {
    let c = checked(src, "<input>", prelude);
    if !c.accepted() {
        let first = c.report.errors().next().map(ToString::to_string).unwrap_or_default();
        return Err(MiniatsError::new_err(format!("program rejected: {first}")));
    }
    erase_checked(&c).map_err(err)
}

/// The proof-free program text.
#[pyfunction]
#[pyo3(signature = (src, prelude = true))]
fn erase(src: &str, prelude: bool) -> PyResult<String> {
    Ok(print_program(&accepted_and_erased(src, prelude)?.decls))
}

/// Checks, erases and evaluates `entry`; arguments and result use literal
/// syntax (`7`, `true`, `[3,1,2]`).
#[pyfunction]
#[pyo3(signature = (src, args, entry = "main", fuel = None, prelude = true))]
fn run(py: Python<'_>, src: &str, args: Vec<String>, entry: &str, fuel: Option<u64>, prelude: bool) -> PyResult<String> {
    let erased = accepted_and_erased(src, prelude)?;
    let entry = entry.to_string();
    let outcome = py.detach(move || {
        std::thread::Builder::new()
            .stack_size(EVAL_STACK)
            .spawn(move || -> Result<String, EvalError> {
                let program = &erased.program;
                let fun = program.funs.get(&entry).ok_or_else(|| EvalError::UnknownEntry(entry.clone()))?;
                let values = args
                    .iter()
                    .zip(&fun.param_types)
                    .map(|(a, t)| Value::parse_arg(a, t, program))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut it = Interpreter::new(program)?.with_fuel(fuel);
                Ok(it.call(&entry, values)?.render(program))
            })
            .expect("spawn interpreter thread")
            .join()
    });
    match outcome {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e @ EvalError::FuelExhausted)) => Err(FuelExhausted::new_err(e.to_string())),
        Ok(Err(e)) => Err(err(e)),
        Err(_) => Err(MiniatsError::new_err("interpreter thread panicked")),
    }
}

#[pyfunction]
#[pyo3(signature = (src, max_len = 4, min_val = 0, max_val = 3, cap = 10_000_000, lemma = None, prelude = true))]
#[allow(clippy::too_many_arguments)]
fn audit(
    py: Python<'_>,
    src: &str,
    max_len: usize,
    min_val: i64,
    max_val: i64,
    cap: u64,
    lemma: Option<&str>,
    prelude: bool,
) -> PyResult<Vec<LemmaResult>> {
    let bounds = AuditBounds { max_len, min_val, max_val, cap };
    let rows = py
        .detach(|| {
            let set = load_lemmas(prelude_text(prelude).as_deref(), src, "<input>")?;
            audit_all(&set, &builtin_models(), &bounds, lemma)
        })
        .map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| match r.verdict {
            Verdict::Pass { cases } => LemmaResult { name: r.name, passed: true, cases: Some(cases), counterexample: vec![] },
            Verdict::Fail { counterexample } => LemmaResult {
                name: r.name,
                passed: false,
                cases: None,
                counterexample: counterexample.into_iter().map(|(v, x)| (v, x.to_string())).collect(),
            },
        })
        .collect())
}

#[pymodule]
fn miniats(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MiniatsError", m.py().get_type::<MiniatsError>())?;
    m.add("FuelExhausted", m.py().get_type::<FuelExhausted>())?;
    m.add_class::<Diagnostic>()?;
    m.add_class::<Report>()?;
    m.add_class::<LemmaResult>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(erase, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    Ok(())
}
