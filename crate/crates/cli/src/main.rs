//! `miniats`: check, run, erase and audit source files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use miniats_core::audit::{audit_all, builtin_models, load_lemmas, AuditBounds};
use miniats_core::corpus::{check_source, default_prelude, Checked};
use miniats_core::diag::{DiagKind, DiagRecord, Diagnostic};
use miniats_core::erase::erase;
use miniats_core::eval::{EvalError, Interpreter, Value};
use miniats_core::printer::print_program;

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const FUEL: u8 = 3;

/// Stack for the interpreter thread; deep recursion on long lists.
const EVAL_STACK: usize = 512 << 20;

#[derive(Parser)]
#[command(name = "miniats", version, about = "Checker, eraser, interpreter and lemma auditor")]
struct Cli {
    /// Do not load the prelude.
    #[arg(long, global = true)]
    no_prelude: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Typecheck files against the prelude.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print diagnostics as a JSON array instead of text.
        #[arg(long)]
        json_report: bool,
        /// Write every emitted constraint to this file (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        dump_constraints: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check, erase and evaluate an entry function.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "main")]
        entry: String,
        /// Maximum number of function applications.
        #[arg(long)]
        fuel: Option<u64>,
        /// Integers, booleans or bracketed integer lists such as `[3,1,2]`.
        #[arg(allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Write the proof-free program.
    Erase {
        file: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check each lemma of a file against the prop models.
    Audit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = AuditBounds::default().max_len)]
        max_len: usize,
        #[arg(long, default_value_t = AuditBounds::default().min_val, allow_negative_numbers = true)]
        min_val: i64,
        #[arg(long, default_value_t = AuditBounds::default().max_val, allow_negative_numbers = true)]
        max_val: i64,
        /// Search nodes allowed per lemma.
        #[arg(long, default_value_t = AuditBounds::default().cap)]
        cap: u64,
        /// Audit only this lemma.
        #[arg(long)]
        lemma: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prelude = match load_prelude(cli.no_prelude) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("miniats: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let code = match cli.cmd {
        Cmd::Check { files, json_report, dump_constraints, jobs } => {
            check(&files, prelude.as_deref(), json_report, dump_constraints.as_deref(), jobs)
        }
        Cmd::Run { file, entry, fuel, args } => run(&file, prelude.as_deref(), &entry, fuel, args),
        Cmd::Erase { file, out } => erase_cmd(&file, prelude.as_deref(), out.as_deref()),
        Cmd::Audit { files, max_len, min_val, max_val, cap, lemma } => {
            let bounds = AuditBounds { max_len, min_val, max_val, cap };
            audit(&files, prelude.as_deref(), &bounds, lemma.as_deref())
        }
    };
    ExitCode::from(code)
}

fn load_prelude(disabled: bool) -> Result<Option<String>, String> {
    if disabled {
        return Ok(None);
    }
    match std::env::var_os("MINIATS_PRELUDE") {
        Some(path) => fs::read_to_string(&path)
            .map(Some)
            .map_err(|e| format!("cannot read prelude {}: {e}", Path::new(&path).display())),
        None => Ok(Some(default_prelude())),
    }
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("miniats: cannot read {}: {e}", path.display());
        USAGE
    })
}

fn is_syntax(d: &Diagnostic) -> bool {
    matches!(d.kind, DiagKind::LexError | DiagKind::ParseError)
}

/// Exit code of a checked file.
fn verdict(checked: &Checked) -> u8 {
    if checked.report.errors().any(is_syntax) {
        USAGE
    } else if checked.accepted() {
        OK
    } else {
        FAILED
    }
}

struct FileResult {
    code: u8,
    text: Vec<String>,
    records: Vec<DiagRecord>,
    constraints: Vec<String>,
}

fn check_one(path: &Path, prelude: Option<&str>) -> FileResult {
    let src = match read(path) {
        Ok(s) => s,
        Err(code) => return FileResult { code, text: vec![], records: vec![], constraints: vec![] },
    };
    let name = path.display().to_string();
    let checked = check_source(prelude, &src, &name);
    let code = verdict(&checked);
    let mut text: Vec<String> = checked.report.diagnostics.iter().map(ToString::to_string).collect();
    let errors = checked.report.errors().count();
    text.push(if errors == 0 { format!("{name}: accepted") } else { format!("{name}: rejected ({errors} errors)") });
    FileResult {
        code,
        text,
        records: checked.report.diagnostics.iter().map(Diagnostic::record).collect(),
        constraints: checked.report.constraints.clone(),
    }
}

fn check(files: &[PathBuf], prelude: Option<&str>, json: bool, dump: Option<&Path>, jobs: usize) -> u8 {
    let jobs = jobs.clamp(1, files.len().max(1));
    let mut results: Vec<Option<FileResult>> = (0..files.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let chunk = files.len().div_ceil(jobs);
        let handles: Vec<_> = files
            .chunks(chunk.max(1))
            .map(|part| s.spawn(move || part.iter().map(|f| check_one(f, prelude)).collect::<Vec<_>>()))
            .collect();
        let mut i = 0;
        for h in handles {
            for r in h.join().expect("checker thread panicked") {
                results[i] = Some(r);
                i += 1;
            }
        }
    });
    let results: Vec<FileResult> = results.into_iter().flatten().collect();
    if json {
        let records: Vec<&DiagRecord> = results.iter().flat_map(|r| &r.records).collect();
        println!("{}", serde_json::to_string_pretty(&records).expect("records serialize"));
    } else {
        for line in results.iter().flat_map(|r| &r.text) {
            println!("{line}");
        }
    }
    let mut code = results.iter().map(|r| r.code).max().unwrap_or(OK);
    if let Some(path) = dump {
        let mut log = String::new();
        for (f, r) in files.iter().zip(&results) {
            log.push_str(&format!("# {}\n", f.display()));
            for c in &r.constraints {
                log.push_str(c);
                log.push('\n');
            }
        }
        if path == Path::new("-") {
            print!("{log}");
        } else if let Err(e) = fs::write(path, log) {
            eprintln!("miniats: cannot write {}: {e}", path.display());
            code = code.max(USAGE);
        }
    }
    code
}

/// Checks `path` and erases it, printing diagnostics on failure.
fn checked_and_erased(path: &Path, prelude: Option<&str>) -> Result<miniats_core::erase::Erased, u8> {
    let src = read(path)?;
    let checked = check_source(prelude, &src, &path.display().to_string());
    let code = verdict(&checked);
    if code != OK {
        for d in checked.report.errors() {
            eprintln!("{d}");
        }
        return Err(code);
    }
    erase(&checked).map_err(|e| {
        eprintln!("miniats: {e}");
        FAILED
    })
}

fn run(path: &Path, prelude: Option<&str>, entry: &str, fuel: Option<u64>, args: Vec<String>) -> u8 {
    let erased = match checked_and_erased(path, prelude) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let entry = entry.to_string();
    let outcome = std::thread::Builder::new()
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
        .expect("interpreter thread panicked");
    match outcome {
        Ok(v) => {
            println!("{v}");
            OK
        }
        Err(e @ EvalError::FuelExhausted) => {
            eprintln!("miniats: {e}");
            FUEL
        }
        Err(e) => {
            eprintln!("miniats: {e}");
            USAGE
        }
    }
}

fn erase_cmd(path: &Path, prelude: Option<&str>, out: Option<&Path>) -> u8 {
    let erased = match checked_and_erased(path, prelude) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let text = print_program(&erased.decls);
    match out {
        None => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            OK
        }
        Some(p) => match fs::write(p, text) {
            Ok(()) => OK,
            Err(e) => {
                eprintln!("miniats: cannot write {}: {e}", p.display());
                USAGE
            }
        },
    }
}

fn audit(files: &[PathBuf], prelude: Option<&str>, bounds: &AuditBounds, lemma: Option<&str>) -> u8 {
    let models = builtin_models();
    let mut code = OK;
    for path in files {
        if files.len() > 1 {
            println!("== {}", path.display());
        }
        let src = match read(path) {
            Ok(s) => s,
            Err(c) => {
                code = code.max(c);
                continue;
            }
        };
        let result = load_lemmas(prelude, &src, &path.display().to_string())
            .and_then(|set| audit_all(&set, &models, bounds, lemma));
        match result {
            Ok(rows) => {
                for r in &rows {
                    println!("{r}");
                    if !r.passed() {
                        code = code.max(FAILED);
                    }
                }
            }
            Err(e) => {
                eprintln!("miniats: {}: {e}", path.display());
                code = code.max(USAGE);
            }
        }
    }
    code
}
