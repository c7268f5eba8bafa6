use miniats_core::corpus::{check_source, corpus_dir, default_prelude};
use miniats_core::erase::erase;
use miniats_core::lexer::{tokenize, TokenKind};
use miniats_core::printer::print_program;

const PROGRAMS: &[&str] =
    &["fib_plain.mats", "fibats.mats", "insort_plain.mats", "insort_verified.mats", "qsrt_plain.mats", "qsrt_verified.mats"];

fn erased_source(file: &str) -> String {
    let src = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
    let checked = check_source(Some(&default_prelude()), &src, file);
    print_program(&erase(&checked).unwrap().decls)
}

#[test]
fn erased_corpus_rechecks_as_plain_programs() {
    for file in PROGRAMS {
        let out = erased_source(file);
        let again = check_source(Some(&default_prelude()), &out, "erased.mats");
        assert!(again.accepted(), "{file}:\n{out}\n{:?}", again.report.diagnostics);
    }
}

#[test]
fn erased_corpus_has_no_proof_tokens() {
    for file in PROGRAMS {
        let out = erased_source(file);
        for tok in tokenize(&out).unwrap() {
            if let TokenKind::Keyword(kw) = tok.kind {
                assert!(!["prval", "praxi", "absprop", "dataprop", "prfun"].contains(&kw), "{file}: {kw} survives");
            }
        }
    }
}

#[test]
fn erased_fibats_prints() {
    println!("{}", erased_source("fibats.mats"));
    println!("{}", erased_source("qsrt_verified.mats"));
}
