//! Tokenizer for `.mats` sources.

use std::ops::Range;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::Loc;

pub const KEYWORDS: &[&str] = &[
    "datasort", "datatype", "dataprop", "absprop", "abstype", "praxi", "fun", "prfun", "prval",
    "val", "let", "in", "end", "case", "of", "if", "then", "else", "and", "typedef", "alias",
    "lam", "true", "false",
];

// Longest symbols first so that `<=` wins over `<`.
const SYMBOLS: &[&str] = &[
    "=>", "->", "<=", ">=", "<>", "&&", "||", "(", ")", ",", ":", "|", "=", "<", ">", "+", "-",
    "*", "~", "_", ";",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(&'static str),
    Ident(String),
    Int(BigInt),
    Symbol(&'static str),
    /// One of `{ } [ ]`.
    Brace(char),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub loc: Loc,
    /// Byte range in the source.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: {message}")]
pub struct LexError {
    pub loc: Loc,
    pub message: String,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    tokenize_file(source, "<input>")
}

pub fn tokenize_file(source: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let file: Arc<str> = Arc::from(file);
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = source.char_indices().peekable();

    while let Some(&(start, c)) = chars.peek() {
        let loc = Loc::new(&file, line, col);
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if source[start..].starts_with("//") {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        let rest = &source[start..];
        let (kind, len) = if is_ident_start(c) && !(c == '_' && !rest[1..].starts_with(is_ident_continue)) {
            let len = rest
                .char_indices()
                .find(|&(_, ch)| !is_ident_continue(ch))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let kind = match KEYWORDS.iter().find(|k| **k == word) {
                Some(kw) => TokenKind::Keyword(kw),
                None => TokenKind::Ident(word.to_string()),
            };
            (kind, len)
        } else if c.is_ascii_digit() {
            let len = rest
                .char_indices()
                .find(|&(_, ch)| !ch.is_ascii_digit())
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let value: BigInt = rest[..len].parse().expect("digits parse as an integer");
            (TokenKind::Int(value), len)
        } else if matches!(c, '{' | '}' | '[' | ']') {
            (TokenKind::Brace(c), 1)
        } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            (TokenKind::Symbol(sym), sym.len())
        } else {
            return Err(LexError { loc, message: format!("unrecognized character `{c}`") });
        };
        let lexeme = rest[..len].to_string();
        for _ in 0..lexeme.chars().count() {
            chars.next();
        }
        col += lexeme.chars().count() as u32;
        tokens.push(Token { kind, lexeme, loc, span: start..start + len });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<String> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| match t.kind {
                TokenKind::Keyword(k) => format!("kw {k}"),
                TokenKind::Ident(i) => format!("id {i}"),
                TokenKind::Int(n) => format!("int {n}"),
                TokenKind::Symbol(s) => format!("sym {s}"),
                TokenKind::Brace(b) => format!("sym {b}"),
            })
            .collect()
    }

    #[test]
    fn plain_fib_header() {
        assert_eq!(
            kinds("fun fib (n:int): int"),
            vec![
                "kw fun", "id fib", "sym (", "id n", "sym :", "id int", "sym )", "sym :", "id int"
            ]
        );
    }

    #[test]
    fn empty_and_braces() {
        assert!(tokenize("").unwrap().is_empty());
        assert_eq!(kinds("{n:nat}"), vec!["sym {", "id n", "sym :", "id nat", "sym }"]);
    }

    #[test]
    fn comments_are_dropped() {
        assert_eq!(kinds("val x = 1 // end of [x]\n"), vec!["kw val", "id x", "sym =", "int 1"]);
    }

    #[test]
    fn unrecognized_character() {
        let err = tokenize("fun f @").unwrap_err();
        assert_eq!((err.loc.line, err.loc.col), (1, 7));
    }

    #[test]
    fn big_integer_literals() {
        let toks = tokenize("123456789012345678901234567890").unwrap();
        assert_eq!(
            toks[0].kind,
            TokenKind::Int("123456789012345678901234567890".parse().unwrap())
        );
    }

    #[test]
    fn locations_track_lines() {
        let toks = tokenize("fun\n  loop").unwrap();
        assert_eq!((toks[1].loc.line, toks[1].loc.col), (2, 3));
    }

    #[test]
    fn wildcard_and_primes() {
        assert_eq!(kinds("_ x' _y"), vec!["sym _", "id x'", "id _y"]);
    }
}
