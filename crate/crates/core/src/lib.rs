//! A small dependently typed language in the style of ATS: a checker with
//! linear-arithmetic constraint solving, proof erasure, an interpreter for
//! the erased programs and a bounded auditor for trusted lemmas.

pub mod ast;
pub mod audit;
pub mod checker;
pub mod corpus;
pub mod diag;
pub mod erase;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod solver;
pub mod statics;
pub mod types;
