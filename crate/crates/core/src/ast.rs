//! Surface syntax tree produced by the parser.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::statics::StaticTerm;

/// Source position. Positions never take part in AST equality, so trees
/// parsed from differently formatted text compare equal.
#[derive(Clone, Debug, Eq)]
pub struct Loc {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Loc {
    pub fn new(file: &Arc<str>, line: u32, col: u32) -> Self {
        Loc { file: file.clone(), line, col }
    }

    pub fn internal() -> Self {
        Loc { file: Arc::from("<internal>"), line: 0, col: 0 }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortExpr {
    /// `int`, `bool`, `ilist`, ... and the `nat` sugar.
    Named(String),
    Arrow(Box<SortExpr>, Box<SortExpr>),
}

/// One `{a, b: srt | guard}` or `[a: srt | guard]` group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantGroup {
    pub vars: Vec<(String, SortExpr)>,
    pub guard: Option<StaticTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    /// `int`, `int(I)`, `glist(a, xs)`, `FIB(n, r)`, `lte(a)`, `a`, ...
    /// Arguments are parsed as static terms; type-sorted positions are
    /// reinterpreted during elaboration.
    Named { name: String, args: Vec<StaticTerm>, loc: Loc },
    /// `(T1, T2)` when `proofs` is `None`, `(P1, P2 | T1, T2)` otherwise.
    Tuple { proofs: Option<Vec<TypeExpr>>, values: Vec<TypeExpr> },
    Fun { proofs: Vec<TypeExpr>, args: Vec<TypeExpr>, bar: bool, ret: Box<TypeExpr> },
    Forall(QuantGroup, Box<TypeExpr>),
    Exists(QuantGroup, Box<TypeExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt | BinOp::Eq | BinOp::Ne)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
}

/// A parameter list `(p1: P1 | x: T, y: U)`. Without a bar every parameter
/// lands in `values`, except for proof functions where they are proofs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Params {
    pub proofs: Vec<Param>,
    pub values: Vec<Param>,
    pub bar: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(String, Loc),
    Int(BigInt, Loc),
    Bool(bool, Loc),
    /// `head {s1, s2} (pf1, pf2 | a1, a2)`. Without a bar the arguments are
    /// stored in `args`; the checker reassigns them for proof-level heads.
    App {
        head: String,
        statics: Vec<StaticTerm>,
        proofs: Vec<Expr>,
        args: Vec<Expr>,
        bar: bool,
        loc: Loc,
    },
    Tuple { proofs: Option<Vec<Expr>>, values: Vec<Expr>, loc: Loc },
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, loc: Loc },
    UnOp { op: UnOp, arg: Box<Expr>, loc: Loc },
    If { cond: Box<Expr>, then_branch: Box<Expr>, else_branch: Box<Expr>, loc: Loc },
    Case { scrutinee: Box<Expr>, arms: Vec<Arm>, loc: Loc },
    Let { decls: Vec<LocalDecl>, body: Box<Expr>, loc: Loc },
    Lam { params: Params, ret: Option<TypeExpr>, body: Box<Expr>, loc: Loc },
}

impl Expr {
    pub fn loc(&self) -> &Loc {
        match self {
            Expr::Var(_, loc) | Expr::Int(_, loc) | Expr::Bool(_, loc) => loc,
            Expr::App { loc, .. }
            | Expr::Tuple { loc, .. }
            | Expr::BinOp { loc, .. }
            | Expr::UnOp { loc, .. }
            | Expr::If { loc, .. }
            | Expr::Case { loc, .. }
            | Expr::Let { loc, .. }
            | Expr::Lam { loc, .. } => loc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// `Con (p1 | x, y)`; `_` names are wildcards.
    Con { name: String, proofs: Vec<String>, args: Vec<String>, bar: bool, loc: Loc },
    Wild(Loc),
}

impl Pattern {
    pub fn loc(&self) -> &Loc {
        match self {
            Pattern::Con { loc, .. } | Pattern::Wild(loc) => loc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    pub pat: Pattern,
    pub body: Expr,
}

/// Left-hand side of `val`: `x`, `(x, y)` or `(pf1, pf2 | x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValPat {
    pub proofs: Option<Vec<String>>,
    pub values: Vec<String>,
}

impl ValPat {
    pub fn single(name: impl Into<String>) -> Self {
        ValPat { proofs: None, values: vec![name.into()] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalDecl {
    /// `val p1 = e1 and p2 = e2`
    Val { binds: Vec<(ValPat, Expr)>, loc: Loc },
    /// `prval pf = e` or `prval (pf1, pf2) = e`
    Prval { names: Vec<String>, expr: Expr, loc: Loc },
    Funs(FunGroup),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunKind {
    Fun,
    Prfun,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub quants: Vec<QuantGroup>,
    pub params: Params,
    pub ret: TypeExpr,
    pub body: Expr,
    pub loc: Loc,
}

/// `fun{a:type} f ... and g ...`; the template parameters are shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunGroup {
    pub kind: FunKind,
    pub tparams: Vec<String>,
    pub defs: Vec<FunDef>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortParam {
    pub name: Option<String>,
    pub sort: SortExpr,
}

/// Field list of a constructor: `of (P | T1, T2)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Fields {
    pub proofs: Vec<TypeExpr>,
    pub values: Vec<TypeExpr>,
    pub bar: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConDecl {
    pub quants: Vec<QuantGroup>,
    pub name: String,
    /// Result arguments, including type-parameter positions for datatypes.
    pub indices: Vec<StaticTerm>,
    pub fields: Option<Fields>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub name: String,
    pub params: Vec<SortParam>,
    pub ctors: Vec<ConDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Datasort { name: String, ctors: Vec<(String, Vec<SortExpr>)> },
    Datatype(DataDecl),
    Dataprop(DataDecl),
    Absprop { name: String, params: Vec<SortParam> },
    Abstype { name: String, params: Vec<SortParam> },
    Typedef { name: String, params: Vec<SortParam>, body: TypeExpr },
    Alias { name: String, target: String },
    /// An external lemma, trusted by the checker.
    Praxi { name: String, quants: Vec<QuantGroup>, premises: Vec<TypeExpr>, conclusion: TypeExpr },
    Funs(FunGroup),
    Val { binds: Vec<(ValPat, Expr)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub loc: Loc,
}

impl Declaration {
    pub fn name(&self) -> Option<&str> {
        match &self.kind {
            DeclKind::Datasort { name, .. }
            | DeclKind::Absprop { name, .. }
            | DeclKind::Abstype { name, .. }
            | DeclKind::Typedef { name, .. }
            | DeclKind::Alias { name, .. }
            | DeclKind::Praxi { name, .. } => Some(name),
            DeclKind::Datatype(d) | DeclKind::Dataprop(d) => Some(&d.name),
            DeclKind::Funs(group) => group.defs.first().map(|d| d.name.as_str()),
            DeclKind::Val { .. } => None,
        }
    }
}
