//! The index language: sorts, static terms, sort checking and normalization.
//!
//! Static terms are simply typed. Arithmetic and comparison operators are
//! ordinary constructor nodes (`Con("+", ..)`), so the same tree shape is
//! shared by user-declared datasort constructors and the builtins.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Addr,
    Bool,
    Int,
    Prop,
    Type,
    /// A user-declared datasort such as `ilist`.
    Data(String),
    Arrow(Box<Sort>, Box<Sort>),
}

impl Sort {
    pub fn is_data(&self) -> bool {
        matches!(self, Sort::Data(_))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Addr => write!(f, "addr"),
            Sort::Bool => write!(f, "bool"),
            Sort::Int => write!(f, "int"),
            Sort::Prop => write!(f, "prop"),
            Sort::Type => write!(f, "type"),
            Sort::Data(name) => write!(f, "{name}"),
            Sort::Arrow(dom, cod) => match **dom {
                Sort::Arrow(..) => write!(f, "({dom}) -> {cod}"),
                _ => write!(f, "{dom} -> {cod}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StaticTerm {
    Var(String),
    Con(String, Vec<StaticTerm>),
    Lam(String, Sort, Box<StaticTerm>),
    App(Box<StaticTerm>, Box<StaticTerm>),
    Int(BigInt),
    Bool(bool),
}

pub const ARITH_OPS: &[&str] = &["+", "-", "*", "neg"];
pub const CMP_OPS: &[&str] = &["<=", "<", ">=", ">", "=", "<>"];

pub fn is_arith_op(name: &str) -> bool {
    ARITH_OPS.contains(&name)
}

pub fn is_cmp_op(name: &str) -> bool {
    CMP_OPS.contains(&name)
}

pub fn is_bool_op(name: &str) -> bool {
    name == "&&" || name == "~"
}

pub fn is_builtin_op(name: &str) -> bool {
    is_arith_op(name) || is_cmp_op(name) || is_bool_op(name)
}

impl StaticTerm {
    pub fn var(name: impl Into<String>) -> Self {
        StaticTerm::Var(name.into())
    }

    pub fn int(value: i64) -> Self {
        StaticTerm::Int(BigInt::from(value))
    }

    pub fn con(name: impl Into<String>, args: Vec<StaticTerm>) -> Self {
        StaticTerm::Con(name.into(), args)
    }

    pub fn binop(op: &str, lhs: StaticTerm, rhs: StaticTerm) -> Self {
        StaticTerm::Con(op.to_string(), vec![lhs, rhs])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(term: StaticTerm) -> Self {
        StaticTerm::Con("~".into(), vec![term])
    }

    pub fn and(lhs: StaticTerm, rhs: StaticTerm) -> Self {
        match (&lhs, &rhs) {
            (StaticTerm::Bool(true), _) => rhs,
            (_, StaticTerm::Bool(true)) => lhs,
            _ => StaticTerm::binop("&&", lhs, rhs),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            StaticTerm::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            StaticTerm::Con(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            StaticTerm::Lam(v, _, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            StaticTerm::App(fun, arg) => {
                fun.collect_free(bound, out);
                arg.collect_free(bound, out);
            }
            StaticTerm::Int(_) | StaticTerm::Bool(_) => {}
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            StaticTerm::Var(v) => v == name,
            StaticTerm::Con(_, args) => args.iter().any(|a| a.mentions(name)),
            StaticTerm::Lam(v, _, body) => v != name && body.mentions(name),
            StaticTerm::App(f, a) => f.mentions(name) || a.mentions(name),
            StaticTerm::Int(_) | StaticTerm::Bool(_) => false,
        }
    }

    /// Simultaneous substitution. Callers only substitute globally unique
    /// names, so binders never capture.
    pub fn subst(&self, map: &HashMap<String, StaticTerm>) -> StaticTerm {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            StaticTerm::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            StaticTerm::Con(c, args) => {
                StaticTerm::Con(c.clone(), args.iter().map(|a| a.subst(map)).collect())
            }
            StaticTerm::Lam(v, s, body) => {
                if map.contains_key(v) {
                    let mut inner = map.clone();
                    inner.remove(v);
                    StaticTerm::Lam(v.clone(), s.clone(), Box::new(body.subst(&inner)))
                } else {
                    StaticTerm::Lam(v.clone(), s.clone(), Box::new(body.subst(map)))
                }
            }
            StaticTerm::App(f, a) => StaticTerm::App(Box::new(f.subst(map)), Box::new(a.subst(map))),
            StaticTerm::Int(_) | StaticTerm::Bool(_) => self.clone(),
        }
    }

    pub fn subst1(&self, name: &str, value: &StaticTerm) -> StaticTerm {
        let mut map = HashMap::new();
        map.insert(name.to_string(), value.clone());
        self.subst(&map)
    }

    fn precedence(&self) -> u8 {
        match self {
            StaticTerm::Con(op, args) if args.len() == 2 => match op.as_str() {
                "&&" => 1,
                o if is_cmp_op(o) => 2,
                "+" | "-" => 3,
                "*" => 4,
                _ => 9,
            },
            StaticTerm::Con(op, args) if args.len() == 1 && (op == "neg" || op == "~") => 5,
            StaticTerm::Int(n) if n.is_negative() => 5,
            StaticTerm::Lam(..) => 0,
            _ => 9,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, term: &StaticTerm, min: u8) -> fmt::Result {
    if term.precedence() < min {
        write!(f, "({term})")
    } else {
        write!(f, "{term}")
    }
}

impl fmt::Display for StaticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StaticTerm::Var(v) => write!(f, "{v}"),
            StaticTerm::Int(n) => write!(f, "{n}"),
            StaticTerm::Bool(b) => write!(f, "{b}"),
            StaticTerm::Con(op, args) if args.len() == 2 && is_builtin_op(op) => {
                let prec = self.precedence();
                // left-associative: the right operand needs strictly higher precedence
                write_operand(f, &args[0], prec)?;
                write!(f, " {op} ")?;
                write_operand(f, &args[1], prec + 1)
            }
            StaticTerm::Con(op, args) if args.len() == 1 && (op == "neg" || op == "~") => {
                write!(f, "{}", if op == "neg" { "-" } else { "~" })?;
                write_operand(f, &args[0], 6)
            }
            StaticTerm::Con(c, args) => {
                write!(f, "{c}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            StaticTerm::Lam(v, s, body) => write!(f, "lam ({v}: {s}) => {body}"),
            StaticTerm::App(fun, arg) => write!(f, "({fun})({arg})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticsError {
    #[error("sort mismatch in `{term}`: expected {expected}, found {found}")]
    Sort { term: String, expected: Sort, found: Sort },
    #[error("unbound static variable `{0}`")]
    UnboundStaticVar(String),
    #[error("unknown static constructor `{0}`")]
    UnknownConstructor(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("`{0}` is not a static function")]
    NotAFunction(String),
    #[error("duplicate static variable `{0}` in one quantifier telescope")]
    DuplicateVar(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("non-linear product `{0}`: one operand must be an integer literal")]
    NonLinear(String),
}

/// Anything that can report the sort of a static variable.
pub trait SortEnv {
    fn sort_of_var(&self, name: &str) -> Option<Sort>;
}

impl SortEnv for HashMap<String, Sort> {
    fn sort_of_var(&self, name: &str) -> Option<Sort> {
        self.get(name).cloned()
    }
}

/// Ordered telescope of static variables plus the guards assumed so far.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StaticCtx {
    pub vars: Vec<(String, Sort)>,
    pub guards: Vec<StaticTerm>,
}

impl StaticCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars<I, S>(vars: I) -> Self
    where
        I: IntoIterator<Item = (S, Sort)>,
        S: Into<String>,
    {
        StaticCtx { vars: vars.into_iter().map(|(n, s)| (n.into(), s)).collect(), guards: vec![] }
    }

    pub fn push(&mut self, name: impl Into<String>, sort: Sort) -> Result<(), StaticsError> {
        let name = name.into();
        if self.vars.iter().any(|(v, _)| *v == name) {
            return Err(StaticsError::DuplicateVar(name));
        }
        self.vars.push((name, sort));
        Ok(())
    }

    pub fn assume(&mut self, guard: StaticTerm) {
        self.guards.push(guard);
    }
}

impl SortEnv for StaticCtx {
    fn sort_of_var(&self, name: &str) -> Option<Sort> {
        self.vars.iter().rev().find(|(v, _)| v == name).map(|(_, s)| s.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasortDef {
    pub name: String,
    pub constructors: Vec<(String, Vec<Sort>)>,
}

/// Declared datasorts and their constructor signatures.
#[derive(Clone, Debug, Default)]
pub struct StaticSig {
    datasorts: BTreeMap<String, DatasortDef>,
    constructors: HashMap<String, (Vec<Sort>, Sort)>,
}

impl StaticSig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has_datasort(&self, name: &str) -> bool {
        self.datasorts.contains_key(name)
    }

    pub fn datasort_names(&self) -> Vec<String> {
        self.datasorts.keys().cloned().collect()
    }

    pub fn datasort(&self, name: &str) -> Option<&DatasortDef> {
        self.datasorts.get(name)
    }

    pub fn constructor(&self, name: &str) -> Option<&(Vec<Sort>, Sort)> {
        self.constructors.get(name)
    }

    pub fn is_constructor(&self, name: &str) -> bool {
        self.constructors.contains_key(name)
    }

    /// Resolves a surface sort name. `nat` is not a sort; callers desugar it.
    pub fn resolve_sort_name(&self, name: &str) -> Result<Sort, StaticsError> {
        Ok(match name {
            "addr" => Sort::Addr,
            "bool" => Sort::Bool,
            "int" => Sort::Int,
            "prop" => Sort::Prop,
            "type" | "t@ype" => Sort::Type,
            other if self.datasorts.contains_key(other) => Sort::Data(other.to_string()),
            other => return Err(StaticsError::UnknownSort(other.to_string())),
        })
    }

    /// Registers a datasort. Constructor argument sorts may mention the
    /// datasort itself or previously declared sorts only.
    pub fn declare_datasort(&mut self, def: DatasortDef) -> Result<(), StaticsError> {
        for (ctor, args) in &def.constructors {
            for arg in args {
                check_sort_declared(self, arg, &def.name)?;
            }
            if self.constructors.contains_key(ctor) {
                return Err(StaticsError::DuplicateVar(ctor.clone()));
            }
        }
        for (ctor, args) in &def.constructors {
            self.constructors
                .insert(ctor.clone(), (args.clone(), Sort::Data(def.name.clone())));
        }
        self.datasorts.insert(def.name.clone(), def);
        Ok(())
    }

    pub fn sort_of(&self, env: &dyn SortEnv, term: &StaticTerm) -> Result<Sort, StaticsError> {
        self.sort_of_in(env, &mut Vec::new(), term)
    }

    fn sort_of_in(
        &self,
        env: &dyn SortEnv,
        locals: &mut Vec<(String, Sort)>,
        term: &StaticTerm,
    ) -> Result<Sort, StaticsError> {
        match term {
            StaticTerm::Var(v) => locals
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, s)| s.clone())
                .or_else(|| env.sort_of_var(v))
                .ok_or_else(|| StaticsError::UnboundStaticVar(v.clone())),
            StaticTerm::Int(_) => Ok(Sort::Int),
            StaticTerm::Bool(_) => Ok(Sort::Bool),
            StaticTerm::Con(op, args) if is_builtin_op(op) => {
                let (arg_sorts, result) = match op.as_str() {
                    "neg" => (vec![Sort::Int], Sort::Int),
                    "~" => (vec![Sort::Bool], Sort::Bool),
                    "&&" => (vec![Sort::Bool, Sort::Bool], Sort::Bool),
                    o if is_arith_op(o) => (vec![Sort::Int, Sort::Int], Sort::Int),
                    _ => (vec![Sort::Int, Sort::Int], Sort::Bool),
                };
                self.check_args(env, locals, op, args, &arg_sorts, term)?;
                if op == "*" && !is_literal_factor(&args[0]) && !is_literal_factor(&args[1]) {
                    return Err(StaticsError::NonLinear(term.to_string()));
                }
                Ok(result)
            }
            StaticTerm::Con(c, args) => {
                let (arg_sorts, result) = self
                    .constructors
                    .get(c)
                    .ok_or_else(|| StaticsError::UnknownConstructor(c.clone()))?;
                self.check_args(env, locals, c, args, arg_sorts, term)?;
                Ok(result.clone())
            }
            StaticTerm::Lam(v, s, body) => {
                locals.push((v.clone(), s.clone()));
                let body_sort = self.sort_of_in(env, locals, body);
                locals.pop();
                Ok(Sort::Arrow(Box::new(s.clone()), Box::new(body_sort?)))
            }
            StaticTerm::App(fun, arg) => match self.sort_of_in(env, locals, fun)? {
                Sort::Arrow(dom, cod) => {
                    let found = self.sort_of_in(env, locals, arg)?;
                    if found != *dom {
                        return Err(StaticsError::Sort {
                            term: arg.to_string(),
                            expected: *dom,
                            found,
                        });
                    }
                    Ok(*cod)
                }
                _ => Err(StaticsError::NotAFunction(fun.to_string())),
            },
        }
    }

    fn check_args(
        &self,
        env: &dyn SortEnv,
        locals: &mut Vec<(String, Sort)>,
        name: &str,
        args: &[StaticTerm],
        expected: &[Sort],
        _whole: &StaticTerm,
    ) -> Result<(), StaticsError> {
        if args.len() != expected.len() {
            return Err(StaticsError::Arity {
                name: name.to_string(),
                expected: expected.len(),
                found: args.len(),
            });
        }
        for (arg, want) in args.iter().zip(expected) {
            let found = self.sort_of_in(env, locals, arg)?;
            if found != *want {
                return Err(StaticsError::Sort {
                    term: arg.to_string(),
                    expected: want.clone(),
                    found,
                });
            }
        }
        Ok(())
    }
}

fn is_literal_factor(term: &StaticTerm) -> bool {
    match term {
        StaticTerm::Int(_) => true,
        StaticTerm::Con(op, args) if op == "neg" => is_literal_factor(&args[0]),
        _ => false,
    }
}

fn check_sort_declared(sig: &StaticSig, sort: &Sort, current: &str) -> Result<(), StaticsError> {
    match sort {
        Sort::Data(name) if name != current && !sig.datasorts.contains_key(name) => {
            Err(StaticsError::UnknownSort(name.clone()))
        }
        Sort::Arrow(a, b) => {
            check_sort_declared(sig, a, current)?;
            check_sort_declared(sig, b, current)
        }
        _ => Ok(()),
    }
}

/// A linear combination `Σ coeff·atom + constant`. Atoms are normalized
/// non-arithmetic terms; usually variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<StaticTerm, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn constant(value: BigInt) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: value }
    }

    pub fn atom(term: StaticTerm) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(term, BigInt::one());
        LinExpr { terms, constant: BigInt::zero() }
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn add(mut self, other: &LinExpr, sign: i32) -> Self {
        for (atom, c) in &other.terms {
            let entry = self.terms.entry(atom.clone()).or_insert_with(BigInt::zero);
            if sign >= 0 {
                *entry += c;
            } else {
                *entry -= c;
            }
        }
        if sign >= 0 {
            self.constant += &other.constant;
        } else {
            self.constant -= &other.constant;
        }
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn scale(mut self, k: &BigInt) -> Self {
        if k.is_zero() {
            return LinExpr::default();
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    /// Rebuilds a canonical static term: atoms in order, unit coefficients
    /// implicit, constant last.
    pub fn to_term(&self) -> StaticTerm {
        let mut acc: Option<StaticTerm> = None;
        for (atom, coeff) in &self.terms {
            let magnitude = coeff.abs();
            let scaled = if magnitude.is_one() {
                atom.clone()
            } else {
                StaticTerm::binop("*", StaticTerm::Int(magnitude), atom.clone())
            };
            acc = Some(match acc {
                None if coeff.is_negative() => StaticTerm::con("neg", vec![scaled]),
                None => scaled,
                Some(prev) if coeff.is_negative() => StaticTerm::binop("-", prev, scaled),
                Some(prev) => StaticTerm::binop("+", prev, scaled),
            });
        }
        match acc {
            None => StaticTerm::Int(self.constant.clone()),
            Some(t) if self.constant.is_zero() => t,
            Some(t) if self.constant.is_negative() => {
                StaticTerm::binop("-", t, StaticTerm::Int(-self.constant.clone()))
            }
            Some(t) => StaticTerm::binop("+", t, StaticTerm::Int(self.constant.clone())),
        }
    }
}

/// Linearizes an int-sorted term that is already beta-normal.
pub fn linearize(term: &StaticTerm) -> LinExpr {
    match term {
        StaticTerm::Int(n) => LinExpr::constant(n.clone()),
        StaticTerm::Con(op, args) if args.len() == 2 && (op == "+" || op == "-") => {
            let lhs = linearize(&args[0]);
            let rhs = linearize(&args[1]);
            lhs.add(&rhs, if op == "+" { 1 } else { -1 })
        }
        StaticTerm::Con(op, args) if op == "neg" && args.len() == 1 => {
            linearize(&args[0]).scale(&BigInt::from(-1))
        }
        StaticTerm::Con(op, args) if op == "*" && args.len() == 2 => {
            let lhs = linearize(&args[0]);
            let rhs = linearize(&args[1]);
            if let Some(k) = lhs.as_constant() {
                rhs.scale(k)
            } else if let Some(k) = rhs.as_constant() {
                lhs.scale(k)
            } else {
                LinExpr::atom(StaticTerm::binop("*", lhs.to_term(), rhs.to_term()))
            }
        }
        other => LinExpr::atom(other.clone()),
    }
}

/// Beta-reduces, folds literal arithmetic into a canonical linear form and
/// renames lambda binders canonically. Total on well-sorted terms.
pub fn normalize_static(term: &StaticTerm) -> StaticTerm {
    canonical_binders(&fold(&beta(term)), 0)
}

fn beta(term: &StaticTerm) -> StaticTerm {
    match term {
        StaticTerm::App(fun, arg) => {
            let fun = beta(fun);
            let arg = beta(arg);
            match fun {
                StaticTerm::Lam(v, _, body) => beta(&subst_avoiding(&body, &v, &arg)),
                other => StaticTerm::App(Box::new(other), Box::new(arg)),
            }
        }
        StaticTerm::Con(c, args) => StaticTerm::Con(c.clone(), args.iter().map(beta).collect()),
        StaticTerm::Lam(v, s, body) => StaticTerm::Lam(v.clone(), s.clone(), Box::new(beta(body))),
        other => other.clone(),
    }
}

/// Capture-avoiding single substitution used by beta reduction.
fn subst_avoiding(term: &StaticTerm, name: &str, value: &StaticTerm) -> StaticTerm {
    match term {
        StaticTerm::Var(v) if v == name => value.clone(),
        StaticTerm::Var(_) | StaticTerm::Int(_) | StaticTerm::Bool(_) => term.clone(),
        StaticTerm::Con(c, args) => StaticTerm::Con(
            c.clone(),
            args.iter().map(|a| subst_avoiding(a, name, value)).collect(),
        ),
        StaticTerm::App(f, a) => StaticTerm::App(
            Box::new(subst_avoiding(f, name, value)),
            Box::new(subst_avoiding(a, name, value)),
        ),
        StaticTerm::Lam(v, s, body) => {
            if v == name {
                return term.clone();
            }
            if value.mentions(v) {
                let mut fresh = format!("{v}'");
                while value.mentions(&fresh) || body.mentions(&fresh) {
                    fresh.push('\'');
                }
                let renamed = subst_avoiding(body, v, &StaticTerm::Var(fresh.clone()));
                StaticTerm::Lam(fresh, s.clone(), Box::new(subst_avoiding(&renamed, name, value)))
            } else {
                StaticTerm::Lam(v.clone(), s.clone(), Box::new(subst_avoiding(body, name, value)))
            }
        }
    }
}

fn is_int_shaped(term: &StaticTerm) -> bool {
    match term {
        StaticTerm::Int(_) => true,
        StaticTerm::Con(op, _) => is_arith_op(op),
        _ => false,
    }
}

fn fold(term: &StaticTerm) -> StaticTerm {
    match term {
        t if is_int_shaped(t) => {
            let folded = match t {
                StaticTerm::Con(c, args) => StaticTerm::Con(c.clone(), args.iter().map(fold).collect()),
                other => other.clone(),
            };
            linearize(&folded).to_term()
        }
        StaticTerm::Con(op, args) if is_cmp_op(op) => {
            let lhs = fold(&args[0]);
            let rhs = fold(&args[1]);
            if let (StaticTerm::Int(a), StaticTerm::Int(b)) = (&lhs, &rhs) {
                return StaticTerm::Bool(match op.as_str() {
                    "<=" => a <= b,
                    "<" => a < b,
                    ">=" => a >= b,
                    ">" => a > b,
                    "=" => a == b,
                    _ => a != b,
                });
            }
            StaticTerm::binop(op, lhs, rhs)
        }
        StaticTerm::Con(op, args) if op == "&&" => {
            let lhs = fold(&args[0]);
            let rhs = fold(&args[1]);
            match (&lhs, &rhs) {
                (StaticTerm::Bool(false), _) | (_, StaticTerm::Bool(false)) => StaticTerm::Bool(false),
                _ => StaticTerm::and(lhs, rhs),
            }
        }
        StaticTerm::Con(op, args) if op == "~" => match fold(&args[0]) {
            StaticTerm::Bool(b) => StaticTerm::Bool(!b),
            StaticTerm::Con(inner, inner_args) if inner == "~" => inner_args[0].clone(),
            other => StaticTerm::not(other),
        },
        StaticTerm::Con(c, args) => StaticTerm::Con(c.clone(), args.iter().map(fold).collect()),
        StaticTerm::Lam(v, s, body) => StaticTerm::Lam(v.clone(), s.clone(), Box::new(fold(body))),
        StaticTerm::App(f, a) => StaticTerm::App(Box::new(fold(f)), Box::new(fold(a))),
        other => other.clone(),
    }
}

fn canonical_binders(term: &StaticTerm, depth: usize) -> StaticTerm {
    match term {
        StaticTerm::Lam(v, s, body) => {
            let name = format!("%{depth}");
            let body = subst_avoiding(body, v, &StaticTerm::Var(name.clone()));
            StaticTerm::Lam(name, s.clone(), Box::new(canonical_binders(&body, depth + 1)))
        }
        StaticTerm::Con(c, args) => StaticTerm::Con(
            c.clone(),
            args.iter().map(|a| canonical_binders(a, depth)).collect(),
        ),
        StaticTerm::App(f, a) => StaticTerm::App(
            Box::new(canonical_binders(f, depth)),
            Box::new(canonical_binders(a, depth)),
        ),
        other => other.clone(),
    }
}

/// Outcome of comparing two static terms for equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equality {
    Equal,
    Distinct,
    /// Holds iff every listed int/bool equation holds.
    Residue(Vec<(StaticTerm, StaticTerm)>),
}

/// Structural equality on datasort terms (constructors are free), deferring
/// int and bool components to the solver.
pub fn static_equal(
    sig: &StaticSig,
    env: &dyn SortEnv,
    lhs: &StaticTerm,
    rhs: &StaticTerm,
) -> Equality {
    let lhs = normalize_static(lhs);
    let rhs = normalize_static(rhs);
    let mut residue = Vec::new();
    if equal_into(sig, env, &lhs, &rhs, &mut residue) {
        if residue.is_empty() {
            Equality::Equal
        } else {
            Equality::Residue(residue)
        }
    } else {
        Equality::Distinct
    }
}

fn equal_into(
    sig: &StaticSig,
    env: &dyn SortEnv,
    lhs: &StaticTerm,
    rhs: &StaticTerm,
    residue: &mut Vec<(StaticTerm, StaticTerm)>,
) -> bool {
    if lhs == rhs {
        return true;
    }
    match (lhs, rhs) {
        (StaticTerm::Int(_), StaticTerm::Int(_)) | (StaticTerm::Bool(_), StaticTerm::Bool(_)) => false,
        (StaticTerm::Con(a, xs), StaticTerm::Con(b, ys)) if sig.is_constructor(a) && sig.is_constructor(b) => {
            a == b
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| equal_into(sig, env, x, y, residue))
        }
        _ => {
            let sort = sig.sort_of(env, lhs).or_else(|_| sig.sort_of(env, rhs));
            match sort {
                Ok(Sort::Int) | Ok(Sort::Bool) => {
                    residue.push((lhs.clone(), rhs.clone()));
                    true
                }
                _ => false,
            }
        }
    }
}

/// A concrete value of a static term under an assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Concrete {
    Int(BigInt),
    Bool(bool),
    Data(String, Vec<Concrete>),
}

impl Concrete {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Concrete::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Concrete::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

/// Evaluates a first-order static term. Returns `None` on unbound variables
/// or lambda/application nodes that survive normalization.
pub fn eval_static(term: &StaticTerm, env: &dyn Fn(&str) -> Option<Concrete>) -> Option<Concrete> {
    match term {
        StaticTerm::Var(v) => env(v),
        StaticTerm::Int(n) => Some(Concrete::Int(n.clone())),
        StaticTerm::Bool(b) => Some(Concrete::Bool(*b)),
        StaticTerm::Con(op, args) if is_builtin_op(op) => {
            let vals: Option<Vec<Concrete>> = args.iter().map(|a| eval_static(a, env)).collect();
            let vals = vals?;
            let int = |i: usize| vals[i].as_int().cloned();
            Some(match op.as_str() {
                "+" => Concrete::Int(int(0)? + int(1)?),
                "-" => Concrete::Int(int(0)? - int(1)?),
                "*" => Concrete::Int(int(0)? * int(1)?),
                "neg" => Concrete::Int(-int(0)?),
                "<=" => Concrete::Bool(int(0)? <= int(1)?),
                "<" => Concrete::Bool(int(0)? < int(1)?),
                ">=" => Concrete::Bool(int(0)? >= int(1)?),
                ">" => Concrete::Bool(int(0)? > int(1)?),
                "=" => Concrete::Bool(vals[0] == vals[1]),
                "<>" => Concrete::Bool(vals[0] != vals[1]),
                "&&" => Concrete::Bool(vals[0].as_bool()? && vals[1].as_bool()?),
                "~" => Concrete::Bool(!vals[0].as_bool()?),
                _ => return None,
            })
        }
        StaticTerm::Con(c, args) => {
            let vals: Option<Vec<Concrete>> = args.iter().map(|a| eval_static(a, env)).collect();
            Some(Concrete::Data(c.clone(), vals?))
        }
        StaticTerm::Lam(..) | StaticTerm::App(..) => match normalize_static(term) {
            StaticTerm::Lam(..) | StaticTerm::App(..) => None,
            t => eval_static(&t, env),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ilist_sig() -> StaticSig {
        let mut sig = StaticSig::new();
        sig.declare_datasort(DatasortDef {
            name: "ilist".into(),
            constructors: vec![
                ("nil".into(), vec![]),
                ("cons".into(), vec![Sort::Int, Sort::Data("ilist".into())]),
            ],
        })
        .unwrap();
        sig
    }

    fn v(name: &str) -> StaticTerm {
        StaticTerm::var(name)
    }

    fn nil() -> StaticTerm {
        StaticTerm::con("nil", vec![])
    }

    #[test]
    fn sort_of_constructor_application() {
        let sig = ilist_sig();
        let ctx = StaticCtx::with_vars([("n", Sort::Int)]);
        let term = StaticTerm::con("cons", vec![v("n"), nil()]);
        assert_eq!(sig.sort_of(&ctx, &term), Ok(Sort::Data("ilist".into())));
        assert_eq!(sig.sort_of(&StaticCtx::new(), &StaticTerm::int(0)), Ok(Sort::Int));
    }

    #[test]
    fn sort_of_rejects_list_plus_int() {
        let sig = ilist_sig();
        let ctx = StaticCtx::with_vars([("xs", Sort::Data("ilist".into()))]);
        let term = StaticTerm::binop("+", v("xs"), StaticTerm::int(1));
        match sig.sort_of(&ctx, &term) {
            Err(StaticsError::Sort { expected, found, .. }) => {
                assert_eq!(expected, Sort::Int);
                assert_eq!(found, Sort::Data("ilist".into()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            sig.sort_of(&StaticCtx::new(), &v("zz")),
            Err(StaticsError::UnboundStaticVar("zz".into()))
        );
    }

    #[test]
    fn nonlinear_product_is_rejected() {
        let sig = ilist_sig();
        let ctx = StaticCtx::with_vars([("a", Sort::Int), ("b", Sort::Int)]);
        let term = StaticTerm::binop("*", v("a"), v("b"));
        assert!(matches!(sig.sort_of(&ctx, &term), Err(StaticsError::NonLinear(_))));
        let ok = StaticTerm::binop("*", StaticTerm::int(3), v("b"));
        assert_eq!(sig.sort_of(&ctx, &ok), Ok(Sort::Int));
    }

    #[test]
    fn normalize_beta_and_fold() {
        let lam = StaticTerm::Lam(
            "a".into(),
            Sort::Int,
            Box::new(StaticTerm::binop("+", v("a"), v("a"))),
        );
        let app = StaticTerm::App(Box::new(lam), Box::new(StaticTerm::int(3)));
        assert_eq!(normalize_static(&app), StaticTerm::int(6));

        let cons = StaticTerm::con(
            "cons",
            vec![StaticTerm::binop("+", StaticTerm::int(1), StaticTerm::int(1)), nil()],
        );
        assert_eq!(normalize_static(&cons), StaticTerm::con("cons", vec![StaticTerm::int(2), nil()]));
        assert_eq!(normalize_static(&StaticTerm::binop("+", v("n"), StaticTerm::int(0))), v("n"));
    }

    #[test]
    fn normalize_unit_law_agrees_under_random_assignments() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let term = StaticTerm::binop("+", v("n"), StaticTerm::int(0));
        let normal = normalize_static(&term);
        for _ in 0..100 {
            let n: i64 = rng.gen_range(-1000..1000);
            let env = |name: &str| (name == "n").then(|| Concrete::Int(BigInt::from(n)));
            assert_eq!(eval_static(&term, &env), eval_static(&normal, &env));
        }
    }

    #[test]
    fn static_equal_examples() {
        let sig = ilist_sig();
        let ctx = StaticCtx::with_vars([
            ("x", Sort::Int),
            ("n", Sort::Int),
            ("xs", Sort::Data("ilist".into())),
        ]);
        let cx = StaticTerm::con("cons", vec![v("x"), nil()]);
        assert_eq!(static_equal(&sig, &ctx, &cx, &cx), Equality::Equal);

        let a = StaticTerm::binop("+", v("n"), StaticTerm::int(1));
        let b = StaticTerm::binop("+", StaticTerm::int(1), v("n"));
        // both sides normalize to the same linear form
        assert_eq!(static_equal(&sig, &ctx, &a, &b), Equality::Equal);
        let c = StaticTerm::binop("+", v("x"), StaticTerm::int(1));
        assert!(matches!(static_equal(&sig, &ctx, &a, &c), Equality::Residue(r) if r.len() == 1));

        let cxs = StaticTerm::con("cons", vec![v("x"), v("xs")]);
        assert_eq!(static_equal(&sig, &ctx, &cxs, &nil()), Equality::Distinct);
    }

    #[test]
    fn display_round_trips_precedence() {
        let t = StaticTerm::binop(
            "-",
            v("n"),
            StaticTerm::binop("+", v("i"), StaticTerm::int(1)),
        );
        assert_eq!(t.to_string(), "n - (i + 1)");
        let g = StaticTerm::and(
            StaticTerm::binop("<=", v("i"), v("n")),
            StaticTerm::binop(">=", v("i"), StaticTerm::int(0)),
        );
        assert_eq!(g.to_string(), "i <= n && i >= 0");
    }
}
