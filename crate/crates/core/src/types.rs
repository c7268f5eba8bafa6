//! Types of programs and proofs.

use std::collections::HashMap;
use std::fmt;

use crate::statics::{normalize_static, Sort, StaticTerm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DType {
    /// Singleton `int(I)`.
    Int(StaticTerm),
    /// Singleton `bool(B)`.
    Bool(StaticTerm),
    Ptr(StaticTerm),
    Data { name: String, targs: Vec<DType>, indices: Vec<StaticTerm> },
    /// Dataprops and abstract props.
    Prop { name: String, indices: Vec<StaticTerm> },
    /// Abstract types such as `E(a, x)`.
    Abs { name: String, targs: Vec<DType>, indices: Vec<StaticTerm> },
    /// A type variable; names starting with `?` are unification variables.
    TVar(String),
    Fun { proofs: Vec<DType>, args: Vec<DType>, ret: Box<DType> },
    /// Plain tuple; the empty tuple is unit.
    Tuple(Vec<DType>),
    /// `(P1, P2 | T1, T2)`.
    Proving { proofs: Vec<DType>, values: Vec<DType> },
    /// `B ⊃ T`
    Guarded(StaticTerm, Box<DType>),
    /// `B ∧ T`
    Asserting(StaticTerm, Box<DType>),
    Forall(String, Sort, Box<DType>),
    Exists(String, Sort, Box<DType>),
}

impl DType {
    /// The unindexed `int`, i.e. `[i:int] int(i)`.
    pub fn plain_int(var: String) -> DType {
        DType::Exists(var.clone(), Sort::Int, Box::new(DType::Int(StaticTerm::Var(var))))
    }

    pub fn plain_bool(var: String) -> DType {
        DType::Exists(var.clone(), Sort::Bool, Box::new(DType::Bool(StaticTerm::Var(var))))
    }

    pub fn unit() -> DType {
        DType::Tuple(vec![])
    }

    /// Props are assigned to proofs, every other type to programs.
    pub fn is_prop(&self) -> bool {
        match self {
            DType::Prop { .. } => true,
            DType::Tuple(items) => !items.is_empty() && items.iter().all(DType::is_prop),
            DType::Guarded(_, t) | DType::Asserting(_, t) | DType::Forall(_, _, t) | DType::Exists(_, _, t) => {
                t.is_prop()
            }
            DType::Fun { ret, args, .. } => args.is_empty() && ret.is_prop(),
            _ => false,
        }
    }

    pub fn is_plain_int(&self) -> bool {
        matches!(self, DType::Exists(v, Sort::Int, body) if **body == DType::Int(StaticTerm::Var(v.clone())))
    }

    /// Applies a static substitution. Bound names are globally unique, so
    /// no capture can occur.
    pub fn subst(&self, map: &HashMap<String, StaticTerm>) -> DType {
        if map.is_empty() {
            return self.clone();
        }
        let st = |t: &StaticTerm| t.subst(map);
        let many = |ts: &[StaticTerm]| ts.iter().map(|t| t.subst(map)).collect::<Vec<_>>();
        let tys = |ts: &[DType]| ts.iter().map(|t| t.subst(map)).collect::<Vec<_>>();
        match self {
            DType::Int(i) => DType::Int(st(i)),
            DType::Bool(b) => DType::Bool(st(b)),
            DType::Ptr(l) => DType::Ptr(st(l)),
            DType::Data { name, targs, indices } => {
                DType::Data { name: name.clone(), targs: tys(targs), indices: many(indices) }
            }
            DType::Prop { name, indices } => DType::Prop { name: name.clone(), indices: many(indices) },
            DType::Abs { name, targs, indices } => {
                DType::Abs { name: name.clone(), targs: tys(targs), indices: many(indices) }
            }
            DType::TVar(v) => DType::TVar(v.clone()),
            DType::Fun { proofs, args, ret } => {
                DType::Fun { proofs: tys(proofs), args: tys(args), ret: Box::new(ret.subst(map)) }
            }
            DType::Tuple(items) => DType::Tuple(tys(items)),
            DType::Proving { proofs, values } => DType::Proving { proofs: tys(proofs), values: tys(values) },
            DType::Guarded(g, t) => DType::Guarded(st(g), Box::new(t.subst(map))),
            DType::Asserting(g, t) => DType::Asserting(st(g), Box::new(t.subst(map))),
            DType::Forall(v, s, t) => DType::Forall(v.clone(), s.clone(), Box::new(t.subst(map))),
            DType::Exists(v, s, t) => DType::Exists(v.clone(), s.clone(), Box::new(t.subst(map))),
        }
    }

    /// Replaces type variables.
    pub fn subst_types(&self, map: &HashMap<String, DType>) -> DType {
        if map.is_empty() {
            return self.clone();
        }
        let tys = |ts: &[DType]| ts.iter().map(|t| t.subst_types(map)).collect::<Vec<_>>();
        match self {
            DType::TVar(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            DType::Data { name, targs, indices } => {
                DType::Data { name: name.clone(), targs: tys(targs), indices: indices.clone() }
            }
            DType::Abs { name, targs, indices } => {
                DType::Abs { name: name.clone(), targs: tys(targs), indices: indices.clone() }
            }
            DType::Fun { proofs, args, ret } => {
                DType::Fun { proofs: tys(proofs), args: tys(args), ret: Box::new(ret.subst_types(map)) }
            }
            DType::Tuple(items) => DType::Tuple(tys(items)),
            DType::Proving { proofs, values } => DType::Proving { proofs: tys(proofs), values: tys(values) },
            DType::Guarded(g, t) => DType::Guarded(g.clone(), Box::new(t.subst_types(map))),
            DType::Asserting(g, t) => DType::Asserting(g.clone(), Box::new(t.subst_types(map))),
            DType::Forall(v, s, t) => DType::Forall(v.clone(), s.clone(), Box::new(t.subst_types(map))),
            DType::Exists(v, s, t) => DType::Exists(v.clone(), s.clone(), Box::new(t.subst_types(map))),
            other => other.clone(),
        }
    }

    /// Normalizes every embedded static term.
    pub fn normalize(&self) -> DType {
        let norm = |t: &StaticTerm| normalize_static(t);
        let many = |ts: &[StaticTerm]| ts.iter().map(normalize_static).collect::<Vec<_>>();
        let tys = |ts: &[DType]| ts.iter().map(DType::normalize).collect::<Vec<_>>();
        match self {
            DType::Int(i) => DType::Int(norm(i)),
            DType::Bool(b) => DType::Bool(norm(b)),
            DType::Ptr(l) => DType::Ptr(norm(l)),
            DType::Data { name, targs, indices } => {
                DType::Data { name: name.clone(), targs: tys(targs), indices: many(indices) }
            }
            DType::Prop { name, indices } => DType::Prop { name: name.clone(), indices: many(indices) },
            DType::Abs { name, targs, indices } => {
                DType::Abs { name: name.clone(), targs: tys(targs), indices: many(indices) }
            }
            DType::TVar(v) => DType::TVar(v.clone()),
            DType::Fun { proofs, args, ret } => {
                DType::Fun { proofs: tys(proofs), args: tys(args), ret: Box::new(ret.normalize()) }
            }
            DType::Tuple(items) => DType::Tuple(tys(items)),
            DType::Proving { proofs, values } => DType::Proving { proofs: tys(proofs), values: tys(values) },
            DType::Guarded(g, t) => DType::Guarded(norm(g), Box::new(t.normalize())),
            DType::Asserting(g, t) => DType::Asserting(norm(g), Box::new(t.normalize())),
            DType::Forall(v, s, t) => DType::Forall(v.clone(), s.clone(), Box::new(t.normalize())),
            DType::Exists(v, s, t) => DType::Exists(v.clone(), s.clone(), Box::new(t.normalize())),
        }
    }
}

/// Strips the `$k` suffixes of internal names for display.
pub fn display_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut chars = name.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '$' && chars.peek().is_some_and(|d| d.is_ascii_digit()) {
            while chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                chars.next();
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn term(t: &StaticTerm) -> String {
    display_name(&t.to_string())
}

fn terms(ts: &[StaticTerm]) -> String {
    ts.iter().map(term).collect::<Vec<_>>().join(", ")
}

fn types(ts: &[DType]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            t if t.is_plain_int() => write!(f, "int"),
            DType::Exists(v, Sort::Bool, body) if **body == DType::Bool(StaticTerm::Var(v.clone())) => {
                write!(f, "bool")
            }
            DType::Int(i) => write!(f, "int({})", term(i)),
            DType::Bool(b) => write!(f, "bool({})", term(b)),
            DType::Ptr(l) => write!(f, "ptr({})", term(l)),
            DType::Data { name, targs, indices } | DType::Abs { name, targs, indices } => {
                let mut parts: Vec<String> = targs.iter().map(|t| t.to_string()).collect();
                parts.extend(indices.iter().map(term));
                if parts.is_empty() {
                    write!(f, "{name}")
                } else {
                    write!(f, "{name}({})", parts.join(", "))
                }
            }
            DType::Prop { name, indices } if indices.is_empty() => write!(f, "{name}"),
            DType::Prop { name, indices } => write!(f, "{name}({})", terms(indices)),
            DType::TVar(v) => write!(f, "{}", display_name(v)),
            DType::Fun { proofs, args, ret } if proofs.is_empty() => write!(f, "({}) -> {ret}", types(args)),
            DType::Fun { proofs, args, ret } => write!(f, "({} | {}) -> {ret}", types(proofs), types(args)),
            DType::Tuple(items) => write!(f, "({})", types(items)),
            DType::Proving { proofs, values } => write!(f, "({} | {})", types(proofs), types(values)),
            DType::Guarded(g, t) => write!(f, "{{{}}} {t}", term(g)),
            DType::Asserting(g, t) => write!(f, "[{}] {t}", term(g)),
            DType::Forall(v, s, t) => write!(f, "{{{}:{s}}} {t}", display_name(v)),
            DType::Exists(v, s, t) => write!(f, "[{}:{s}] {t}", display_name(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_strips_internal_suffixes() {
        let t = DType::Prop {
            name: "FIB".into(),
            indices: vec![StaticTerm::var("n$3"), StaticTerm::binop("+", StaticTerm::var("r0$4"), StaticTerm::var("r1$5"))],
        };
        assert_eq!(t.to_string(), "FIB(n, r0 + r1)");
        assert_eq!(DType::plain_int("i$9".into()).to_string(), "int");
    }

    #[test]
    fn prop_kinding() {
        let p = DType::Prop { name: "ORD".into(), indices: vec![] };
        assert!(p.is_prop());
        assert!(DType::Tuple(vec![p.clone(), p.clone()]).is_prop());
        assert!(!DType::plain_int("i".into()).is_prop());
        assert!(!DType::unit().is_prop());
    }
}
