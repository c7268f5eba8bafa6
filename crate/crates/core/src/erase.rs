//! Proof erasure.
//!
//! Erasure runs in two stages. [`erase_decls`] removes proof content from
//! surface declarations but keeps types and static indices, so the result
//! prints as a plain program that checks again. [`lower`] then drops the
//! statics as well and produces [`ErasedTerm`]s, which have no constructors
//! for proofs at all.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::*;
use crate::checker::{site_key, SiteKey};
use crate::corpus::Checked;
use crate::statics::StaticTerm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EraseError {
    #[error("cannot erase a rejected program")]
    Rejected,
    #[error("{loc}: internal error: proof residue after erasure: {what}")]
    Residue { what: String, loc: Loc },
    #[error("{loc}: internal error: `{name}` does not name a value, function or constructor")]
    Unresolved { name: String, loc: Loc },
}

/// Names that live at the proof level of a program.
#[derive(Debug, Clone, Default)]
pub struct ProofNames {
    /// Absprops and dataprops.
    pub props: HashSet<String>,
    /// Lemmas, dataprop constructors and proof functions.
    pub heads: HashSet<String>,
}

impl ProofNames {
    pub fn collect<'a>(decls: impl IntoIterator<Item = &'a Declaration>) -> Self {
        let mut names = ProofNames::default();
        for d in decls {
            match &d.kind {
                DeclKind::Absprop { name, .. } => {
                    names.props.insert(name.clone());
                }
                DeclKind::Dataprop(data) => {
                    names.props.insert(data.name.clone());
                    names.heads.extend(data.ctors.iter().map(|c| c.name.clone()));
                }
                DeclKind::Praxi { name, .. } => {
                    names.heads.insert(name.clone());
                }
                DeclKind::Funs(g) if g.kind == FunKind::Prfun => {
                    names.heads.extend(g.defs.iter().map(|f| f.name.clone()));
                }
                _ => {}
            }
        }
        names
    }
}

// ------------------------------------------------------------ surface pass

struct Surface<'a> {
    names: &'a ProofNames,
    sites: &'a BTreeMap<SiteKey, Vec<StaticTerm>>,
}

/// Removes proofs from `decls`, keeping types and statics. Calls that
/// passed proofs get explicit static arguments from `sites` where the
/// checker recorded them, since the dropped proofs may have been what fixed
/// those indices.
pub fn erase_decls(
    decls: &[Declaration],
    names: &ProofNames,
    sites: &BTreeMap<SiteKey, Vec<StaticTerm>>,
) -> Vec<Declaration> {
    let s = Surface { names, sites };
    decls.iter().filter_map(|d| s.decl(d)).collect()
}

impl Surface<'_> {
    fn decl(&self, d: &Declaration) -> Option<Declaration> {
        let kind = match &d.kind {
            DeclKind::Praxi { .. } | DeclKind::Absprop { .. } | DeclKind::Dataprop(_) => return None,
            DeclKind::Alias { target, .. } if self.names.heads.contains(target) => return None,
            DeclKind::Funs(g) => DeclKind::Funs(self.fun_group(g)?),
            DeclKind::Datatype(data) => DeclKind::Datatype(DataDecl {
                name: data.name.clone(),
                params: data.params.clone(),
                ctors: data
                    .ctors
                    .iter()
                    .map(|c| ConDecl {
                        fields: c.fields.as_ref().map(|f| Fields {
                            proofs: vec![],
                            values: f.values.iter().map(ty).collect(),
                            bar: false,
                        }),
                        ..c.clone()
                    })
                    .collect(),
            }),
            DeclKind::Typedef { name, params, body } => {
                DeclKind::Typedef { name: name.clone(), params: params.clone(), body: ty(body) }
            }
            DeclKind::Val { binds } => DeclKind::Val { binds: self.binds(binds) },
            other => other.clone(),
        };
        Some(Declaration { kind, loc: d.loc.clone() })
    }

    fn fun_group(&self, g: &FunGroup) -> Option<FunGroup> {
        if g.kind == FunKind::Prfun {
            return None;
        }
        let defs = g
            .defs
            .iter()
            .map(|f| FunDef {
                name: f.name.clone(),
                quants: f.quants.clone(),
                params: params(&f.params),
                ret: ty(&f.ret),
                body: self.expr(&f.body),
                loc: f.loc.clone(),
            })
            .collect();
        Some(FunGroup { kind: g.kind, tparams: g.tparams.clone(), defs, loc: g.loc.clone() })
    }

    fn binds(&self, binds: &[(ValPat, Expr)]) -> Vec<(ValPat, Expr)> {
        binds
            .iter()
            .filter(|(p, _)| !p.values.is_empty())
            .map(|(p, e)| (ValPat { proofs: None, values: p.values.clone() }, self.expr(e)))
            .collect()
    }

    fn expr(&self, e: &Expr) -> Expr {
        match e {
            Expr::Var(..) | Expr::Int(..) | Expr::Bool(..) => e.clone(),
            Expr::App { head, statics, proofs, args, bar, loc } => {
                let statics = match self.sites.get(&site_key(loc)) {
                    Some(inst) if *bar && !proofs.is_empty() => inst.clone(),
                    _ => statics.clone(),
                };
                let args = args.iter().map(|a| self.expr(a)).collect();
                Expr::App { head: head.clone(), statics, proofs: vec![], args, bar: false, loc: loc.clone() }
            }
            Expr::Tuple { proofs: Some(_), values, loc } => match values.as_slice() {
                [single] => self.expr(single),
                _ => Expr::Tuple { proofs: None, values: values.iter().map(|v| self.expr(v)).collect(), loc: loc.clone() },
            },
            Expr::Tuple { proofs: None, values, loc } => {
                Expr::Tuple { proofs: None, values: values.iter().map(|v| self.expr(v)).collect(), loc: loc.clone() }
            }
            Expr::BinOp { op, lhs, rhs, loc } => Expr::BinOp {
                op: *op,
                lhs: Box::new(self.expr(lhs)),
                rhs: Box::new(self.expr(rhs)),
                loc: loc.clone(),
            },
            Expr::UnOp { op, arg, loc } => Expr::UnOp { op: *op, arg: Box::new(self.expr(arg)), loc: loc.clone() },
            Expr::If { cond, then_branch, else_branch, loc } => Expr::If {
                cond: Box::new(self.expr(cond)),
                then_branch: Box::new(self.expr(then_branch)),
                else_branch: Box::new(self.expr(else_branch)),
                loc: loc.clone(),
            },
            Expr::Case { scrutinee, arms, loc } => Expr::Case {
                scrutinee: Box::new(self.expr(scrutinee)),
                arms: arms
                    .iter()
                    .map(|a| Arm {
                        pat: match &a.pat {
                            Pattern::Con { name, args, loc, .. } => Pattern::Con {
                                name: name.clone(),
                                proofs: vec![],
                                args: args.clone(),
                                bar: false,
                                loc: loc.clone(),
                            },
                            w => w.clone(),
                        },
                        body: self.expr(&a.body),
                    })
                    .collect(),
                loc: loc.clone(),
            },
            Expr::Let { decls, body, loc } => {
                let decls: Vec<LocalDecl> = decls.iter().filter_map(|d| self.local(d)).collect();
                let body = self.expr(body);
                if decls.is_empty() {
                    body
                } else {
                    Expr::Let { decls, body: Box::new(body), loc: loc.clone() }
                }
            }
            Expr::Lam { params: ps, ret, body, loc } => Expr::Lam {
                params: params(ps),
                ret: ret.as_ref().map(ty),
                body: Box::new(self.expr(body)),
                loc: loc.clone(),
            },
        }
    }

    fn local(&self, d: &LocalDecl) -> Option<LocalDecl> {
        match d {
            LocalDecl::Prval { .. } => None,
            LocalDecl::Val { binds, loc } => {
                let binds = self.binds(binds);
                (!binds.is_empty()).then(|| LocalDecl::Val { binds, loc: loc.clone() })
            }
            LocalDecl::Funs(g) => self.fun_group(g).map(LocalDecl::Funs),
        }
    }
}

fn params(ps: &Params) -> Params {
    Params {
        proofs: vec![],
        values: ps.values.iter().map(|p| Param { name: p.name.clone(), ty: ty(&p.ty) }).collect(),
        bar: false,
    }
}

/// Drops the proof components of a type.
pub fn ty(t: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::Named { .. } => t.clone(),
        TypeExpr::Tuple { values, .. } => match values.as_slice() {
            [single] => ty(single),
            _ => TypeExpr::Tuple { proofs: None, values: values.iter().map(ty).collect() },
        },
        TypeExpr::Fun { args, ret, .. } => {
            TypeExpr::Fun { proofs: vec![], args: args.iter().map(ty).collect(), bar: false, ret: Box::new(ty(ret)) }
        }
        TypeExpr::Forall(q, body) => TypeExpr::Forall(q.clone(), Box::new(ty(body))),
        TypeExpr::Exists(q, body) => TypeExpr::Exists(q.clone(), Box::new(ty(body))),
    }
}

// ----------------------------------------------------------- residue audit

/// Walks erased declarations and reports the first proof node found.
pub fn audit_residue(decls: &[Declaration], names: &ProofNames) -> Result<(), EraseError> {
    let r = Residue { names };
    decls.iter().try_for_each(|d| r.decl(d))
}

struct Residue<'a> {
    names: &'a ProofNames,
}

fn residue(what: impl Into<String>, loc: &Loc) -> Result<(), EraseError> {
    Err(EraseError::Residue { what: what.into(), loc: loc.clone() })
}

impl Residue<'_> {
    fn decl(&self, d: &Declaration) -> Result<(), EraseError> {
        match &d.kind {
            DeclKind::Praxi { name, .. } => residue(format!("lemma `{name}`"), &d.loc),
            DeclKind::Absprop { name, .. } => residue(format!("absprop `{name}`"), &d.loc),
            DeclKind::Dataprop(data) => residue(format!("dataprop `{}`", data.name), &d.loc),
            DeclKind::Funs(g) => self.group(g),
            DeclKind::Datatype(data) => {
                for c in &data.ctors {
                    if let Some(f) = &c.fields {
                        if f.bar || !f.proofs.is_empty() {
                            return residue(format!("proof field of `{}`", c.name), &c.loc);
                        }
                        f.values.iter().try_for_each(|t| self.ty(t, &c.loc))?;
                    }
                }
                Ok(())
            }
            DeclKind::Typedef { body, .. } => self.ty(body, &d.loc),
            DeclKind::Val { binds } => self.binds(binds, &d.loc),
            _ => Ok(()),
        }
    }

    fn group(&self, g: &FunGroup) -> Result<(), EraseError> {
        if g.kind == FunKind::Prfun {
            return residue("proof function", &g.loc);
        }
        for f in &g.defs {
            self.params(&f.params, &f.loc)?;
            self.ty(&f.ret, &f.loc)?;
            self.expr(&f.body)?;
        }
        Ok(())
    }

    fn params(&self, ps: &Params, loc: &Loc) -> Result<(), EraseError> {
        if ps.bar || !ps.proofs.is_empty() {
            return residue("proof parameter", loc);
        }
        ps.values.iter().try_for_each(|p| self.ty(&p.ty, loc))
    }

    fn binds(&self, binds: &[(ValPat, Expr)], loc: &Loc) -> Result<(), EraseError> {
        for (p, e) in binds {
            if p.proofs.is_some() {
                return residue("proof pattern in val", loc);
            }
            self.expr(e)?;
        }
        Ok(())
    }

    fn ty(&self, t: &TypeExpr, loc: &Loc) -> Result<(), EraseError> {
        match t {
            TypeExpr::Named { name, .. } if self.names.props.contains(name) => {
                residue(format!("prop type `{name}`"), loc)
            }
            TypeExpr::Named { .. } => Ok(()),
            TypeExpr::Tuple { proofs: Some(_), .. } => residue("proving tuple type", loc),
            TypeExpr::Tuple { values, .. } => values.iter().try_for_each(|v| self.ty(v, loc)),
            TypeExpr::Fun { proofs, bar, args, ret } => {
                if *bar || !proofs.is_empty() {
                    return residue("proof argument in function type", loc);
                }
                args.iter().try_for_each(|a| self.ty(a, loc))?;
                self.ty(ret, loc)
            }
            TypeExpr::Forall(_, body) | TypeExpr::Exists(_, body) => self.ty(body, loc),
        }
    }

    fn expr(&self, e: &Expr) -> Result<(), EraseError> {
        match e {
            Expr::Var(name, loc) if self.names.heads.contains(name) => residue(format!("proof `{name}`"), loc),
            Expr::Var(..) | Expr::Int(..) | Expr::Bool(..) => Ok(()),
            Expr::App { head, proofs, args, bar, loc, .. } => {
                if self.names.heads.contains(head) {
                    return residue(format!("proof application `{head}`"), loc);
                }
                if *bar || !proofs.is_empty() {
                    return residue(format!("proof arguments to `{head}`"), loc);
                }
                args.iter().try_for_each(|a| self.expr(a))
            }
            Expr::Tuple { proofs: Some(_), loc, .. } => residue("proving tuple", loc),
            Expr::Tuple { values, .. } => values.iter().try_for_each(|v| self.expr(v)),
            Expr::BinOp { lhs, rhs, .. } => {
                self.expr(lhs)?;
                self.expr(rhs)
            }
            Expr::UnOp { arg, .. } => self.expr(arg),
            Expr::If { cond, then_branch, else_branch, .. } => {
                self.expr(cond)?;
                self.expr(then_branch)?;
                self.expr(else_branch)
            }
            Expr::Case { scrutinee, arms, .. } => {
                self.expr(scrutinee)?;
                for a in arms {
                    if let Pattern::Con { name, proofs, bar, loc, .. } = &a.pat {
                        if *bar || !proofs.is_empty() || self.names.heads.contains(name) {
                            return residue(format!("proof pattern `{name}`"), loc);
                        }
                    }
                    self.expr(&a.body)?;
                }
                Ok(())
            }
            Expr::Let { decls, body, .. } => {
                for d in decls {
                    match d {
                        LocalDecl::Prval { loc, .. } => return residue("prval", loc),
                        LocalDecl::Val { binds, loc } => self.binds(binds, loc)?,
                        LocalDecl::Funs(g) => self.group(g)?,
                    }
                }
                self.expr(body)
            }
            Expr::Lam { params, ret, body, loc } => {
                self.params(params, loc)?;
                if let Some(r) = ret {
                    self.ty(r, loc)?;
                }
                self.expr(body)
            }
        }
    }
}

// ------------------------------------------------------------ erased terms

/// A term with every proof and every static index removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErasedTerm {
    Var(String),
    Int(BigInt),
    Bool(bool),
    /// A saturated datatype constructor.
    Con(String, Vec<ErasedTerm>),
    /// A call of a named function, local or global.
    Call(String, Vec<ErasedTerm>),
    Tuple(Vec<ErasedTerm>),
    BinOp(BinOp, Box<ErasedTerm>, Box<ErasedTerm>),
    UnOp(UnOp, Box<ErasedTerm>),
    If(Box<ErasedTerm>, Box<ErasedTerm>, Box<ErasedTerm>),
    Case(Box<ErasedTerm>, Vec<ErasedArm>),
    Let(Vec<ErasedBind>, Box<ErasedTerm>),
    Lam(Vec<String>, Box<ErasedTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasedArm {
    /// `None` for a wildcard.
    pub ctor: Option<String>,
    pub vars: Vec<String>,
    pub body: ErasedTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErasedBind {
    /// Simultaneous `val` bindings. A pattern with several names takes a
    /// tuple apart.
    Val(Vec<(Vec<String>, ErasedTerm)>),
    Funs(Vec<ErasedFun>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasedFun {
    pub name: String,
    pub params: Vec<String>,
    /// Erased surface types of the parameters, kept for reading command
    /// line arguments.
    pub param_types: Vec<TypeExpr>,
    pub body: ErasedTerm,
}

/// Shape of a list-like datatype: a nullary constructor and a binary one
/// whose second field is the datatype itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListShape {
    pub nil: String,
    pub cons: String,
}

#[derive(Debug, Clone, Default)]
pub struct ErasedProgram {
    pub funs: BTreeMap<String, ErasedFun>,
    /// Top-level `val`s in declaration order.
    pub vals: Vec<(Vec<String>, ErasedTerm)>,
    /// Constructor arities.
    pub ctors: HashMap<String, usize>,
    /// List-like datatypes by name.
    pub lists: HashMap<String, ListShape>,
}

impl ErasedProgram {
    pub fn list_shape_of_ctor(&self, ctor: &str) -> Option<&ListShape> {
        self.lists.values().find(|l| l.nil == ctor || l.cons == ctor)
    }
}

/// Lowers erased declarations. Constructor aliases are resolved here.
pub fn lower(decls: &[Declaration]) -> Result<ErasedProgram, EraseError> {
    let mut program = ErasedProgram::default();
    let mut aliases = HashMap::new();
    for d in decls {
        match &d.kind {
            DeclKind::Datatype(data) => {
                for c in &data.ctors {
                    program.ctors.insert(c.name.clone(), c.fields.as_ref().map_or(0, |f| f.values.len()));
                }
                if let Some(shape) = list_shape(data) {
                    program.lists.insert(data.name.clone(), shape);
                }
            }
            DeclKind::Alias { name, target } => {
                aliases.insert(name.clone(), target.clone());
            }
            _ => {}
        }
    }
    // aliases of static constructors are irrelevant at run time
    aliases.retain(|_, target| program.ctors.contains_key(target));
    let globals: HashSet<String> = decls
        .iter()
        .flat_map(|d| match &d.kind {
            DeclKind::Funs(g) => g.defs.iter().map(|f| f.name.clone()).collect(),
            DeclKind::Val { binds } => binds.iter().flat_map(|(p, _)| p.values.clone()).collect(),
            _ => vec![],
        })
        .collect();
    let lw = Lower { ctors: &program.ctors, aliases: &aliases, globals: &globals };
    let mut funs = BTreeMap::new();
    let mut vals = Vec::new();
    for d in decls {
        match &d.kind {
            DeclKind::Funs(g) => {
                for f in lw.group(g, &mut Vec::new())? {
                    funs.insert(f.name.clone(), f);
                }
            }
            DeclKind::Val { binds } => {
                for (p, e) in binds {
                    vals.push((p.values.clone(), lw.expr(e, &mut Vec::new())?));
                }
            }
            _ => {}
        }
    }
    program.funs = funs;
    program.vals = vals;
    Ok(program)
}

fn list_shape(data: &DataDecl) -> Option<ListShape> {
    let [a, b] = data.ctors.as_slice() else { return None };
    let arity = |c: &ConDecl| c.fields.as_ref().map_or(0, |f| f.values.len());
    let (nil, cons) = match (arity(a), arity(b)) {
        (0, 2) => (a, b),
        (2, 0) => (b, a),
        _ => return None,
    };
    let tail = &cons.fields.as_ref()?.values[1];
    matches!(tail, TypeExpr::Named { name, .. } if *name == data.name)
        .then(|| ListShape { nil: nil.name.clone(), cons: cons.name.clone() })
}

struct Lower<'a> {
    ctors: &'a HashMap<String, usize>,
    aliases: &'a HashMap<String, String>,
    globals: &'a HashSet<String>,
}

impl Lower<'_> {
    fn ctor(&self, name: &str) -> Option<String> {
        let name = self.aliases.get(name).map(String::as_str).unwrap_or(name);
        self.ctors.contains_key(name).then(|| name.to_string())
    }

    fn group(&self, g: &FunGroup, scope: &mut Vec<String>) -> Result<Vec<ErasedFun>, EraseError> {
        let mark = scope.len();
        scope.extend(g.defs.iter().map(|f| f.name.clone()));
        let mut out = Vec::new();
        for f in &g.defs {
            let inner = scope.len();
            scope.extend(f.params.values.iter().map(|p| p.name.clone()));
            let body = self.expr(&f.body, scope)?;
            scope.truncate(inner);
            out.push(ErasedFun {
                name: f.name.clone(),
                params: f.params.values.iter().map(|p| p.name.clone()).collect(),
                param_types: f.params.values.iter().map(|p| p.ty.clone()).collect(),
                body,
            });
        }
        scope.truncate(mark);
        Ok(out)
    }

    fn expr(&self, e: &Expr, scope: &mut Vec<String>) -> Result<ErasedTerm, EraseError> {
        let local = |scope: &Vec<String>, n: &str| scope.iter().any(|s| s == n);
        Ok(match e {
            Expr::Var(name, loc) => {
                if local(scope, name) || self.globals.contains(name) {
                    ErasedTerm::Var(name.clone())
                } else if let Some(c) = self.ctor(name) {
                    ErasedTerm::Con(c, vec![])
                } else {
                    return Err(EraseError::Unresolved { name: name.clone(), loc: loc.clone() });
                }
            }
            Expr::Int(n, _) => ErasedTerm::Int(n.clone()),
            Expr::Bool(b, _) => ErasedTerm::Bool(*b),
            Expr::App { head, args, loc, .. } => {
                let args = args.iter().map(|a| self.expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
                if local(scope, head) || self.globals.contains(head) {
                    ErasedTerm::Call(head.clone(), args)
                } else if let Some(c) = self.ctor(head) {
                    ErasedTerm::Con(c, args)
                } else {
                    return Err(EraseError::Unresolved { name: head.clone(), loc: loc.clone() });
                }
            }
            Expr::Tuple { values, .. } => {
                ErasedTerm::Tuple(values.iter().map(|v| self.expr(v, scope)).collect::<Result<_, _>>()?)
            }
            Expr::BinOp { op, lhs, rhs, .. } => {
                ErasedTerm::BinOp(*op, Box::new(self.expr(lhs, scope)?), Box::new(self.expr(rhs, scope)?))
            }
            Expr::UnOp { op, arg, .. } => ErasedTerm::UnOp(*op, Box::new(self.expr(arg, scope)?)),
            Expr::If { cond, then_branch, else_branch, .. } => ErasedTerm::If(
                Box::new(self.expr(cond, scope)?),
                Box::new(self.expr(then_branch, scope)?),
                Box::new(self.expr(else_branch, scope)?),
            ),
            Expr::Case { scrutinee, arms, .. } => {
                let scrutinee = self.expr(scrutinee, scope)?;
                let mut out = Vec::new();
                for a in arms {
                    let (ctor, vars) = match &a.pat {
                        Pattern::Wild(_) => (None, vec![]),
                        Pattern::Con { name, args, loc, .. } => {
                            let c = self
                                .ctor(name)
                                .ok_or_else(|| EraseError::Unresolved { name: name.clone(), loc: loc.clone() })?;
                            (Some(c), args.clone())
                        }
                    };
                    let mark = scope.len();
                    scope.extend(vars.iter().cloned());
                    let body = self.expr(&a.body, scope)?;
                    scope.truncate(mark);
                    out.push(ErasedArm { ctor, vars, body });
                }
                ErasedTerm::Case(Box::new(scrutinee), out)
            }
            Expr::Let { decls, body, .. } => {
                let mark = scope.len();
                let mut binds = Vec::new();
                for d in decls {
                    match d {
                        LocalDecl::Val { binds: bs, .. } => {
                            let mut group = Vec::new();
                            for (p, e) in bs {
                                group.push((p.values.clone(), self.expr(e, scope)?));
                            }
                            for (p, _) in bs {
                                scope.extend(p.values.iter().cloned());
                            }
                            binds.push(ErasedBind::Val(group));
                        }
                        LocalDecl::Funs(g) => {
                            let funs = self.group(g, scope)?;
                            scope.extend(g.defs.iter().map(|f| f.name.clone()));
                            binds.push(ErasedBind::Funs(funs));
                        }
                        LocalDecl::Prval { loc, .. } => {
                            return Err(EraseError::Residue { what: "prval".into(), loc: loc.clone() })
                        }
                    }
                }
                let body = self.expr(body, scope)?;
                scope.truncate(mark);
                ErasedTerm::Let(binds, Box::new(body))
            }
            Expr::Lam { params, body, .. } => {
                let mark = scope.len();
                let names: Vec<String> = params.values.iter().map(|p| p.name.clone()).collect();
                scope.extend(names.iter().cloned());
                let body = self.expr(body, scope)?;
                scope.truncate(mark);
                ErasedTerm::Lam(names, Box::new(body))
            }
        })
    }
}

/// The result of erasing a checked file.
#[derive(Debug, Clone)]
pub struct Erased {
    /// The file's own declarations, proof-free.
    pub decls: Vec<Declaration>,
    /// Prelude and file together, ready to run.
    pub program: ErasedProgram,
}

/// Erases an accepted file and audits the result for proof residue.
pub fn erase(checked: &Checked) -> Result<Erased, EraseError> {
    if !checked.accepted() {
        return Err(EraseError::Rejected);
    }
    let names = ProofNames::collect(checked.prelude.iter().chain(&checked.decls));
    let prelude = erase_decls(&checked.prelude, &names, &checked.sites);
    let decls = erase_decls(&checked.decls, &names, &checked.sites);
    audit_residue(&prelude, &names)?;
    audit_residue(&decls, &names)?;
    let all: Vec<Declaration> = prelude.into_iter().chain(decls.iter().cloned()).collect();
    let program = lower(&all)?;
    Ok(Erased { decls, program })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{check_source, default_prelude};
    use crate::printer::{print_expr, print_program};

    fn erased(src: &str) -> Erased {
        let checked = check_source(Some(&default_prelude()), src, "t.mats");
        assert!(checked.accepted(), "{:?}", checked.report.diagnostics);
        erase(&checked).unwrap()
    }

    #[test]
    fn proving_tuple_collapses_to_its_value() {
        let e = erased("fun f () : [ys:ilist] (SORT (nil, ys) | glist (int, ys)) = (SORT_nil () | nil ())");
        let DeclKind::Funs(g) = &e.decls[0].kind else { panic!() };
        assert_eq!(print_expr(&g.defs[0].body), "nil ()");
        assert_eq!(crate::printer::print_type(&g.defs[0].ret), "[ys:ilist] glist (int, ys)");
    }

    #[test]
    fn proof_functions_and_lemmas_vanish() {
        let e = erased("absprop Q (int)\npraxi q {n:int} () : Q (n)\nprfun p {n:int} () : Q (n) = q {n} ()\nfun f (x: int) : int = x");
        assert_eq!(e.decls.len(), 1);
        assert!(print_program(&e.decls).starts_with("fun f"));
    }

    #[test]
    fn rejected_programs_are_not_erased() {
        let checked = check_source(None, "fun f (x: int) : bool = x", "t.mats");
        assert_eq!(erase(&checked).unwrap_err(), EraseError::Rejected);
    }

    #[test]
    fn residue_is_reported() {
        let decls = crate::parser::parse_source("fun f (x: int) : int = let prval p = q () in x end", "t").unwrap();
        let names = ProofNames::default();
        assert!(matches!(audit_residue(&decls, &names), Err(EraseError::Residue { .. })));
    }
}
