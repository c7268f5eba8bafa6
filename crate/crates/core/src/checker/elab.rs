//! Elaboration of declarations, sorts, static terms and surface types.

use std::collections::HashSet;

use crate::ast::{
    ConDecl, DataDecl, DeclKind, Declaration, FunDef, FunKind, Loc, QuantGroup, SortExpr, SortParam,
    TypeExpr,
};
use crate::diag::DiagKind;
use crate::statics::{is_builtin_op, DatasortDef, Sort, StaticTerm, StaticsError};
use crate::types::DType;

use super::{fail, CResult, Checker, DataInfo, Scope, Typedef};

/// Kind of a parameter of a type or prop constructor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Type,
    Index(Sort),
}

/// Elaborated constructor of a datatype or dataprop.
#[derive(Clone, Debug)]
pub struct ConSig {
    pub name: String,
    pub owner: String,
    pub is_prop: bool,
    /// Internal names of the owner's type parameters.
    pub tparams: Vec<String>,
    pub telescope: Vec<(String, Sort)>,
    pub guards: Vec<StaticTerm>,
    pub proofs: Vec<DType>,
    pub values: Vec<DType>,
    pub result: DType,
    /// The full quantified constructor type.
    pub ty: DType,
    pub loc: Loc,
}

/// An external lemma, trusted as an axiom.
#[derive(Clone, Debug)]
pub struct LemmaSig {
    pub name: String,
    pub telescope: Vec<(String, Sort)>,
    pub guards: Vec<StaticTerm>,
    pub premises: Vec<DType>,
    pub conclusion: DType,
    pub ty: DType,
    pub loc: Loc,
}

/// One entry of an elaborated quantifier telescope.
#[derive(Clone, Debug)]
pub(crate) enum Tele {
    Var(String, Sort),
    Guard(StaticTerm),
}

pub(crate) fn wrap_forall(tele: &[Tele], body: DType) -> DType {
    tele.iter().rev().fold(body, |acc, item| match item {
        Tele::Var(v, s) => DType::Forall(v.clone(), s.clone(), Box::new(acc)),
        Tele::Guard(g) => DType::Guarded(g.clone(), Box::new(acc)),
    })
}

pub(crate) fn wrap_exists(tele: &[Tele], body: DType) -> DType {
    tele.iter().rev().fold(body, |acc, item| match item {
        Tele::Var(v, s) => DType::Exists(v.clone(), s.clone(), Box::new(acc)),
        Tele::Guard(g) => DType::Asserting(g.clone(), Box::new(acc)),
    })
}

fn split_tele(tele: &[Tele]) -> (Vec<(String, Sort)>, Vec<StaticTerm>) {
    let mut vars = Vec::new();
    let mut guards = Vec::new();
    for item in tele {
        match item {
            Tele::Var(v, s) => vars.push((v.clone(), s.clone())),
            Tele::Guard(g) => guards.push(g.clone()),
        }
    }
    (vars, guards)
}

/// A function signature elaborated in the scope its body is checked in.
#[derive(Clone, Debug)]
pub(crate) struct FunSig {
    pub name: String,
    pub kind: FunKind,
    pub scope: Scope,
    pub tele: Vec<Tele>,
    pub proofs: Vec<(String, DType)>,
    pub values: Vec<(String, DType)>,
    pub ret: DType,
    pub ty: DType,
}

fn statics_error(loc: &Loc, e: StaticsError) -> super::Fail {
    let kind = match e {
        StaticsError::UnboundStaticVar(_) => DiagKind::UnboundStaticVar,
        _ => DiagKind::SortError,
    };
    fail(kind, loc, crate::types::display_name(&e.to_string()))
}

impl Checker {
    pub(crate) fn declaration(&mut self, decl: &Declaration) -> CResult<()> {
        let loc = &decl.loc;
        match &decl.kind {
            DeclKind::Datasort { name, ctors } => self.declare_datasort(name, ctors, loc),
            DeclKind::Datatype(d) => self.elaborate_data(d, false, loc).map(|_| ()),
            DeclKind::Dataprop(d) => self.elaborate_data(d, true, loc).map(|_| ()),
            DeclKind::Absprop { name, params } => {
                self.check_fresh_type_name(name, loc)?;
                let mut sorts = Vec::new();
                for p in params {
                    match self.param_kind(p, loc)? {
                        ParamKind::Index(s) => sorts.push(s),
                        ParamKind::Type => {
                            return Err(fail(DiagKind::SortError, loc, "abstract props take index parameters only"))
                        }
                    }
                }
                self.env.absprops.insert(name.clone(), sorts);
                Ok(())
            }
            DeclKind::Abstype { name, params } => {
                self.check_fresh_type_name(name, loc)?;
                let kinds = params.iter().map(|p| self.param_kind(p, loc)).collect::<CResult<Vec<_>>>()?;
                self.env.abstypes.insert(name.clone(), kinds);
                Ok(())
            }
            DeclKind::Typedef { name, params, body } => {
                self.check_fresh_type_name(name, loc)?;
                let mut named = Vec::new();
                for (i, p) in params.iter().enumerate() {
                    let pname = p.name.clone().unwrap_or_else(|| format!("_{i}"));
                    named.push((pname, self.param_kind(p, loc)?));
                }
                self.env.typedefs.insert(name.clone(), Typedef { params: named, body: body.clone() });
                Ok(())
            }
            DeclKind::Alias { name, target } => self.declare_alias(name, target, loc),
            DeclKind::Praxi { name, quants, premises, conclusion } => {
                self.register_lemma(name, quants, premises, conclusion, loc).map(|_| ())
            }
            DeclKind::Funs(group) => self.check_top_funs(group),
            DeclKind::Val { binds } => self.check_top_val(binds, loc),
        }
    }

    fn check_fresh_type_name(&self, name: &str, loc: &Loc) -> CResult<()> {
        let env = &self.env;
        if env.datas.contains_key(name)
            || env.absprops.contains_key(name)
            || env.abstypes.contains_key(name)
            || env.typedefs.contains_key(name)
        {
            return Err(fail(DiagKind::DuplicateDeclaration, loc, format!("`{name}` is already declared")));
        }
        Ok(())
    }

    fn declare_datasort(&mut self, name: &str, ctors: &[(String, Vec<SortExpr>)], loc: &Loc) -> CResult<()> {
        if self.env.sig.has_datasort(name) {
            return Err(fail(DiagKind::DuplicateDeclaration, loc, format!("datasort `{name}` is already declared")));
        }
        let mut constructors = Vec::new();
        for (c, args) in ctors {
            if self.env.sig.is_constructor(c) || constructors.iter().any(|(n, _): &(String, _)| n == c) {
                return Err(fail(DiagKind::DuplicateConstructor, loc, format!("static constructor `{c}` is already declared")));
            }
            let mut sorts = Vec::new();
            for a in args {
                let sort = match a {
                    SortExpr::Named(n) if n == name => Sort::Data(name.to_string()),
                    other => self.sort_expr(other, loc)?.0,
                };
                sorts.push(sort);
            }
            constructors.push((c.clone(), sorts));
        }
        self.env
            .sig
            .declare_datasort(DatasortDef { name: name.to_string(), constructors })
            .map_err(|e| statics_error(loc, e))
    }

    fn declare_alias(&mut self, name: &str, target: &str, loc: &Loc) -> CResult<()> {
        let env = &mut self.env;
        let static_target = env.static_aliases.get(target).cloned().unwrap_or_else(|| target.to_string());
        if env.sig.is_constructor(&static_target) {
            env.static_aliases.insert(name.to_string(), static_target);
            return Ok(());
        }
        let dyn_target = env.resolve_dyn(target);
        if env.ctors.contains_key(&dyn_target) || env.funs.contains_key(&dyn_target) || env.lemmas.contains_key(&dyn_target) {
            env.dyn_aliases.insert(name.to_string(), dyn_target);
            return Ok(());
        }
        let type_target = env.type_aliases.get(target).cloned().unwrap_or_else(|| target.to_string());
        if env.datas.contains_key(&type_target)
            || env.typedefs.contains_key(&type_target)
            || env.absprops.contains_key(&type_target)
            || env.abstypes.contains_key(&type_target)
        {
            env.type_aliases.insert(name.to_string(), type_target);
            return Ok(());
        }
        Err(fail(DiagKind::UnboundVar, loc, format!("alias target `{target}` is not declared")))
    }

    /// Resolves a surface sort; the flag records the `nat` sugar.
    pub(crate) fn sort_expr(&self, s: &SortExpr, loc: &Loc) -> CResult<(Sort, bool)> {
        match s {
            SortExpr::Named(n) if n == "nat" => Ok((Sort::Int, true)),
            SortExpr::Named(n) => self.env.sig.resolve_sort_name(n).map(|s| (s, false)).map_err(|e| statics_error(loc, e)),
            SortExpr::Arrow(a, b) => {
                let (a, _) = self.sort_expr(a, loc)?;
                let (b, _) = self.sort_expr(b, loc)?;
                Ok((Sort::Arrow(Box::new(a), Box::new(b)), false))
            }
        }
    }

    fn param_kind(&self, p: &SortParam, loc: &Loc) -> CResult<ParamKind> {
        match self.sort_expr(&p.sort, loc)? {
            (Sort::Type, _) => Ok(ParamKind::Type),
            (s, _) => Ok(ParamKind::Index(s)),
        }
    }

    /// Elaborates quantifier groups that together form one telescope,
    /// extending `scope` with the bound names.
    pub(crate) fn elab_quants(&mut self, scope: &mut Scope, groups: &[QuantGroup], loc: &Loc) -> CResult<Vec<Tele>> {
        let mut seen = HashSet::new();
        let mut tele = Vec::new();
        for group in groups {
            for (v, se) in &group.vars {
                if !seen.insert(v.clone()) {
                    return Err(fail(DiagKind::SortError, loc, format!("static variable `{v}` is bound twice in one telescope")));
                }
                let (sort, nat) = self.sort_expr(se, loc)?;
                match sort {
                    Sort::Type => {
                        let internal = self.fresh(v);
                        scope.types.push((v.clone(), DType::TVar(internal.clone())));
                        tele.push(Tele::Var(internal, Sort::Type));
                    }
                    Sort::Arrow(..) => {
                        return Err(fail(
                            DiagKind::SortError,
                            loc,
                            format!("quantification over the arrow sort `{sort}` is not supported"),
                        ))
                    }
                    sort => {
                        let internal = self.fresh_var(v, &sort);
                        scope.statics.push((v.clone(), StaticTerm::Var(internal.clone()), sort.clone()));
                        tele.push(Tele::Var(internal.clone(), sort));
                        if nat {
                            tele.push(Tele::Guard(StaticTerm::binop(">=", StaticTerm::Var(internal), StaticTerm::int(0))));
                        }
                    }
                }
            }
            if let Some(g) = &group.guard {
                let (g, _) = self.elab_term(scope, g, Some(&Sort::Bool), loc)?;
                tele.push(Tele::Guard(g));
            }
        }
        Ok(tele)
    }

    /// Resolves surface names in a static term and checks its sort.
    pub(crate) fn elab_term(
        &mut self,
        scope: &Scope,
        t: &StaticTerm,
        expected: Option<&Sort>,
        loc: &Loc,
    ) -> CResult<(StaticTerm, Sort)> {
        let resolved = self.resolve_static(scope, t, &mut Vec::new(), loc)?;
        let sort = self.env.sig.sort_of(&self.var_sorts, &resolved).map_err(|e| statics_error(loc, e))?;
        if let Some(want) = expected {
            if *want != sort {
                return Err(fail(
                    DiagKind::SortError,
                    loc,
                    format!("sort mismatch in `{t}`: expected {want}, found {sort}"),
                ));
            }
        }
        Ok((resolved, sort))
    }

    fn resolve_static(&self, scope: &Scope, t: &StaticTerm, locals: &mut Vec<String>, loc: &Loc) -> CResult<StaticTerm> {
        Ok(match t {
            StaticTerm::Var(n) => {
                if locals.contains(n) {
                    t.clone()
                } else if let Some((_, term, _)) = scope.lookup_static(n) {
                    term.clone()
                } else {
                    let c = self.env.static_aliases.get(n).unwrap_or(n);
                    if self.env.sig.is_constructor(c) {
                        StaticTerm::Con(c.clone(), vec![])
                    } else {
                        return Err(fail(DiagKind::UnboundStaticVar, loc, format!("unbound static variable `{n}`")));
                    }
                }
            }
            StaticTerm::Con(c, args) => {
                let c = if is_builtin_op(c) { c.clone() } else { self.env.static_aliases.get(c).unwrap_or(c).clone() };
                let args = args.iter().map(|a| self.resolve_static(scope, a, locals, loc)).collect::<CResult<_>>()?;
                StaticTerm::Con(c, args)
            }
            StaticTerm::Lam(v, s, body) => {
                let s = match s {
                    Sort::Data(n) if !self.env.sig.has_datasort(n) => {
                        return Err(fail(DiagKind::SortError, loc, format!("unknown sort `{n}`")))
                    }
                    other => other.clone(),
                };
                locals.push(v.clone());
                let body = self.resolve_static(scope, body, locals, loc);
                locals.pop();
                StaticTerm::Lam(v.clone(), s, Box::new(body?))
            }
            StaticTerm::App(f, a) => StaticTerm::App(
                Box::new(self.resolve_static(scope, f, locals, loc)?),
                Box::new(self.resolve_static(scope, a, locals, loc)?),
            ),
            other => other.clone(),
        })
    }

    /// Elaborates a surface type.
    pub(crate) fn elab_type(&mut self, scope: &Scope, t: &TypeExpr) -> CResult<DType> {
        match t {
            TypeExpr::Named { name, args, loc } => self.elab_named(scope, name, args, loc),
            TypeExpr::Tuple { proofs: None, values } => {
                let mut vs = values.iter().map(|v| self.elab_type(scope, v)).collect::<CResult<Vec<_>>>()?;
                Ok(if vs.len() == 1 { vs.remove(0) } else { DType::Tuple(vs) })
            }
            TypeExpr::Tuple { proofs: Some(proofs), values } => {
                let proofs = proofs.iter().map(|p| self.elab_type(scope, p)).collect::<CResult<Vec<_>>>()?;
                let values = values.iter().map(|v| self.elab_type(scope, v)).collect::<CResult<Vec<_>>>()?;
                Ok(DType::Proving { proofs, values })
            }
            TypeExpr::Fun { proofs, args, ret, .. } => {
                let proofs = proofs.iter().map(|p| self.elab_type(scope, p)).collect::<CResult<Vec<_>>>()?;
                let args = args.iter().map(|a| self.elab_type(scope, a)).collect::<CResult<Vec<_>>>()?;
                let ret = self.elab_type(scope, ret)?;
                Ok(DType::Fun { proofs, args, ret: Box::new(ret) })
            }
            TypeExpr::Forall(group, body) => {
                let mut inner = scope.clone();
                let tele = self.elab_quants(&mut inner, std::slice::from_ref(group), &Loc::internal())?;
                let body = self.elab_type(&inner, body)?;
                Ok(wrap_forall(&tele, body))
            }
            TypeExpr::Exists(group, body) => {
                let mut inner = scope.clone();
                let tele = self.elab_quants(&mut inner, std::slice::from_ref(group), &Loc::internal())?;
                let body = self.elab_type(&inner, body)?;
                Ok(wrap_exists(&tele, body))
            }
        }
    }

    fn elab_type_arg(&mut self, scope: &Scope, arg: &StaticTerm, loc: &Loc) -> CResult<DType> {
        match arg {
            StaticTerm::Var(n) => self.elab_named(scope, n, &[], loc),
            StaticTerm::Con(n, args) if !is_builtin_op(n) => self.elab_named(scope, n, args, loc),
            other => Err(fail(DiagKind::SortError, loc, format!("expected a type, found `{other}`"))),
        }
    }

    fn elab_named(&mut self, scope: &Scope, name: &str, args: &[StaticTerm], loc: &Loc) -> CResult<DType> {
        if args.is_empty() {
            if let Some(t) = scope.lookup_type(name) {
                return Ok(t.clone());
            }
        }
        let singleton = |this: &mut Self, sort: Sort, base: &str| -> CResult<DType> {
            match args {
                [] => {
                    let v = this.fresh_var(base, &sort);
                    let body = match sort {
                        Sort::Int => DType::Int(StaticTerm::Var(v.clone())),
                        Sort::Bool => DType::Bool(StaticTerm::Var(v.clone())),
                        _ => DType::Ptr(StaticTerm::Var(v.clone())),
                    };
                    Ok(DType::Exists(v, sort, Box::new(body)))
                }
                [a] => {
                    let (term, _) = this.elab_term(scope, a, Some(&sort), loc)?;
                    Ok(match sort {
                        Sort::Int => DType::Int(term),
                        Sort::Bool => DType::Bool(term),
                        _ => DType::Ptr(term),
                    })
                }
                _ => Err(fail(DiagKind::TypeError, loc, format!("`{name}` takes at most one index"))),
            }
        };
        match name {
            "int" => return singleton(self, Sort::Int, "i"),
            "bool" => return singleton(self, Sort::Bool, "b"),
            "ptr" => return singleton(self, Sort::Addr, "l"),
            _ => {}
        }
        let name = self.env.type_aliases.get(name).cloned().unwrap_or_else(|| name.to_string());
        if let Some(td) = self.env.typedefs.get(&name).cloned() {
            if td.params.len() != args.len() {
                return Err(arity(&name, td.params.len(), args.len(), loc));
            }
            let mut inner = Scope::default();
            for ((pname, kind), arg) in td.params.iter().zip(args) {
                match kind {
                    ParamKind::Type => {
                        let ty = self.elab_type_arg(scope, arg, loc)?;
                        inner.types.push((pname.clone(), ty));
                    }
                    ParamKind::Index(s) => {
                        let (term, _) = self.elab_term(scope, arg, Some(s), loc)?;
                        inner.statics.push((pname.clone(), term, s.clone()));
                    }
                }
            }
            return self.elab_type(&inner, &td.body);
        }
        let kinds: Vec<ParamKind>;
        let shape: u8;
        if let Some(info) = self.env.datas.get(&name) {
            kinds = info.params.clone();
            shape = if info.is_prop { 1 } else { 0 };
        } else if let Some(sorts) = self.env.absprops.get(&name) {
            kinds = sorts.iter().cloned().map(ParamKind::Index).collect();
            shape = 1;
        } else if let Some(ks) = self.env.abstypes.get(&name) {
            kinds = ks.clone();
            shape = 2;
        } else {
            return Err(fail(DiagKind::TypeError, loc, format!("unknown type `{name}`")));
        }
        if kinds.len() != args.len() {
            return Err(arity(&name, kinds.len(), args.len(), loc));
        }
        let mut targs = Vec::new();
        let mut indices = Vec::new();
        for (kind, arg) in kinds.iter().zip(args) {
            match kind {
                ParamKind::Type => targs.push(self.elab_type_arg(scope, arg, loc)?),
                ParamKind::Index(s) => indices.push(self.elab_term(scope, arg, Some(s), loc)?.0),
            }
        }
        Ok(match shape {
            0 => DType::Data { name, targs, indices },
            1 => DType::Prop { name, indices },
            _ => self.abs_type(name, targs, indices),
        })
    }

    /// Builds an abstract type application, identifying `E(int, x)` with
    /// `int(x)`.
    pub(crate) fn abs_type(&self, name: String, targs: Vec<DType>, indices: Vec<StaticTerm>) -> DType {
        if self.env.is_int_named(&name) && targs.len() == 1 && targs[0].is_plain_int() {
            return DType::Int(indices[0].clone());
        }
        DType::Abs { name, targs, indices }
    }

    /// Elaborates a datatype or dataprop and registers its constructors.
    pub fn elaborate_data(&mut self, d: &DataDecl, is_prop: bool, loc: &Loc) -> CResult<Vec<ConSig>> {
        self.check_fresh_type_name(&d.name, loc)?;
        let kinds = d.params.iter().map(|p| self.param_kind(p, loc)).collect::<CResult<Vec<_>>>()?;
        if is_prop && kinds.contains(&ParamKind::Type) {
            return Err(fail(DiagKind::SortError, loc, "dataprops take index parameters only"));
        }
        let tparams: Vec<String> =
            kinds.iter().filter(|k| **k == ParamKind::Type).map(|_| self.fresh("a")).collect();
        self.env.datas.insert(
            d.name.clone(),
            DataInfo {
                name: d.name.clone(),
                is_prop,
                params: kinds.clone(),
                ctors: d.ctors.iter().map(|c| c.name.clone()).collect(),
            },
        );
        let mut sigs = Vec::new();
        let mut seen = HashSet::new();
        for c in &d.ctors {
            if !seen.insert(c.name.clone()) || self.env.ctors.contains_key(&c.name) {
                self.env.datas.remove(&d.name);
                return Err(fail(DiagKind::DuplicateConstructor, &c.loc, format!("constructor `{}` is already declared", c.name)));
            }
            match self.elab_con(d, is_prop, &kinds, &tparams, c) {
                Ok(sig) => sigs.push(sig),
                Err(e) => {
                    self.env.datas.remove(&d.name);
                    return Err(e);
                }
            }
        }
        for sig in &sigs {
            self.env.ctors.insert(sig.name.clone(), sig.clone());
        }
        Ok(sigs)
    }

    fn elab_con(
        &mut self,
        d: &DataDecl,
        is_prop: bool,
        kinds: &[ParamKind],
        tparams: &[String],
        c: &ConDecl,
    ) -> CResult<ConSig> {
        let loc = &c.loc;
        if c.indices.len() != kinds.len() {
            return Err(arity(&d.name, kinds.len(), c.indices.len(), loc));
        }
        let mut scope = Scope::default();
        let mut tp = tparams.iter();
        for (kind, idx) in kinds.iter().zip(&c.indices) {
            if *kind == ParamKind::Type {
                let internal = tp.next().expect("one internal name per type parameter");
                match idx {
                    StaticTerm::Var(v) => scope.types.push((v.clone(), DType::TVar(internal.clone()))),
                    other => {
                        return Err(fail(DiagKind::SortError, loc, format!("expected a type variable, found `{other}`")))
                    }
                }
            }
        }
        let tele = self.elab_quants(&mut scope, &c.quants, loc)?;
        let mut indices = Vec::new();
        for (kind, idx) in kinds.iter().zip(&c.indices) {
            if let ParamKind::Index(s) = kind {
                indices.push(self.elab_term(&scope, idx, Some(s), loc)?.0);
            }
        }
        let fields = c.fields.clone().unwrap_or_default();
        let mut proofs = fields.proofs.iter().map(|t| self.elab_type(&scope, t)).collect::<CResult<Vec<_>>>()?;
        let mut values = fields.values.iter().map(|t| self.elab_type(&scope, t)).collect::<CResult<Vec<_>>>()?;
        if is_prop {
            proofs.append(&mut values);
        }
        if let Some(bad) = proofs.iter().find(|p| !p.is_prop()) {
            return Err(fail(DiagKind::TypeError, loc, format!("proof field of `{}` has non-prop type {bad}", c.name)));
        }
        let result = if is_prop {
            DType::Prop { name: d.name.clone(), indices }
        } else {
            DType::Data { name: d.name.clone(), targs: tparams.iter().map(|a| DType::TVar(a.clone())).collect(), indices }
        };
        let fun = DType::Fun { proofs: proofs.clone(), args: values.clone(), ret: Box::new(result.clone()) };
        let ty = tparams
            .iter()
            .rev()
            .fold(wrap_forall(&tele, fun), |acc, a| DType::Forall(a.clone(), Sort::Type, Box::new(acc)));
        let (telescope, guards) = split_tele(&tele);
        Ok(ConSig {
            name: c.name.clone(),
            owner: d.name.clone(),
            is_prop,
            tparams: tparams.to_vec(),
            telescope,
            guards,
            proofs,
            values,
            result,
            ty,
            loc: loc.clone(),
        })
    }

    /// Registers an external lemma as an axiom.
    pub fn register_lemma(
        &mut self,
        name: &str,
        quants: &[QuantGroup],
        premises: &[TypeExpr],
        conclusion: &TypeExpr,
        loc: &Loc,
    ) -> CResult<LemmaSig> {
        if self.env.lemmas.contains_key(name) || self.env.ctors.contains_key(name) {
            return Err(fail(DiagKind::DuplicateLemma, loc, format!("lemma `{name}` is already declared")));
        }
        let mut scope = Scope::default();
        let tele = self.elab_quants(&mut scope, quants, loc)?;
        let premises = premises.iter().map(|p| self.elab_type(&scope, p)).collect::<CResult<Vec<_>>>()?;
        let conclusion = self.elab_type(&scope, conclusion)?;
        for t in premises.iter().chain(std::iter::once(&conclusion)) {
            if !t.is_prop() {
                return Err(fail(DiagKind::TypeError, loc, format!("lemma `{name}` mentions the program type {t}")));
            }
        }
        let fun = DType::Fun { proofs: premises.clone(), args: vec![], ret: Box::new(conclusion.clone()) };
        let ty = wrap_forall(&tele, fun);
        let (telescope, guards) = split_tele(&tele);
        let sig = LemmaSig { name: name.to_string(), telescope, guards, premises, conclusion, ty, loc: loc.clone() };
        self.env.lemmas.insert(name.to_string(), sig.clone());
        self.env.lemma_order.push(name.to_string());
        Ok(sig)
    }

    /// Elaborates the signature of one function of a group whose template
    /// parameters have already been bound in `outer`.
    pub(crate) fn elab_fun_sig(&mut self, outer: &Scope, tvars: &[String], def: &FunDef, kind: FunKind) -> CResult<FunSig> {
        let mut scope = outer.clone();
        let tele = self.elab_quants(&mut scope, &def.quants, &def.loc)?;
        let mut proofs = Vec::new();
        for p in &def.params.proofs {
            let ty = self.elab_type(&scope, &p.ty)?;
            if !ty.is_prop() {
                return Err(fail(DiagKind::TypeError, &def.loc, format!("proof parameter `{}` has non-prop type {ty}", p.name)));
            }
            proofs.push((p.name.clone(), ty));
        }
        let mut values = Vec::new();
        for p in &def.params.values {
            values.push((p.name.clone(), self.elab_type(&scope, &p.ty)?));
        }
        let ret = self.elab_type(&scope, &def.ret)?;
        if kind == FunKind::Prfun && (!values.is_empty() || !ret.is_prop()) {
            return Err(fail(DiagKind::TypeError, &def.loc, format!("proof function `{}` must map proofs to a prop", def.name)));
        }
        let fun = DType::Fun {
            proofs: proofs.iter().map(|(_, t)| t.clone()).collect(),
            args: values.iter().map(|(_, t)| t.clone()).collect(),
            ret: Box::new(ret.clone()),
        };
        let ty = tvars
            .iter()
            .rev()
            .fold(wrap_forall(&tele, fun), |acc, a| DType::Forall(a.clone(), Sort::Type, Box::new(acc)));
        Ok(FunSig {
            name: def.name.clone(),
            kind,
            scope,
            tele,
            proofs,
            values,
            ret,
            ty,
        })
    }
}

fn arity(name: &str, expected: usize, found: usize, loc: &Loc) -> super::Fail {
    fail(DiagKind::TypeError, loc, format!("`{name}` expects {expected} argument(s), found {found}"))
}
