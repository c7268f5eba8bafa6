//! Checking and synthesis for dynamic terms.

use std::collections::HashMap;

use crate::ast::{Arm, BinOp, Expr, FunGroup, FunKind, LocalDecl, Loc, Pattern, UnOp, ValPat};
use crate::diag::{DiagKind, Diagnostic};
use crate::solver::{solve, Atom, Constraint};
use crate::statics::{Sort, StaticTerm};
use crate::types::{display_name, DType};

use super::elab::FunSig;
use super::{fail, Binding, CResult, Checker, Ctx, Facts, FunInfo, HeadKind, Mode};

/// What an application head resolved to.
struct Head {
    ty: DType,
    kind: HeadKind,
    binding: Binding,
    /// Proof-level heads take proofs without a bar.
    proofs_only: bool,
}

fn mode_error(name: &str, binding: Binding, mode: Mode, loc: &Loc) -> Option<super::Fail> {
    match (binding, mode) {
        (Binding::Proof, Mode::Program) => Some(fail(
            DiagKind::ProofInProgramPosition,
            loc,
            format!("proof `{name}` is used where a program value is required"),
        )),
        (Binding::Program, Mode::Proof) => Some(fail(
            DiagKind::ProgramInProofPosition,
            loc,
            format!("program `{name}` is used where a proof is required"),
        )),
        _ => None,
    }
}

/// Peels existential binders and assertions, returning them for rewrapping.
fn peel(t: DType, binders: &mut Vec<(String, Sort)>, asserts: &mut Vec<StaticTerm>) -> DType {
    match t {
        DType::Exists(v, s, body) => {
            binders.push((v, s));
            peel(*body, binders, asserts)
        }
        DType::Asserting(g, body) => {
            asserts.push(g);
            peel(*body, binders, asserts)
        }
        other => other,
    }
}

fn rewrap(binders: Vec<(String, Sort)>, asserts: Vec<StaticTerm>, body: DType) -> DType {
    let body = asserts.into_iter().rev().fold(body, |acc, g| DType::Asserting(g, Box::new(acc)));
    binders.into_iter().rev().fold(body, |acc, (v, s)| DType::Exists(v, s, Box::new(acc)))
}

fn is_literal(t: &StaticTerm) -> bool {
    matches!(crate::statics::normalize_static(t), StaticTerm::Int(_))
}

impl Checker {
    pub(crate) fn check_top_funs(&mut self, group: &FunGroup) -> CResult<()> {
        let mut ctx = Ctx::default();
        self.check_fun_group(&mut ctx, group, true)
    }

    pub(crate) fn check_top_val(&mut self, binds: &[(ValPat, Expr)], loc: &Loc) -> CResult<()> {
        let ctx = Ctx::default();
        let mut out = Vec::new();
        for (pat, e) in binds {
            let ty = self.synth(&ctx, e, Mode::Program)?;
            let ty = self.zonk_type(&HashMap::new(), &ty);
            match (pat.proofs.as_ref(), pat.values.as_slice()) {
                (None, [x]) => out.push((x.clone(), ty)),
                _ => {
                    return Err(fail(DiagKind::TypeError, loc, "top-level values bind a single name"));
                }
            }
        }
        for (x, ty) in out {
            self.env.globals.insert(x, ty);
        }
        Ok(())
    }

    fn check_fun_group(&mut self, ctx: &mut Ctx, group: &FunGroup, top: bool) -> CResult<()> {
        let mut scope = ctx.scope.clone();
        let mut tvars = Vec::new();
        for a in &group.tparams {
            let internal = self.fresh(a);
            scope.types.push((a.clone(), DType::TVar(internal.clone())));
            tvars.push(internal);
        }
        let mut sigs = Vec::new();
        for def in &group.defs {
            sigs.push(self.elab_fun_sig(&scope, &tvars, def, group.kind)?);
        }
        let (binding, kind) = match group.kind {
            FunKind::Fun => (Binding::Program, HeadKind::Function),
            FunKind::Prfun => (Binding::Proof, HeadKind::ProofFun),
        };
        for sig in &sigs {
            if top {
                self.env.funs.insert(
                    sig.name.clone(),
                    FunInfo { ty: sig.ty.clone(), kind: group.kind, arity: (sig.proofs.len(), sig.values.len()) },
                );
            } else {
                ctx.dyns.push((sig.name.clone(), sig.ty.clone(), binding, kind));
            }
        }
        for (sig, def) in sigs.iter().zip(&group.defs) {
            self.check_fun_body(ctx, sig, &def.body)?;
        }
        Ok(())
    }

    fn check_fun_body(&mut self, outer: &Ctx, sig: &FunSig, body: &Expr) -> CResult<()> {
        let mut ctx = outer.clone();
        ctx.scope = sig.scope.clone();
        for item in &sig.tele {
            match item {
                super::elab::Tele::Var(v, s) if *s != Sort::Type => ctx.facts.vars.push((v.clone(), s.clone())),
                super::elab::Tele::Var(..) => {}
                super::elab::Tele::Guard(g) => ctx.facts.hyps.push(g.clone()),
            }
        }
        let mut binds = Vec::new();
        for (name, ty) in &sig.proofs {
            let t = self.open(&mut ctx.facts, ty);
            binds.push((name.clone(), t, Binding::Proof));
        }
        for (name, ty) in &sig.values {
            let t = self.open(&mut ctx.facts, ty);
            binds.push((name.clone(), t, Binding::Program));
        }
        for (name, t, b) in binds {
            let kind = if b == Binding::Proof { HeadKind::ProofFun } else { HeadKind::Function };
            ctx.dyns.push((name, t, b, kind));
        }
        let mode = if sig.kind == FunKind::Prfun { Mode::Proof } else { Mode::Program };
        self.check(&ctx, body, &sig.ret, mode)
    }

    /// Checks `e` against `expected`.
    pub(crate) fn check(&mut self, ctx: &Ctx, e: &Expr, expected: &DType, mode: Mode) -> CResult<()> {
        let expected = self.zonk_type(&ctx.facts.refine, expected);
        if matches!(expected, DType::Forall(..) | DType::Guarded(..)) && matches!(e, Expr::Lam { .. }) {
            let mut inner = ctx.clone();
            let t = self.skolemize(&mut inner.facts, &expected);
            return self.check(&inner, e, &t, mode);
        }
        match e {
            Expr::If { cond, then_branch, else_branch, loc } => {
                let (inner, b) = self.synth_cond(ctx, cond, loc)?;
                let mut then_ctx = inner.clone();
                then_ctx.facts.hyps.push(b.clone());
                self.check(&then_ctx, then_branch, &expected, mode)?;
                let mut else_ctx = inner;
                else_ctx.facts.hyps.push(StaticTerm::not(b));
                self.check(&else_ctx, else_branch, &expected, mode)
            }
            Expr::Case { scrutinee, arms, loc } => self.check_case(ctx, scrutinee, arms, &expected, mode, loc),
            Expr::Let { decls, body, .. } => {
                let mut inner = ctx.clone();
                for d in decls {
                    self.local_decl(&mut inner, d)?;
                }
                self.check(&inner, body, &expected, mode)
            }
            Expr::Tuple { proofs, values, loc } => self.check_tuple(ctx, proofs.as_deref(), values, &expected, mode, loc),
            Expr::Lam { params, body, loc, .. } => {
                let DType::Fun { proofs, args, ret } = &expected else {
                    return Err(fail(DiagKind::TypeError, loc, format!("expected {expected}, found a function")));
                };
                if proofs.len() != params.proofs.len() || args.len() != params.values.len() {
                    return Err(fail(DiagKind::TypeError, loc, format!("function arity does not match {expected}")));
                }
                let mut inner = ctx.clone();
                for (p, t) in params.proofs.iter().zip(proofs) {
                    let annotated = self.elab_type(&inner.scope, &p.ty)?;
                    self.subsume(&inner.facts, t, &annotated, loc)?;
                    let t = self.open(&mut inner.facts, t);
                    inner.dyns.push((p.name.clone(), t, Binding::Proof, HeadKind::ProofFun));
                }
                for (p, t) in params.values.iter().zip(args) {
                    let annotated = self.elab_type(&inner.scope, &p.ty)?;
                    self.subsume(&inner.facts, t, &annotated, loc)?;
                    let t = self.open(&mut inner.facts, t);
                    inner.dyns.push((p.name.clone(), t, Binding::Program, HeadKind::Function));
                }
                self.check(&inner, body, ret, mode)
            }
            _ => {
                let actual = self.synth(ctx, e, mode)?;
                self.subsume(&ctx.facts, &actual, &expected, e.loc())
            }
        }
    }

    /// Synthesizes a condition of type `bool(B)`; the returned context
    /// contains the opened witnesses.
    fn synth_cond(&mut self, ctx: &Ctx, cond: &Expr, loc: &Loc) -> CResult<(Ctx, StaticTerm)> {
        let t = self.synth(ctx, cond, Mode::Program)?;
        let mut inner = ctx.clone();
        match self.open(&mut inner.facts, &t) {
            DType::Bool(b) => Ok((inner, b)),
            other => Err(fail(DiagKind::TypeError, loc, format!("expected bool, found {other}"))),
        }
    }

    fn check_tuple(
        &mut self,
        ctx: &Ctx,
        proofs: Option<&[Expr]>,
        values: &[Expr],
        expected: &DType,
        mode: Mode,
        loc: &Loc,
    ) -> CResult<()> {
        let mut asserts = Vec::new();
        let mut t = expected.clone();
        loop {
            t = match t {
                DType::Exists(v, s, body) => {
                    let m = self.fresh_flex(&v, &s);
                    if s == Sort::Type {
                        body.subst_types(&HashMap::from([(v, DType::TVar(m))]))
                    } else {
                        body.subst(&HashMap::from([(v, StaticTerm::Var(m))]))
                    }
                }
                DType::Asserting(g, body) => {
                    asserts.push(g);
                    *body
                }
                other => break t = other,
            };
        }
        match (proofs, &t) {
            (Some(ps), DType::Proving { proofs: pts, values: vts }) if ps.len() == pts.len() => {
                self.check_values(ctx, values, vts, mode, loc)?;
                for (p, pt) in ps.iter().zip(pts) {
                    self.check(ctx, p, pt, Mode::Proof)?;
                }
            }
            (None, DType::Tuple(ts)) if ts.len() == values.len() => {
                for (v, vt) in values.iter().zip(ts) {
                    self.check(ctx, v, vt, mode)?;
                }
            }
            (None, DType::Proving { proofs: pts, values: vts }) if pts.is_empty() => {
                self.check_values(ctx, values, vts, mode, loc)?;
            }
            _ => {
                let e = Expr::Tuple { proofs: proofs.map(<[Expr]>::to_vec), values: values.to_vec(), loc: loc.clone() };
                let actual = self.synth(ctx, &e, mode)?;
                self.subsume(&ctx.facts, &actual, &t, loc)?;
            }
        }
        for g in asserts {
            self.emit(ctx, g, loc, "asserted property");
        }
        Ok(())
    }

    fn check_values(&mut self, ctx: &Ctx, values: &[Expr], types: &[DType], mode: Mode, loc: &Loc) -> CResult<()> {
        match (values, types) {
            ([v], [t]) => self.check(ctx, v, t, mode),
            (vs, ts) if vs.len() == ts.len() => {
                for (v, t) in vs.iter().zip(ts) {
                    self.check(ctx, v, t, mode)?;
                }
                Ok(())
            }
            (vs, [t]) => {
                let e = Expr::Tuple { proofs: None, values: vs.to_vec(), loc: loc.clone() };
                self.check(ctx, &e, t, mode)
            }
            (vs, ts) => Err(fail(
                DiagKind::TypeError,
                loc,
                format!("expected {} value component(s), found {}", ts.len(), vs.len()),
            )),
        }
    }

    /// Synthesizes the type of `e`.
    pub(crate) fn synth(&mut self, ctx: &Ctx, e: &Expr, mode: Mode) -> CResult<DType> {
        match e {
            Expr::Var(x, loc) => self.synth_var(ctx, x, mode, loc),
            Expr::Int(n, loc) => {
                self.program_only(mode, &n.to_string(), loc)?;
                Ok(DType::Int(StaticTerm::Int(n.clone())))
            }
            Expr::Bool(b, loc) => {
                self.program_only(mode, &b.to_string(), loc)?;
                Ok(DType::Bool(StaticTerm::Bool(*b)))
            }
            Expr::BinOp { op, lhs, rhs, loc } => {
                self.program_only(mode, op.symbol(), loc)?;
                let l = self.synth(ctx, lhs, mode)?;
                let r = self.synth(ctx, rhs, mode)?;
                self.binop_type(ctx, *op, l, r, loc)
            }
            Expr::UnOp { op, arg, loc } => {
                self.program_only(mode, if *op == UnOp::Neg { "-" } else { "~" }, loc)?;
                let t = self.synth(ctx, arg, mode)?;
                let t = self.zonk_type(&ctx.facts.refine, &t);
                let (mut bs, mut asserts) = (Vec::new(), Vec::new());
                let body = match (op, peel(t, &mut bs, &mut asserts)) {
                    (UnOp::Neg, DType::Int(i)) => DType::Int(StaticTerm::con("neg", vec![i])),
                    (UnOp::Not, DType::Bool(b)) => DType::Bool(StaticTerm::not(b)),
                    (_, other) => {
                        return Err(fail(DiagKind::TypeError, loc, format!("operand has unexpected type {other}")));
                    }
                };
                Ok(rewrap(bs, asserts, body))
            }
            Expr::App { head, statics, proofs, args, bar, loc } => {
                self.synth_app(ctx, head, statics, proofs, args, *bar, mode, loc)
            }
            Expr::Tuple { proofs, values, .. } => {
                let mut vs = Vec::new();
                for v in values {
                    vs.push(self.synth(ctx, v, mode)?);
                }
                match proofs {
                    None => Ok(if vs.len() == 1 { vs.remove(0) } else { DType::Tuple(vs) }),
                    Some(ps) => {
                        let mut pts = Vec::new();
                        for p in ps {
                            pts.push(self.synth(ctx, p, Mode::Proof)?);
                        }
                        Ok(DType::Proving { proofs: pts, values: vs })
                    }
                }
            }
            Expr::Let { decls, body, .. } => {
                let mut inner = ctx.clone();
                for d in decls {
                    self.local_decl(&mut inner, d)?;
                }
                self.synth(&inner, body, mode)
            }
            Expr::If { cond, then_branch, else_branch, loc } => {
                let (inner, b) = self.synth_cond(ctx, cond, loc)?;
                let mut then_ctx = inner.clone();
                then_ctx.facts.hyps.push(b.clone());
                let t1 = self.synth(&then_ctx, then_branch, mode)?;
                let mut else_ctx = inner;
                else_ctx.facts.hyps.push(StaticTerm::not(b));
                let t2 = self.synth(&else_ctx, else_branch, mode)?;
                let t1 = self.zonk_type(&ctx.facts.refine, &t1);
                let t2 = self.zonk_type(&ctx.facts.refine, &t2);
                if t1 == t2 {
                    Ok(t1)
                } else {
                    Err(fail(DiagKind::TypeError, loc, "cannot infer the type of a conditional; add an annotation"))
                }
            }
            Expr::Case { loc, .. } => {
                Err(fail(DiagKind::TypeError, loc, "cannot infer the type of a case expression; add an annotation"))
            }
            Expr::Lam { params, ret, body, loc } => {
                let Some(ret) = ret else {
                    return Err(fail(DiagKind::TypeError, loc, "anonymous functions need a return annotation"));
                };
                let mut inner = ctx.clone();
                let mut pts = Vec::new();
                let mut vts = Vec::new();
                for p in &params.proofs {
                    let t = self.elab_type(&ctx.scope, &p.ty)?;
                    pts.push(t.clone());
                    let t = self.open(&mut inner.facts, &t);
                    inner.dyns.push((p.name.clone(), t, Binding::Proof, HeadKind::ProofFun));
                }
                for p in &params.values {
                    let t = self.elab_type(&ctx.scope, &p.ty)?;
                    vts.push(t.clone());
                    let t = self.open(&mut inner.facts, &t);
                    inner.dyns.push((p.name.clone(), t, Binding::Program, HeadKind::Function));
                }
                let ret = self.elab_type(&ctx.scope, ret)?;
                self.check(&inner, body, &ret, mode)?;
                Ok(DType::Fun { proofs: pts, args: vts, ret: Box::new(ret) })
            }
        }
    }

    fn program_only(&self, mode: Mode, what: &str, loc: &Loc) -> CResult<()> {
        match mode_error(what, Binding::Program, mode, loc) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn binop_type(&mut self, ctx: &Ctx, op: BinOp, l: DType, r: DType, loc: &Loc) -> CResult<DType> {
        let l = self.zonk_type(&ctx.facts.refine, &l);
        let r = self.zonk_type(&ctx.facts.refine, &r);
        let (mut bs, mut asserts) = (Vec::new(), Vec::new());
        let l = peel(l, &mut bs, &mut asserts);
        let r = peel(r, &mut bs, &mut asserts);
        let body = match (op, l, r) {
            (BinOp::Add | BinOp::Sub, DType::Int(a), DType::Int(b)) => DType::Int(StaticTerm::binop(op.symbol(), a, b)),
            (BinOp::Mul, DType::Int(a), DType::Int(b)) => {
                if is_literal(&a) || is_literal(&b) {
                    DType::Int(StaticTerm::binop("*", a, b))
                } else {
                    let v = self.fresh_var("i", &Sort::Int);
                    DType::plain_int(v)
                }
            }
            (op, DType::Int(a), DType::Int(b)) if op.is_comparison() => {
                DType::Bool(StaticTerm::binop(op.symbol(), a, b))
            }
            (BinOp::Eq, DType::Bool(a), DType::Bool(b)) => DType::Bool(StaticTerm::not(StaticTerm::and(
                StaticTerm::not(StaticTerm::and(a.clone(), b.clone())),
                StaticTerm::not(StaticTerm::and(StaticTerm::not(a), StaticTerm::not(b))),
            ))),
            (BinOp::And, DType::Bool(a), DType::Bool(b)) => DType::Bool(StaticTerm::and(a, b)),
            (BinOp::Or, DType::Bool(a), DType::Bool(b)) => {
                DType::Bool(StaticTerm::not(StaticTerm::and(StaticTerm::not(a), StaticTerm::not(b))))
            }
            (op, l, r) => {
                return Err(fail(
                    DiagKind::TypeError,
                    loc,
                    format!("operator `{}` cannot be applied to {l} and {r}", op.symbol()),
                ))
            }
        };
        Ok(rewrap(bs, asserts, body))
    }

    fn synth_var(&mut self, ctx: &Ctx, x: &str, mode: Mode, loc: &Loc) -> CResult<DType> {
        if let Some((_, ty, binding, _)) = ctx.lookup_dyn(x) {
            if let Some(e) = mode_error(x, *binding, mode, loc) {
                return Err(e);
            }
            return Ok(ty.clone());
        }
        let name = self.env.resolve_dyn(x);
        if let Some(info) = self.env.funs.get(&name) {
            let binding = if info.kind == FunKind::Prfun { Binding::Proof } else { Binding::Program };
            if let Some(e) = mode_error(x, binding, mode, loc) {
                return Err(e);
            }
            return Ok(info.ty.clone());
        }
        if let Some(ty) = self.env.globals.get(&name) {
            if let Some(e) = mode_error(x, Binding::Program, mode, loc) {
                return Err(e);
            }
            return Ok(ty.clone());
        }
        if self.env.ctors.contains_key(&name) || self.env.lemmas.contains_key(&name) {
            return self.synth_app(ctx, x, &[], &[], &[], false, mode, loc);
        }
        Err(fail(DiagKind::UnboundVar, loc, format!("unbound variable `{x}`")))
    }

    fn resolve_head(&self, ctx: &Ctx, name: &str, loc: &Loc) -> CResult<Head> {
        if let Some((_, ty, binding, kind)) = ctx.lookup_dyn(name) {
            return Ok(Head { ty: ty.clone(), kind: *kind, binding: *binding, proofs_only: *binding == Binding::Proof });
        }
        let resolved = self.env.resolve_dyn(name);
        if let Some(info) = self.env.funs.get(&resolved) {
            let proof = info.kind == FunKind::Prfun;
            return Ok(Head {
                ty: info.ty.clone(),
                kind: if proof { HeadKind::ProofFun } else { HeadKind::Function },
                binding: if proof { Binding::Proof } else { Binding::Program },
                proofs_only: proof,
            });
        }
        if let Some(c) = self.env.ctors.get(&resolved) {
            return Ok(Head {
                ty: c.ty.clone(),
                kind: if c.is_prop { HeadKind::ProofFun } else { HeadKind::DataCon },
                binding: if c.is_prop { Binding::Proof } else { Binding::Program },
                proofs_only: c.is_prop,
            });
        }
        if let Some(l) = self.env.lemmas.get(&resolved) {
            return Ok(Head { ty: l.ty.clone(), kind: HeadKind::ProofFun, binding: Binding::Proof, proofs_only: true });
        }
        if let Some(ty) = self.env.globals.get(&resolved) {
            return Ok(Head { ty: ty.clone(), kind: HeadKind::Function, binding: Binding::Program, proofs_only: false });
        }
        Err(fail(DiagKind::UnboundVar, loc, format!("unbound function `{name}`")))
    }

    #[allow(clippy::too_many_arguments)]
    fn synth_app(
        &mut self,
        ctx: &Ctx,
        name: &str,
        statics: &[StaticTerm],
        proofs: &[Expr],
        args: &[Expr],
        bar: bool,
        mode: Mode,
        loc: &Loc,
    ) -> CResult<DType> {
        let head = self.resolve_head(ctx, name, loc)?;
        if let Some(e) = mode_error(name, head.binding, mode, loc) {
            return Err(e);
        }
        let mut explicit = Vec::new();
        let sorts = index_binder_sorts(&head.ty);
        if statics.len() > sorts.len() {
            return Err(fail(DiagKind::TypeError, loc, format!("too many static arguments for `{name}`")));
        }
        for (s, sort) in statics.iter().zip(&sorts) {
            explicit.push(self.elab_term(&ctx.scope, s, Some(sort), loc)?.0);
        }
        let what = format!("`{}`", display_name(name));
        let (ty, indices) = self.instantiate(&ctx.facts, &head.ty, &explicit, loc, &what)?;
        let ty = self.zonk_type(&ctx.facts.refine, &ty);
        let DType::Fun { proofs: pts, args: ats, ret } = ty else {
            return Err(fail(DiagKind::TypeError, loc, format!("{what} is not a function; it has type {ty}")));
        };
        if head.binding == Binding::Program && !pts.is_empty() && !indices.is_empty() {
            self.pending_sites.push(super::PendingSite {
                loc: loc.clone(),
                indices,
                refine: ctx.facts.refine.clone(),
                scope: ctx.scope.statics.clone(),
            });
        }
        let (proof_args, value_args): (&[Expr], &[Expr]) =
            if !bar && head.proofs_only { (args, &[]) } else { (proofs, args) };
        if proof_args.len() != pts.len() || value_args.len() != ats.len() {
            return Err(fail(
                DiagKind::TypeError,
                loc,
                format!(
                    "{what} expects {} proof(s) and {} value(s), found {} and {}",
                    pts.len(),
                    ats.len(),
                    proof_args.len(),
                    value_args.len()
                ),
            ));
        }
        let value_mode = if head.kind == HeadKind::ProofFun { Mode::Proof } else { Mode::Program };
        for (a, t) in value_args.iter().zip(&ats) {
            self.check(ctx, a, t, value_mode)?;
        }
        for (p, t) in proof_args.iter().zip(&pts) {
            self.check(ctx, p, t, Mode::Proof)?;
        }
        self.flush_deferred(false)?;
        Ok(*ret)
    }

    fn local_decl(&mut self, ctx: &mut Ctx, d: &LocalDecl) -> CResult<()> {
        match d {
            LocalDecl::Val { binds, .. } => {
                let mut types = Vec::new();
                for (_, e) in binds {
                    types.push(self.synth(ctx, e, Mode::Program)?);
                }
                for ((pat, e), ty) in binds.iter().zip(types) {
                    self.bind_val(ctx, pat, &ty, e.loc())?;
                }
                Ok(())
            }
            LocalDecl::Prval { names, expr, loc } => {
                let ty = self.synth(ctx, expr, Mode::Proof)?;
                self.flush_deferred(false)?;
                let t = self.open(&mut ctx.facts, &ty);
                if let [name] = names.as_slice() {
                    self.push_dyn(ctx, name, t, Binding::Proof);
                    return Ok(());
                }
                let parts = match t {
                    DType::Tuple(items) if items.len() == names.len() => items,
                    DType::Proving { proofs, values } if values.is_empty() && proofs.len() == names.len() => proofs,
                    other => {
                        return Err(fail(
                            DiagKind::TypeError,
                            loc,
                            format!("cannot bind {} proofs to a value of type {other}", names.len()),
                        ))
                    }
                };
                for (n, p) in names.iter().zip(parts) {
                    let p = self.open(&mut ctx.facts, &p);
                    self.push_dyn(ctx, n, p, Binding::Proof);
                }
                Ok(())
            }
            LocalDecl::Funs(group) => self.check_fun_group(ctx, group, false),
        }
    }

    fn push_dyn(&mut self, ctx: &mut Ctx, name: &str, ty: DType, binding: Binding) {
        if name == "_" {
            return;
        }
        let kind = if binding == Binding::Proof { HeadKind::ProofFun } else { HeadKind::Function };
        ctx.dyns.push((name.to_string(), ty, binding, kind));
    }

    fn bind_val(&mut self, ctx: &mut Ctx, pat: &ValPat, ty: &DType, loc: &Loc) -> CResult<()> {
        let t = self.open(&mut ctx.facts, ty);
        let (proof_types, value_types) = match (&pat.proofs, t) {
            (None, DType::Proving { values, .. }) => (vec![], values),
            (None, t) if pat.values.len() == 1 => (vec![], vec![t]),
            (None, DType::Tuple(items)) => (vec![], items),
            (Some(_), DType::Proving { proofs, values }) => (proofs, values),
            (_, other) => {
                return Err(fail(DiagKind::TypeError, loc, format!("pattern does not match a value of type {other}")))
            }
        };
        let value_types = if pat.values.len() != value_types.len() && value_types.len() == 1 {
            match self.open(&mut ctx.facts, &value_types[0]) {
                DType::Tuple(items) => items,
                other => vec![other],
            }
        } else {
            value_types
        };
        let proof_names = pat.proofs.clone().unwrap_or_default();
        if proof_names.len() != proof_types.len() || pat.values.len() != value_types.len() {
            return Err(fail(
                DiagKind::TypeError,
                loc,
                format!(
                    "pattern binds {} proof(s) and {} value(s), but the value provides {} and {}",
                    proof_names.len(),
                    pat.values.len(),
                    proof_types.len(),
                    value_types.len()
                ),
            ));
        }
        for (n, t) in proof_names.iter().zip(proof_types) {
            let t = self.open(&mut ctx.facts, &t);
            self.push_dyn(ctx, n, t, Binding::Proof);
        }
        for (n, t) in pat.values.iter().zip(value_types) {
            let t = self.open(&mut ctx.facts, &t);
            let binding = if t.is_prop() { Binding::Proof } else { Binding::Program };
            self.push_dyn(ctx, n, t, binding);
        }
        Ok(())
    }

    fn check_case(
        &mut self,
        ctx: &Ctx,
        scrutinee: &Expr,
        arms: &[Arm],
        expected: &DType,
        mode: Mode,
        loc: &Loc,
    ) -> CResult<()> {
        let st = self.synth(ctx, scrutinee, mode)?;
        self.flush_deferred(false)?;
        let mut base = ctx.clone();
        let st = self.open(&mut base.facts, &st);
        let (owner, targs, indices) = match &st {
            DType::Data { name, targs, indices } => (name.clone(), targs.clone(), indices.clone()),
            DType::Prop { name, indices } if self.env.datas.contains_key(name) => {
                (name.clone(), vec![], indices.clone())
            }
            other => {
                return Err(fail(DiagKind::TypeError, scrutinee.loc(), format!("cannot match on a value of type {other}")))
            }
        };
        let ctor_names = self.env.datas[&owner].ctors.clone();
        let mut covered: Vec<String> = Vec::new();
        let mut wildcard = false;
        for arm in arms {
            match &arm.pat {
                Pattern::Wild(_) => {
                    wildcard = true;
                    self.check(&base, &arm.body, expected, mode)?;
                }
                Pattern::Con { name, proofs, args, bar, loc: ploc } => {
                    let cname = self.env.resolve_dyn(name);
                    let Some(sig) = self.env.ctors.get(&cname).cloned() else {
                        return Err(fail(DiagKind::UnboundVar, ploc, format!("unknown constructor `{name}`")));
                    };
                    if sig.owner != owner {
                        return Err(fail(
                            DiagKind::TypeError,
                            ploc,
                            format!("constructor `{name}` does not belong to {owner}"),
                        ));
                    }
                    covered.push(cname.clone());
                    let mut arm_ctx = base.clone();
                    let Some((pts, vts)) = self.refine_ctor(&mut arm_ctx.facts, &sig, &targs, &indices, ploc)? else {
                        self.warnings.push(Diagnostic::warning(
                            DiagKind::RedundantArm,
                            ploc,
                            format!("arm `{name}` can never match a value of type {st}"),
                        ));
                        continue;
                    };
                    if self.inconsistent(&arm_ctx.facts) {
                        self.warnings.push(Diagnostic::warning(
                            DiagKind::RedundantArm,
                            ploc,
                            format!("arm `{name}` is unreachable: its index constraints are inconsistent"),
                        ));
                        continue;
                    }
                    let (proof_names, value_names): (&[String], &[String]) =
                        if !bar && sig.is_prop { (args, &[]) } else { (proofs, args) };
                    if proof_names.len() != pts.len() || value_names.len() != vts.len() {
                        return Err(fail(
                            DiagKind::TypeError,
                            ploc,
                            format!(
                                "constructor `{name}` has {} proof and {} value field(s)",
                                pts.len(),
                                vts.len()
                            ),
                        ));
                    }
                    for (n, t) in proof_names.iter().zip(pts) {
                        let t = self.open(&mut arm_ctx.facts, &t);
                        self.push_dyn(&mut arm_ctx, n, t, Binding::Proof);
                    }
                    for (n, t) in value_names.iter().zip(vts) {
                        let t = self.open(&mut arm_ctx.facts, &t);
                        self.push_dyn(&mut arm_ctx, n, t, Binding::Program);
                    }
                    self.check(&arm_ctx, &arm.body, expected, mode)?;
                }
            }
        }
        if wildcard {
            return Ok(());
        }
        let mut missing = Vec::new();
        for c in ctor_names.iter().filter(|c| !covered.contains(c)) {
            let sig = self.env.ctors[c].clone();
            let mut scratch = base.facts.clone();
            match self.refine_ctor(&mut scratch, &sig, &targs, &indices, loc)? {
                None => {}
                Some(_) if self.inconsistent(&scratch) => {}
                Some(_) => missing.push(c.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(fail(
                DiagKind::NonExhaustiveMatch,
                loc,
                format!("match on {st} is not exhaustive; missing {}", missing.join(", ")),
            ));
        }
        Ok(())
    }

    /// Opens a constructor against the scrutinee's indices. Returns `None`
    /// when the constructor's result clashes with the indices, otherwise
    /// the field types.
    fn refine_ctor(
        &mut self,
        facts: &mut Facts,
        sig: &super::ConSig,
        targs: &[DType],
        indices: &[StaticTerm],
        loc: &Loc,
    ) -> CResult<Option<(Vec<DType>, Vec<DType>)>> {
        let mut t = sig.ty.clone();
        let mut targs = targs.iter();
        loop {
            t = match t {
                DType::Forall(v, Sort::Type, body) => {
                    let Some(arg) = targs.next() else {
                        return Err(fail(DiagKind::TypeError, loc, "type arguments do not match the constructor"));
                    };
                    body.subst_types(&HashMap::from([(v, arg.clone())]))
                }
                DType::Forall(v, s, body) => {
                    let r = self.fresh_rigid(&v, &s, facts);
                    body.subst(&HashMap::from([(v, StaticTerm::Var(r))]))
                }
                DType::Guarded(g, body) => {
                    facts.hyps.push(g);
                    *body
                }
                other => break t = other,
            };
        }
        let DType::Fun { proofs, args, ret } = t else {
            return Err(fail(DiagKind::TypeError, loc, "malformed constructor type"));
        };
        let result_indices = match *ret {
            DType::Data { indices, .. } | DType::Prop { indices, .. } => indices,
            _ => vec![],
        };
        for (a, b) in result_indices.iter().zip(indices) {
            if !self.refine_index(facts, a, b) {
                return Ok(None);
            }
        }
        Ok(Some((proofs, args)))
    }

    /// Records `a = b` as pattern-match knowledge; `false` on a clash.
    fn refine_index(&mut self, facts: &mut Facts, a: &StaticTerm, b: &StaticTerm) -> bool {
        let a = self.zonk_term(&facts.refine, a);
        let b = self.zonk_term(&facts.refine, b);
        if a == b {
            return true;
        }
        let sort = self.env.sig.sort_of(&self.var_sorts, &a).unwrap_or(Sort::Int);
        match sort {
            Sort::Data(_) => match (&a, &b) {
                (StaticTerm::Con(c1, xs), StaticTerm::Con(c2, ys)) => {
                    if c1 != c2 || xs.len() != ys.len() {
                        return false;
                    }
                    xs.iter().zip(ys).all(|(x, y)| self.refine_index(facts, x, y))
                }
                (StaticTerm::Var(v), t) | (t, StaticTerm::Var(v)) if !v.starts_with('?') => {
                    if t.mentions(v) {
                        return false;
                    }
                    facts.refine.insert(v.clone(), t.clone());
                    true
                }
                _ => {
                    facts.data_hyps.push((a, b));
                    true
                }
            },
            Sort::Int => {
                facts.hyps.push(StaticTerm::binop("=", a, b));
                true
            }
            Sort::Bool => {
                facts.hyps.push(StaticTerm::not(StaticTerm::and(a.clone(), StaticTerm::not(b.clone()))));
                facts.hyps.push(StaticTerm::not(StaticTerm::and(b, StaticTerm::not(a))));
                true
            }
            _ => true,
        }
    }

    /// Whether the solver refutes the facts outright.
    fn inconsistent(&self, facts: &Facts) -> bool {
        let (vars, hyps) = self.constraint_context(facts);
        if hyps.iter().any(|h| match h {
            Atom::Lin { expr, .. } => expr.terms.iter().any(|(t, _)| t.free_vars().iter().any(|v| v.starts_with('?'))),
            Atom::DataEq(l, r) => l.free_vars().iter().chain(r.free_vars().iter()).any(|v| v.starts_with('?')),
            _ => false,
        }) {
            return false;
        }
        let mut c = Constraint { vars, hyps, goal: Atom::False };
        super::extend_vars(&mut c, &self.var_sorts);
        solve(&c).is_valid()
    }
}

/// Sorts of the index binders of a head type, in instantiation order.
fn index_binder_sorts(t: &DType) -> Vec<Sort> {
    let mut out = Vec::new();
    let mut t = t;
    loop {
        match t {
            DType::Forall(_, Sort::Type, body) | DType::Guarded(_, body) => t = body,
            DType::Forall(_, s, body) => {
                out.push(s.clone());
                t = body;
            }
            _ => return out,
        }
    }
}
