//! Index unification, type subsumption and quantifier handling.

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ast::Loc;
use crate::diag::DiagKind;
use crate::statics::{linearize, LinExpr, Sort, StaticTerm};
use crate::types::{display_name, DType};

use super::{fail, CResult, Checker, Deferred, Facts, Obligation};

fn is_meta(t: &StaticTerm) -> Option<&str> {
    match t {
        StaticTerm::Var(v) if v.starts_with('?') => Some(v),
        _ => None,
    }
}

fn has_meta(t: &StaticTerm) -> bool {
    t.free_vars().iter().any(|v| v.starts_with('?'))
}

fn show(t: &StaticTerm) -> String {
    display_name(&t.to_string())
}

impl Checker {
    fn emit_in(&mut self, facts: &Facts, goal: StaticTerm, loc: &Loc, what: &str) {
        self.obligations.push(Obligation {
            facts: Rc::new(facts.clone()),
            goal,
            loc: loc.clone(),
            what: what.to_string(),
        });
    }

    fn sort_of_internal(&self, t: &StaticTerm) -> Sort {
        self.env.sig.sort_of(&self.var_sorts, t).unwrap_or(Sort::Int)
    }

    fn solve_meta(&mut self, m: &str, value: StaticTerm) {
        self.metas.insert(m.to_string(), value);
        self.open_metas.remove(m);
    }

    /// Makes two static terms equal: solves metas by first-order matching,
    /// decomposes datasort terms and emits arithmetic residues.
    pub(crate) fn unify_static(&mut self, facts: &Facts, a: &StaticTerm, b: &StaticTerm, loc: &Loc) -> CResult<()> {
        let a = self.zonk_term(&facts.refine, a);
        let b = self.zonk_term(&facts.refine, b);
        if a == b {
            return Ok(());
        }
        let sort = self.sort_of_internal(if is_meta(&a).is_some() { &b } else { &a });
        for (m, other) in [(&a, &b), (&b, &a)] {
            if let Some(m) = is_meta(m) {
                if !other.mentions(m) {
                    let m = m.to_string();
                    self.solve_meta(&m, other.clone());
                    return Ok(());
                }
            }
        }
        match sort {
            Sort::Data(_) => match (&a, &b) {
                (StaticTerm::Con(c1, xs), StaticTerm::Con(c2, ys)) if c1 == c2 && xs.len() == ys.len() => {
                    for (x, y) in xs.iter().zip(ys) {
                        self.unify_static(facts, x, y, loc)?;
                    }
                    Ok(())
                }
                _ => Err(fail(
                    DiagKind::TypeError,
                    loc,
                    format!("index mismatch: expected {}, found {}", show(&b), show(&a)),
                )),
            },
            Sort::Int => {
                if has_meta(&a) || has_meta(&b) {
                    let diff = linearize(&a).add(&linearize(&b), -1);
                    if let Some((m, sol)) = solve_linear(&diff) {
                        self.solve_meta(&m, sol);
                    } else {
                        self.defer(facts, a, b, loc);
                    }
                    Ok(())
                } else {
                    self.emit_in(facts, StaticTerm::binop("=", a, b), loc, "index equality");
                    Ok(())
                }
            }
            Sort::Bool => {
                if let (StaticTerm::Con(o1, xs), StaticTerm::Con(o2, ys)) = (&a, &b) {
                    if o1 == o2 && xs.len() == ys.len() && (has_meta(&a) || has_meta(&b)) {
                        for (x, y) in xs.iter().zip(ys) {
                            self.unify_static(facts, x, y, loc)?;
                        }
                        return Ok(());
                    }
                }
                if has_meta(&a) || has_meta(&b) {
                    self.defer(facts, a, b, loc);
                    return Ok(());
                }
                let mut left = facts.clone();
                left.hyps.push(a.clone());
                self.emit_in(&left, b.clone(), loc, "boolean index equality");
                let mut right = facts.clone();
                right.hyps.push(b);
                self.emit_in(&right, a, loc, "boolean index equality");
                Ok(())
            }
            other => Err(fail(
                DiagKind::TypeError,
                loc,
                format!("cannot equate indices of sort {other}: {} and {}", show(&a), show(&b)),
            )),
        }
    }

    fn defer(&mut self, facts: &Facts, lhs: StaticTerm, rhs: StaticTerm, loc: &Loc) {
        self.deferred.push(Deferred { facts: Rc::new(facts.clone()), lhs, rhs, loc: loc.clone() });
    }

    /// Retries deferred equations while they make progress. With `last`,
    /// equations that remain undetermined are reported.
    pub(crate) fn flush_deferred(&mut self, last: bool) -> CResult<()> {
        loop {
            let pending = std::mem::take(&mut self.deferred);
            if pending.is_empty() {
                return Ok(());
            }
            let before = self.metas.len();
            let count = pending.len();
            for d in pending {
                self.unify_static(&d.facts, &d.lhs, &d.rhs, &d.loc)?;
            }
            if self.metas.len() == before && self.deferred.len() == count {
                break;
            }
        }
        if last {
            if let Some(d) = self.deferred.first() {
                let lhs = self.zonk_term(&d.facts.refine, &d.lhs);
                let rhs = self.zonk_term(&d.facts.refine, &d.rhs);
                return Err(fail(
                    DiagKind::TypeError,
                    &d.loc,
                    format!("cannot infer the static indices in {} = {}", show(&lhs), show(&rhs)),
                ));
            }
        }
        Ok(())
    }

    /// Resolves metas in a type and re-applies the abstract-type rules.
    pub(crate) fn zonk_type(&self, refine: &HashMap<String, StaticTerm>, t: &DType) -> DType {
        let st = |x: &StaticTerm| self.zonk_term(refine, x);
        let many = |xs: &[StaticTerm]| xs.iter().map(|x| self.zonk_term(refine, x)).collect::<Vec<_>>();
        let tys = |xs: &[DType]| xs.iter().map(|x| self.zonk_type(refine, x)).collect::<Vec<_>>();
        match t {
            DType::TVar(v) => match self.type_metas.get(v) {
                Some(sol) => self.zonk_type(refine, sol),
                None => t.clone(),
            },
            DType::Int(i) => DType::Int(st(i)),
            DType::Bool(b) => DType::Bool(st(b)),
            DType::Ptr(l) => DType::Ptr(st(l)),
            DType::Data { name, targs, indices } => {
                DType::Data { name: name.clone(), targs: tys(targs), indices: many(indices) }
            }
            DType::Prop { name, indices } => DType::Prop { name: name.clone(), indices: many(indices) },
            DType::Abs { name, targs, indices } => self.abs_type(name.clone(), tys(targs), many(indices)),
            DType::Fun { proofs, args, ret } => {
                DType::Fun { proofs: tys(proofs), args: tys(args), ret: Box::new(self.zonk_type(refine, ret)) }
            }
            DType::Tuple(items) => DType::Tuple(tys(items)),
            DType::Proving { proofs, values } => DType::Proving { proofs: tys(proofs), values: tys(values) },
            DType::Guarded(g, b) => DType::Guarded(st(g), Box::new(self.zonk_type(refine, b))),
            DType::Asserting(g, b) => DType::Asserting(st(g), Box::new(self.zonk_type(refine, b))),
            DType::Forall(v, s, b) => DType::Forall(v.clone(), s.clone(), Box::new(self.zonk_type(refine, b))),
            DType::Exists(v, s, b) => DType::Exists(v.clone(), s.clone(), Box::new(self.zonk_type(refine, b))),
        }
    }

    /// Replaces the bound variable of a quantifier.
    fn bind(&self, v: &str, sort: &Sort, body: &DType, with: String) -> DType {
        if *sort == Sort::Type {
            body.subst_types(&HashMap::from([(v.to_string(), DType::TVar(with))]))
        } else {
            body.subst(&HashMap::from([(v.to_string(), StaticTerm::Var(with))]))
        }
    }

    /// Renames the leading universal binders of `t` apart.
    fn freshen(&mut self, t: &DType) -> DType {
        match t {
            DType::Forall(v, s, body) => {
                let n = if *s == Sort::Type { self.fresh(v) } else { self.fresh_var(v, s) };
                let body = self.bind(v, s, body, n.clone());
                DType::Forall(n, s.clone(), Box::new(self.freshen(&body)))
            }
            DType::Guarded(g, body) => DType::Guarded(g.clone(), Box::new(self.freshen(body))),
            other => other.clone(),
        }
    }

    pub(crate) fn fresh_rigid(&mut self, v: &str, sort: &Sort, facts: &mut Facts) -> String {
        if *sort == Sort::Type {
            return self.fresh(v);
        }
        let r = self.fresh_var(v, sort);
        facts.vars.push((r.clone(), sort.clone()));
        r
    }

    pub(crate) fn fresh_flex(&mut self, v: &str, sort: &Sort) -> String {
        if *sort == Sort::Type {
            return format!("?{}", self.fresh(v));
        }
        self.fresh_meta(v, sort)
    }

    /// Peels outer existentials and assertions into rigid variables and
    /// hypotheses.
    pub(crate) fn open(&mut self, facts: &mut Facts, t: &DType) -> DType {
        let mut t = self.zonk_type(&facts.refine, t);
        loop {
            t = match t {
                DType::Exists(v, s, body) => {
                    let r = self.fresh_rigid(&v, &s, facts);
                    self.bind(&v, &s, &body, r)
                }
                DType::Asserting(g, body) => {
                    facts.hyps.push(g);
                    *body
                }
                other => return other,
            };
        }
    }

    /// Peels outer universals and guards into rigid variables and
    /// hypotheses.
    pub(crate) fn skolemize(&mut self, facts: &mut Facts, t: &DType) -> DType {
        let mut t = self.zonk_type(&facts.refine, t);
        loop {
            t = match t {
                DType::Forall(v, s, body) => {
                    let r = self.fresh_rigid(&v, &s, facts);
                    self.bind(&v, &s, &body, r)
                }
                DType::Guarded(g, body) => {
                    facts.hyps.push(g);
                    *body
                }
                other => return other,
            };
        }
    }

    /// Instantiates outer universals; `explicit` supplies index arguments
    /// for non-type binders in order. Guards become obligations.
    pub(crate) fn instantiate(
        &mut self,
        facts: &Facts,
        t: &DType,
        explicit: &[StaticTerm],
        loc: &Loc,
        what: &str,
    ) -> CResult<(DType, Vec<StaticTerm>)> {
        // explicit terms may mention names that later binders reuse, as in a
        // recursive call that passes its own indices
        let mut t = if explicit.is_empty() { t.clone() } else { self.freshen(t) };
        let mut explicit = explicit.iter();
        let mut indices = Vec::new();
        loop {
            t = match t {
                DType::Forall(v, Sort::Type, body) => {
                    let m = self.fresh_flex(&v, &Sort::Type);
                    self.bind(&v, &Sort::Type, &body, m)
                }
                DType::Forall(v, s, body) => match explicit.next() {
                    Some(term) => {
                        indices.push(term.clone());
                        body.subst(&HashMap::from([(v.clone(), term.clone())]))
                    }
                    None => {
                        let m = self.fresh_flex(&v, &s);
                        indices.push(StaticTerm::Var(m.clone()));
                        self.bind(&v, &s, &body, m)
                    }
                },
                DType::Guarded(g, body) => {
                    self.emit_in(facts, g, loc, &format!("guard of {what}"));
                    *body
                }
                other => {
                    if explicit.next().is_some() {
                        return Err(fail(DiagKind::TypeError, loc, format!("too many static arguments for {what}")));
                    }
                    return Ok((other, indices));
                }
            };
        }
    }

    /// Checks that a value of type `actual` can be used at type `expected`.
    pub(crate) fn subsume(&mut self, facts: &Facts, actual: &DType, expected: &DType, loc: &Loc) -> CResult<()> {
        let mut local = facts.clone();
        let a = self.zonk_type(&facts.refine, actual);
        let e = self.zonk_type(&facts.refine, expected);
        self.sub(&mut local, a, e, loc)
    }

    fn mismatch(&self, facts: &Facts, a: &DType, e: &DType, loc: &Loc) -> super::Fail {
        let a = self.zonk_type(&facts.refine, a);
        let e = self.zonk_type(&facts.refine, e);
        fail(DiagKind::TypeError, loc, format!("expected {e}, found {a}"))
    }

    fn sub(&mut self, facts: &mut Facts, a: DType, e: DType, loc: &Loc) -> CResult<()> {
        let a = self.zonk_type(&facts.refine, &a);
        let e = self.zonk_type(&facts.refine, &e);
        if a == e {
            return Ok(());
        }
        match (a, e) {
            (DType::TVar(x), DType::TVar(y)) if x == y => Ok(()),
            (DType::TVar(m), other) | (other, DType::TVar(m)) if m.starts_with('?') => {
                if mentions_tvar(&other, &m) {
                    return Err(fail(DiagKind::TypeError, loc, "cannot construct an infinite type"));
                }
                self.type_metas.insert(m, other);
                Ok(())
            }
            (a, DType::Exists(v, s, body)) => {
                let m = self.fresh_flex(&v, &s);
                let body = self.bind(&v, &s, &body, m);
                self.sub(facts, a, body, loc)
            }
            (a, DType::Asserting(g, body)) => {
                self.sub(facts, a, *body, loc)?;
                self.emit_in(facts, g, loc, "asserted property");
                Ok(())
            }
            (DType::Exists(v, s, body), e) => {
                let r = self.fresh_rigid(&v, &s, facts);
                let body = self.bind(&v, &s, &body, r);
                self.sub(facts, body, e, loc)
            }
            (DType::Asserting(g, body), e) => {
                facts.hyps.push(g);
                self.sub(facts, *body, e, loc)
            }
            (a, DType::Forall(v, s, body)) => {
                let r = self.fresh_rigid(&v, &s, facts);
                let body = self.bind(&v, &s, &body, r);
                self.sub(facts, a, body, loc)
            }
            (a, DType::Guarded(g, body)) => {
                facts.hyps.push(g);
                self.sub(facts, a, *body, loc)
            }
            (DType::Forall(v, s, body), e) => {
                let m = self.fresh_flex(&v, &s);
                let body = self.bind(&v, &s, &body, m);
                self.sub(facts, body, e, loc)
            }
            (DType::Guarded(g, body), e) => {
                self.emit_in(facts, g, loc, "guard");
                self.sub(facts, *body, e, loc)
            }
            // an integer meets E(?a, i) before ?a is known: ?a must be int
            (DType::Int(x), DType::Abs { name, targs, indices }) | (DType::Abs { name, targs, indices }, DType::Int(x))
                if self.env.is_int_named(&name)
                    && matches!(targs.as_slice(), [DType::TVar(m)] if m.starts_with('?'))
                    && indices.len() == 1 =>
            {
                let DType::TVar(m) = &targs[0] else { unreachable!() };
                let v = self.fresh_var("n", &Sort::Int);
                let plain = DType::Exists(v.clone(), Sort::Int, Box::new(DType::Int(StaticTerm::Var(v))));
                self.type_metas.insert(m.clone(), plain);
                self.unify_static(facts, &x, &indices[0], loc)
            }
            (DType::Int(x), DType::Int(y)) | (DType::Bool(x), DType::Bool(y)) | (DType::Ptr(x), DType::Ptr(y)) => {
                self.unify_static(facts, &x, &y, loc)
            }
            (
                DType::Data { name: n1, targs: t1, indices: i1 },
                DType::Data { name: n2, targs: t2, indices: i2 },
            )
            | (
                DType::Abs { name: n1, targs: t1, indices: i1 },
                DType::Abs { name: n2, targs: t2, indices: i2 },
            ) if n1 == n2 && t1.len() == t2.len() && i1.len() == i2.len() => {
                for (x, y) in t1.into_iter().zip(t2) {
                    self.sub(facts, x, y, loc)?;
                }
                for (x, y) in i1.iter().zip(&i2) {
                    self.unify_static(facts, x, y, loc)?;
                }
                Ok(())
            }
            (DType::Prop { name: n1, indices: i1 }, DType::Prop { name: n2, indices: i2 })
                if n1 == n2 && i1.len() == i2.len() =>
            {
                for (x, y) in i1.iter().zip(&i2) {
                    self.unify_static(facts, x, y, loc)?;
                }
                Ok(())
            }
            (DType::Fun { proofs: p1, args: a1, ret: r1 }, DType::Fun { proofs: p2, args: a2, ret: r2 })
                if p1.len() == p2.len() && a1.len() == a2.len() =>
            {
                for (x, y) in p2.into_iter().zip(p1).chain(a2.into_iter().zip(a1)) {
                    self.sub(facts, x, y, loc)?;
                }
                self.sub(facts, *r1, *r2, loc)
            }
            (DType::Tuple(xs), DType::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.into_iter().zip(ys) {
                    self.sub(facts, x, y, loc)?;
                }
                Ok(())
            }
            (DType::Proving { proofs: p1, values: v1 }, DType::Proving { proofs: p2, values: v2 })
                if p1.len() == p2.len() && v1.len() == v2.len() =>
            {
                for (x, y) in p1.into_iter().zip(p2).chain(v1.into_iter().zip(v2)) {
                    self.sub(facts, x, y, loc)?;
                }
                Ok(())
            }
            (DType::Proving { mut values, .. }, e) => {
                let value = if values.len() == 1 { values.remove(0) } else { DType::Tuple(values) };
                self.sub(facts, value, e, loc)
            }
            (a, e) => Err(self.mismatch(facts, &a, &e, loc)),
        }
    }
}

fn mentions_tvar(t: &DType, m: &str) -> bool {
    let any = |ts: &[DType]| ts.iter().any(|x| mentions_tvar(x, m));
    match t {
        DType::TVar(v) => v == m,
        DType::Data { targs, .. } | DType::Abs { targs, .. } => any(targs),
        DType::Fun { proofs, args, ret } => any(proofs) || any(args) || mentions_tvar(ret, m),
        DType::Tuple(items) => any(items),
        DType::Proving { proofs, values } => any(proofs) || any(values),
        DType::Guarded(_, b) | DType::Asserting(_, b) | DType::Forall(_, _, b) | DType::Exists(_, _, b) => {
            mentions_tvar(b, m)
        }
        _ => false,
    }
}

/// Solves `diff = 0` for a meta with a unit coefficient that occurs once.
fn solve_linear(diff: &LinExpr) -> Option<(String, StaticTerm)> {
    let metas: Vec<(&StaticTerm, &BigInt)> = diff.terms.iter().filter(|(t, _)| has_meta(t)).collect();
    let [(StaticTerm::Var(m), coeff)] = metas.as_slice() else {
        return None;
    };
    if !coeff.abs().is_one() {
        return None;
    }
    // m*c + rest = 0  =>  m = -rest / c
    let mut rest = diff.clone();
    rest.terms.remove(&StaticTerm::Var(m.clone()));
    let rest = if coeff.is_positive() { rest.scale(&BigInt::from(-1)) } else { rest };
    let sol = rest.to_term();
    debug_assert!(!sol.mentions(m) && !coeff.is_zero());
    Some((m.clone(), crate::statics::normalize_static(&sol)))
}
