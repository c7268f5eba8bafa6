//! Bidirectional checking of programs and proofs against indexed types.
//!
//! Static indices are threaded through a [`Ctx`]: the telescope of static
//! variables in scope, the hypotheses assumed so far and a branch-local
//! refinement of datasort variables obtained from pattern matching.
//! Unknown indices at instantiation sites become unification variables
//! (`?name$k`) that are solved by first-order matching; arithmetic side
//! conditions become [`Obligation`]s that are handed to the solver once the
//! enclosing top-level declaration has been checked.

pub mod elab;
mod expr;
mod unify;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use crate::ast::{Declaration, FunKind, Loc};
use crate::diag::{DiagKind, Diagnostic, Report};
use crate::solver::{atoms_of_prop, solve, Atom, Constraint, SolveResult};
use crate::statics::{Concrete, Sort, StaticSig, StaticTerm};
use crate::types::{display_name, DType};

pub use elab::{ConSig, LemmaSig, ParamKind};

/// How a dynamic name may be used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Program,
    Proof,
}

/// What an application head refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadKind {
    /// A program function or a program value of function type.
    Function,
    /// A datatype constructor.
    DataCon,
    /// A dataprop constructor, an external lemma or a proof function.
    ProofFun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    Program,
    Proof,
}

#[derive(Clone, Debug)]
pub struct DataInfo {
    pub name: String,
    pub is_prop: bool,
    pub params: Vec<ParamKind>,
    pub ctors: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct FunInfo {
    pub ty: DType,
    pub kind: FunKind,
    /// Number of proof and value parameters, as declared.
    pub arity: (usize, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Typedef {
    pub params: Vec<(String, ParamKind)>,
    pub body: crate::ast::TypeExpr,
}

/// Everything declared so far, visible to later declarations.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub sig: StaticSig,
    pub datas: BTreeMap<String, DataInfo>,
    pub ctors: HashMap<String, ConSig>,
    pub absprops: BTreeMap<String, Vec<Sort>>,
    pub abstypes: BTreeMap<String, Vec<ParamKind>>,
    pub lemmas: BTreeMap<String, LemmaSig>,
    /// Lemma names in declaration order.
    pub lemma_order: Vec<String>,
    pub funs: HashMap<String, FunInfo>,
    pub globals: HashMap<String, DType>,
    pub(crate) typedefs: HashMap<String, Typedef>,
    pub static_aliases: HashMap<String, String>,
    pub dyn_aliases: HashMap<String, String>,
    pub type_aliases: HashMap<String, String>,
}

impl Env {
    pub fn resolve_dyn(&self, name: &str) -> String {
        self.dyn_aliases.get(name).cloned().unwrap_or_else(|| name.to_string())
    }

    /// Abstract types of sort `(type, int)` name their elements by integers;
    /// at element type `int` the element is identified with its name.
    pub(crate) fn is_int_named(&self, name: &str) -> bool {
        matches!(self.abstypes.get(name).map(Vec::as_slice),
            Some([ParamKind::Type, ParamKind::Index(Sort::Int)]))
    }
}

/// Surface-name resolution for statics and type variables.
#[derive(Clone, Debug, Default)]
pub(crate) struct Scope {
    pub statics: Vec<(String, StaticTerm, Sort)>,
    pub types: Vec<(String, DType)>,
}

impl Scope {
    fn lookup_static(&self, name: &str) -> Option<&(String, StaticTerm, Sort)> {
        self.statics.iter().rev().find(|(n, _, _)| n == name)
    }

    fn lookup_type(&self, name: &str) -> Option<&DType> {
        self.types.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Static facts in effect at a program point.
#[derive(Clone, Debug, Default)]
pub(crate) struct Facts {
    pub vars: Vec<(String, Sort)>,
    pub hyps: Vec<StaticTerm>,
    pub data_hyps: Vec<(StaticTerm, StaticTerm)>,
    pub refine: HashMap<String, StaticTerm>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Ctx {
    pub scope: Scope,
    pub facts: Facts,
    pub dyns: Vec<(String, DType, Binding, HeadKind)>,
}

impl Ctx {
    fn lookup_dyn(&self, name: &str) -> Option<&(String, DType, Binding, HeadKind)> {
        self.dyns.iter().rev().find(|(n, ..)| n == name)
    }
}

/// A proof obligation: under `facts`, `goal` must hold.
#[derive(Clone, Debug)]
pub(crate) struct Obligation {
    pub facts: Rc<Facts>,
    pub goal: StaticTerm,
    pub loc: Loc,
    pub what: String,
}

#[derive(Clone, Debug)]
pub(crate) struct Deferred {
    pub facts: Rc<Facts>,
    pub lhs: StaticTerm,
    pub rhs: StaticTerm,
    pub loc: Loc,
}

pub(crate) type Fail = Box<Diagnostic>;
pub(crate) type CResult<T> = Result<T, Fail>;

pub(crate) fn fail(kind: DiagKind, loc: &Loc, message: impl Into<String>) -> Fail {
    Box::new(Diagnostic::error(kind, loc, message))
}

/// The checker: global declarations plus per-declaration inference state.
#[derive(Debug, Default)]
pub struct Checker {
    pub env: Env,
    counter: usize,
    pub(crate) var_sorts: HashMap<String, Sort>,
    pub(crate) metas: HashMap<String, StaticTerm>,
    pub(crate) type_metas: HashMap<String, DType>,
    pub(crate) open_metas: HashSet<String>,
    pub(crate) deferred: Vec<Deferred>,
    pub(crate) obligations: Vec<Obligation>,
    pub(crate) warnings: Vec<Diagnostic>,
    pub(crate) pending_sites: Vec<PendingSite>,
    /// Index instantiations of calls that pass proofs, keyed by call site,
    /// written with surface names. Only sites whose instantiation is
    /// expressible in the statics visible there are recorded.
    pub sites: BTreeMap<SiteKey, Vec<StaticTerm>>,
}

/// File, line and column of a call.
pub type SiteKey = (String, u32, u32);

pub fn site_key(loc: &Loc) -> SiteKey {
    (loc.file.to_string(), loc.line, loc.col)
}

#[derive(Clone, Debug)]
pub(crate) struct PendingSite {
    pub loc: Loc,
    pub indices: Vec<StaticTerm>,
    pub refine: HashMap<String, StaticTerm>,
    pub scope: Vec<(String, StaticTerm, Sort)>,
}

impl Checker {
    pub fn new() -> Self {
        Self::default()
    }

    /// A globally unique internal name derived from `base`.
    pub(crate) fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        let base = base.split('$').next().unwrap_or(base).trim_start_matches('?');
        format!("{base}${}", self.counter)
    }

    pub(crate) fn fresh_var(&mut self, base: &str, sort: &Sort) -> String {
        let name = self.fresh(base);
        self.var_sorts.insert(name.clone(), sort.clone());
        name
    }

    pub(crate) fn fresh_meta(&mut self, base: &str, sort: &Sort) -> String {
        let name = format!("?{}", self.fresh(base));
        self.var_sorts.insert(name.clone(), sort.clone());
        self.open_metas.insert(name.clone());
        name
    }

    /// Checks declarations in order, appending diagnostics and the
    /// constraint log to `report`.
    pub fn check_decls(&mut self, decls: &[Declaration], report: &mut Report) {
        for decl in decls {
            self.begin_decl();
            let result = self.declaration(decl);
            let mut diags = std::mem::take(&mut self.warnings);
            match result {
                Ok(()) => {
                    self.solve_obligations(report, &mut diags);
                    self.record_sites();
                }
                Err(d) => diags.push(*d),
            }
            report.diagnostics.extend(diags);
        }
    }

    fn begin_decl(&mut self) {
        self.metas.clear();
        self.type_metas.clear();
        self.open_metas.clear();
        self.deferred.clear();
        self.obligations.clear();
        self.pending_sites.clear();
    }

    fn record_sites(&mut self) {
        for site in std::mem::take(&mut self.pending_sites) {
            let mut names: HashMap<String, StaticTerm> = HashMap::new();
            for (surface, term, _) in site.scope.iter().rev() {
                if let StaticTerm::Var(internal) = term {
                    let visible = site.scope.iter().rev().find(|(n, ..)| n == surface).map(|(_, t, _)| t);
                    if visible == Some(term) {
                        names.entry(internal.clone()).or_insert_with(|| StaticTerm::Var(surface.clone()));
                    }
                }
            }
            let mut out = Vec::new();
            for t in &site.indices {
                let z = self.zonk_term(&site.refine, t);
                if !z.free_vars().iter().all(|v| names.contains_key(v)) {
                    break;
                }
                out.push(z.subst(&names));
            }
            if out.len() == site.indices.len() {
                self.sites.insert(site_key(&site.loc), out);
            }
        }
    }

    pub(crate) fn emit(&mut self, ctx: &Ctx, goal: StaticTerm, loc: &Loc, what: impl Into<String>) {
        self.obligations.push(Obligation {
            facts: Rc::new(ctx.facts.clone()),
            goal,
            loc: loc.clone(),
            what: what.into(),
        });
    }

    /// Resolves metas and refinements, then normalizes.
    pub(crate) fn zonk_term(&self, refine: &HashMap<String, StaticTerm>, t: &StaticTerm) -> StaticTerm {
        crate::statics::normalize_static(&self.resolve_term(refine, t))
    }

    fn resolve_term(&self, refine: &HashMap<String, StaticTerm>, t: &StaticTerm) -> StaticTerm {
        match t {
            StaticTerm::Var(v) => {
                if let Some(sol) = self.metas.get(v) {
                    self.resolve_term(refine, sol)
                } else if let Some(r) = refine.get(v) {
                    self.resolve_term(refine, r)
                } else {
                    t.clone()
                }
            }
            StaticTerm::Con(c, args) => {
                StaticTerm::Con(c.clone(), args.iter().map(|a| self.resolve_term(refine, a)).collect())
            }
            StaticTerm::App(f, a) => StaticTerm::App(
                Box::new(self.resolve_term(refine, f)),
                Box::new(self.resolve_term(refine, a)),
            ),
            StaticTerm::Lam(v, s, body) => {
                StaticTerm::Lam(v.clone(), s.clone(), Box::new(self.resolve_term(refine, body)))
            }
            other => other.clone(),
        }
    }

    /// Solves every obligation of the current declaration.
    fn solve_obligations(&mut self, report: &mut Report, diags: &mut Vec<Diagnostic>) {
        if let Err(d) = self.flush_deferred(true) {
            diags.push(*d);
            return;
        }
        let obligations = std::mem::take(&mut self.obligations);
        for ob in obligations {
            let goal = self.zonk_term(&ob.facts.refine, &ob.goal);
            if goal.free_vars().iter().any(|v| v.starts_with('?')) {
                diags.push(Diagnostic::error(
                    DiagKind::TypeError,
                    &ob.loc,
                    format!("cannot infer the static indices in `{}` ({})", display_name(&goal.to_string()), ob.what),
                ));
                continue;
            }
            let Some(goal_atoms) = atoms_of_prop(&goal) else {
                diags.push(Diagnostic::error(
                    DiagKind::UnsolvedConstraint,
                    &ob.loc,
                    format!("constraint `{}` is outside the supported fragment", display_name(&goal.to_string())),
                ));
                continue;
            };
            let (vars, hyps) = self.constraint_context(&ob.facts);
            for goal_atom in goal_atoms {
                let mut c = Constraint { vars: vars.clone(), hyps: hyps.clone(), goal: goal_atom };
                extend_vars(&mut c, &self.var_sorts);
                report.constraints.push(c.to_string());
                match solve(&c) {
                    SolveResult::Valid => {}
                    SolveResult::Invalid(model) => {
                        diags.push(Diagnostic::error(
                            DiagKind::UnsolvedConstraint,
                            &ob.loc,
                            format!(
                                "unsolved constraint: {} ({}){}",
                                display_name(&goal.to_string()),
                                ob.what,
                                render_counterexample(&model)
                            ),
                        ));
                        break;
                    }
                    SolveResult::Unknown(reason) => {
                        report.undecided += 1;
                        diags.push(Diagnostic::error(
                            DiagKind::UnsolvedConstraint,
                            &ob.loc,
                            format!(
                                "could not decide constraint {} ({}): {reason}",
                                display_name(&goal.to_string()),
                                ob.what
                            ),
                        ));
                        break;
                    }
                }
            }
        }
    }

    fn constraint_context(&self, facts: &Facts) -> (Vec<(String, Sort)>, Vec<Atom>) {
        let vars: Vec<(String, Sort)> = facts
            .vars
            .iter()
            .filter(|(_, s)| matches!(s, Sort::Int | Sort::Bool | Sort::Data(_)))
            .cloned()
            .collect();
        let mut hyps = Vec::new();
        for h in &facts.hyps {
            let h = self.zonk_term(&facts.refine, h);
            // hypotheses outside the fragment are dropped: a sound weakening
            if let Some(atoms) = atoms_of_prop(&h) {
                hyps.extend(atoms.into_iter().filter(|a| *a != Atom::True));
            }
        }
        for (l, r) in &facts.data_hyps {
            hyps.push(Atom::DataEq(self.zonk_term(&facts.refine, l), self.zonk_term(&facts.refine, r)));
        }
        (vars, hyps)
    }
}

/// Adds variables that occur in the constraint but not in its telescope
/// (unsolved metas in hypotheses, for instance).
fn extend_vars(c: &mut Constraint, sorts: &HashMap<String, Sort>) {
    let mut known: HashSet<String> = c.vars.iter().map(|(v, _)| v.clone()).collect();
    let mut mentioned = Vec::new();
    for atom in c.hyps.iter().chain(std::iter::once(&c.goal)) {
        match atom {
            Atom::Lin { expr, .. } => {
                for (t, _) in &expr.terms {
                    mentioned.extend(t.free_vars());
                }
            }
            Atom::BoolVar { name, .. } => mentioned.push(name.clone()),
            Atom::DataEq(l, r) => {
                mentioned.extend(l.free_vars());
                mentioned.extend(r.free_vars());
            }
            _ => {}
        }
    }
    for v in mentioned {
        if known.insert(v.clone()) {
            let sort = sorts.get(&v).cloned().unwrap_or(Sort::Int);
            c.vars.push((v, sort));
        }
    }
}

fn render_counterexample(model: &BTreeMap<String, Concrete>) -> String {
    if model.is_empty() {
        return String::new();
    }
    // Distinct binders may share a surface name; later ones get primes.
    let mut seen: HashMap<String, usize> = HashMap::new();
    let parts: Vec<String> = model
        .iter()
        .map(|(v, c)| {
            let value = match c {
                Concrete::Int(n) => n.to_string(),
                Concrete::Bool(b) => b.to_string(),
                Concrete::Data(..) => "_".into(),
            };
            let name = display_name(v);
            let k = seen.entry(name.to_string()).or_insert(0);
            let primes = "'".repeat(*k);
            *k += 1;
            format!("{name}{primes}={value}")
        })
        .collect();
    format!("; counterexample: {}", parts.join(", "))
}

/// Checks parsed declarations with a fresh checker.
pub fn typecheck_program(decls: &[Declaration]) -> Report {
    let mut checker = Checker::new();
    let mut report = Report::default();
    checker.check_decls(decls, &mut report);
    report
}
