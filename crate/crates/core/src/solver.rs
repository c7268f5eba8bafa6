//! Validity of linear integer/boolean sequents.
//!
//! A [`Constraint`] is decided by negating the goal and searching for an
//! integer model of `hyps ∧ ¬goal`: datasort equations are unified away,
//! unit-coefficient equalities are substituted, disequalities are split and
//! the remaining inequalities go through Fourier–Motzkin elimination with
//! integer tightening. Models found by back-substitution are re-checked
//! against the original constraint before `Invalid` is reported.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::statics::{
    is_arith_op, linearize, normalize_static, Concrete, LinExpr, Sort, StaticTerm,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "<>",
            Rel::Le => "<=",
            Rel::Lt => "<",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `expr rel 0`
    Lin { expr: LinKey, rel: Rel },
    BoolVar { name: String, value: bool },
    /// Structural equation between datasort terms; hypotheses only.
    DataEq(StaticTerm, StaticTerm),
    True,
    False,
}

/// Hashable, ordered wrapper around [`LinExpr`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinKey {
    pub terms: Vec<(StaticTerm, BigInt)>,
    pub constant: BigInt,
}

impl From<&LinExpr> for LinKey {
    fn from(e: &LinExpr) -> Self {
        LinKey {
            terms: e.terms.iter().map(|(t, c)| (t.clone(), c.clone())).collect(),
            constant: e.constant.clone(),
        }
    }
}

impl LinKey {
    pub fn to_lin(&self) -> LinExpr {
        LinExpr { terms: self.terms.iter().cloned().collect(), constant: self.constant.clone() }
    }
}

impl Atom {
    pub fn lin(expr: &LinExpr, rel: Rel) -> Atom {
        Atom::Lin { expr: LinKey::from(expr), rel }
    }

    /// `lhs rel rhs` as `lhs - rhs rel 0`.
    pub fn compare(lhs: &StaticTerm, rel: Rel, rhs: &StaticTerm) -> Atom {
        let e = linearize(&normalize_static(lhs)).add(&linearize(&normalize_static(rhs)), -1);
        Atom::lin(&e, rel)
    }

    pub fn negate(&self) -> Vec<Atom> {
        match self {
            Atom::Lin { expr, rel } => {
                let e = expr.to_lin();
                match rel {
                    Rel::Eq => vec![Atom::lin(&e, Rel::Ne)],
                    Rel::Ne => vec![Atom::lin(&e, Rel::Eq)],
                    // ¬(e <= 0) ⟺ -e < 0
                    Rel::Le => vec![Atom::lin(&e.scale(&BigInt::from(-1)), Rel::Lt)],
                    // ¬(e < 0) ⟺ -e <= 0
                    Rel::Lt => vec![Atom::lin(&e.scale(&BigInt::from(-1)), Rel::Le)],
                }
            }
            Atom::BoolVar { name, value } => vec![Atom::BoolVar { name: name.clone(), value: !value }],
            Atom::True => vec![Atom::False],
            Atom::False => vec![],
            // not expressible; `decide` reports datasort goals as Unknown
            Atom::DataEq(..) => vec![],
        }
    }

    /// Evaluates the atom under an int/bool assignment.
    pub fn eval(&self, model: &Model) -> Option<bool> {
        match self {
            Atom::Lin { expr, rel } => {
                let mut v = expr.constant.clone();
                for (t, c) in &expr.terms {
                    v += c * model.int(t)?;
                }
                Some(match rel {
                    Rel::Eq => v.is_zero(),
                    Rel::Ne => !v.is_zero(),
                    Rel::Le => !v.is_positive(),
                    Rel::Lt => v.is_negative(),
                })
            }
            Atom::BoolVar { name, value } => Some(model.bools.get(name).copied().unwrap_or(false) == *value),
            Atom::True => Some(true),
            Atom::False => Some(false),
            Atom::DataEq(..) => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Lin { expr, rel } => {
                write!(f, "{}", expr.constant)?;
                for (t, c) in &expr.terms {
                    write!(f, " + {c}*{t}")?;
                }
                write!(f, " {} 0", rel.symbol())
            }
            Atom::BoolVar { name, value: true } => write!(f, "{name}"),
            Atom::BoolVar { name, value: false } => write!(f, "~{name}"),
            Atom::DataEq(l, r) => write!(f, "{l} == {r}"),
            Atom::True => write!(f, "true"),
            Atom::False => write!(f, "false"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub vars: Vec<(String, Sort)>,
    pub hyps: Vec<Atom>,
    pub goal: Atom,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self.vars.iter().map(|(v, s)| format!("{v}:{s}")).collect();
        let hyps: Vec<String> = self.hyps.iter().map(|h| h.to_string()).collect();
        write!(f, "{} | ", vars.join(", "))?;
        if !hyps.is_empty() {
            write!(f, "{} ", hyps.join(", "))?;
        }
        write!(f, "|- {}", self.goal)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub ints: BTreeMap<StaticTerm, BigInt>,
    pub bools: BTreeMap<String, bool>,
}

impl Model {
    fn int(&self, t: &StaticTerm) -> Option<BigInt> {
        Some(self.ints.get(t).cloned().unwrap_or_else(BigInt::zero))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Valid,
    /// A verified assignment satisfying the hypotheses and falsifying the goal.
    Invalid(BTreeMap<String, Concrete>),
    Unknown(String),
}

impl SolveResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, SolveResult::Valid)
    }
}

/// Translates a bool-sorted static term into conjuncts. Returns `None` for
/// shapes outside the decided fragment.
pub fn atoms_of_prop(term: &StaticTerm) -> Option<Vec<Atom>> {
    let term = normalize_static(term);
    let mut out = Vec::new();
    collect_atoms(&term, true, &mut out)?;
    Some(out)
}

fn collect_atoms(term: &StaticTerm, positive: bool, out: &mut Vec<Atom>) -> Option<()> {
    match term {
        StaticTerm::Bool(b) => {
            out.push(if *b == positive { Atom::True } else { Atom::False });
            Some(())
        }
        StaticTerm::Var(v) => {
            out.push(Atom::BoolVar { name: v.clone(), value: positive });
            Some(())
        }
        StaticTerm::Con(op, args) if op == "&&" && positive => {
            collect_atoms(&args[0], true, out)?;
            collect_atoms(&args[1], true, out)
        }
        StaticTerm::Con(op, args) if op == "~" => collect_atoms(&args[0], !positive, out),
        StaticTerm::Con(op, args) if args.len() == 2 => {
            let (l, r) = (&args[0], &args[1]);
            let atom = match (op.as_str(), positive) {
                ("<=", true) | (">", false) => Atom::compare(l, Rel::Le, r),
                ("<", true) | (">=", false) => Atom::compare(l, Rel::Lt, r),
                (">=", true) | ("<", false) => Atom::compare(r, Rel::Le, l),
                (">", true) | ("<=", false) => Atom::compare(r, Rel::Lt, l),
                ("=", true) | ("<>", false) => Atom::compare(l, Rel::Eq, r),
                ("<>", true) | ("=", false) => Atom::compare(l, Rel::Ne, r),
                _ => return None,
            };
            out.push(atom);
            Some(())
        }
        _ => None,
    }
}

/// Decides a constraint.
pub fn solve(c: &Constraint) -> SolveResult {
    let (simple, trail) = simplify_with_trail(c);
    match decide(&simple) {
        Decision::Valid => SolveResult::Valid,
        Decision::Model(mut model) => {
            for (var, value) in trail.iter().rev() {
                let v = value.terms.iter().fold(value.constant.clone(), |acc, (t, k)| {
                    acc + k * model.int(t).unwrap_or_default()
                });
                model.ints.insert(var.clone(), v);
            }
            // Re-verify against the constraint as given; datasort equations
            // were unified away by the simplifier and are not re-evaluated.
            if verifies(c, &model) {
                SolveResult::Invalid(render_model(c, &model))
            } else {
                SolveResult::Unknown("counterexample did not verify".into())
            }
        }
        Decision::Unknown(reason) => SolveResult::Unknown(reason),
    }
}

fn render_model(c: &Constraint, model: &Model) -> BTreeMap<String, Concrete> {
    let mut out = BTreeMap::new();
    for (v, s) in &c.vars {
        match s {
            Sort::Int => {
                let key = StaticTerm::Var(v.clone());
                out.insert(v.clone(), Concrete::Int(model.ints.get(&key).cloned().unwrap_or_default()));
            }
            Sort::Bool => {
                out.insert(v.clone(), Concrete::Bool(model.bools.get(v).copied().unwrap_or(false)));
            }
            _ => {}
        }
    }
    out
}

fn verifies(c: &Constraint, model: &Model) -> bool {
    let hyps_ok = c.hyps.iter().all(|h| h.eval(model).unwrap_or(true));
    let goal_false = c.goal.eval(model) == Some(false);
    hyps_ok && goal_false
}

/// Structural simplification: unifies datasort equations (decomposing equal
/// heads, turning clashes into `false`), then substitutes unit-coefficient
/// equalities `x = t` and drops `x`.
pub fn simplify(c: &Constraint) -> Constraint {
    simplify_with_trail(c).0
}

/// Also returns the eliminated integer variables with their values, in
/// elimination order.
fn simplify_with_trail(c: &Constraint) -> (Constraint, Vec<(StaticTerm, LinExpr)>) {
    let mut trail = Vec::new();
    let sorts: HashMap<String, Sort> = c.vars.iter().cloned().collect();
    let mut hyps: Vec<Atom> = Vec::new();
    let mut data: Vec<(StaticTerm, StaticTerm)> = Vec::new();
    for h in &c.hyps {
        match h {
            Atom::DataEq(l, r) => data.push((l.clone(), r.clone())),
            Atom::True => {}
            other => hyps.push(other.clone()),
        }
    }
    let mut eliminated: BTreeSet<String> = BTreeSet::new();
    match unify_data(data, &sorts) {
        Err(()) => {
            return (Constraint { vars: c.vars.clone(), hyps: vec![Atom::False], goal: c.goal.clone() }, trail);
        }
        Ok((int_eqs, solved)) => {
            eliminated.extend(solved);
            hyps.extend(int_eqs);
        }
    }
    if hyps.contains(&Atom::False) {
        return (Constraint { vars: c.vars.clone(), hyps: vec![Atom::False], goal: c.goal.clone() }, trail);
    }
    let mut goal = c.goal.clone();
    // substitute x = t for unit coefficients
    loop {
        let pick = hyps.iter().enumerate().find_map(|(i, h)| match h {
            Atom::Lin { expr, rel: Rel::Eq } => expr
                .terms
                .iter()
                .find(|(t, k)| k.abs().is_one() && matches!(t, StaticTerm::Var(_)))
                .map(|(t, k)| (i, t.clone(), k.clone(), expr.to_lin())),
            _ => None,
        });
        let Some((idx, var, k, expr)) = pick else { break };
        hyps.remove(idx);
        // k·x + rest = 0  ⇒  x = -rest/k
        let mut rest = expr.clone();
        rest.terms.remove(&var);
        let value = if k.is_positive() { rest.scale(&BigInt::from(-1)) } else { rest };
        hyps = hyps.iter().map(|h| subst_atom(h, &var, &value)).collect();
        goal = subst_atom(&goal, &var, &value);
        trail.push((var.clone(), value));
        if let StaticTerm::Var(name) = &var {
            eliminated.insert(name.clone());
        }
        hyps.retain(|h| *h != Atom::True);
        if hyps.contains(&Atom::False) {
            hyps = vec![Atom::False];
            break;
        }
    }
    let vars = c.vars.iter().filter(|(v, _)| !eliminated.contains(v)).cloned().collect();
    (Constraint { vars, hyps, goal }, trail)
}

fn subst_atom(atom: &Atom, var: &StaticTerm, value: &LinExpr) -> Atom {
    match atom {
        Atom::Lin { expr, rel } => {
            let mut e = expr.to_lin();
            if let Some(k) = e.terms.remove(var) {
                e = e.add(&value.clone().scale(&k), 1);
            }
            const_fold(Atom::lin(&e, *rel))
        }
        other => other.clone(),
    }
}

fn const_fold(atom: Atom) -> Atom {
    if let Atom::Lin { expr, rel } = &atom {
        if expr.terms.is_empty() {
            let c = &expr.constant;
            let holds = match rel {
                Rel::Eq => c.is_zero(),
                Rel::Ne => !c.is_zero(),
                Rel::Le => !c.is_positive(),
                Rel::Lt => c.is_negative(),
            };
            return if holds { Atom::True } else { Atom::False };
        }
    }
    atom
}

fn term_sort(t: &StaticTerm, sorts: &HashMap<String, Sort>) -> Option<Sort> {
    match t {
        StaticTerm::Int(_) => Some(Sort::Int),
        StaticTerm::Bool(_) => Some(Sort::Bool),
        StaticTerm::Var(v) => sorts.get(v).cloned(),
        StaticTerm::Con(op, _) if is_arith_op(op) => Some(Sort::Int),
        StaticTerm::Con(op, _) if crate::statics::is_builtin_op(op) => Some(Sort::Bool),
        StaticTerm::Con(c, _) => Some(Sort::Data(c.clone())),
        _ => None,
    }
}

fn is_data_sorted(t: &StaticTerm, sorts: &HashMap<String, Sort>) -> bool {
    matches!(term_sort(t, sorts), Some(Sort::Data(_)))
}

/// Unifies datasort equations. Returns the induced int equations and the
/// datasort variables that were solved, or `Err` on a clash.
#[allow(clippy::type_complexity)]
fn unify_data(
    eqs: Vec<(StaticTerm, StaticTerm)>,
    sorts: &HashMap<String, Sort>,
) -> Result<(Vec<Atom>, Vec<String>), ()> {
    let mut subst: HashMap<String, StaticTerm> = HashMap::new();
    let mut work = eqs;
    let mut ints = Vec::new();
    while let Some((l, r)) = work.pop() {
        let l = resolve(&l, &subst);
        let r = resolve(&r, &subst);
        if l == r {
            continue;
        }
        match (&l, &r) {
            (StaticTerm::Var(v), t) | (t, StaticTerm::Var(v))
                if sorts.get(v).is_some_and(Sort::is_data) =>
            {
                if t.mentions(v) {
                    return Err(());
                }
                subst.insert(v.clone(), t.clone());
            }
            (StaticTerm::Con(a, xs), StaticTerm::Con(b, ys))
                if !crate::statics::is_builtin_op(a) && !crate::statics::is_builtin_op(b) =>
            {
                if a != b || xs.len() != ys.len() {
                    return Err(());
                }
                for (x, y) in xs.iter().zip(ys) {
                    if is_data_sorted(x, sorts) || is_data_sorted(y, sorts) {
                        work.push((x.clone(), y.clone()));
                    } else if matches!(term_sort(x, sorts), Some(Sort::Int))
                        || matches!(term_sort(y, sorts), Some(Sort::Int))
                    {
                        let atom = const_fold(Atom::compare(x, Rel::Eq, y));
                        if atom == Atom::False {
                            return Err(());
                        }
                        if atom != Atom::True {
                            ints.push(atom);
                        }
                    }
                    // bool or unknown components are dropped: weakening
                }
            }
            _ => {}
        }
    }
    let mut solved: Vec<String> = subst.into_keys().collect();
    solved.sort();
    Ok((ints, solved))
}

fn resolve(t: &StaticTerm, subst: &HashMap<String, StaticTerm>) -> StaticTerm {
    match t {
        StaticTerm::Var(v) => match subst.get(v) {
            Some(s) => resolve(s, subst),
            None => t.clone(),
        },
        StaticTerm::Con(c, args) => StaticTerm::Con(c.clone(), args.iter().map(|a| resolve(a, subst)).collect()),
        other => other.clone(),
    }
}

// ------------------------------------------------------------------ decide

enum Decision {
    Valid,
    Model(Model),
    Unknown(String),
}

/// Row `Σ cᵢ·xᵢ + c ≤ 0` over integer keys.
type Row = LinExpr;

enum Fm {
    Unsat,
    Model(BTreeMap<StaticTerm, BigInt>),
    /// Real-feasible but no integer model found.
    Stuck,
}

const ROW_LIMIT: usize = 4000;

fn decide(c: &Constraint) -> Decision {
    if c.hyps.contains(&Atom::False) || c.goal == Atom::True {
        return Decision::Valid;
    }
    if matches!(c.goal, Atom::DataEq(..)) {
        return Decision::Unknown("datasort equation as goal".into());
    }
    let mut atoms: Vec<Atom> = c.hyps.iter().filter(|a| !matches!(a, Atom::DataEq(..))).cloned().collect();
    atoms.extend(c.goal.negate());

    // booleans
    let mut bools: BTreeMap<String, bool> = BTreeMap::new();
    let mut les: Vec<Row> = Vec::new();
    let mut eqs: Vec<Row> = Vec::new();
    let mut nes: Vec<Row> = Vec::new();
    for a in &atoms {
        match a {
            Atom::False => return Decision::Valid,
            Atom::True | Atom::DataEq(..) => {}
            Atom::BoolVar { name, value } => {
                if let Some(prev) = bools.insert(name.clone(), *value) {
                    if prev != *value {
                        return Decision::Valid;
                    }
                }
            }
            Atom::Lin { expr, rel } => {
                let e = expr.to_lin();
                match rel {
                    Rel::Le => les.push(e),
                    Rel::Lt => les.push(e.add(&LinExpr::constant(BigInt::one()), 1)),
                    Rel::Eq => eqs.push(e),
                    Rel::Ne => nes.push(e),
                }
            }
        }
    }

    // Quick refutation without the disequalities.
    if let Fm::Unsat = fourier_motzkin(&les, &eqs) {
        return Decision::Valid;
    }
    let mut stuck = false;
    let mut chosen: Vec<Row> = Vec::new();
    let verdict = split_nes(&les, &eqs, &nes, &mut chosen, &mut stuck);
    match verdict {
        Some(ints) => Decision::Model(Model { ints, bools }),
        None if stuck => Decision::Unknown("no integer model found for a real-feasible branch".into()),
        None => Decision::Valid,
    }
}

fn split_nes(
    les: &[Row],
    eqs: &[Row],
    nes: &[Row],
    chosen: &mut Vec<Row>,
    stuck: &mut bool,
) -> Option<BTreeMap<StaticTerm, BigInt>> {
    if chosen.len() == nes.len() {
        let mut rows = les.to_vec();
        rows.extend(chosen.iter().cloned());
        return match fourier_motzkin(&rows, eqs) {
            Fm::Unsat => None,
            Fm::Model(m) => Some(m),
            Fm::Stuck => match brute_force(&rows, eqs) {
                Some(m) => Some(m),
                None => {
                    *stuck = true;
                    None
                }
            },
        };
    }
    let e = &nes[chosen.len()];
    // e < 0  i.e. e + 1 <= 0
    chosen.push(e.clone().add(&LinExpr::constant(BigInt::one()), 1));
    if let Some(m) = split_nes(les, eqs, nes, chosen, stuck) {
        return Some(m);
    }
    chosen.pop();
    // e > 0  i.e. -e + 1 <= 0
    chosen.push(e.clone().scale(&BigInt::from(-1)).add(&LinExpr::constant(BigInt::one()), 1));
    let r = split_nes(les, eqs, nes, chosen, stuck);
    chosen.pop();
    r
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// Divides by the gcd of the coefficients, rounding the constant so the
/// integer solutions are unchanged.
fn tighten(row: Row) -> Row {
    let g = row.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g.is_one() {
        return row;
    }
    let terms = row.terms.into_iter().map(|(t, c)| (t, c / &g)).collect();
    LinExpr { terms, constant: ceil_div(&row.constant, &g) }
}

struct Stage {
    var: StaticTerm,
    rows: Vec<Row>,
}

enum Sub {
    /// `var = expr`
    Eq(StaticTerm, LinExpr),
}

fn fourier_motzkin(les: &[Row], eqs: &[Row]) -> Fm {
    let mut rows: Vec<Row> = les.to_vec();
    let mut subs: Vec<Sub> = Vec::new();
    let mut eqs: Vec<Row> = eqs.to_vec();

    // Equalities: substitute a unit coefficient. Otherwise rewrite the
    // variable with the smallest coefficient through a fresh one, shrinking
    // the remaining coefficients until a unit appears.
    let mut fresh = 0usize;
    while let Some(e) = eqs.pop() {
        let g = e.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() {
            if !e.constant.is_zero() {
                return Fm::Unsat;
            }
            continue;
        }
        if !(&e.constant % &g).is_zero() {
            return Fm::Unsat;
        }
        let e = LinExpr { terms: e.terms.into_iter().map(|(t, c)| (t, c / &g)).collect(), constant: e.constant / &g };
        let (var, k) = e
            .terms
            .iter()
            .min_by_key(|(_, k)| k.abs())
            .map(|(t, k)| (t.clone(), k.clone()))
            .expect("nonzero gcd implies a term");
        let value = if k.abs().is_one() {
            let mut rest = e.clone();
            rest.terms.remove(&var);
            if k.is_positive() {
                rest.scale(&BigInt::from(-1))
            } else {
                rest
            }
        } else {
            // a·x + Σ aᵢ·xᵢ + c = 0 with a > 0:  x = t - Σ ⌊aᵢ/a⌋·xᵢ - ⌊c/a⌋
            let e = if k.is_positive() { e.clone() } else { e.clone().scale(&BigInt::from(-1)) };
            let a = k.abs();
            fresh += 1;
            let mut value = LinExpr::atom(StaticTerm::Var(format!("%eq{fresh}")));
            for (t, c) in &e.terms {
                if *t != var {
                    value.terms.insert(t.clone(), -c.div_floor(&a));
                }
            }
            value.constant = -e.constant.div_floor(&a);
            eqs.push(e);
            value
        };
        let apply = |r: Row| -> Row {
            let mut r = r;
            if let Some(c) = r.terms.remove(&var) {
                r = r.add(&value.clone().scale(&c), 1);
            }
            r
        };
        rows = rows.into_iter().map(apply).collect();
        eqs = eqs.into_iter().map(apply).collect();
        subs.push(Sub::Eq(var, value));
    }

    let mut stages: Vec<Stage> = Vec::new();
    loop {
        let mut next: Vec<Row> = Vec::new();
        let mut seen: BTreeSet<LinKey> = BTreeSet::new();
        for r in rows {
            let r = tighten(r);
            if r.terms.is_empty() {
                if r.constant.is_positive() {
                    return Fm::Unsat;
                }
                continue;
            }
            if seen.insert(LinKey::from(&r)) {
                next.push(r);
            }
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
        if rows.len() > ROW_LIMIT {
            return Fm::Stuck;
        }
        // pick the variable with the cheapest elimination
        let mut vars: BTreeSet<&StaticTerm> = BTreeSet::new();
        for r in &rows {
            vars.extend(r.terms.keys());
        }
        let var = vars
            .iter()
            .min_by_key(|v| {
                let pos = rows.iter().filter(|r| r.terms.get(**v).is_some_and(|c| c.is_positive())).count();
                let neg = rows.iter().filter(|r| r.terms.get(**v).is_some_and(|c| c.is_negative())).count();
                pos * neg
            })
            .map(|v| (*v).clone())
            .expect("rows mention at least one variable");
        let (with, without): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| r.terms.contains_key(&var));
        let pos: Vec<&Row> = with.iter().filter(|r| r.terms[&var].is_positive()).collect();
        let neg: Vec<&Row> = with.iter().filter(|r| r.terms[&var].is_negative()).collect();
        let mut new_rows = without;
        for p in &pos {
            for n in &neg {
                let a = &p.terms[&var];
                let b = -&n.terms[&var];
                let combined = (*p).clone().scale(&b).add(&(*n).clone().scale(a), 1);
                new_rows.push(combined);
            }
        }
        stages.push(Stage { var, rows: with });
        rows = new_rows;
    }

    // back-substitution
    let mut model: BTreeMap<StaticTerm, BigInt> = BTreeMap::new();
    for stage in stages.iter().rev() {
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for r in &stage.rows {
            let a = &r.terms[&stage.var];
            let mut rest = r.constant.clone();
            for (t, c) in &r.terms {
                if *t != stage.var {
                    rest += c * model.get(t).cloned().unwrap_or_default();
                }
            }
            // a·x + rest <= 0
            if a.is_positive() {
                let bound = (-&rest).div_floor(a);
                hi = Some(match hi {
                    Some(h) if h < bound => h,
                    _ => bound,
                });
            } else {
                let bound = ceil_div(&rest, &-a);
                lo = Some(match lo {
                    Some(l) if l > bound => l,
                    _ => bound,
                });
            }
        }
        let value = match (&lo, &hi) {
            (Some(l), Some(h)) if l > h => return Fm::Stuck,
            (Some(l), Some(h)) => {
                if l <= &BigInt::zero() && h >= &BigInt::zero() {
                    BigInt::zero()
                } else if l > &BigInt::zero() {
                    l.clone()
                } else {
                    h.clone()
                }
            }
            (Some(l), None) => l.max(&BigInt::zero()).clone(),
            (None, Some(h)) => h.min(&BigInt::zero()).clone(),
            (None, None) => BigInt::zero(),
        };
        model.insert(stage.var.clone(), value);
    }
    for Sub::Eq(var, value) in subs.iter().rev() {
        let mut v = value.constant.clone();
        for (t, c) in &value.terms {
            v += c * model.get(t).cloned().unwrap_or_default();
        }
        model.insert(var.clone(), v);
    }
    Fm::Model(model)
}

const BRUTE_RADIUS: i64 = 12;
const BRUTE_MAX_VARS: usize = 4;

/// Last-resort integer search in a small box for systems FM could not
/// turn into an integer model.
fn brute_force(les: &[Row], eqs: &[Row]) -> Option<BTreeMap<StaticTerm, BigInt>> {
    let mut vars: BTreeSet<StaticTerm> = BTreeSet::new();
    for r in les.iter().chain(eqs) {
        vars.extend(r.terms.keys().cloned());
    }
    let vars: Vec<StaticTerm> = vars.into_iter().collect();
    if vars.len() > BRUTE_MAX_VARS {
        return None;
    }
    let mut values = vec![-BRUTE_RADIUS; vars.len()];
    loop {
        let model: BTreeMap<StaticTerm, BigInt> =
            vars.iter().cloned().zip(values.iter().map(|v| BigInt::from(*v))).collect();
        let eval = |r: &Row| -> BigInt {
            let mut v = r.constant.clone();
            for (t, c) in &r.terms {
                v += c * &model[t];
            }
            v
        };
        if les.iter().all(|r| !eval(r).is_positive()) && eqs.iter().all(|r| eval(r).is_zero()) {
            return Some(model);
        }
        let mut i = 0;
        loop {
            if i == values.len() {
                return None;
            }
            values[i] += 1;
            if values[i] > BRUTE_RADIUS {
                values[i] = -BRUTE_RADIUS;
                i += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_static_term;

    fn atom(src: &str) -> Atom {
        let mut atoms = atoms_of_prop(&parse_static_term(src).unwrap()).unwrap();
        assert_eq!(atoms.len(), 1);
        atoms.remove(0)
    }

    fn ints(names: &[&str]) -> Vec<(String, Sort)> {
        names.iter().map(|n| (n.to_string(), Sort::Int)).collect()
    }

    #[test]
    fn non_unit_equalities_respect_integrality() {
        // 2x = 3y + 2 forces y even; no such point lies in the strip.
        let c = Constraint {
            vars: ints(&["x", "y"]),
            hyps: vec![atom("2 * x = 3 * y + 2"), atom("3 + 3 * x + y <= 0"), atom("0 - 2 - 3 * x + 2 * y < 0")],
            goal: atom("1 = 0"),
        };
        assert_eq!(solve(&c), SolveResult::Valid);
        let c = Constraint { vars: ints(&["x", "y"]), hyps: vec![atom("2 * x = 3 * y + 2")], goal: atom("x = 1") };
        let SolveResult::Invalid(m) = solve(&c) else { panic!() };
        let (Concrete::Int(x), Concrete::Int(y)) = (&m["x"], &m["y"]) else { panic!() };
        assert_eq!(BigInt::from(2) * x, BigInt::from(3) * y + 2);
        assert_ne!(*x, BigInt::one());
    }

    #[test]
    fn loop_recursion_bound_is_valid() {
        let c = Constraint {
            vars: ints(&["n", "i", "r0", "r1"]),
            hyps: vec![atom("n >= 0"), atom("i >= 0"), atom("i <= n"), atom("n - i > 0")],
            goal: atom("i + 1 <= n"),
        };
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn non_strict_counterexample() {
        let c = Constraint { vars: ints(&["x", "y"]), hyps: vec![atom("x <= y")], goal: atom("x < y") };
        match solve(&c) {
            SolveResult::Invalid(m) => {
                assert_eq!(m["x"], m["y"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn associativity_of_lengths() {
        let c = Constraint {
            vars: ints(&["p", "q", "r"]),
            hyps: vec![atom("p >= 0"), atom("q >= 0"), atom("r >= 0")],
            goal: atom("p + q + r + 1 = p + (q + r) + 1"),
        };
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    fn ilist_vars() -> Vec<(String, Sort)> {
        let mut v = ints(&["x", "y"]);
        v.push(("xs".into(), Sort::Data("ilist".into())));
        v.push(("ys".into(), Sort::Data("ilist".into())));
        v
    }

    fn cons(h: &str, t: &str) -> StaticTerm {
        StaticTerm::con("ilist_cons", vec![StaticTerm::var(h), StaticTerm::var(t)])
    }

    #[test]
    fn injectivity_decomposes() {
        let c = Constraint {
            vars: ilist_vars(),
            hyps: vec![Atom::DataEq(cons("x", "xs"), cons("y", "ys"))],
            goal: atom("x = y"),
        };
        let s = simplify(&c);
        assert!(!s.hyps.iter().any(|h| matches!(h, Atom::DataEq(..))));
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn disjointness_is_vacuous() {
        let c = Constraint {
            vars: ilist_vars(),
            hyps: vec![Atom::DataEq(cons("x", "xs"), StaticTerm::con("ilist_nil", vec![]))],
            goal: Atom::False,
        };
        assert_eq!(simplify(&c).hyps, vec![Atom::False]);
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn substitution_of_equalities() {
        let c = Constraint { vars: ints(&["n", "i"]), hyps: vec![atom("n = i + 1")], goal: atom("n > i") };
        let s = simplify(&c);
        assert!(s.hyps.is_empty());
        assert_eq!(s.goal, Atom::True);
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn disequality_splitting() {
        let c = Constraint {
            vars: ints(&["x"]),
            hyps: vec![atom("x <> 0"), atom("x >= 0"), atom("x <= 1")],
            goal: atom("x = 1"),
        };
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn tightening_rules_out_parity_gap() {
        // 2x = 2y + 1 has no integer solution
        let c = Constraint { vars: ints(&["x", "y"]), hyps: vec![atom("2 * x = 2 * y + 1")], goal: Atom::False };
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn bool_hypotheses() {
        let c = Constraint {
            vars: vec![("b".into(), Sort::Bool)],
            hyps: vec![Atom::BoolVar { name: "b".into(), value: true }],
            goal: Atom::BoolVar { name: "b".into(), value: true },
        };
        assert_eq!(solve(&c), SolveResult::Valid);
    }

    #[test]
    fn dump_format() {
        let c = Constraint { vars: ints(&["x", "y"]), hyps: vec![atom("x <= y")], goal: atom("x < y") };
        assert_eq!(c.to_string(), "x:int, y:int | 0 + 1*x + -1*y <= 0 |- 0 + 1*x + -1*y < 0");
    }
}
