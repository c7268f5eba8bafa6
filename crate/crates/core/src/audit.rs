//! Bounded auditing of trusted lemmas against executable models of their
//! props.
//!
//! A lemma is checked on every instantiation of its telescope over a small
//! domain: integers in a range and integer lists up to a length. The search
//! does not walk the full product. Each model can generate some argument
//! positions from others (`APPEND` splits its result, `PERM` permutes), and
//! variables are bound in the order that unlocks the most generation. The
//! generated candidate sets are complete, so the verdict is the one a naive
//! lexicographic walk would reach, counterexample included.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::ast::DeclKind;
use crate::checker::elab::LemmaSig;
use crate::checker::{Checker, Env};
use crate::corpus::{parse_or_report, without_redeclared, PRELUDE_FILE};
use crate::diag::Report;
use crate::statics::{Sort, StaticTerm};
use crate::types::DType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("no semantic model for prop `{0}`")]
    UnmodeledProp(String),
    #[error("{lemma}: search exceeded the cap of {cap} nodes")]
    BoundsTooLarge { lemma: String, cap: u64 },
    #[error("{lemma}: cannot enumerate `{var}` of sort {sort}")]
    UnsupportedSort { lemma: String, var: String, sort: String },
    #[error("{lemma}: cannot interpret `{term}`")]
    UnsupportedTerm { lemma: String, term: String },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("program rejected: {0}")]
    Rejected(String),
    #[error("no lemma named `{0}`")]
    UnknownLemma(String),
}

/// A concrete index value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AVal {
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
}

impl AVal {
    fn as_int(&self) -> Option<i64> {
        match self {
            AVal::Int(n) => Some(*n),
            _ => None,
        }
    }

    fn as_bool(&self) -> Option<bool> {
        match self {
            AVal::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn as_list(&self) -> Option<&[i64]> {
        match self {
            AVal::List(xs) => Some(xs),
            _ => None,
        }
    }
}

impl fmt::Display for AVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AVal::Int(n) => write!(f, "{n}"),
            AVal::Bool(b) => write!(f, "{b}"),
            AVal::List(xs) => {
                let items: Vec<String> = xs.iter().map(i64::to_string).collect();
                write!(f, "[{}]", items.join(","))
            }
        }
    }
}

/// Enumeration order: integers ascending, lists shortlex.
fn cmp_val(a: &AVal, b: &AVal) -> Ordering {
    match (a, b) {
        (AVal::Int(x), AVal::Int(y)) => x.cmp(y),
        (AVal::Bool(x), AVal::Bool(y)) => x.cmp(y),
        (AVal::List(x), AVal::List(y)) => x.len().cmp(&y.len()).then_with(|| x.cmp(y)),
        _ => Ordering::Equal,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditBounds {
    pub max_len: usize,
    pub min_val: i64,
    pub max_val: i64,
    /// Search nodes allowed per lemma.
    pub cap: u64,
}

impl Default for AuditBounds {
    fn default() -> Self {
        AuditBounds { max_len: 4, min_val: 0, max_val: 3, cap: 10_000_000 }
    }
}

impl AuditBounds {
    pub fn validate(&self) -> Result<(), AuditError> {
        if self.max_len == 0 {
            return Err(AuditError::InvalidBounds("list length bound must be positive".into()));
        }
        if self.min_val > self.max_val {
            return Err(AuditError::InvalidBounds(format!("empty value range {}..{}", self.min_val, self.max_val)));
        }
        if self.cap == 0 {
            return Err(AuditError::InvalidBounds("cap must be positive".into()));
        }
        Ok(())
    }

    fn in_range(&self, n: i64) -> bool {
        (self.min_val..=self.max_val).contains(&n)
    }

    fn contains(&self, v: &AVal) -> bool {
        match v {
            AVal::Int(n) => self.in_range(*n),
            AVal::Bool(_) => true,
            AVal::List(xs) => xs.len() <= self.max_len && xs.iter().all(|&n| self.in_range(n)),
        }
    }

    fn values(&self) -> u64 {
        (self.max_val - self.min_val + 1) as u64
    }

    fn domain_size(&self, sort: ASort) -> BigUint {
        match sort {
            ASort::Int => BigUint::from(self.values()),
            ASort::Bool => BigUint::from(2u32),
            ASort::List => {
                let k = BigUint::from(self.values());
                let mut total = BigUint::from(0u32);
                let mut pow = BigUint::one();
                for _ in 0..=self.max_len {
                    total += &pow;
                    pow *= &k;
                }
                total
            }
        }
    }

    /// All values of `sort`, in enumeration order.
    fn domain(&self, sort: ASort) -> Vec<AVal> {
        match sort {
            ASort::Int => (self.min_val..=self.max_val).map(AVal::Int).collect(),
            ASort::Bool => vec![AVal::Bool(false), AVal::Bool(true)],
            ASort::List => {
                let mut out = vec![AVal::List(Vec::new())];
                let mut layer: Vec<Vec<i64>> = vec![Vec::new()];
                for _ in 0..self.max_len {
                    let mut next = Vec::new();
                    for xs in &layer {
                        for n in self.min_val..=self.max_val {
                            let mut ys = xs.clone();
                            ys.push(n);
                            next.push(ys);
                        }
                    }
                    out.extend(next.iter().cloned().map(AVal::List));
                    layer = next;
                }
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ASort {
    Int,
    Bool,
    List,
}

type Test = fn(&[AVal]) -> bool;
type Gen = fn(usize, &[Option<AVal>]) -> Vec<Vec<AVal>>;

/// Executable meaning of one prop.
#[derive(Clone)]
pub struct PropModel {
    pub sorts: Vec<ASort>,
    test: Test,
    /// Input positions of each generation mode. A mode yields every tuple
    /// satisfying the prop that agrees with the given inputs.
    modes: Vec<Vec<usize>>,
    generate: Gen,
}

impl fmt::Debug for PropModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PropModel").field("sorts", &self.sorts).field("modes", &self.modes).finish()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SemanticModel {
    props: BTreeMap<String, PropModel>,
}

impl SemanticModel {
    pub fn get(&self, name: &str) -> Option<&PropModel> {
        self.props.get(name)
    }

    pub fn insert(&mut self, name: &str, model: PropModel) {
        self.props.insert(name.to_string(), model);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.props.keys().map(String::as_str)
    }

    /// Evaluates a prop on concrete arguments; `None` if it has no model or
    /// the arguments have the wrong shape.
    pub fn holds(&self, name: &str, args: &[AVal]) -> Option<bool> {
        let m = self.props.get(name)?;
        if args.len() != m.sorts.len() || !args.iter().zip(&m.sorts).all(|(a, s)| has_sort(a, *s)) {
            return None;
        }
        Some((m.test)(args))
    }
}

fn has_sort(v: &AVal, s: ASort) -> bool {
    matches!((v, s), (AVal::Int(_), ASort::Int) | (AVal::Bool(_), ASort::Bool) | (AVal::List(_), ASort::List))
}

fn list(v: &AVal) -> &[i64] {
    v.as_list().unwrap_or(&[])
}

fn int(v: &AVal) -> i64 {
    v.as_int().unwrap_or(0)
}

fn sorted(xs: &[i64]) -> Vec<i64> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v
}

fn ordered(xs: &[i64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

fn same_multiset(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && sorted(a) == sorted(b)
}

/// Distinct permutations of `xs`.
fn permutations(xs: &[i64]) -> Vec<Vec<i64>> {
    let mut cur = sorted(xs);
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap_or(i);
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn fib(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let (mut a, mut b) = (0i64, 1i64);
    for _ in 0..n {
        let c = a.checked_add(b)?;
        a = b;
        b = c;
    }
    Some(a)
}

fn l(xs: Vec<i64>) -> AVal {
    AVal::List(xs)
}

fn no_gen(_: usize, _: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    Vec::new()
}

fn known(args: &[Option<AVal>], i: usize) -> &AVal {
    args[i].as_ref().expect("mode input is bound")
}

fn gen_perm(mode: usize, args: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    let given = known(args, mode).clone();
    permutations(list(&given))
        .into_iter()
        .map(|p| if mode == 0 { vec![given.clone(), l(p)] } else { vec![l(p), given.clone()] })
        .collect()
}

fn gen_sort(mode: usize, args: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    if mode == 0 {
        let xs = known(args, 0);
        vec![vec![xs.clone(), l(sorted(list(xs)))]]
    } else {
        let ys = known(args, 1);
        if !ordered(list(ys)) {
            return Vec::new();
        }
        permutations(list(ys)).into_iter().map(|p| vec![l(p), ys.clone()]).collect()
    }
}

fn gen_append(mode: usize, args: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    if mode == 0 {
        let (a, b) = (known(args, 0), known(args, 1));
        vec![vec![a.clone(), b.clone(), l([list(a), list(b)].concat())]]
    } else {
        let c = known(args, 2);
        let xs = list(c);
        (0..=xs.len()).map(|k| vec![l(xs[..k].to_vec()), l(xs[k..].to_vec()), c.clone()]).collect()
    }
}

fn gen_union4(mode: usize, args: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    if mode == 0 {
        let x = known(args, 0).clone();
        let (a, b, c) = (known(args, 1).clone(), known(args, 2).clone(), known(args, 3).clone());
        let all = [&[int(&x)][..], list(&a), list(&b), list(&c)].concat();
        permutations(&all)
            .into_iter()
            .map(|p| vec![x.clone(), a.clone(), b.clone(), c.clone(), l(p)])
            .collect()
    } else {
        let r = known(args, 4);
        let xs = sorted(list(r));
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (i, &x) in xs.iter().enumerate() {
            if !seen.insert(x) {
                continue;
            }
            let mut rest = xs.clone();
            rest.remove(i);
            for p in permutations(&rest) {
                for j in 0..=p.len() {
                    for k in j..=p.len() {
                        out.push(vec![
                            AVal::Int(x),
                            l(p[..j].to_vec()),
                            l(p[j..k].to_vec()),
                            l(p[k..].to_vec()),
                            r.clone(),
                        ]);
                    }
                }
            }
        }
        out
    }
}

fn gen_fib(_: usize, args: &[Option<AVal>]) -> Vec<Vec<AVal>> {
    let n = known(args, 0);
    fib(int(n)).map(|r| vec![n.clone(), AVal::Int(r)]).into_iter().collect()
}

fn model(sorts: &[ASort], test: Test, modes: &[&[usize]], generate: Gen) -> PropModel {
    PropModel { sorts: sorts.to_vec(), test, modes: modes.iter().map(|m| m.to_vec()).collect(), generate }
}

/// Models of the list props and `FIB`. Elements of `E(a, x)` are identified
/// with their names, so every list prop is a prop over integer lists.
pub fn builtin_models() -> SemanticModel {
    use ASort::{Int as I, List as L};
    let mut m = SemanticModel::default();
    m.insert("ORD", model(&[L], |a| ordered(list(&a[0])), &[], no_gen));
    m.insert("PERM", model(&[L, L], |a| same_multiset(list(&a[0]), list(&a[1])), &[&[0], &[1]], gen_perm));
    m.insert(
        "SORT",
        model(&[L, L], |a| ordered(list(&a[1])) && same_multiset(list(&a[0]), list(&a[1])), &[&[0], &[1]], gen_sort),
    );
    m.insert("LB", model(&[I, L], |a| list(&a[1]).iter().all(|&e| int(&a[0]) <= e), &[], no_gen));
    m.insert("UB", model(&[I, L], |a| list(&a[1]).iter().all(|&e| int(&a[0]) >= e), &[], no_gen));
    m.insert(
        "UNION4",
        model(
            &[I, L, L, L, L],
            |a| {
                let all = [&[int(&a[0])][..], list(&a[1]), list(&a[2]), list(&a[3])].concat();
                same_multiset(&all, list(&a[4]))
            },
            &[&[0, 1, 2, 3], &[4]],
            gen_union4,
        ),
    );
    m.insert(
        "APPEND",
        model(&[L, L, L], |a| [list(&a[0]), list(&a[1])].concat() == list(&a[2]), &[&[0, 1], &[2]], gen_append),
    );
    m.insert("FIB", model(&[I, I], |a| fib(int(&a[0])) == Some(int(&a[1])), &[&[0]], gen_fib));
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every instantiation in bounds satisfies the lemma; `cases` counts the
    /// whole domain, vacuous instantiations included.
    Pass { cases: BigUint },
    Fail { counterexample: Vec<(String, AVal)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaAudit {
    pub name: String,
    pub verdict: Verdict,
    /// Search nodes visited.
    pub visited: u64,
}

impl LemmaAudit {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass { .. })
    }
}

impl fmt::Display for LemmaAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Pass { cases } => write!(f, "{} PASS n={cases}", self.name),
            Verdict::Fail { counterexample } => {
                let parts: Vec<String> = counterexample.iter().map(|(v, x)| format!("{v}={x}")).collect();
                write!(f, "{} FAIL {}", self.name, parts.join(", "))
            }
        }
    }
}

fn surface(name: &str) -> &str {
    name.split('$').next().unwrap_or(name)
}

#[derive(Clone, Debug)]
enum T {
    Var(usize),
    Int(i64),
    Bool(bool),
    Nil,
    Cons(Box<T>, Box<T>),
    Op(String, Vec<T>),
}

impl T {
    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            T::Var(i) => out.push(*i),
            T::Int(_) | T::Bool(_) | T::Nil => {}
            T::Cons(h, t) => {
                h.vars(out);
                t.vars(out);
            }
            T::Op(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn bound_in(&self, known: &[bool]) -> bool {
        match self {
            T::Var(i) => known[*i],
            T::Int(_) | T::Bool(_) | T::Nil => true,
            T::Cons(h, t) => h.bound_in(known) && t.bound_in(known),
            T::Op(_, args) => args.iter().all(|a| a.bound_in(known)),
        }
    }

    /// Whether matching a value against this term can bind its unknowns.
    fn pattern_in(&self, known: &[bool]) -> bool {
        match self {
            T::Cons(h, t) => h.pattern_in(known) && t.pattern_in(known),
            T::Op(..) => self.bound_in(known),
            _ => true,
        }
    }

    fn eval(&self, asg: &[Option<AVal>]) -> Option<AVal> {
        Some(match self {
            T::Var(i) => asg[*i].clone()?,
            T::Int(n) => AVal::Int(*n),
            T::Bool(b) => AVal::Bool(*b),
            T::Nil => AVal::List(Vec::new()),
            T::Cons(h, t) => {
                let h = h.eval(asg)?.as_int()?;
                let AVal::List(mut xs) = t.eval(asg)? else { return None };
                xs.insert(0, h);
                AVal::List(xs)
            }
            T::Op(op, args) => {
                let vs = args.iter().map(|a| a.eval(asg)).collect::<Option<Vec<_>>>()?;
                eval_op(op, &vs)?
            }
        })
    }
}

fn eval_op(op: &str, vs: &[AVal]) -> Option<AVal> {
    let i = |k: usize| vs.get(k).and_then(AVal::as_int);
    let b = |k: usize| vs.get(k).and_then(AVal::as_bool);
    Some(match op {
        "+" => AVal::Int(i(0)?.checked_add(i(1)?)?),
        "-" => AVal::Int(i(0)?.checked_sub(i(1)?)?),
        "*" => AVal::Int(i(0)?.checked_mul(i(1)?)?),
        "neg" => AVal::Int(i(0)?.checked_neg()?),
        "~" => AVal::Bool(!b(0)?),
        "&&" => AVal::Bool(b(0)? && b(1)?),
        "<=" => AVal::Bool(i(0)? <= i(1)?),
        "<" => AVal::Bool(i(0)? < i(1)?),
        ">=" => AVal::Bool(i(0)? >= i(1)?),
        ">" => AVal::Bool(i(0)? > i(1)?),
        "=" | "<>" => {
            let eq = vs.first()? == vs.get(1)?;
            AVal::Bool(if op == "=" { eq } else { !eq })
        }
        _ => return None,
    })
}

#[derive(Clone, Debug)]
struct Atom {
    name: String,
    args: Vec<T>,
    guard: Option<T>,
}

struct Lowering<'a> {
    lemma: &'a str,
    vars: HashMap<String, usize>,
    nils: HashSet<String>,
    conses: HashSet<String>,
}

impl Lowering<'_> {
    fn unsupported(&self, term: &StaticTerm) -> AuditError {
        AuditError::UnsupportedTerm { lemma: self.lemma.to_string(), term: term.to_string() }
    }

    fn term(&self, t: &StaticTerm) -> Result<T, AuditError> {
        Ok(match t {
            StaticTerm::Var(v) => T::Var(*self.vars.get(v).ok_or_else(|| self.unsupported(t))?),
            StaticTerm::Int(n) => T::Int(n.to_i64().ok_or_else(|| self.unsupported(t))?),
            StaticTerm::Bool(b) => T::Bool(*b),
            StaticTerm::Con(c, args) if args.is_empty() && self.nils.contains(c) => T::Nil,
            StaticTerm::Con(c, args) if args.len() == 2 && self.conses.contains(c) => {
                T::Cons(Box::new(self.term(&args[0])?), Box::new(self.term(&args[1])?))
            }
            StaticTerm::Con(op, args) if crate::statics::is_builtin_op(op) => {
                T::Op(op.clone(), args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)
            }
            _ => return Err(self.unsupported(t)),
        })
    }

    fn atom(&self, ty: &DType, models: &SemanticModel) -> Result<Atom, AuditError> {
        match ty {
            DType::Prop { name, indices } => {
                let m = models.get(name).ok_or_else(|| AuditError::UnmodeledProp(name.clone()))?;
                if m.sorts.len() != indices.len() {
                    return Err(AuditError::UnsupportedTerm { lemma: self.lemma.to_string(), term: ty.to_string() });
                }
                let args = indices.iter().map(|i| self.term(i)).collect::<Result<_, _>>()?;
                Ok(Atom { name: name.clone(), args, guard: None })
            }
            DType::Guarded(g, inner) => {
                let mut a = self.atom(inner, models)?;
                let g = self.term(g)?;
                a.guard = Some(match a.guard.take() {
                    Some(h) => T::Op("&&".into(), vec![g, h]),
                    None => g,
                });
                Ok(a)
            }
            _ => Err(AuditError::UnsupportedTerm { lemma: self.lemma.to_string(), term: ty.to_string() }),
        }
    }
}

/// Integer-list datasorts: one nullary and one `(int, self)` constructor.
fn list_ctors(env: &Env, sort: &str) -> Option<(String, String)> {
    let def = env.sig.datasort(sort)?;
    let [(a, aa), (b, ba)] = def.constructors.as_slice() else { return None };
    let is_cons = |args: &[Sort]| matches!(args, [Sort::Int, Sort::Data(s)] if s == sort);
    match (aa.is_empty(), ba.is_empty()) {
        (true, false) if is_cons(ba) => Some((a.clone(), b.clone())),
        (false, true) if is_cons(aa) => Some((b.clone(), a.clone())),
        _ => None,
    }
}

struct Search<'a> {
    lemma: &'a str,
    sorts: Vec<ASort>,
    guards: Vec<T>,
    premises: Vec<Atom>,
    conclusion: Atom,
    models: &'a SemanticModel,
    bounds: AuditBounds,
    domains: Vec<Vec<AVal>>,
    visited: u64,
    best: Option<Vec<AVal>>,
}

impl Search<'_> {
    fn holds(&self, atom: &Atom, asg: &[Option<AVal>]) -> Option<bool> {
        if let Some(g) = &atom.guard {
            if !g.eval(asg)?.as_bool()? {
                return Some(true);
            }
        }
        let args = atom.args.iter().map(|a| a.eval(asg)).collect::<Option<Vec<_>>>()?;
        Some(self.models.holds(&atom.name, &args).unwrap_or(false))
    }

    /// False if some fully bound guard or premise fails.
    fn consistent(&self, asg: &[Option<AVal>]) -> bool {
        self.guards.iter().all(|g| g.eval(asg).and_then(|v| v.as_bool()) != Some(false))
            && self.premises.iter().all(|p| self.holds(p, asg) != Some(false))
    }

    /// A premise mode whose inputs are bound and whose outputs still have
    /// unknowns.
    fn applicable(&self, atom: &Atom, known: &[bool]) -> Option<usize> {
        if atom.guard.is_some() {
            return None;
        }
        let model = self.models.get(&atom.name)?;
        model.modes.iter().position(|inputs| {
            inputs.iter().all(|&i| atom.args[i].bound_in(known))
                && (0..atom.args.len()).any(|i| !atom.args[i].bound_in(known))
                && atom.args.iter().all(|a| a.pattern_in(known))
        })
    }

    /// How many further variables become known by generation once `v` is.
    fn unlocks(&self, known: &[bool], v: usize) -> usize {
        let mut k = known.to_vec();
        k[v] = true;
        let before = k.iter().filter(|b| **b).count();
        loop {
            let mut changed = false;
            for p in &self.premises {
                if self.applicable(p, &k).is_some() {
                    let mut vs = Vec::new();
                    p.args.iter().for_each(|a| a.vars(&mut vs));
                    for i in vs {
                        changed |= !k[i];
                        k[i] = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        k.iter().filter(|b| **b).count() - before
    }

    fn bind(&self, t: &T, v: &AVal, asg: &mut [Option<AVal>], trail: &mut Vec<usize>) -> bool {
        match (t, v) {
            (T::Var(i), _) => match &asg[*i] {
                Some(old) => old == v,
                None => {
                    if !has_sort(v, self.sorts[*i]) || !self.bounds.contains(v) {
                        return false;
                    }
                    asg[*i] = Some(v.clone());
                    trail.push(*i);
                    true
                }
            },
            (T::Nil, AVal::List(xs)) => xs.is_empty(),
            (T::Cons(h, tl), AVal::List(xs)) if !xs.is_empty() => {
                self.bind(h, &AVal::Int(xs[0]), asg, trail) && self.bind(tl, &AVal::List(xs[1..].to_vec()), asg, trail)
            }
            (T::Cons(..), _) | (T::Nil, _) => false,
            _ => t.eval(asg).as_ref() == Some(v),
        }
    }

    fn go(&mut self, asg: &mut Vec<Option<AVal>>) -> Result<(), AuditError> {
        self.visited += 1;
        if self.visited > self.bounds.cap {
            return Err(AuditError::BoundsTooLarge { lemma: self.lemma.to_string(), cap: self.bounds.cap });
        }
        if !self.consistent(asg) {
            return Ok(());
        }
        let known: Vec<bool> = asg.iter().map(Option::is_some).collect();
        if known.iter().all(|b| *b) {
            if self.holds(&self.conclusion, asg) == Some(false) {
                let cand: Vec<AVal> = asg.iter().flatten().cloned().collect();
                let better = match &self.best {
                    None => true,
                    Some(b) => {
                        cand.iter().zip(b).map(|(x, y)| cmp_val(x, y)).find(|o| o.is_ne()) == Some(Ordering::Less)
                    }
                };
                if better {
                    self.best = Some(cand);
                }
            }
            return Ok(());
        }
        let generated = self.premises.iter().find_map(|p| self.applicable(p, &known).map(|m| (p.clone(), m)));
        if let Some((atom, mode)) = generated {
            let model = self.models.get(&atom.name).expect("modeled");
            let inputs: Vec<Option<AVal>> = atom.args.iter().map(|a| a.eval(asg)).collect();
            let mut given = vec![None; inputs.len()];
            for &i in &model.modes[mode] {
                given[i] = inputs[i].clone();
            }
            for tuple in (model.generate)(mode, &given) {
                let mut trail = Vec::new();
                if atom.args.iter().zip(&tuple).all(|(t, v)| self.bind(t, v, asg, &mut trail)) {
                    self.go(asg)?;
                }
                for i in trail {
                    asg[i] = None;
                }
            }
            return Ok(());
        }
        let free: Vec<usize> = (0..asg.len()).filter(|&i| !known[i]).collect();
        let mut pick = free[0];
        let mut score = self.unlocks(&known, pick);
        for &v in &free[1..] {
            let s = self.unlocks(&known, v);
            if s > score {
                pick = v;
                score = s;
            }
        }
        for k in 0..self.domains[pick].len() {
            asg[pick] = Some(self.domains[pick][k].clone());
            self.go(asg)?;
        }
        asg[pick] = None;
        Ok(())
    }
}

/// Audits one lemma. Any lexicographically least counterexample is
/// reported, so the result does not depend on the search order.
pub fn audit_lemma(
    lemma: &LemmaSig,
    env: &Env,
    models: &SemanticModel,
    bounds: &AuditBounds,
) -> Result<LemmaAudit, AuditError> {
    bounds.validate()?;
    let mut lowering =
        Lowering { lemma: &lemma.name, vars: HashMap::new(), nils: HashSet::new(), conses: HashSet::new() };
    let mut sorts = Vec::new();
    for (i, (v, s)) in lemma.telescope.iter().enumerate() {
        let sort = match s {
            Sort::Int => ASort::Int,
            Sort::Bool => ASort::Bool,
            Sort::Data(d) if list_ctors(env, d.as_str()).is_some() => {
                let (nil, cons) = list_ctors(env, d.as_str()).expect("list datasort");
                lowering.nils.insert(nil);
                lowering.conses.insert(cons);
                ASort::List
            }
            other => {
                return Err(AuditError::UnsupportedSort {
                    lemma: lemma.name.clone(),
                    var: surface(v).to_string(),
                    sort: other.to_string(),
                })
            }
        };
        lowering.vars.insert(v.clone(), i);
        sorts.push(sort);
    }
    for d in env.sig.datasort_names() {
        if let Some((nil, cons)) = list_ctors(env, &d) {
            lowering.nils.insert(nil);
            lowering.conses.insert(cons);
        }
    }
    let premises = lemma.premises.iter().map(|p| lowering.atom(p, models)).collect::<Result<Vec<_>, _>>()?;
    let conclusion = lowering.atom(&lemma.conclusion, models)?;
    let guards = lemma.guards.iter().map(|g| lowering.term(g)).collect::<Result<Vec<_>, _>>()?;
    let domains = sorts.iter().map(|s| bounds.domain(*s)).collect();
    let mut search = Search {
        lemma: &lemma.name,
        sorts: sorts.clone(),
        guards,
        premises,
        conclusion,
        models,
        bounds: *bounds,
        domains,
        visited: 0,
        best: None,
    };
    let mut asg = vec![None; sorts.len()];
    search.go(&mut asg)?;
    let verdict = match search.best.take() {
        Some(vals) => Verdict::Fail {
            counterexample: lemma.telescope.iter().map(|(v, _)| surface(v).to_string()).zip(vals).collect(),
        },
        None => Verdict::Pass { cases: sorts.iter().map(|s| bounds.domain_size(*s)).product() },
    };
    Ok(LemmaAudit { name: lemma.name.clone(), verdict, visited: search.visited })
}

/// Re-evaluates a counterexample: guards and premises hold, the conclusion
/// does not.
pub fn refutes(lemma: &LemmaSig, env: &Env, models: &SemanticModel, cex: &[(String, AVal)]) -> bool {
    let mut lowering =
        Lowering { lemma: &lemma.name, vars: HashMap::new(), nils: HashSet::new(), conses: HashSet::new() };
    for (i, (v, _)) in lemma.telescope.iter().enumerate() {
        lowering.vars.insert(v.clone(), i);
    }
    for d in env.sig.datasort_names() {
        if let Some((nil, cons)) = list_ctors(env, &d) {
            lowering.nils.insert(nil);
            lowering.conses.insert(cons);
        }
    }
    let asg: Vec<Option<AVal>> = cex.iter().map(|(_, v)| Some(v.clone())).collect();
    if asg.len() != lemma.telescope.len() {
        return false;
    }
    let atom_holds = |ty: &DType| -> Option<bool> {
        let a = lowering.atom(ty, models).ok()?;
        if let Some(g) = &a.guard {
            if !g.eval(&asg)?.as_bool()? {
                return Some(true);
            }
        }
        let args = a.args.iter().map(|t| t.eval(&asg)).collect::<Option<Vec<_>>>()?;
        models.holds(&a.name, &args)
    };
    let guards_hold = lemma
        .guards
        .iter()
        .all(|g| lowering.term(g).ok().and_then(|t| t.eval(&asg)).and_then(|v| v.as_bool()) == Some(true));
    guards_hold
        && lemma.premises.iter().all(|p| atom_holds(p) == Some(true))
        && atom_holds(&lemma.conclusion) == Some(false)
}

/// A file's lemmas, checked after the prelude. Prelude declarations whose
/// names the file declares again are dropped, so a lemma file can restate
/// what the prelude already assumes.
#[derive(Debug)]
pub struct LemmaSet {
    pub env: Env,
    pub names: Vec<String>,
}

pub fn load_lemmas(prelude: Option<&str>, src: &str, file: &str) -> Result<LemmaSet, AuditError> {
    let decls = parse_or_report(src, file).map_err(|d| AuditError::Rejected(d.to_string()))?;
    let mut checker = Checker::new();
    let mut report = Report::default();
    if let Some(p) = prelude {
        let pdecls = parse_or_report(p, PRELUDE_FILE).map_err(|d| AuditError::Rejected(d.to_string()))?;
        checker.check_decls(&without_redeclared(pdecls, &decls), &mut report);
    }
    checker.check_decls(&decls, &mut report);
    if let Some(d) = report.errors().next() {
        return Err(AuditError::Rejected(d.to_string()));
    }
    let names = decls
        .iter()
        .filter_map(|d| match &d.kind {
            DeclKind::Praxi { name, .. } => Some(name.clone()),
            _ => None,
        })
        .collect();
    Ok(LemmaSet { env: checker.env, names })
}

/// Audits every lemma of the set, or only `only` if given.
pub fn audit_all(
    set: &LemmaSet,
    models: &SemanticModel,
    bounds: &AuditBounds,
    only: Option<&str>,
) -> Result<Vec<LemmaAudit>, AuditError> {
    if let Some(name) = only {
        if !set.names.iter().any(|n| n == name) {
            return Err(AuditError::UnknownLemma(name.to_string()));
        }
    }
    set.names
        .iter()
        .filter(|n| only.is_none_or(|o| o == n.as_str()))
        .map(|n| audit_lemma(&set.env.lemmas[n], &set.env, models, bounds))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{base_prelude, corpus_dir};

    fn li(xs: &[i64]) -> AVal {
        AVal::List(xs.to_vec())
    }

    fn audit_text(src: &str) -> Vec<String> {
        let set = load_lemmas(Some(base_prelude()), src, "t.mats").unwrap();
        audit_all(&set, &builtin_models(), &AuditBounds::default(), None)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    #[test]
    fn model_examples() {
        let m = builtin_models();
        assert_eq!(m.holds("ORD", &[li(&[1, 1, 2])]), Some(true));
        assert_eq!(m.holds("PERM", &[li(&[1, 2, 2]), li(&[2, 1, 2])]), Some(true));
        assert_eq!(m.holds("PERM", &[li(&[1, 2]), li(&[1, 1])]), Some(false));
        assert_eq!(m.holds("UNION4", &[AVal::Int(5), li(&[]), li(&[1]), li(&[2]), li(&[2, 5, 1])]), Some(true));
        assert_eq!(m.holds("FIB", &[AVal::Int(10), AVal::Int(55)]), Some(true));
        assert_eq!(m.holds("ORD", &[AVal::Int(1)]), None);
    }

    #[test]
    fn permutations_are_distinct() {
        assert_eq!(permutations(&[1, 2, 2]).len(), 3);
        assert_eq!(permutations(&[3, 1, 2]).len(), 6);
        assert_eq!(permutations(&[]), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn list_domain_is_shortlex() {
        let b = AuditBounds { max_len: 2, min_val: 0, max_val: 1, cap: 10 };
        let d: Vec<String> = b.domain(ASort::List).iter().map(ToString::to_string).collect();
        assert_eq!(d, ["[]", "[0]", "[1]", "[0,0]", "[0,1]", "[1,0]", "[1,1]"]);
        assert_eq!(b.domain_size(ASort::List), BigUint::from(7u32));
    }

    #[test]
    fn unguarded_sort_ins_fails() {
        let src = "praxi SORT_ins {x,y:int} {ys1,ys2:ilist}\n  (ORD (cons (y, ys1)), SORT (cons (x, ys1), ys2)) : SORT (cons (x, cons (y, ys1)), cons (y, ys2))\n";
        assert_eq!(audit_text(src), ["SORT_ins FAIL x=0, y=1, ys1=[], ys2=[0]"]);
    }

    #[test]
    fn perm_refl_passes_over_whole_domain() {
        let out = audit_text("praxi PERM_refl {xs:ilist} () : PERM (xs, xs)\n");
        assert_eq!(out, ["PERM_refl PASS n=341"]);
    }

    #[test]
    fn unmodeled_prop_is_reported() {
        let set = load_lemmas(Some(base_prelude()), "absprop Q (int)\npraxi q {x:int} () : Q (x)\n", "t.mats").unwrap();
        let err = audit_all(&set, &builtin_models(), &AuditBounds::default(), None).unwrap_err();
        assert_eq!(err, AuditError::UnmodeledProp("Q".into()));
    }

    #[test]
    fn cap_is_enforced() {
        let set = load_lemmas(Some(base_prelude()), "praxi PERM_refl {xs:ilist} () : PERM (xs, xs)\n", "t.mats").unwrap();
        let bounds = AuditBounds { cap: 10, ..AuditBounds::default() };
        assert!(matches!(audit_all(&set, &builtin_models(), &bounds, None), Err(AuditError::BoundsTooLarge { .. })));
    }

    #[test]
    fn insort_lemmas_pass() {
        let src = std::fs::read_to_string(corpus_dir().join("prelude_insort_lemmas.mats")).unwrap();
        let out = audit_text(&src);
        assert_eq!(out.len(), 11);
        assert!(out.iter().all(|l| l.contains(" PASS ")), "{out:?}");
    }
}
