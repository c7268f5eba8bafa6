//! Call-by-value evaluation of erased programs with exact integers.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::{BinOp, TypeExpr, UnOp};
use crate::erase::{ErasedArm, ErasedBind, ErasedFun, ErasedProgram, ErasedTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no function named `{0}`")]
    UnknownEntry(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("internal error: no case arm matches {0}")]
    MatchFailure(String),
    #[error("internal error: unbound name `{0}`")]
    Unbound(String),
    #[error("internal error: {0}")]
    Stuck(String),
    #[error("bad argument `{text}`: {reason}")]
    BadArgument { text: String, reason: String },
}

#[derive(Clone)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Con(Rc<str>, Rc<[Value]>),
    Tuple(Rc<[Value]>),
    Closure(Rc<Closure>),
}

pub enum Closure {
    Lam { params: Vec<String>, body: ErasedTerm, env: Env },
    /// Member `index` of a local function group.
    Group { funs: Rc<[ErasedFun]>, index: usize, env: Env },
    Global(String),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Con(c, xs), Value::Con(d, ys)) => c == d && xs == ys,
            (Value::Tuple(xs), Value::Tuple(ys)) => xs == ys,
            _ => false,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Con(c, xs) => write!(f, "{c}{:?}", &xs[..]),
            Value::Tuple(xs) => write!(f, "{:?}", &xs[..]),
            Value::Closure(_) => write!(f, "<fun>"),
        }
    }
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Value::Int(n.into())
    }

    /// Builds a list value from the nil and cons constructors of `shape`.
    pub fn list(items: Vec<Value>, nil: &str, cons: &str) -> Self {
        let cons: Rc<str> = Rc::from(cons);
        items
            .into_iter()
            .rev()
            .fold(Value::Con(Rc::from(nil), Rc::from(vec![])), |acc, x| Value::Con(cons.clone(), Rc::from(vec![x, acc])))
    }

    /// The elements of a list value, if it is one.
    pub fn as_list(&self, program: &ErasedProgram) -> Option<Vec<Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            let Value::Con(c, fields) = cur else { return None };
            let shape = program.list_shape_of_ctor(c)?;
            if **c == *shape.nil {
                return Some(out);
            }
            out.push(fields[0].clone());
            cur = &fields[1];
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Literal syntax: integers, booleans, `[1,2,3]` for lists.
    pub fn render(&self, program: &ErasedProgram) -> String {
        if let Some(items) = self.as_list(program) {
            let parts: Vec<String> = items.iter().map(|v| v.render(program)).collect();
            return format!("[{}]", parts.join(","));
        }
        match self {
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Con(c, xs) => {
                let parts: Vec<String> = xs.iter().map(|v| v.render(program)).collect();
                format!("{c}({})", parts.join(", "))
            }
            Value::Tuple(xs) => {
                let parts: Vec<String> = xs.iter().map(|v| v.render(program)).collect();
                format!("({})", parts.join(", "))
            }
            Value::Closure(_) => "<fun>".into(),
        }
    }

    /// Reads a command-line argument for a parameter of type `ty`.
    pub fn parse_arg(text: &str, ty: &TypeExpr, program: &ErasedProgram) -> Result<Value, EvalError> {
        let bad = |reason: &str| EvalError::BadArgument { text: text.to_string(), reason: reason.to_string() };
        let t = text.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let mut ty = ty;
            while let TypeExpr::Forall(_, b) | TypeExpr::Exists(_, b) = ty {
                ty = b;
            }
            let TypeExpr::Named { name, .. } = ty else { return Err(bad("parameter is not a list")) };
            let shape = program.lists.get(name).ok_or_else(|| bad("parameter is not a list"))?;
            let items = if inner.trim().is_empty() {
                vec![]
            } else {
                inner.split(',').map(|s| scalar(s.trim()).ok_or_else(|| bad("expected an integer"))).collect::<Result<_, _>>()?
            };
            return Ok(Value::list(items, &shape.nil, &shape.cons));
        }
        scalar(t).ok_or_else(|| bad("expected an integer, a boolean or a bracketed list"))
    }
}

fn scalar(s: &str) -> Option<Value> {
    match s {
        "true" => Some(Value::Bool(true)),
        "false" => Some(Value::Bool(false)),
        _ => s.parse::<BigInt>().ok().map(Value::Int),
    }
}

/// A persistent environment.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<Frame>>);

struct Frame {
    name: String,
    value: Value,
    next: Env,
}

impl Env {
    fn bind(&self, name: &str, value: Value) -> Env {
        if name == "_" {
            return self.clone();
        }
        Env(Some(Rc::new(Frame { name: name.to_string(), value, next: self.clone() })))
    }

    fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(frame) = cur {
            if frame.name == name {
                return Some(&frame.value);
            }
            cur = &frame.next.0;
        }
        None
    }
}

/// Evaluates entries of one program. Steps count applications of user
/// functions, including the entry call.
pub struct Interpreter<'p> {
    program: &'p ErasedProgram,
    globals: HashMap<String, Value>,
    fuel: Option<u64>,
    pub steps: u64,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p ErasedProgram) -> Result<Self, EvalError> {
        let mut it = Interpreter { program, globals: HashMap::new(), fuel: None, steps: 0 };
        for (names, term) in &program.vals {
            let v = it.eval(&Env::default(), term)?;
            for (n, v) in destructure(names, v)? {
                it.globals.insert(n, v);
            }
        }
        it.steps = 0;
        Ok(it)
    }

    pub fn with_fuel(mut self, fuel: Option<u64>) -> Self {
        self.fuel = fuel;
        self
    }

    /// Calls `entry` on `args`, resetting the step count first.
    pub fn call(&mut self, entry: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        self.steps = 0;
        if !self.program.funs.contains_key(entry) {
            return Err(EvalError::UnknownEntry(entry.to_string()));
        }
        self.apply(&Value::Closure(Rc::new(Closure::Global(entry.to_string()))), entry, args)
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        match self.fuel {
            Some(f) if self.steps > f => Err(EvalError::FuelExhausted),
            _ => Ok(()),
        }
    }

    fn lookup(&self, env: &Env, name: &str) -> Result<Value, EvalError> {
        if let Some(v) = env.lookup(name) {
            return Ok(v.clone());
        }
        if let Some(v) = self.globals.get(name) {
            return Ok(v.clone());
        }
        if self.program.funs.contains_key(name) {
            return Ok(Value::Closure(Rc::new(Closure::Global(name.to_string()))));
        }
        Err(EvalError::Unbound(name.to_string()))
    }

    fn apply(&mut self, f: &Value, name: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        let Value::Closure(c) = f else {
            return Err(EvalError::Stuck(format!("`{name}` is not a function")));
        };
        self.tick()?;
        let program: &'p ErasedProgram = self.program;
        let c = c.clone();
        let (params, body, env): (&[String], &ErasedTerm, Env) = match &*c {
            Closure::Lam { params, body, env } => (params, body, env.clone()),
            Closure::Group { funs, index, env } => {
                let f = &funs[*index];
                (&f.params, &f.body, bind_group(env, funs))
            }
            Closure::Global(g) => {
                let f = &program.funs[g];
                (&f.params, &f.body, Env::default())
            }
        };
        if params.len() != args.len() {
            return Err(EvalError::Arity { name: name.to_string(), expected: params.len(), found: args.len() });
        }
        let env = params.iter().zip(args).fold(env, |env, (p, a)| env.bind(p, a));
        self.eval(&env, body)
    }

    pub fn eval(&mut self, env: &Env, t: &ErasedTerm) -> Result<Value, EvalError> {
        match t {
            ErasedTerm::Var(x) => self.lookup(env, x),
            ErasedTerm::Int(n) => Ok(Value::Int(n.clone())),
            ErasedTerm::Bool(b) => Ok(Value::Bool(*b)),
            ErasedTerm::Con(c, args) => {
                let vs = args.iter().map(|a| self.eval(env, a)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Con(Rc::from(c.as_str()), Rc::from(vs)))
            }
            ErasedTerm::Call(name, args) => {
                let f = self.lookup(env, name)?;
                let vs = args.iter().map(|a| self.eval(env, a)).collect::<Result<Vec<_>, _>>()?;
                self.apply(&f, name, vs)
            }
            ErasedTerm::Tuple(items) => {
                let vs = items.iter().map(|a| self.eval(env, a)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Tuple(Rc::from(vs)))
            }
            ErasedTerm::BinOp(op, l, r) => self.binop(env, *op, l, r),
            ErasedTerm::UnOp(op, a) => match (op, self.eval(env, a)?) {
                (UnOp::Neg, Value::Int(n)) => Ok(Value::Int(-n)),
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (_, v) => Err(EvalError::Stuck(format!("bad operand {v:?}"))),
            },
            ErasedTerm::If(c, a, b) => match self.eval(env, c)? {
                Value::Bool(true) => self.eval(env, a),
                Value::Bool(false) => self.eval(env, b),
                v => Err(EvalError::Stuck(format!("condition is {v:?}"))),
            },
            ErasedTerm::Case(scrutinee, arms) => {
                let v = self.eval(env, scrutinee)?;
                let (arm, fields) = select(arms, &v)?;
                let env = arm.vars.iter().zip(fields.iter()).fold(env.clone(), |env, (x, f)| env.bind(x, f.clone()));
                self.eval(&env, &arm.body)
            }
            ErasedTerm::Let(binds, body) => {
                let mut env = env.clone();
                for b in binds {
                    env = match b {
                        ErasedBind::Val(group) => {
                            let mut values = Vec::new();
                            for (names, e) in group {
                                values.push((names, self.eval(&env, e)?));
                            }
                            let mut next = env.clone();
                            for (names, v) in values {
                                for (n, v) in destructure(names, v)? {
                                    next = next.bind(&n, v);
                                }
                            }
                            next
                        }
                        ErasedBind::Funs(funs) => bind_group(&env, &Rc::from(funs.clone())),
                    };
                }
                self.eval(&env, body)
            }
            ErasedTerm::Lam(params, body) => Ok(Value::Closure(Rc::new(Closure::Lam {
                params: params.clone(),
                body: (**body).clone(),
                env: env.clone(),
            }))),
        }
    }

    fn binop(&mut self, env: &Env, op: BinOp, l: &ErasedTerm, r: &ErasedTerm) -> Result<Value, EvalError> {
        let lv = self.eval(env, l)?;
        match (op, &lv) {
            (BinOp::And, Value::Bool(false)) => return Ok(lv),
            (BinOp::Or, Value::Bool(true)) => return Ok(lv),
            _ => {}
        }
        let rv = self.eval(env, r)?;
        Ok(match (op, lv, rv) {
            (BinOp::And | BinOp::Or, _, Value::Bool(b)) => Value::Bool(b),
            (BinOp::Add, Value::Int(a), Value::Int(b)) => Value::Int(a + b),
            (BinOp::Sub, Value::Int(a), Value::Int(b)) => Value::Int(a - b),
            (BinOp::Mul, Value::Int(a), Value::Int(b)) => Value::Int(a * b),
            (BinOp::Le, Value::Int(a), Value::Int(b)) => Value::Bool(a <= b),
            (BinOp::Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
            (BinOp::Ge, Value::Int(a), Value::Int(b)) => Value::Bool(a >= b),
            (BinOp::Gt, Value::Int(a), Value::Int(b)) => Value::Bool(a > b),
            (BinOp::Eq, a, b) => Value::Bool(a == b),
            (BinOp::Ne, a, b) => Value::Bool(a != b),
            (op, a, b) => return Err(EvalError::Stuck(format!("bad operands {a:?} {} {b:?}", op.symbol()))),
        })
    }
}

fn bind_group(env: &Env, funs: &Rc<[ErasedFun]>) -> Env {
    funs.iter().enumerate().fold(env.clone(), |acc, (i, f)| {
        acc.bind(&f.name, Value::Closure(Rc::new(Closure::Group { funs: funs.clone(), index: i, env: env.clone() })))
    })
}

fn select<'a>(arms: &'a [ErasedArm], v: &Value) -> Result<(&'a ErasedArm, Rc<[Value]>), EvalError> {
    let Value::Con(c, fields) = v else {
        return Err(EvalError::MatchFailure(format!("{v:?}")));
    };
    for arm in arms {
        match &arm.ctor {
            None => return Ok((arm, Rc::from(vec![]))),
            Some(name) if **name == **c => return Ok((arm, fields.clone())),
            Some(_) => {}
        }
    }
    Err(EvalError::MatchFailure(format!("{v:?}")))
}

fn destructure(names: &[String], v: Value) -> Result<Vec<(String, Value)>, EvalError> {
    if let [single] = names {
        return Ok(vec![(single.clone(), v)]);
    }
    match v {
        Value::Tuple(items) if items.len() == names.len() => {
            Ok(names.iter().cloned().zip(items.iter().cloned()).collect())
        }
        other => Err(EvalError::Stuck(format!("cannot bind {} names to {other:?}", names.len()))),
    }
}

/// Evaluates `entry` on `args` and also returns the step count.
pub fn count_steps(
    program: &ErasedProgram,
    entry: &str,
    args: Vec<Value>,
    fuel: Option<u64>,
) -> Result<(Value, u64), EvalError> {
    let mut it = Interpreter::new(program)?.with_fuel(fuel);
    let v = it.call(entry, args)?;
    Ok((v, it.steps))
}

/// Evaluates `entry` on `args`.
pub fn evaluate(program: &ErasedProgram, entry: &str, args: Vec<Value>) -> Result<Value, EvalError> {
    count_steps(program, entry, args, None).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{check_source, corpus_dir, default_prelude};
    use crate::erase::erase;

    fn program(file: &str) -> ErasedProgram {
        let src = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
        let checked = check_source(Some(&default_prelude()), &src, file);
        erase(&checked).unwrap().program
    }

    #[test]
    fn fibats_of_zero_is_zero() {
        let p = program("fibats.mats");
        let (v, steps) = count_steps(&p, "fibats", vec![Value::int(0)], None).unwrap();
        assert_eq!(v, Value::int(0));
        assert_eq!(steps, 2);
    }

    #[test]
    fn fuel_runs_out() {
        let p = program("fib_plain.mats");
        let err = count_steps(&p, "fib", vec![Value::int(20)], Some(100)).unwrap_err();
        assert_eq!(err, EvalError::FuelExhausted);
    }

    #[test]
    fn list_arguments_round_trip() {
        let p = program("insort_verified.mats");
        let ty = &p.funs["insort_int"].param_types[0];
        let v = Value::parse_arg("[3, 1, 2]", ty, &p).unwrap();
        assert_eq!(v.render(&p), "[3,1,2]");
        let sorted = evaluate(&p, "insort_int", vec![v]).unwrap();
        assert_eq!(sorted.render(&p), "[1,2,3]");
        assert_eq!(Value::parse_arg("[]", ty, &p).unwrap().render(&p), "[]");
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let p = program("fibats.mats");
        let ty = &p.funs["fibats"].param_types[0];
        assert!(matches!(Value::parse_arg("ten", ty, &p), Err(EvalError::BadArgument { .. })));
        assert!(matches!(Value::parse_arg("[1]", ty, &p), Err(EvalError::BadArgument { .. })));
    }

    #[test]
    fn unknown_entry() {
        let p = program("fibats.mats");
        assert_eq!(evaluate(&p, "main", vec![]).unwrap_err(), EvalError::UnknownEntry("main".into()));
    }
}
