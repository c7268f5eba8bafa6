use std::collections::HashMap;

use miniats_core::lexer::tokenize;
use miniats_core::parser::parse_static_term;
use miniats_core::printer::print_static;
use miniats_core::solver::{solve, Atom, Constraint, Rel, SolveResult};
use miniats_core::statics::{eval_static, normalize_static, Concrete, Sort, StaticTerm};
use num_bigint::BigInt;
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

/// `c0*x + c1*y + c2*z + k  rel  0`, kept structural so the oracle below
/// evaluates it without going through the solver's own atoms.
#[derive(Clone, Debug)]
struct Lin {
    coeffs: Vec<i64>,
    k: i64,
    rel: Rel,
}

impl Lin {
    fn holds(&self, env: &[i64]) -> bool {
        let v: i64 = self.coeffs.iter().zip(env).map(|(c, x)| c * x).sum::<i64>() + self.k;
        match self.rel {
            Rel::Eq => v == 0,
            Rel::Ne => v != 0,
            Rel::Le => v <= 0,
            Rel::Lt => v < 0,
        }
    }

    fn term(&self) -> StaticTerm {
        let mut t = StaticTerm::int(self.k);
        for (c, v) in self.coeffs.iter().zip(VARS) {
            t = StaticTerm::binop("+", t, StaticTerm::binop("*", StaticTerm::int(*c), StaticTerm::var(v)));
        }
        t
    }

    fn atom(&self) -> Atom {
        Atom::compare(&self.term(), self.rel, &StaticTerm::int(0))
    }
}

fn lin(nvars: usize) -> impl Strategy<Value = Lin> {
    (
        prop::collection::vec(-3i64..=3, nvars),
        -6i64..=6,
        prop_oneof![Just(Rel::Eq), Just(Rel::Ne), Just(Rel::Le), Just(Rel::Lt)],
    )
        .prop_map(|(coeffs, k, rel)| Lin { coeffs, k, rel })
}

fn sequent() -> impl Strategy<Value = (usize, Vec<Lin>, Lin)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), prop::collection::vec(lin(n), 0..=4), lin(n)))
}

fn assignments(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| (lo..=hi).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_verdicts_survive_exhaustive_evaluation((n, hyps, goal) in sequent()) {
        let c = Constraint {
            vars: VARS[..n].iter().map(|v| (v.to_string(), Sort::Int)).collect(),
            hyps: hyps.iter().map(Lin::atom).collect(),
            goal: goal.atom(),
        };
        match solve(&c) {
            SolveResult::Valid => {
                for env in assignments(n, -10, 10) {
                    if hyps.iter().all(|h| h.holds(&env)) {
                        prop_assert!(goal.holds(&env), "valid verdict refuted at {env:?}");
                    }
                }
            }
            SolveResult::Invalid(model) => {
                let env: Vec<i64> = VARS[..n]
                    .iter()
                    .map(|v| match model.get(*v) {
                        Some(Concrete::Int(i)) => i64::try_from(i.clone()).unwrap(),
                        _ => 0,
                    })
                    .collect();
                prop_assert!(hyps.iter().all(|h| h.holds(&env)));
                prop_assert!(!goal.holds(&env));
            }
            SolveResult::Unknown(_) => {}
        }
    }
}

fn int_term() -> impl Strategy<Value = StaticTerm> {
    let leaf = prop_oneof![(-5i64..=5).prop_map(StaticTerm::int), prop::sample::select(&VARS[..]).prop_map(StaticTerm::var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StaticTerm::binop("+", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StaticTerm::binop("-", a, b)),
            ((-3i64..=3).prop_map(StaticTerm::int), inner.clone()).prop_map(|(a, b)| StaticTerm::binop("*", a, b)),
            inner.prop_map(|a| StaticTerm::con("neg", vec![a])),
        ]
    })
}

fn bool_term() -> impl Strategy<Value = StaticTerm> {
    let cmp = (prop::sample::select(&["<=", "<", ">=", ">", "=", "<>"][..]), int_term(), int_term())
        .prop_map(|(op, a, b)| StaticTerm::binop(op, a, b));
    cmp.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StaticTerm::and(a, b)),
            inner.prop_map(StaticTerm::not),
        ]
    })
}

fn eval_at(t: &StaticTerm, env: &[i64]) -> Option<Concrete> {
    let map: HashMap<&str, i64> = VARS.iter().copied().zip(env.iter().copied()).collect();
    eval_static(t, &|v| map.get(v).map(|n| Concrete::Int(BigInt::from(*n))))
}

proptest! {
    #[test]
    fn normalize_is_idempotent(t in prop_oneof![int_term(), bool_term()]) {
        let once = normalize_static(&t);
        prop_assert_eq!(normalize_static(&once), once);
    }

    #[test]
    fn normalize_preserves_meaning(t in prop_oneof![int_term(), bool_term()], env in prop::collection::vec(-8i64..=8, 3)) {
        prop_assert_eq!(eval_at(&normalize_static(&t), &env), eval_at(&t, &env));
    }

    #[test]
    fn printed_statics_parse_back(t in prop_oneof![int_term(), bool_term()]) {
        let printed = print_static(&t);
        let parsed = parse_static_term(&printed).unwrap();
        prop_assert_eq!(normalize_static(&parsed), normalize_static(&t), "{}", printed);
        prop_assert_eq!(print_static(&parsed), printed);
    }

    #[test]
    fn lexemes_cover_the_source(src in "[a-z0-9_ (),:|{}+*<>=\\-\n]{0,60}") {
        if let Ok(tokens) = tokenize(&src) {
            let mut rebuilt = String::new();
            let mut at = 0;
            for t in &tokens {
                rebuilt.push_str(&src[at..t.span.start]);
                prop_assert_eq!(&src[t.span.clone()], t.lexeme.as_str());
                rebuilt.push_str(&t.lexeme);
                at = t.span.end;
            }
            rebuilt.push_str(&src[at..]);
            prop_assert_eq!(rebuilt, src);
        }
    }
}
