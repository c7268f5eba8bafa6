use miniats_core::audit::{builtin_models, AVal};
use miniats_core::corpus::{check_source, corpus_dir, default_prelude};
use miniats_core::erase::{erase, ErasedProgram};
use miniats_core::eval::{count_steps, Interpreter, Value};
use num_bigint::BigInt;

fn program(file: &str) -> ErasedProgram {
    let src = std::fs::read_to_string(corpus_dir().join(file)).unwrap();
    let checked = check_source(Some(&default_prelude()), &src, file);
    assert!(checked.accepted(), "{file}");
    erase(&checked).unwrap().program
}

fn list_arg(p: &ErasedProgram, entry: &str, xs: &[i64]) -> Value {
    let text = format!("[{}]", xs.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
    Value::parse_arg(&text, &p.funs[entry].param_types[0], p).unwrap()
}

fn ints(p: &ErasedProgram, v: &Value) -> Vec<i64> {
    v.as_list(p).unwrap().iter().map(|x| i64::try_from(x.as_int().unwrap().clone()).unwrap()).collect()
}

fn fib_oracle(n: u32) -> BigInt {
    let (mut a, mut b) = (BigInt::from(0), BigInt::from(1));
    for _ in 0..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

/// The ordered permutation, found by trying permutations in turn.
fn sort_oracle(xs: &[i64]) -> Vec<i64> {
    fn go(rest: &mut Vec<i64>, acc: &mut Vec<i64>) -> Option<Vec<i64>> {
        if rest.is_empty() {
            return acc.windows(2).all(|w| w[0] <= w[1]).then(|| acc.clone());
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            acc.push(x);
            let found = go(rest, acc);
            acc.pop();
            rest.insert(i, x);
            if found.is_some() {
                return found;
            }
        }
        None
    }
    go(&mut xs.to_vec(), &mut Vec::new()).unwrap()
}

fn all_lists(len: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|xs: &Vec<i64>| (lo..=hi).map(move |v| [xs.clone(), vec![v]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn fibats_matches_the_recursive_definition() {
    let p = program("fibats.mats");
    let mut it = Interpreter::new(&p).unwrap();
    for n in 0..=40u32 {
        let v = it.call("fibats", vec![Value::int(n)]).unwrap();
        assert_eq!(v.as_int(), Some(&fib_oracle(n)), "fibats({n})");
    }
}

#[test]
fn fibats_steps_are_affine_and_plain_fib_is_exponential() {
    let p = program("fibats.mats");
    let pts: Vec<(f64, f64)> = [10u32, 20, 40]
        .iter()
        .map(|&n| (n as f64, count_steps(&p, "fibats", vec![Value::int(n)], None).unwrap().1 as f64))
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = (pts.iter().map(|p| p.0).sum::<f64>(), pts.iter().map(|p| p.1).sum::<f64>());
    let sxx = pts.iter().map(|p| p.0 * p.0).sum::<f64>();
    let sxy = pts.iter().map(|p| p.0 * p.1).sum::<f64>();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let icept = (sy - slope * sx) / k;
    for (x, y) in &pts {
        assert!(((slope * x + icept) - y).abs() / y < 0.01, "{pts:?}");
    }
    let plain = program("fib_plain.mats");
    let (_, slow) = count_steps(&plain, "fib", vec![Value::int(25)], None).unwrap();
    let (_, fast) = count_steps(&p, "fibats", vec![Value::int(25)], None).unwrap();
    assert!(slow > 100 * fast, "{slow} vs {fast}");
}

#[test]
fn sorts_agree_with_the_oracle_on_short_lists() {
    let progs = [
        ("insort_plain.mats", "insort_int"),
        ("insort_verified.mats", "insort_int"),
        ("qsrt_plain.mats", "qsrt_int"),
        ("qsrt_verified.mats", "qsrt_int"),
    ];
    let loaded: Vec<(ErasedProgram, &str)> = progs.iter().map(|(f, e)| (program(f), *e)).collect();
    for xs in all_lists(4, 0, 3) {
        let want = sort_oracle(&xs);
        for (p, entry) in &loaded {
            let mut it = Interpreter::new(p).unwrap();
            let out = it.call(entry, vec![list_arg(p, entry, &xs)]).unwrap();
            assert_eq!(ints(p, &out), want, "{entry} {xs:?}");
        }
    }
}

/// Outputs of the verified programs satisfy their asserted props under the
/// audit models.
#[test]
fn executions_satisfy_the_prop_models() {
    let models = builtin_models();
    for (file, entry) in [("insort_verified.mats", "insort_int"), ("qsrt_verified.mats", "qsrt_int")] {
        let p = program(file);
        for xs in all_lists(4, 0, 3) {
            let mut it = Interpreter::new(&p).unwrap();
            let out = it.call(entry, vec![list_arg(&p, entry, &xs)]).unwrap();
            let args = [AVal::List(xs.clone()), AVal::List(ints(&p, &out))];
            assert_eq!(models.holds("SORT", &args), Some(true), "{entry} {xs:?}");
        }
    }
    let p = program("fibats.mats");
    for n in 0..=20i64 {
        let v = count_steps(&p, "fibats", vec![Value::int(n)], None).unwrap().0;
        let r = i64::try_from(v.as_int().unwrap().clone()).unwrap();
        assert_eq!(models.holds("FIB", &[AVal::Int(n), AVal::Int(r)]), Some(true));
    }
}
