use miniats_core::audit::{
    audit_all, audit_lemma, builtin_models, load_lemmas, refutes, AVal, AuditBounds, LemmaSet, Verdict,
};
use miniats_core::corpus::{base_prelude, corpus_dir};
use miniats_core::statics::Sort;

fn lemma_file(rel: &str) -> LemmaSet {
    let src = std::fs::read_to_string(corpus_dir().join(rel)).unwrap();
    load_lemmas(Some(base_prelude()), &src, rel).unwrap()
}

fn text(src: &str) -> LemmaSet {
    load_lemmas(Some(base_prelude()), src, "t.mats").unwrap()
}

const WRONG: &str = "\
praxi SORT_ins_noguard {x,y:int} {ys1,ys2:ilist}
  (ORD (cons (y, ys1)), SORT (cons (x, ys1), ys2)) : SORT (cons (x, cons (y, ys1)), cons (y, ys2))
praxi LB_cons_flip {x0,x:int | x0 >= x} {xs:ilist} (LB (x0, xs)) : LB (x0, cons (x, xs))
praxi UNION4_lost {x0,x:int} {xs,ys,zs,res:ilist}
  (UNION4 (x0, xs, cons (x, ys), zs, res)) : UNION4 (x0, xs, ys, zs, res)
praxi APPEND_swap {ys,zs,res:ilist} (APPEND (ys, zs, res)) : APPEND (zs, ys, res)
praxi APPEND_noord {x:int} {ys,zs,res:ilist}
  (UB (x, ys), LB (x, zs), APPEND (ys, cons (x, zs), res)) : ORD (res)
praxi PERM_sort {xs,ys:ilist} (PERM (xs, ys), ORD (ys)) : SORT (ys, xs)
praxi ORD_head {x:int} {xs:ilist} (ORD (xs)) : ORD (cons (x, xs))
";

/// Every list over `lo..=hi` up to `len`, shortlex.
fn lists(len: usize, lo: i64, hi: i64) -> Vec<AVal> {
    let mut out = vec![vec![]];
    let mut start = 0;
    for _ in 0..len {
        let end = out.len();
        for i in start..end {
            for v in lo..=hi {
                let mut xs: Vec<i64> = out[i].clone();
                xs.push(v);
                out.push(xs);
            }
        }
        start = end;
    }
    out.into_iter().map(AVal::List).collect()
}

/// Walks the whole product in telescope order and returns the first
/// refuting instantiation.
fn brute(set: &LemmaSet, name: &str, b: &AuditBounds) -> Option<Vec<(String, AVal)>> {
    let lemma = &set.env.lemmas[name];
    let models = builtin_models();
    let doms: Vec<Vec<AVal>> = lemma
        .telescope
        .iter()
        .map(|(_, s)| match s {
            Sort::Int => (b.min_val..=b.max_val).map(AVal::Int).collect(),
            Sort::Bool => vec![AVal::Bool(false), AVal::Bool(true)],
            _ => lists(b.max_len, b.min_val, b.max_val),
        })
        .collect();
    let names: Vec<String> =
        lemma.telescope.iter().map(|(v, _)| v.split('$').next().unwrap().to_string()).collect();
    let mut idx = vec![0usize; doms.len()];
    loop {
        let inst: Vec<(String, AVal)> =
            names.iter().cloned().zip(idx.iter().zip(&doms).map(|(&i, d)| d[i].clone())).collect();
        if refutes(lemma, &set.env, &models, &inst) {
            return Some(inst);
        }
        let mut k = doms.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < doms[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn agrees_with_brute(set: &LemmaSet, b: &AuditBounds) {
    let models = builtin_models();
    for name in &set.names {
        let got = audit_lemma(&set.env.lemmas[name], &set.env, &models, b).unwrap();
        let want = brute(set, name, b);
        match (&got.verdict, want) {
            (Verdict::Pass { .. }, None) => {}
            (Verdict::Fail { counterexample }, Some(w)) => assert_eq!(counterexample, &w, "{name}"),
            (v, w) => panic!("{name}: search says {v:?}, brute force says {w:?}"),
        }
    }
}

#[test]
fn insort_lemmas_all_pass() {
    let set = lemma_file("prelude_insort_lemmas.mats");
    let out = audit_all(&set, &builtin_models(), &AuditBounds::default(), None).unwrap();
    assert_eq!(out.len(), 11);
    for r in &out {
        assert!(r.passed(), "{r}");
    }
}

#[test]
fn qsort_lemmas_all_pass() {
    let set = lemma_file("prelude_qsort_lemmas.mats");
    let out = audit_all(&set, &builtin_models(), &AuditBounds::default(), None).unwrap();
    assert_eq!(out.len(), 11);
    for r in &out {
        assert!(r.passed(), "{r}");
    }
}

#[test]
fn false_lemma_is_refuted() {
    let set = lemma_file("mutations/false_lemma.mats");
    let out = audit_all(&set, &builtin_models(), &AuditBounds::default(), None).unwrap();
    let lines: Vec<String> = out.iter().map(ToString::to_string).collect();
    assert_eq!(lines, ["PERM2ORD FAIL xs=[0,1], ys=[1,0]"]);
    let Verdict::Fail { counterexample } = &out[0].verdict else { unreachable!() };
    assert!(refutes(&set.env.lemmas["PERM2ORD"], &set.env, &builtin_models(), counterexample));
}

#[test]
fn every_wrong_lemma_fails_with_a_sound_counterexample() {
    let set = text(WRONG);
    let models = builtin_models();
    for r in audit_all(&set, &models, &AuditBounds::default(), None).unwrap() {
        let Verdict::Fail { counterexample } = &r.verdict else { panic!("{r} should fail") };
        assert!(refutes(&set.env.lemmas[&r.name], &set.env, &models, counterexample), "{r}");
    }
}

#[test]
fn search_matches_brute_force_on_small_bounds() {
    let small = AuditBounds { max_len: 2, min_val: 0, max_val: 1, cap: u64::MAX };
    let wider = AuditBounds { max_len: 3, min_val: 0, max_val: 2, cap: u64::MAX };
    for set in [lemma_file("prelude_insort_lemmas.mats"), lemma_file("prelude_qsort_lemmas.mats"), text(WRONG)] {
        agrees_with_brute(&set, &small);
    }
    agrees_with_brute(&text(WRONG), &wider);
    agrees_with_brute(&lemma_file("prelude_insort_lemmas.mats"), &wider);
}

#[test]
fn failures_persist_under_wider_bounds() {
    let set = text(WRONG);
    let models = builtin_models();
    let base = AuditBounds { max_len: 2, min_val: 0, max_val: 1, cap: u64::MAX };
    for name in &set.names {
        let narrow = audit_lemma(&set.env.lemmas[name], &set.env, &models, &base).unwrap();
        if narrow.passed() {
            continue;
        }
        for wider in [
            AuditBounds { max_len: 3, ..base },
            AuditBounds { max_val: 2, ..base },
            AuditBounds { min_val: -1, ..base },
            AuditBounds::default(),
        ] {
            let r = audit_lemma(&set.env.lemmas[name], &set.env, &models, &wider).unwrap();
            assert!(!r.passed(), "{name} passes at {wider:?}");
        }
    }
}

#[test]
fn audit_is_deterministic() {
    let set = text(WRONG);
    let models = builtin_models();
    let a = audit_all(&set, &models, &AuditBounds::default(), None).unwrap();
    let b = audit_all(&set, &models, &AuditBounds::default(), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pass_counts_the_whole_domain() {
    let set = lemma_file("prelude_insort_lemmas.mats");
    let out = audit_all(&set, &builtin_models(), &AuditBounds::default(), Some("SORT_ins")).unwrap();
    // x, y over 4 values; ys1, ys2 over 341 lists.
    assert_eq!(out[0].to_string(), format!("SORT_ins PASS n={}", 16 * 341 * 341));
}
