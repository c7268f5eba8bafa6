//! Pretty-printer for the surface syntax. Output re-parses to an equal tree.

use std::fmt::Write;

use num_traits::Signed;

use crate::ast::*;
use crate::statics::{is_builtin_op, is_cmp_op, StaticTerm};

const INDENT: &str = "  ";

pub fn print_program(decls: &[Declaration]) -> String {
    let mut out = String::new();
    for (i, d) in decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        decl(&mut out, d);
        out.push('\n');
    }
    out
}

pub fn print_decl(d: &Declaration) -> String {
    let mut out = String::new();
    decl(&mut out, d);
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

pub fn print_type(t: &TypeExpr) -> String {
    let mut out = String::new();
    ty(&mut out, t);
    out
}

pub fn print_static(t: &StaticTerm) -> String {
    let mut out = String::new();
    sterm(&mut out, t, 0);
    out
}

// ------------------------------------------------------------------ statics

fn sprec(t: &StaticTerm) -> u8 {
    match t {
        StaticTerm::Con(op, args) if args.len() == 2 && is_builtin_op(op) => match op.as_str() {
            "&&" => 1,
            o if is_cmp_op(o) => 2,
            "+" | "-" => 3,
            _ => 4,
        },
        StaticTerm::Con(op, args) if args.len() == 1 && (op == "neg" || op == "~") => 5,
        StaticTerm::Int(n) if n.is_negative() => 5,
        StaticTerm::Lam(..) => 0,
        _ => 9,
    }
}

fn sterm(out: &mut String, t: &StaticTerm, min: u8) {
    if sprec(t) < min {
        out.push('(');
        sterm(out, t, 0);
        out.push(')');
        return;
    }
    match t {
        StaticTerm::Var(v) => out.push_str(v),
        StaticTerm::Int(n) => write!(out, "{n}").unwrap(),
        StaticTerm::Bool(b) => write!(out, "{b}").unwrap(),
        StaticTerm::Con(op, args) if args.len() == 2 && is_builtin_op(op) => {
            let p = sprec(t);
            // comparisons do not chain
            let (l, r) = if p == 2 { (3, 3) } else { (p, p + 1) };
            sterm(out, &args[0], l);
            write!(out, " {op} ").unwrap();
            sterm(out, &args[1], r);
        }
        StaticTerm::Con(op, args) if args.len() == 1 && (op == "neg" || op == "~") => {
            out.push_str(if op == "neg" { "-" } else { "~" });
            match &args[0] {
                StaticTerm::Int(_) => {
                    out.push('(');
                    sterm(out, &args[0], 0);
                    out.push(')');
                }
                a => sterm(out, a, 5),
            }
        }
        StaticTerm::Con(c, args) => {
            out.push_str(c);
            out.push('(');
            sterms(out, args);
            out.push(')');
        }
        StaticTerm::Lam(v, s, body) => {
            write!(out, "lam ({v}: {s}) => ").unwrap();
            sterm(out, body, 0);
        }
        StaticTerm::App(f, a) => {
            out.push('(');
            sterm(out, f, 0);
            out.push_str(")(");
            sterm(out, a, 0);
            out.push(')');
        }
    }
}

fn sterms(out: &mut String, ts: &[StaticTerm]) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        sterm(out, t, 0);
    }
}

fn sort(out: &mut String, s: &SortExpr) {
    match s {
        SortExpr::Named(n) => out.push_str(n),
        SortExpr::Arrow(a, b) => {
            if matches!(**a, SortExpr::Arrow(..)) {
                out.push('(');
                sort(out, a);
                out.push(')');
            } else {
                sort(out, a);
            }
            out.push_str(" -> ");
            sort(out, b);
        }
    }
}

fn quant_body(out: &mut String, q: &QuantGroup) {
    for (i, (v, s)) in q.vars.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        write!(out, "{v}:").unwrap();
        sort(out, s);
    }
    if let Some(g) = &q.guard {
        out.push_str(" | ");
        sterm(out, g, 0);
    }
}

fn quants(out: &mut String, qs: &[QuantGroup]) {
    for q in qs {
        out.push('{');
        quant_body(out, q);
        out.push_str("} ");
    }
}

fn sort_params(out: &mut String, ps: &[SortParam]) {
    if ps.is_empty() {
        return;
    }
    out.push_str(" (");
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(n) = &p.name {
            write!(out, "{n}: ").unwrap();
        }
        sort(out, &p.sort);
    }
    out.push(')');
}

// -------------------------------------------------------------------- types

fn ty(out: &mut String, t: &TypeExpr) {
    match t {
        TypeExpr::Named { name, args, .. } => {
            out.push_str(name);
            if !args.is_empty() {
                out.push_str(" (");
                sterms(out, args);
                out.push(')');
            }
        }
        TypeExpr::Tuple { proofs, values } => {
            out.push('(');
            split_list(out, proofs.as_deref(), values, ty);
            out.push(')');
        }
        TypeExpr::Fun { proofs, args, bar, ret } => {
            out.push('(');
            split_list(out, bar.then_some(proofs.as_slice()), args, ty);
            out.push_str(") -> ");
            ty(out, ret);
        }
        TypeExpr::Forall(q, body) => {
            out.push('{');
            quant_body(out, q);
            out.push_str("} ");
            ty(out, body);
        }
        TypeExpr::Exists(q, body) => {
            out.push('[');
            quant_body(out, q);
            out.push_str("] ");
            ty(out, body);
        }
    }
}

/// `a, b` or `p | a, b`.
fn split_list<T>(out: &mut String, proofs: Option<&[T]>, values: &[T], item: fn(&mut String, &T)) {
    if let Some(ps) = proofs {
        comma(out, ps, item);
        out.push_str(if ps.is_empty() { "| " } else { " | " });
    }
    comma(out, values, item);
}

fn comma<T>(out: &mut String, xs: &[T], item: fn(&mut String, &T)) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        item(out, x);
    }
}

fn names(out: &mut String, ns: &[String]) {
    out.push_str(&ns.join(", "));
}

// ------------------------------------------------------------ declarations

fn decl(out: &mut String, d: &Declaration) {
    match &d.kind {
        DeclKind::Datasort { name, ctors } => {
            write!(out, "datasort {name} =").unwrap();
            for (c, args) in ctors {
                write!(out, "\n{INDENT}| {c}").unwrap();
                if !args.is_empty() {
                    out.push_str(" of (");
                    comma(out, args, sort);
                    out.push(')');
                }
            }
        }
        DeclKind::Datatype(data) => data_decl(out, "datatype", data),
        DeclKind::Dataprop(data) => data_decl(out, "dataprop", data),
        DeclKind::Absprop { name, params } => {
            write!(out, "absprop {name}").unwrap();
            sort_params(out, params);
        }
        DeclKind::Abstype { name, params } => {
            write!(out, "abstype {name}").unwrap();
            sort_params(out, params);
        }
        DeclKind::Typedef { name, params, body } => {
            write!(out, "typedef {name}").unwrap();
            sort_params(out, params);
            out.push_str(" = ");
            ty(out, body);
        }
        DeclKind::Alias { name, target } => write!(out, "alias {name} = {target}").unwrap(),
        DeclKind::Praxi { name, quants: qs, premises, conclusion } => {
            write!(out, "praxi {name} ").unwrap();
            quants(out, qs);
            out.push('(');
            comma(out, premises, ty);
            out.push_str(") : ");
            ty(out, conclusion);
        }
        DeclKind::Funs(group) => fun_group(out, group, 0),
        DeclKind::Val { binds } => val_binds(out, binds, 0),
    }
}

fn data_decl(out: &mut String, kw: &str, data: &DataDecl) {
    write!(out, "{kw} {}", data.name).unwrap();
    sort_params(out, &data.params);
    out.push_str(" =");
    for c in &data.ctors {
        write!(out, "\n{INDENT}| ").unwrap();
        quants(out, &c.quants);
        out.push_str(&c.name);
        if !c.indices.is_empty() {
            out.push_str(" (");
            sterms(out, &c.indices);
            out.push(')');
        }
        if let Some(f) = &c.fields {
            out.push_str(" of (");
            split_list(out, f.bar.then_some(f.proofs.as_slice()), &f.values, ty);
            out.push(')');
        }
    }
}

fn newline(out: &mut String, level: usize) {
    out.push('\n');
    for _ in 0..level {
        out.push_str(INDENT);
    }
}

fn fun_group(out: &mut String, g: &FunGroup, level: usize) {
    out.push_str(match g.kind {
        FunKind::Fun => "fun",
        FunKind::Prfun => "prfun",
    });
    if !g.tparams.is_empty() {
        let ts: Vec<String> = g.tparams.iter().map(|t| format!("{t}:type")).collect();
        write!(out, "{{{}}}", ts.join("; ")).unwrap();
    }
    for (i, def) in g.defs.iter().enumerate() {
        if i > 0 {
            newline(out, level);
            out.push_str("and");
        }
        write!(out, " {} ", def.name).unwrap();
        quants(out, &def.quants);
        params(out, &def.params, g.kind == FunKind::Prfun);
        out.push_str(" : ");
        ty(out, &def.ret);
        out.push_str(" =");
        newline(out, level + 1);
        expr(out, &def.body, level + 1);
    }
}

fn params(out: &mut String, ps: &Params, proofs_by_default: bool) {
    fn param(out: &mut String, p: &Param) {
        write!(out, "{}: ", p.name).unwrap();
        ty(out, &p.ty);
    }
    out.push('(');
    if ps.bar {
        split_list(out, Some(ps.proofs.as_slice()), &ps.values, param);
    } else if proofs_by_default {
        comma(out, &ps.proofs, param);
    } else {
        comma(out, &ps.values, param);
    }
    out.push(')');
}

fn val_binds(out: &mut String, binds: &[(ValPat, Expr)], level: usize) {
    for (i, (pat, e)) in binds.iter().enumerate() {
        if i > 0 {
            newline(out, level);
            out.push_str("and ");
        } else {
            out.push_str("val ");
        }
        match (&pat.proofs, pat.values.as_slice()) {
            (None, [single]) => out.push_str(single),
            (proofs, values) => {
                out.push('(');
                if let Some(ps) = proofs {
                    names(out, ps);
                    out.push_str(if ps.is_empty() { "| " } else { " | " });
                }
                names(out, values);
                out.push(')');
            }
        }
        out.push_str(" = ");
        expr(out, e, level + 1);
    }
}

fn local_decl(out: &mut String, d: &LocalDecl, level: usize) {
    match d {
        LocalDecl::Val { binds, .. } => val_binds(out, binds, level),
        LocalDecl::Prval { names: ns, expr: e, .. } => {
            out.push_str("prval ");
            if let [single] = ns.as_slice() {
                out.push_str(single);
            } else {
                out.push('(');
                names(out, ns);
                out.push(')');
            }
            out.push_str(" = ");
            expr(out, e, level + 1);
        }
        LocalDecl::Funs(g) => fun_group(out, g, level),
    }
}

// ------------------------------------------------------------- expressions

fn eprec(e: &Expr) -> u8 {
    match e {
        Expr::If { .. } | Expr::Case { .. } | Expr::Lam { .. } => 0,
        Expr::BinOp { op, .. } => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul => 5,
        },
        Expr::UnOp { .. } => 6,
        Expr::Int(n, _) if n.is_negative() => 6,
        _ => 9,
    }
}

/// Whether `e` ends in a construct that would swallow a following `| arm`.
fn open_ended(e: &Expr) -> bool {
    match e {
        Expr::Case { .. } => true,
        Expr::If { else_branch, .. } => open_ended(else_branch),
        Expr::Lam { body, .. } => open_ended(body),
        _ => false,
    }
}

fn operand(out: &mut String, e: &Expr, min: u8, level: usize) {
    if eprec(e) < min {
        out.push('(');
        expr(out, e, level);
        out.push(')');
    } else {
        expr(out, e, level);
    }
}

fn expr(out: &mut String, e: &Expr, level: usize) {
    match e {
        Expr::Var(v, _) => out.push_str(v),
        Expr::Int(n, _) => write!(out, "{n}").unwrap(),
        Expr::Bool(b, _) => write!(out, "{b}").unwrap(),
        Expr::App { head, statics, proofs, args, bar, .. } => {
            out.push_str(head);
            if !statics.is_empty() {
                out.push_str(" {");
                sterms(out, statics);
                out.push('}');
            }
            out.push_str(" (");
            exprs(out, bar.then_some(proofs.as_slice()), args, |out, x| expr(out, x, level));
            out.push(')');
        }
        Expr::Tuple { proofs, values, .. } => {
            out.push('(');
            exprs(out, proofs.as_deref(), values, |out, x| expr(out, x, level));
            out.push(')');
        }
        Expr::BinOp { op, lhs, rhs, .. } => {
            let p = eprec(e);
            let (l, r) = if p == 3 { (4, 4) } else { (p, p + 1) };
            operand(out, lhs, l, level);
            write!(out, " {} ", op.symbol()).unwrap();
            operand(out, rhs, r, level);
        }
        Expr::UnOp { op, arg, .. } => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '~',
            });
            if matches!(**arg, Expr::Int(..)) {
                out.push('(');
                expr(out, arg, level);
                out.push(')');
            } else {
                operand(out, arg, 6, level);
            }
        }
        Expr::If { cond, then_branch, else_branch, .. } => {
            out.push_str("if ");
            expr(out, cond, level);
            out.push_str(" then ");
            expr(out, then_branch, level + 1);
            newline(out, level);
            out.push_str("else ");
            expr(out, else_branch, level + 1);
        }
        Expr::Case { scrutinee, arms, .. } => {
            out.push_str("case ");
            expr(out, scrutinee, level);
            out.push_str(" of");
            for (i, arm) in arms.iter().enumerate() {
                newline(out, level);
                out.push_str("| ");
                pattern(out, &arm.pat);
                out.push_str(" => ");
                if i + 1 < arms.len() && open_ended(&arm.body) {
                    out.push('(');
                    expr(out, &arm.body, level + 1);
                    out.push(')');
                } else {
                    expr(out, &arm.body, level + 1);
                }
            }
        }
        Expr::Let { decls, body, .. } => {
            out.push_str("let");
            for d in decls {
                newline(out, level + 1);
                local_decl(out, d, level + 1);
            }
            newline(out, level);
            out.push_str("in");
            newline(out, level + 1);
            expr(out, body, level + 1);
            newline(out, level);
            out.push_str("end");
        }
        Expr::Lam { params: ps, ret, body, .. } => {
            out.push_str("lam ");
            params(out, ps, false);
            if let Some(r) = ret {
                out.push_str(" : ");
                ty(out, r);
            }
            out.push_str(" => ");
            expr(out, body, level + 1);
        }
    }
}

fn exprs(
    out: &mut String,
    proofs: Option<&[Expr]>,
    values: &[Expr],
    item: impl Fn(&mut String, &Expr),
) {
    let list = |out: &mut String, xs: &[Expr]| {
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            item(out, x);
        }
    };
    if let Some(ps) = proofs {
        list(out, ps);
        out.push_str(if ps.is_empty() { "| " } else { " | " });
    }
    list(out, values);
}

fn pattern(out: &mut String, p: &Pattern) {
    match p {
        Pattern::Wild(_) => out.push('_'),
        Pattern::Con { name, proofs, args, bar, .. } => {
            out.push_str(name);
            if *bar || !args.is_empty() {
                out.push_str(" (");
                if *bar {
                    names(out, proofs);
                    out.push_str(if proofs.is_empty() { "| " } else { " | " });
                }
                names(out, args);
                out.push(')');
            } else {
                out.push_str(" ()");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn roundtrip(src: &str) {
        let first = parse_source(src, "a").unwrap();
        let printed = print_program(&first);
        let second = parse_source(&printed, "b").unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(first, second, "\n{printed}");
    }

    #[test]
    fn corpus_roundtrips() {
        for f in [
            "prelude.mats",
            "prelude_insort_lemmas.mats",
            "prelude_qsort_lemmas.mats",
            "fibats.mats",
            "fib_plain.mats",
            "insort_plain.mats",
            "insort_verified.mats",
            "qsrt_plain.mats",
            "qsrt_verified.mats",
        ] {
            let src = std::fs::read_to_string(crate::corpus::corpus_dir().join(f)).unwrap();
            roundtrip(&src);
        }
    }

    #[test]
    fn nested_case_in_arm_is_parenthesized() {
        roundtrip(
            "fun f (x: int, y: int) : int = case x of | a () => case y of | b () => 1 | c () => 2 | d () => 3",
        );
    }

    #[test]
    fn negation_of_literal_stays_negation() {
        roundtrip("val x = -(3) - -3 * ~(true)");
        assert_eq!(print_static(&StaticTerm::con("neg", vec![StaticTerm::Int(3.into())])), "-(3)");
    }

    #[test]
    fn comparisons_do_not_chain() {
        roundtrip("val x = (1 < 2) = (3 < 4)");
        roundtrip("praxi P {a,b:int | (a < b) = (b > a)} () : Q (a)");
    }
}
