//! Recursive-descent parser producing [`Declaration`]s.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::*;
use crate::lexer::{tokenize_file, LexError, Token, TokenKind};
use crate::statics::StaticTerm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub loc: Loc,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn loc(&self) -> &Loc {
        match self {
            SyntaxError::Lex(e) => &e.loc,
            SyntaxError::Parse(e) => &e.loc,
        }
    }
}

/// Tokenizes and parses a whole source file.
pub fn parse_source(source: &str, file: &str) -> Result<Vec<Declaration>, SyntaxError> {
    let tokens = tokenize_file(source, file)?;
    Ok(parse_program(&tokens, file)?)
}

pub fn parse_program(tokens: &[Token], file: &str) -> Result<Vec<Declaration>, ParseError> {
    let mut parser = Parser::new(tokens, file);
    let mut decls = Vec::new();
    while !parser.at_end() {
        decls.push(parser.declaration()?);
    }
    Ok(decls)
}

/// Parses a standalone static term, e.g. for tests and tooling.
pub fn parse_static_term(source: &str) -> Result<StaticTerm, SyntaxError> {
    let tokens = tokenize_file(source, "<term>")?;
    let mut parser = Parser::new(&tokens, "<term>");
    let term = parser.sterm()?;
    if !parser.at_end() {
        return Err(parser.error(&["end of input"]).into());
    }
    Ok(term)
}

/// Parses a standalone type expression.
pub fn parse_type(source: &str) -> Result<TypeExpr, SyntaxError> {
    let tokens = tokenize_file(source, "<type>")?;
    let mut parser = Parser::new(&tokens, "<type>");
    let ty = parser.type_expr()?;
    if !parser.at_end() {
        return Err(parser.error(&["end of input"]).into());
    }
    Ok(ty)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    eof: Loc,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], file: &str) -> Self {
        let file: Arc<str> = Arc::from(file);
        let eof = match tokens.last() {
            Some(t) => Loc::new(&file, t.loc.line, t.loc.col + t.lexeme.chars().count() as u32),
            None => Loc::new(&file, 1, 1),
        };
        Parser { tokens, pos: 0, eof }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn loc(&self) -> Loc {
        self.tokens.get(self.pos).map(|t| t.loc.clone()).unwrap_or_else(|| self.eof.clone())
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            loc: self.loc(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: match self.tokens.get(self.pos) {
                Some(t) => format!("`{}`", t.lexeme),
                None => "end of input".into(),
            },
        }
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Symbol(s)) if *s == sym)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Keyword(k)) if *k == kw)
    }

    fn is_brace(&self, c: char) -> bool {
        matches!(self.peek(), Some(TokenKind::Brace(b)) if *b == c)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_brace(&mut self, c: char) -> bool {
        if self.is_brace(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{sym}`")]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn expect_brace(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_brace(c) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    /// An identifier or `_`.
    fn binder_name(&mut self) -> Result<String, ParseError> {
        if self.eat_sym("_") {
            Ok("_".into())
        } else {
            self.ident()
        }
    }

    // ---------------------------------------------------------------- decls

    fn declaration(&mut self) -> Result<Declaration, ParseError> {
        let loc = self.loc();
        let kind = match self.peek() {
            Some(TokenKind::Keyword("datasort")) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect_sym("=")?;
                self.eat_sym("|");
                let mut ctors = Vec::new();
                loop {
                    let ctor = self.ident()?;
                    let mut args = Vec::new();
                    if self.eat_kw("of") {
                        self.expect_sym("(")?;
                        if !self.is_sym(")") {
                            loop {
                                args.push(self.sort_expr()?);
                                if !self.eat_sym(",") {
                                    break;
                                }
                            }
                        }
                        self.expect_sym(")")?;
                    }
                    ctors.push((ctor, args));
                    if !self.eat_sym("|") {
                        break;
                    }
                }
                DeclKind::Datasort { name, ctors }
            }
            Some(TokenKind::Keyword(kw @ ("datatype" | "dataprop"))) => {
                let is_type = *kw == "datatype";
                self.pos += 1;
                let data = self.data_decl()?;
                if is_type {
                    DeclKind::Datatype(data)
                } else {
                    DeclKind::Dataprop(data)
                }
            }
            Some(TokenKind::Keyword(kw @ ("absprop" | "abstype"))) => {
                let is_prop = *kw == "absprop";
                self.pos += 1;
                let name = self.ident()?;
                let params = self.sort_params()?;
                if is_prop {
                    DeclKind::Absprop { name, params }
                } else {
                    DeclKind::Abstype { name, params }
                }
            }
            Some(TokenKind::Keyword("typedef")) => {
                self.pos += 1;
                let name = self.ident()?;
                let params = self.sort_params()?;
                self.expect_sym("=")?;
                let body = self.type_expr()?;
                DeclKind::Typedef { name, params, body }
            }
            Some(TokenKind::Keyword("alias")) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect_sym("=")?;
                let target = self.ident()?;
                DeclKind::Alias { name, target }
            }
            Some(TokenKind::Keyword("praxi")) => {
                self.pos += 1;
                let name = self.ident()?;
                let quants = self.quants()?;
                self.expect_sym("(")?;
                let mut premises = Vec::new();
                if !self.is_sym(")") {
                    loop {
                        premises.push(self.type_expr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
                self.expect_sym(":")?;
                let conclusion = self.type_expr()?;
                DeclKind::Praxi { name, quants, premises, conclusion }
            }
            Some(TokenKind::Keyword("fun" | "prfun")) => DeclKind::Funs(self.fun_group()?),
            Some(TokenKind::Keyword("val")) => {
                self.pos += 1;
                DeclKind::Val { binds: self.val_binds()? }
            }
            _ => {
                return Err(self.error(&[
                    "`datasort`", "`datatype`", "`dataprop`", "`absprop`", "`abstype`",
                    "`typedef`", "`alias`", "`praxi`", "`fun`", "`prfun`", "`val`",
                ]))
            }
        };
        Ok(Declaration { kind, loc })
    }

    fn data_decl(&mut self) -> Result<DataDecl, ParseError> {
        let name = self.ident()?;
        let params = self.sort_params()?;
        self.expect_sym("=")?;
        self.eat_sym("|");
        let mut ctors = Vec::new();
        loop {
            let loc = self.loc();
            let quants = self.quants()?;
            let ctor = self.ident()?;
            let mut indices = Vec::new();
            if self.eat_sym("(") {
                if !self.is_sym(")") {
                    indices = self.sterm_list()?;
                }
                self.expect_sym(")")?;
            }
            let fields = if self.eat_kw("of") {
                self.expect_sym("(")?;
                let mut first = Vec::new();
                let mut second = Vec::new();
                let mut bar = false;
                if !self.is_sym(")") && !self.is_sym("|") {
                    first = self.type_list()?;
                }
                if self.eat_sym("|") {
                    bar = true;
                    if !self.is_sym(")") {
                        second = self.type_list()?;
                    }
                }
                self.expect_sym(")")?;
                Some(if bar {
                    Fields { proofs: first, values: second, bar }
                } else {
                    Fields { proofs: vec![], values: first, bar }
                })
            } else {
                None
            };
            ctors.push(ConDecl { quants, name: ctor, indices, fields, loc });
            if !self.eat_sym("|") {
                break;
            }
        }
        Ok(DataDecl { name, params, ctors })
    }

    fn sort_params(&mut self) -> Result<Vec<SortParam>, ParseError> {
        let mut params = Vec::new();
        if !self.eat_sym("(") {
            return Ok(params);
        }
        if !self.is_sym(")") {
            loop {
                let named = matches!(self.peek(), Some(TokenKind::Ident(_)))
                    && matches!(self.peek_at(1), Some(TokenKind::Symbol(":")));
                if named {
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    params.push(SortParam { name: Some(name), sort: self.sort_expr()? });
                } else {
                    params.push(SortParam { name: None, sort: self.sort_expr()? });
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(params)
    }

    fn sort_expr(&mut self) -> Result<SortExpr, ParseError> {
        let atom = if self.eat_sym("(") {
            let inner = self.sort_expr()?;
            self.expect_sym(")")?;
            inner
        } else {
            SortExpr::Named(self.ident()?)
        };
        if self.eat_sym("->") {
            Ok(SortExpr::Arrow(Box::new(atom), Box::new(self.sort_expr()?)))
        } else {
            Ok(atom)
        }
    }

    fn quants(&mut self) -> Result<Vec<QuantGroup>, ParseError> {
        let mut groups = Vec::new();
        while self.eat_brace('{') {
            groups.push(self.quant_group()?);
            self.expect_brace('}')?;
        }
        Ok(groups)
    }

    fn quant_group(&mut self) -> Result<QuantGroup, ParseError> {
        let mut vars = Vec::new();
        loop {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let sort = self.sort_expr()?;
            vars.extend(names.into_iter().map(|n| (n, sort.clone())));
            if !self.eat_sym(";") {
                break;
            }
        }
        let guard = if self.eat_sym("|") { Some(self.sterm()?) } else { None };
        Ok(QuantGroup { vars, guard })
    }

    fn fun_group(&mut self) -> Result<FunGroup, ParseError> {
        let loc = self.loc();
        let kind = if self.eat_kw("prfun") {
            FunKind::Prfun
        } else {
            self.expect_kw("fun")?;
            FunKind::Fun
        };
        let mut tparams = Vec::new();
        if self.eat_brace('{') {
            let group = self.quant_group()?;
            self.expect_brace('}')?;
            tparams = group.vars.into_iter().map(|(n, _)| n).collect();
        }
        let mut defs = vec![self.fun_def(kind)?];
        while self.eat_kw("and") {
            defs.push(self.fun_def(kind)?);
        }
        Ok(FunGroup { kind, tparams, defs, loc })
    }

    fn fun_def(&mut self, kind: FunKind) -> Result<FunDef, ParseError> {
        let loc = self.loc();
        let name = self.ident()?;
        let quants = self.quants()?;
        let params = self.params(kind == FunKind::Prfun)?;
        self.expect_sym(":")?;
        let ret = self.type_expr()?;
        self.expect_sym("=")?;
        let body = self.expr()?;
        Ok(FunDef { name, quants, params, ret, body, loc })
    }

    /// `(p: P | x: T)`; without a bar everything is a value unless
    /// `proofs_by_default`.
    fn params(&mut self, proofs_by_default: bool) -> Result<Params, ParseError> {
        self.expect_sym("(")?;
        let mut first = Vec::new();
        let mut second = Vec::new();
        let mut bar = false;
        if !self.is_sym(")") && !self.is_sym("|") {
            first = self.param_list()?;
        }
        if self.eat_sym("|") {
            bar = true;
            if !self.is_sym(")") {
                second = self.param_list()?;
            }
        }
        self.expect_sym(")")?;
        Ok(if bar {
            Params { proofs: first, values: second, bar }
        } else if proofs_by_default {
            Params { proofs: first, values: vec![], bar }
        } else {
            Params { proofs: vec![], values: first, bar }
        })
    }

    fn param_list(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut out = Vec::new();
        loop {
            let name = self.binder_name()?;
            self.expect_sym(":")?;
            let ty = self.type_expr()?;
            out.push(Param { name, ty });
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(out)
    }

    // ---------------------------------------------------------------- types

    pub(crate) fn type_expr(&mut self) -> Result<TypeExpr, ParseError> {
        if self.eat_brace('{') {
            let group = self.quant_group()?;
            self.expect_brace('}')?;
            return Ok(TypeExpr::Forall(group, Box::new(self.type_expr()?)));
        }
        if self.eat_brace('[') {
            let group = self.quant_group()?;
            self.expect_brace(']')?;
            return Ok(TypeExpr::Exists(group, Box::new(self.type_expr()?)));
        }
        let atom = self.type_atom()?;
        if self.eat_sym("->") {
            let ret = Box::new(self.type_expr()?);
            return Ok(match atom {
                TypeExpr::Tuple { proofs: Some(proofs), values } => {
                    TypeExpr::Fun { proofs, args: values, bar: true, ret }
                }
                TypeExpr::Tuple { proofs: None, values } => {
                    TypeExpr::Fun { proofs: vec![], args: values, bar: false, ret }
                }
                single => TypeExpr::Fun { proofs: vec![], args: vec![single], bar: false, ret },
            });
        }
        Ok(match atom {
            // a parenthesized single type is just that type
            TypeExpr::Tuple { proofs: None, mut values } if values.len() == 1 => values.remove(0),
            other => other,
        })
    }

    fn type_list(&mut self) -> Result<Vec<TypeExpr>, ParseError> {
        let mut out = vec![self.type_expr()?];
        while self.eat_sym(",") {
            out.push(self.type_expr()?);
        }
        Ok(out)
    }

    fn type_atom(&mut self) -> Result<TypeExpr, ParseError> {
        if self.eat_sym("(") {
            let mut first = Vec::new();
            let mut second = Vec::new();
            let mut bar = false;
            if !self.is_sym(")") && !self.is_sym("|") {
                first = self.type_list()?;
            }
            if self.eat_sym("|") {
                bar = true;
                if !self.is_sym(")") {
                    second = self.type_list()?;
                }
            }
            self.expect_sym(")")?;
            return Ok(if bar {
                TypeExpr::Tuple { proofs: Some(first), values: second }
            } else {
                TypeExpr::Tuple { proofs: None, values: first }
            });
        }
        let loc = self.loc();
        let name = match self.peek() {
            Some(TokenKind::Ident(_)) => self.ident()?,
            _ => return Err(self.error(&["type"])),
        };
        let args = if self.eat_sym("(") {
            let args = if self.is_sym(")") { vec![] } else { self.sterm_list()? };
            self.expect_sym(")")?;
            args
        } else {
            match self.peek() {
                Some(TokenKind::Ident(_)) | Some(TokenKind::Int(_)) => vec![self.sterm_atom()?],
                _ => vec![],
            }
        };
        Ok(TypeExpr::Named { name, args, loc })
    }

    // -------------------------------------------------------------- statics

    fn sterm_list(&mut self) -> Result<Vec<StaticTerm>, ParseError> {
        let mut out = vec![self.sterm()?];
        while self.eat_sym(",") {
            out.push(self.sterm()?);
        }
        Ok(out)
    }

    pub(crate) fn sterm(&mut self) -> Result<StaticTerm, ParseError> {
        let mut lhs = self.sterm_cmp()?;
        while self.eat_sym("&&") {
            let rhs = self.sterm_cmp()?;
            lhs = StaticTerm::binop("&&", lhs, rhs);
        }
        Ok(lhs)
    }

    fn sterm_cmp(&mut self) -> Result<StaticTerm, ParseError> {
        let lhs = self.sterm_add()?;
        for op in ["<=", ">=", "<>", "<", ">", "="] {
            if self.eat_sym(op) {
                let rhs = self.sterm_add()?;
                return Ok(StaticTerm::binop(op, lhs, rhs));
            }
        }
        Ok(lhs)
    }

    fn sterm_add(&mut self) -> Result<StaticTerm, ParseError> {
        let mut lhs = self.sterm_mul()?;
        loop {
            let op = if self.eat_sym("+") {
                "+"
            } else if self.eat_sym("-") {
                "-"
            } else {
                break;
            };
            let rhs = self.sterm_mul()?;
            lhs = StaticTerm::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn sterm_mul(&mut self) -> Result<StaticTerm, ParseError> {
        let mut lhs = self.sterm_unary()?;
        while self.eat_sym("*") {
            let rhs = self.sterm_unary()?;
            lhs = StaticTerm::binop("*", lhs, rhs);
        }
        Ok(lhs)
    }

    fn sterm_unary(&mut self) -> Result<StaticTerm, ParseError> {
        if self.eat_sym("-") {
            if let Some(TokenKind::Int(n)) = self.peek() {
                let n = -n.clone();
                self.pos += 1;
                return Ok(StaticTerm::Int(n));
            }
            return Ok(StaticTerm::con("neg", vec![self.sterm_unary()?]));
        }
        if self.eat_sym("~") {
            return Ok(StaticTerm::not(self.sterm_unary()?));
        }
        self.sterm_postfix()
    }

    fn sterm_postfix(&mut self) -> Result<StaticTerm, ParseError> {
        if let Some(TokenKind::Ident(_)) = self.peek() {
            let name = self.ident()?;
            if self.eat_sym("(") {
                let args = if self.is_sym(")") { vec![] } else { self.sterm_list()? };
                self.expect_sym(")")?;
                return self.sterm_apps(StaticTerm::Con(name, args));
            }
            return Ok(StaticTerm::Var(name));
        }
        let atom = self.sterm_atom()?;
        self.sterm_apps(atom)
    }

    fn sterm_apps(&mut self, mut head: StaticTerm) -> Result<StaticTerm, ParseError> {
        while self.eat_sym("(") {
            for arg in self.sterm_list()? {
                head = StaticTerm::App(Box::new(head), Box::new(arg));
            }
            self.expect_sym(")")?;
        }
        Ok(head)
    }

    fn sterm_atom(&mut self) -> Result<StaticTerm, ParseError> {
        match self.peek().cloned() {
            Some(TokenKind::Int(n)) => {
                self.pos += 1;
                Ok(StaticTerm::Int(n))
            }
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                Ok(StaticTerm::Var(name))
            }
            Some(TokenKind::Keyword("true")) => {
                self.pos += 1;
                Ok(StaticTerm::Bool(true))
            }
            Some(TokenKind::Keyword("false")) => {
                self.pos += 1;
                Ok(StaticTerm::Bool(false))
            }
            Some(TokenKind::Keyword("lam")) => {
                self.pos += 1;
                self.expect_sym("(")?;
                let name = self.ident()?;
                self.expect_sym(":")?;
                let sort = self.sort_expr()?;
                self.expect_sym(")")?;
                self.expect_sym("=>")?;
                let body = self.sterm()?;
                Ok(StaticTerm::Lam(name, sort_expr_to_sort_placeholder(&sort), Box::new(body)))
            }
            Some(TokenKind::Symbol("(")) => {
                self.pos += 1;
                let inner = self.sterm()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            _ => Err(self.error(&["static term"])),
        }
    }

    // ---------------------------------------------------------------- exprs

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let loc = self.loc();
        if self.eat_kw("if") {
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let then_branch = self.expr()?;
            self.expect_kw("else")?;
            let else_branch = self.expr()?;
            return Ok(Expr::If {
                cond: Box::new(cond),
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
                loc,
            });
        }
        if self.eat_kw("case") {
            self.eat_sym("+");
            let scrutinee = self.expr()?;
            self.expect_kw("of")?;
            self.eat_sym("|");
            let mut arms = Vec::new();
            loop {
                let pat = self.pattern()?;
                self.expect_sym("=>")?;
                let body = self.expr()?;
                arms.push(Arm { pat, body });
                if !self.eat_sym("|") {
                    break;
                }
            }
            return Ok(Expr::Case { scrutinee: Box::new(scrutinee), arms, loc });
        }
        if self.eat_kw("let") {
            let mut decls = Vec::new();
            while !self.is_kw("in") {
                decls.push(self.local_decl()?);
            }
            self.expect_kw("in")?;
            let body = self.expr()?;
            self.expect_kw("end")?;
            return Ok(Expr::Let { decls, body: Box::new(body), loc });
        }
        if self.eat_kw("lam") {
            let params = self.params(false)?;
            let ret = if self.eat_sym(":") { Some(self.type_expr()?) } else { None };
            self.expect_sym("=>")?;
            let body = self.expr()?;
            return Ok(Expr::Lam { params, ret, body: Box::new(body), loc });
        }
        self.expr_or()
    }

    fn binop_chain(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
        single: bool,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (sym, op) in ops {
                if self.is_sym(sym) {
                    let loc = self.loc();
                    self.pos += 1;
                    let rhs = next(self)?;
                    lhs = Expr::BinOp { op: *op, lhs: Box::new(lhs), rhs: Box::new(rhs), loc };
                    if single {
                        break 'outer;
                    }
                    continue 'outer;
                }
            }
            break;
        }
        Ok(lhs)
    }

    fn expr_or(&mut self) -> Result<Expr, ParseError> {
        self.binop_chain(&[("||", BinOp::Or)], Self::expr_and, false)
    }

    fn expr_and(&mut self) -> Result<Expr, ParseError> {
        self.binop_chain(&[("&&", BinOp::And)], Self::expr_cmp, false)
    }

    fn expr_cmp(&mut self) -> Result<Expr, ParseError> {
        self.binop_chain(
            &[
                ("<=", BinOp::Le),
                (">=", BinOp::Ge),
                ("<>", BinOp::Ne),
                ("<", BinOp::Lt),
                (">", BinOp::Gt),
                ("=", BinOp::Eq),
            ],
            Self::expr_add,
            true,
        )
    }

    fn expr_add(&mut self) -> Result<Expr, ParseError> {
        self.binop_chain(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::expr_mul, false)
    }

    fn expr_mul(&mut self) -> Result<Expr, ParseError> {
        self.binop_chain(&[("*", BinOp::Mul)], Self::expr_unary, false)
    }

    fn expr_unary(&mut self) -> Result<Expr, ParseError> {
        let loc = self.loc();
        if self.eat_sym("-") {
            if let Some(TokenKind::Int(n)) = self.peek() {
                let n: BigInt = -n.clone();
                self.pos += 1;
                return Ok(Expr::Int(n, loc));
            }
            let arg = self.expr_unary()?;
            return Ok(Expr::UnOp { op: UnOp::Neg, arg: Box::new(arg), loc });
        }
        if self.eat_sym("~") {
            let arg = self.expr_unary()?;
            return Ok(Expr::UnOp { op: UnOp::Not, arg: Box::new(arg), loc });
        }
        self.expr_app()
    }

    fn expr_app(&mut self) -> Result<Expr, ParseError> {
        let loc = self.loc();
        if let Some(TokenKind::Ident(_)) = self.peek() {
            let head = self.ident()?;
            let mut statics = Vec::new();
            while self.eat_brace('{') {
                statics.extend(self.sterm_list()?);
                self.expect_brace('}')?;
            }
            if self.eat_sym("(") {
                let mut first = Vec::new();
                let mut second = Vec::new();
                let mut bar = false;
                if !self.is_sym(")") && !self.is_sym("|") {
                    first = self.expr_list()?;
                }
                if self.eat_sym("|") {
                    bar = true;
                    if !self.is_sym(")") {
                        second = self.expr_list()?;
                    }
                }
                self.expect_sym(")")?;
                let (proofs, args) = if bar { (first, second) } else { (vec![], first) };
                return Ok(Expr::App { head, statics, proofs, args, bar, loc });
            }
            if !statics.is_empty() {
                return Err(self.error(&["`(`"]));
            }
            return Ok(Expr::Var(head, loc));
        }
        self.expr_atom()
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn expr_atom(&mut self) -> Result<Expr, ParseError> {
        let loc = self.loc();
        match self.peek().cloned() {
            Some(TokenKind::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n, loc))
            }
            Some(TokenKind::Keyword("true")) => {
                self.pos += 1;
                Ok(Expr::Bool(true, loc))
            }
            Some(TokenKind::Keyword("false")) => {
                self.pos += 1;
                Ok(Expr::Bool(false, loc))
            }
            Some(TokenKind::Symbol("(")) => {
                self.pos += 1;
                let mut first = Vec::new();
                let mut second = Vec::new();
                let mut bar = false;
                if !self.is_sym(")") && !self.is_sym("|") {
                    first = self.expr_list()?;
                }
                if self.eat_sym("|") {
                    bar = true;
                    if !self.is_sym(")") {
                        second = self.expr_list()?;
                    }
                }
                self.expect_sym(")")?;
                if bar {
                    Ok(Expr::Tuple { proofs: Some(first), values: second, loc })
                } else if first.len() == 1 {
                    Ok(first.remove(0))
                } else {
                    Ok(Expr::Tuple { proofs: None, values: first, loc })
                }
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let loc = self.loc();
        if self.eat_sym("_") {
            return Ok(Pattern::Wild(loc));
        }
        let name = self.ident()?;
        let mut proofs = Vec::new();
        let mut args = Vec::new();
        let mut bar = false;
        if self.eat_sym("(") {
            let mut first = Vec::new();
            if !self.is_sym(")") && !self.is_sym("|") {
                first = self.name_list()?;
            }
            if self.eat_sym("|") {
                bar = true;
                proofs = first;
                if !self.is_sym(")") {
                    args = self.name_list()?;
                }
            } else {
                args = first;
            }
            self.expect_sym(")")?;
        }
        Ok(Pattern::Con { name, proofs, args, bar, loc })
    }

    fn name_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.binder_name()?];
        while self.eat_sym(",") {
            out.push(self.binder_name()?);
        }
        Ok(out)
    }

    fn val_pat(&mut self) -> Result<ValPat, ParseError> {
        if self.eat_sym("(") {
            let mut first = Vec::new();
            if !self.is_sym(")") && !self.is_sym("|") {
                first = self.name_list()?;
            }
            let pat = if self.eat_sym("|") {
                let values = if self.is_sym(")") { vec![] } else { self.name_list()? };
                ValPat { proofs: Some(first), values }
            } else {
                ValPat { proofs: None, values: first }
            };
            self.expect_sym(")")?;
            return Ok(pat);
        }
        Ok(ValPat::single(self.binder_name()?))
    }

    fn val_binds(&mut self) -> Result<Vec<(ValPat, Expr)>, ParseError> {
        let mut binds = Vec::new();
        loop {
            let pat = self.val_pat()?;
            self.expect_sym("=")?;
            let expr = self.expr()?;
            binds.push((pat, expr));
            if !self.eat_kw("and") {
                break;
            }
        }
        Ok(binds)
    }

    fn local_decl(&mut self) -> Result<LocalDecl, ParseError> {
        let loc = self.loc();
        if self.eat_kw("val") {
            return Ok(LocalDecl::Val { binds: self.val_binds()?, loc });
        }
        if self.eat_kw("prval") {
            let names = if self.eat_sym("(") {
                let names = self.name_list()?;
                self.expect_sym(")")?;
                names
            } else {
                vec![self.binder_name()?]
            };
            self.expect_sym("=")?;
            let expr = self.expr()?;
            return Ok(LocalDecl::Prval { names, expr, loc });
        }
        if self.is_kw("fun") || self.is_kw("prfun") {
            return Ok(LocalDecl::Funs(self.fun_group()?));
        }
        Err(self.error(&["`val`", "`prval`", "`fun`", "`prfun`", "`in`"]))
    }
}

/// Static lambdas carry a sort annotation; only builtin base sorts can be
/// resolved without a signature, anything else is kept as a datasort name.
fn sort_expr_to_sort_placeholder(sort: &SortExpr) -> crate::statics::Sort {
    use crate::statics::Sort;
    match sort {
        SortExpr::Named(n) => match n.as_str() {
            "int" | "nat" => Sort::Int,
            "bool" => Sort::Bool,
            "addr" => Sort::Addr,
            "prop" => Sort::Prop,
            "type" => Sort::Type,
            other => Sort::Data(other.to_string()),
        },
        SortExpr::Arrow(a, b) => Sort::Arrow(
            Box::new(sort_expr_to_sort_placeholder(a)),
            Box::new(sort_expr_to_sort_placeholder(b)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Vec<Declaration> {
        parse_source(src, "test.mats").unwrap()
    }

    #[test]
    fn glist_prelude_fragment() {
        let decls = parse(
            "abstype E (a:type, x:int) // abstract type constructor\n\
             datasort ilist = ilist_nil of () | ilist_cons of (int, ilist)\n\
             datatype glist (a:type, ilist) =\n\
               | {x:int} {xs:ilist}\n\
                 glist_cons (a, cons (x, xs)) of (E (a, x), glist (a, xs))\n\
               | glist_nil (a, nil) of ()\n",
        );
        assert_eq!(decls.len(), 3);
        assert!(matches!(&decls[0].kind, DeclKind::Abstype { name, .. } if name == "E"));
        match &decls[1].kind {
            DeclKind::Datasort { name, ctors } => {
                assert_eq!(name, "ilist");
                let names: Vec<_> = ctors.iter().map(|(n, _)| n.as_str()).collect();
                assert_eq!(names, ["ilist_nil", "ilist_cons"]);
            }
            other => panic!("{other:?}"),
        }
        match &decls[2].kind {
            DeclKind::Datatype(d) => {
                let names: Vec<_> = d.ctors.iter().map(|c| c.name.as_str()).collect();
                assert_eq!(names, ["glist_cons", "glist_nil"]);
                assert_eq!(d.ctors[0].quants.len(), 2);
                assert_eq!(d.ctors[0].fields.as_ref().unwrap().values.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn absprop_declaration() {
        let decls = parse("absprop SORT (xs:ilist, ys:ilist)");
        match &decls[0].kind {
            DeclKind::Absprop { name, params } => {
                assert_eq!(name, "SORT");
                assert_eq!(params.len(), 2);
                assert_eq!(params[1].sort, SortExpr::Named("ilist".into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbalanced_delimiter_is_an_error() {
        let err = parse_source("fun f (: int", "t.mats").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse(_)));
    }

    #[test]
    fn proof_value_tuples_and_statics() {
        let decls = parse(
            "fun f {n:nat} (pf: P(n) | x: int n) : [r:int] (P(r) | int r) =\n\
               loop {n, n+1} (pf, Q(pf) | x, 1)",
        );
        let DeclKind::Funs(group) = &decls[0].kind else { panic!() };
        let def = &group.defs[0];
        assert_eq!(def.params.proofs.len(), 1);
        assert_eq!(def.params.values.len(), 1);
        match &def.body {
            Expr::App { head, statics, proofs, args, bar, .. } => {
                assert_eq!(head, "loop");
                assert_eq!(statics.len(), 2);
                assert_eq!(proofs.len(), 2);
                assert_eq!(args.len(), 2);
                assert!(bar);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn case_plus_and_nested_let() {
        let decls = parse(
            "fun g (xs: list(int, 0)) : int =\n\
               case+ xs of\n\
               | list_cons (x, xs) => let val (pf | y) = h (x) prval q = L (pf) in y end\n\
               | list_nil () => 0",
        );
        let DeclKind::Funs(group) = &decls[0].kind else { panic!() };
        let Expr::Case { arms, .. } = &group.defs[0].body else { panic!() };
        assert_eq!(arms.len(), 2);
    }

    #[test]
    fn praxi_with_guard() {
        let decls = parse(
            "praxi SORT_ins {x,y:int} {ys1,ys2:ilist | x > y}\n\
               (ORD (cons (y, ys1)), SORT (cons (x, ys1), ys2)) :\n\
               SORT (cons (x, cons (y, ys1)), cons (y, ys2))",
        );
        let DeclKind::Praxi { quants, premises, .. } = &decls[0].kind else { panic!() };
        assert_eq!(quants.len(), 2);
        assert!(quants[1].guard.is_some());
        assert_eq!(premises.len(), 2);
    }

    #[test]
    fn static_precedence() {
        let t = parse_static_term("n - i + 1 <= 2 * n && ~b").unwrap();
        assert_eq!(t.to_string(), "n - i + 1 <= 2 * n && ~b");
    }
}
