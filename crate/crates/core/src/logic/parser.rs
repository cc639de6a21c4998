use std::collections::BTreeSet;

use super::ast::*;
use crate::algebra::rational_from_str;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Slash,
    Pipe,
    Amp,
    Bang,
    Arrow,  // ->
    DArrow, // <->
    Eq,
    Le,
    Ge,
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(fragment: &str, line: usize, col0: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = fragment.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i + 1;
        let mut push1 = |tok: Tok, me: &mut usize, adv: usize| {
            out.push(Spanned { tok, line, col });
            *me += adv;
        };
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break, // comment to end of line
            '(' => push1(Tok::LParen, &mut i, 1),
            ')' => push1(Tok::RParen, &mut i, 1),
            '[' => push1(Tok::LBrack, &mut i, 1),
            ']' => push1(Tok::RBrack, &mut i, 1),
            ',' => push1(Tok::Comma, &mut i, 1),
            '.' => push1(Tok::Dot, &mut i, 1),
            '/' => push1(Tok::Slash, &mut i, 1),
            '|' => push1(Tok::Pipe, &mut i, 1),
            '&' => push1(Tok::Amp, &mut i, 1),
            '!' => push1(Tok::Bang, &mut i, 1),
            '+' => push1(Tok::Plus, &mut i, 1),
            '=' => push1(Tok::Eq, &mut i, 1),
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push1(Tok::Arrow, &mut i, 2);
                } else {
                    push1(Tok::Minus, &mut i, 1);
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    push1(Tok::DArrow, &mut i, 3);
                } else if chars.get(i + 1) == Some(&'=') {
                    push1(Tok::Le, &mut i, 2);
                } else {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: "expected `<=` or `<->`".to_string(),
                    });
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push1(Tok::Ge, &mut i, 2);
                } else {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: "expected `>=`".to_string(),
                    });
                }
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v: i64 = s.parse().map_err(|_| Error::Parse {
                    line,
                    col,
                    msg: format!("integer {s} out of range"),
                })?;
                out.push(Spanned {
                    tok: Tok::Int(v),
                    line,
                    col,
                });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Formula AST as written, before variable canonicalization. Retains the
/// original variable names so violations can be reported on them.
#[derive(Debug, Clone, PartialEq)]
pub enum RawFormula {
    Atom {
        pred: String,
        args: Vec<String>,
        line: usize,
        col: usize,
    },
    Eq(String, String),
    Not(Box<RawFormula>),
    And(Box<RawFormula>, Box<RawFormula>),
    Or(Box<RawFormula>, Box<RawFormula>),
    Implies(Box<RawFormula>, Box<RawFormula>),
    Iff(Box<RawFormula>, Box<RawFormula>),
    Quant {
        kind: RawQuantKind,
        var: String,
        body: Box<RawFormula>,
        line: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawQuantKind {
    Forall,
    Exists,
    Count(Comparator, u32),
}

struct P<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
}

impl<'a> P<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn span(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((self.line, 1))
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.span();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let (line, col) = self.span();
        match self.bump() {
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => Ok((s.clone(), line, col)),
            _ => Err(Error::Parse {
                line,
                col,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        match self.bump() {
            Some(Spanned { tok: Tok::Int(v), .. }) => Ok(*v),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // formula := iff
    fn formula(&mut self) -> Result<RawFormula> {
        self.iff_expr()
    }

    fn iff_expr(&mut self) -> Result<RawFormula> {
        let mut lhs = self.implies_expr()?;
        while self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            let rhs = self.implies_expr()?;
            lhs = RawFormula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies_expr(&mut self) -> Result<RawFormula> {
        let lhs = self.or_expr()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies_expr()?; // right-associative
            Ok(RawFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> Result<RawFormula> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = RawFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<RawFormula> {
        let mut lhs = self.not_expr()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.not_expr()?;
            lhs = RawFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<RawFormula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(RawFormula::Not(Box::new(self.not_expr()?)))
            }
            Some(Tok::Ident(s)) if s == "forall" || s == "exists" => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<RawFormula> {
        let (kw, line, col) = self.ident("quantifier")?;
        let kind = if kw == "forall" {
            RawQuantKind::Forall
        } else if self.peek() == Some(&Tok::LBrack) {
            self.pos += 1;
            let cmp = match self.bump().map(|s| s.tok.clone()) {
                Some(Tok::Eq) => Comparator::Eq,
                Some(Tok::Le) => Comparator::Le,
                Some(Tok::Ge) => Comparator::Ge,
                _ => return Err(self.err("expected `=`, `<=` or `>=` in counting quantifier")),
            };
            let k = self.int("count bound")?;
            if k < 0 {
                return Err(self.err("count bound must be nonnegative"));
            }
            self.expect(Tok::RBrack, "`]`")?;
            RawQuantKind::Count(cmp, k as u32)
        } else {
            RawQuantKind::Exists
        };
        let (var, _, _) = self.ident("quantified variable")?;
        // optional dot before the body; the body extends maximally right
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
        }
        let body = match self.peek() {
            Some(Tok::Ident(s)) if s == "forall" || s == "exists" => self.quantifier()?,
            _ => self.formula()?,
        };
        Ok(RawFormula::Quant {
            kind,
            var,
            body: Box::new(body),
            line,
            col,
        })
    }

    fn primary(&mut self) -> Result<RawFormula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => {
                let (name, line, col) = self.ident("atom")?;
                match self.peek() {
                    Some(Tok::LParen) => {
                        self.pos += 1;
                        let mut args = vec![self.ident("variable")?.0];
                        while self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                            args.push(self.ident("variable")?.0);
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(RawFormula::Atom {
                            pred: name,
                            args,
                            line,
                            col,
                        })
                    }
                    Some(Tok::Eq) => {
                        self.pos += 1;
                        let (rhs, _, _) = self.ident("variable")?;
                        Ok(RawFormula::Eq(name, rhs))
                    }
                    _ => Err(Error::Parse {
                        line,
                        col,
                        msg: format!("expected `(` or `=` after `{name}`"),
                    }),
                }
            }
            _ => Err(self.err("expected formula")),
        }
    }

    // bound := term (('+'|'-') term)* ; term := INT | [INT] ('n'|'m')
    fn bound_expr(&mut self) -> Result<BoundExpr> {
        let mut b = BoundExpr::default();
        let mut sign = 1i64;
        loop {
            let coeff = match self.peek() {
                Some(Tok::Int(v)) => {
                    let v = *v;
                    self.pos += 1;
                    Some(v)
                }
                _ => None,
            };
            match self.peek() {
                Some(Tok::Ident(s)) if s == "n" || s == "m" => {
                    let c = sign * coeff.unwrap_or(1);
                    if s == "n" {
                        b.n_coeff += c;
                    } else {
                        b.m_coeff += c;
                    }
                    self.pos += 1;
                }
                _ => match coeff {
                    Some(v) => b.constant += sign * v,
                    None => return Err(self.err("expected bound expression")),
                },
            }
            match self.peek() {
                Some(Tok::Plus) => {
                    sign = 1;
                    self.pos += 1;
                }
                Some(Tok::Minus) => {
                    sign = -1;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        Ok(b)
    }

    fn weight_val(&mut self) -> Result<WeightVal> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "symbolic" => {
                self.pos += 1;
                Ok(WeightVal::Sym(String::new())) // named later from the predicate
            }
            _ => {
                let mut neg = false;
                if self.peek() == Some(&Tok::Minus) {
                    neg = true;
                    self.pos += 1;
                }
                let num = self.int("weight")?;
                let mut text = format!("{}{}", if neg { "-" } else { "" }, num);
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let den = self.int("denominator")?;
                    text = format!("{text}/{den}");
                }
                rational_from_str(&text)
                    .map(WeightVal::Rat)
                    .ok_or_else(|| self.err("invalid rational weight"))
            }
        }
    }
}

/// Report produced by [`check_two_variable`] when a formula needs a third
/// variable name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoVarViolation {
    pub var: String,
    pub line: usize,
    pub col: usize,
}

fn free_names(f: &RawFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        RawFormula::Atom { args, .. } => {
            for a in args {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
        }
        RawFormula::Eq(a, b) => {
            for v in [a, b] {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
        RawFormula::Not(g) => free_names(g, bound, out),
        RawFormula::And(a, b)
        | RawFormula::Or(a, b)
        | RawFormula::Implies(a, b)
        | RawFormula::Iff(a, b) => {
            free_names(a, bound, out);
            free_names(b, bound, out);
        }
        RawFormula::Quant { var, body, .. } => {
            bound.push(var.clone());
            free_names(body, bound, out);
            bound.pop();
        }
    }
}

/// Checks that the formula can be written with at most the two canonical
/// variables; reports the first quantified variable for which no name is left.
pub fn check_two_variable(f: &RawFormula) -> std::result::Result<(), TwoVarViolation> {
    fn walk(
        f: &RawFormula,
        scope: &mut Vec<(String, Var)>,
    ) -> std::result::Result<(), TwoVarViolation> {
        match f {
            RawFormula::Atom { .. } | RawFormula::Eq(..) => Ok(()),
            RawFormula::Not(g) => walk(g, scope),
            RawFormula::And(a, b)
            | RawFormula::Or(a, b)
            | RawFormula::Implies(a, b)
            | RawFormula::Iff(a, b) => {
                walk(a, scope)?;
                walk(b, scope)
            }
            RawFormula::Quant {
                var,
                body,
                line,
                col,
                ..
            } => {
                let canon = free_slot(var, body, scope).ok_or(TwoVarViolation {
                    var: var.clone(),
                    line: *line,
                    col: *col,
                })?;
                scope.push((var.clone(), canon));
                let r = walk(body, scope);
                scope.pop();
                r
            }
        }
    }
    walk(f, &mut Vec::new())
}

/// Which canonical variable can represent `var` inside `body`, given the
/// canonical names already taken by the body's other free variables.
/// Prefers a name that is not bound in the enclosing scope, so shadowing
/// only happens when two names genuinely do not suffice otherwise.
fn free_slot(var: &str, body: &RawFormula, scope: &[(String, Var)]) -> Option<Var> {
    let mut free = BTreeSet::new();
    free_names(body, &mut Vec::new(), &mut free);
    let mut used_x = false;
    let mut used_y = false;
    for name in free.iter().filter(|n| n.as_str() != var) {
        if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == name) {
            match v {
                Var::X => used_x = true,
                Var::Y => used_y = true,
            }
        }
    }
    let candidates: Vec<Var> = [Var::X, Var::Y]
        .into_iter()
        .filter(|v| match v {
            Var::X => !used_x,
            Var::Y => !used_y,
        })
        .collect();
    let active = |v: Var| scope.iter().any(|(_, s)| *s == v);
    candidates
        .iter()
        .copied()
        .find(|v| !active(*v))
        .or_else(|| candidates.first().copied())
}

/// Renames bound variables onto the canonical pair and resolves predicates,
/// auto-declaring unseen ones with the arity of first use.
pub fn canonicalize(
    raw: &RawFormula,
    vocab: &mut Vocabulary,
    scope: &mut Vec<(String, Var)>,
) -> Result<Formula> {
    match raw {
        RawFormula::Atom {
            pred,
            args,
            line,
            col,
        } => {
            if args.len() > 2 {
                return Err(Error::Parse {
                    line: *line,
                    col: *col,
                    msg: format!("predicate {pred} used with arity {}; at most 2", args.len()),
                });
            }
            let mut vars = Vec::new();
            for a in args {
                let v = scope.iter().rev().find(|(n, _)| n == a).map(|(_, v)| *v);
                match v {
                    Some(v) => vars.push(v),
                    None => {
                        return Err(Error::Parse {
                            line: *line,
                            col: *col,
                            msg: format!("unbound variable `{a}`"),
                        })
                    }
                }
            }
            let id = vocab.declare(pred, args.len() as u8).map_err(|e| match e {
                Error::Invalid(msg) => Error::Parse {
                    line: *line,
                    col: *col,
                    msg,
                },
                e => e,
            })?;
            Ok(match vars[..] {
                [a] => Formula::atom1(id, a),
                [a, b] => Formula::atom2(id, a, b),
                _ => unreachable!(),
            })
        }
        RawFormula::Eq(a, b) => {
            let look = |name: &str, scope: &Vec<(String, Var)>| {
                scope
                    .iter()
                    .rev()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| Error::Invalid(format!("unbound variable `{name}`")))
            };
            Ok(Formula::Equality(look(a, scope)?, look(b, scope)?))
        }
        RawFormula::Not(g) => Ok(canonicalize(g, vocab, scope)?.not()),
        RawFormula::And(a, b) => {
            Ok(canonicalize(a, vocab, scope)?.and(canonicalize(b, vocab, scope)?))
        }
        RawFormula::Or(a, b) => {
            Ok(canonicalize(a, vocab, scope)?.or(canonicalize(b, vocab, scope)?))
        }
        RawFormula::Implies(a, b) => {
            Ok(canonicalize(a, vocab, scope)?.implies(canonicalize(b, vocab, scope)?))
        }
        RawFormula::Iff(a, b) => {
            Ok(canonicalize(a, vocab, scope)?.iff(canonicalize(b, vocab, scope)?))
        }
        RawFormula::Quant {
            kind,
            var,
            body,
            line,
            col,
        } => {
            let canon = free_slot(var, body, scope).ok_or(Error::Parse {
                line: *line,
                col: *col,
                msg: format!("formula requires a third variable (`{var}`)"),
            })?;
            scope.push((var.clone(), canon));
            let inner = canonicalize(body, vocab, scope)?;
            scope.pop();
            Ok(match kind {
                RawQuantKind::Forall => Formula::forall(canon, inner),
                RawQuantKind::Exists => Formula::exists(canon, inner),
                RawQuantKind::Count(cmp, k) => Formula::count_exists(*cmp, *k, canon, inner),
            })
        }
    }
}

fn parse_raw_fragment(toks: &[Spanned], line: usize) -> Result<RawFormula> {
    let mut p = P { toks, pos: 0, line };
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a single formula; `x` and `y` may appear free (they are pre-bound
/// to the canonical variables). Used to build matrices programmatically.
pub fn parse_formula(text: &str, vocab: &mut Vocabulary) -> Result<Formula> {
    let toks = lex(text, 1, 0)?;
    let raw = parse_raw_fragment(&toks, 1)?;
    let mut scope = vec![("x".to_string(), Var::X), ("y".to_string(), Var::Y)];
    canonicalize(&raw, vocab, &mut scope)
}

/// Parses just a formula into the raw AST (for two-variable checks).
pub fn parse_raw_formula(text: &str) -> Result<RawFormula> {
    let toks = lex(text, 1, 0)?;
    parse_raw_fragment(&toks, 1)
}

enum Decl {
    Pred(String, u8),
    Weight(String, WeightVal, WeightVal),
    Sentence(RawFormula),
    Constraint(String, Comparator, BoundExpr),
    AxiomLinear(String),
    AxiomPred(String),
    AxiomPred2(String),
    N(i64),
    ParamM(i64),
}

fn parse_declaration(toks: &[Spanned], line: usize) -> Result<Option<(Decl, (usize, usize))>> {
    if toks.is_empty() {
        return Ok(None);
    }
    let pos0 = (toks[0].line, toks[0].col);
    let mut p = P { toks, pos: 0, line };
    let head = match p.peek() {
        Some(Tok::Ident(s)) => s.clone(),
        _ => {
            return Ok(Some((Decl::Sentence(parse_raw_fragment(toks, line)?), pos0)));
        }
    };
    let next_is = |t: &Tok| toks.get(1).map(|s| &s.tok) == Some(t);
    let decl = match head.as_str() {
        "predicate" => {
            p.pos += 1;
            let (name, _, _) = p.ident("predicate name")?;
            p.expect(Tok::Slash, "`/`")?;
            let arity = p.int("arity")?;
            if !(0..=255).contains(&arity) {
                return Err(p.err("invalid arity"));
            }
            Decl::Pred(name, arity as u8)
        }
        "weight" => {
            p.pos += 1;
            let (name, _, _) = p.ident("predicate name")?;
            p.expect(Tok::Eq, "`=`")?;
            let mut w = p.weight_val()?;
            p.expect(Tok::Comma, "`,`")?;
            let mut wbar = p.weight_val()?;
            if let WeightVal::Sym(s) = &mut w {
                *s = format!("w_{name}");
            }
            if let WeightVal::Sym(s) = &mut wbar {
                *s = format!("wbar_{name}");
            }
            Decl::Weight(name, w, wbar)
        }
        "sentence" => {
            let rest = &toks[1..];
            Decl::Sentence(parse_raw_fragment(rest, line)?)
        }
        "constraint" => {
            p.pos += 1;
            p.expect(Tok::Pipe, "`|`")?;
            let (name, _, _) = p.ident("predicate name")?;
            p.expect(Tok::Pipe, "`|`")?;
            let cmp = match p.bump().map(|s| s.tok.clone()) {
                Some(Tok::Le) => Comparator::Le,
                Some(Tok::Eq) => Comparator::Eq,
                Some(Tok::Ge) => Comparator::Ge,
                _ => return Err(p.err("expected `<=`, `=` or `>=`")),
            };
            let bound = p.bound_expr()?;
            Decl::Constraint(name, cmp, bound)
        }
        "axiom" => {
            p.pos += 1;
            let (which, _, _) = p.ident("axiom name")?;
            p.expect(Tok::LParen, "`(`")?;
            let (name, _, _) = p.ident("order predicate")?;
            p.expect(Tok::RParen, "`)`")?;
            match which.as_str() {
                "linear" => Decl::AxiomLinear(name),
                "pred" => Decl::AxiomPred(name),
                "pred2" => Decl::AxiomPred2(name),
                other => return Err(p.err(format!("unknown axiom `{other}`"))),
            }
        }
        "n" if next_is(&Tok::Eq) => {
            p.pos += 2;
            Decl::N(p.int("domain size")?)
        }
        "param" => {
            p.pos += 1;
            let (name, _, _) = p.ident("parameter name")?;
            if name != "m" {
                return Err(p.err(format!("unknown parameter `{name}`; only `m` is supported")));
            }
            p.expect(Tok::Eq, "`=`")?;
            Decl::ParamM(p.int("parameter value")?)
        }
        _ => {
            return Ok(Some((Decl::Sentence(parse_raw_fragment(toks, line)?), pos0)));
        }
    };
    if !matches!(decl, Decl::Sentence(_)) && !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(Some((decl, pos0)))
}

/// Parses the full input format: declarations separated by newlines or
/// semicolons; see the README for the grammar.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut decls = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut col0 = 0usize;
        for piece in raw_line.split(';') {
            let toks = lex(piece, line, col0)?;
            if let Some(d) = parse_declaration(&toks, line)? {
                decls.push(d);
            }
            col0 += piece.len() + 1;
        }
    }

    let mut n: Option<i64> = None;
    let mut param_m: Option<i64> = None;
    let mut vocab = Vocabulary::new();
    let mut axioms = Axioms::default();
    let mut pred_axiom_target: Option<(String, (usize, usize))> = None;
    let mut pred2_axiom_target: Option<(String, (usize, usize))> = None;

    // declarations that shape the vocabulary first
    for (d, pos) in &decls {
        match d {
            Decl::Pred(name, arity) => {
                vocab.declare(name, *arity).map_err(|e| at(pos, e))?;
            }
            Decl::AxiomLinear(name) => {
                let id = vocab.declare(name, 2).map_err(|e| at(pos, e))?;
                if axioms.linear.is_some() {
                    return Err(at_msg(pos, "duplicate linear axiom"));
                }
                axioms.linear = Some(id);
            }
            Decl::AxiomPred(name) => pred_axiom_target = Some((name.clone(), *pos)),
            Decl::AxiomPred2(name) => pred2_axiom_target = Some((name.clone(), *pos)),
            Decl::N(v) => {
                if *v < 1 {
                    return Err(at_msg(pos, "domain size n must be positive"));
                }
                n = Some(*v);
            }
            Decl::ParamM(v) => param_m = Some(*v),
            _ => {}
        }
    }

    let n = n.ok_or_else(|| Error::Invalid("missing `n = <int>` declaration".to_string()))? as usize;

    // sentences: two-variable check, then canonical renaming
    let mut sentences = Vec::new();
    for (d, pos) in &decls {
        if let Decl::Sentence(raw) = d {
            if let Err(v) = check_two_variable(raw) {
                return Err(Error::Parse {
                    line: v.line,
                    col: v.col,
                    msg: format!("formula requires a third variable (`{}`)", v.var),
                });
            }
            let f = canonicalize(raw, &mut vocab, &mut Vec::new())?;
            if !f.free_vars().is_empty() {
                return Err(at_msg(pos, "sentence has free variables"));
            }
            sentences.push(f);
        }
    }

    // weights and constraints may now resolve every predicate
    let mut weights = Weights::default();
    let mut constraints = Vec::new();
    for (d, pos) in &decls {
        match d {
            Decl::Weight(name, w, wbar) => {
                let id = vocab
                    .lookup(name)
                    .ok_or_else(|| at_msg(pos, format!("unknown predicate `{name}` in weight")))?;
                weights.set(id, w.clone(), wbar.clone());
            }
            Decl::Constraint(name, cmp, bound) => {
                let id = vocab.lookup(name).ok_or_else(|| {
                    at_msg(pos, format!("unknown predicate `{name}` in constraint"))
                })?;
                bound.eval(n, param_m)?; // must be a nonnegative integer once n is fixed
                constraints.push(CardinalityConstraint {
                    pred: id,
                    cmp: *cmp,
                    bound: *bound,
                });
            }
            _ => {}
        }
    }

    // axiom cross-checks
    if let Some((name, pos)) = &pred_axiom_target {
        let lin = axioms
            .linear
            .ok_or_else(|| at_msg(pos, "axiom pred requires axiom linear"))?;
        if vocab.name(lin) != name {
            return Err(at_msg(
                pos,
                format!("axiom pred({name}) must name the linear order predicate"),
            ));
        }
        axioms.pred = true;
    }
    if let Some((name, pos)) = &pred2_axiom_target {
        let lin = axioms
            .linear
            .ok_or_else(|| at_msg(pos, "axiom pred2 requires axiom linear"))?;
        if vocab.name(lin) != name {
            return Err(at_msg(
                pos,
                format!("axiom pred2({name}) must name the linear order predicate"),
            ));
        }
        axioms.pred2 = true;
    }

    if let Some(lin) = axioms.linear {
        if vocab.arity(lin) != 2 {
            return Err(Error::Invalid(format!(
                "linear order predicate {} must be binary",
                vocab.name(lin)
            )));
        }
        if !weights.is_default(lin) {
            return Err(Error::Invalid(format!(
                "linear order predicate {} must keep weights (1, 1)",
                vocab.name(lin)
            )));
        }
    }

    Ok(Problem {
        vocab,
        sentences,
        constraints,
        axioms,
        weights,
        domain_size: n,
        param_m,
    })
}

fn at(pos: &(usize, usize), e: Error) -> Error {
    match e {
        Error::Invalid(msg) => Error::Parse {
            line: pos.0,
            col: pos.1,
            msg,
        },
        e => e,
    }
}

fn at_msg(pos: &(usize, usize), msg: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.0,
        col: pos.1,
        msg: msg.into(),
    }
}
