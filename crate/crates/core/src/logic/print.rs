use super::ast::*;

// Precedence levels used by both the parser and the printer:
// iff(1) < implies(2) < or(3) < and(4) < not(5) < atom(6).
// Quantifiers bind their body maximally, so they are parenthesized whenever
// they appear as an operand.

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..) => 5,
        Formula::Atom { .. } | Formula::Equality(..) => 6,
        Formula::Forall(..) | Formula::Exists(..) | Formula::CountExists(..) => 0,
    }
}

fn go(f: &Formula, vocab: &Vocabulary, ctx: u8, out: &mut String) {
    let needs_parens = prec(f) < ctx;
    if needs_parens {
        out.push('(');
    }
    match f {
        Formula::Atom { pred, args } => {
            out.push_str(vocab.name(*pred));
            out.push('(');
            match args {
                Args::One(a) => out.push_str(a.name()),
                Args::Two(a, b) => {
                    out.push_str(a.name());
                    out.push(',');
                    out.push_str(b.name());
                }
            }
            out.push(')');
        }
        Formula::Equality(a, b) => {
            out.push_str(a.name());
            out.push_str(" = ");
            out.push_str(b.name());
        }
        Formula::Not(g) => {
            out.push('!');
            go(g, vocab, 5, out);
        }
        Formula::And(a, b) => {
            go(a, vocab, 4, out);
            out.push_str(" & ");
            go(b, vocab, 5, out);
        }
        Formula::Or(a, b) => {
            go(a, vocab, 3, out);
            out.push_str(" | ");
            go(b, vocab, 4, out);
        }
        Formula::Implies(a, b) => {
            go(a, vocab, 3, out);
            out.push_str(" -> ");
            go(b, vocab, 2, out);
        }
        Formula::Iff(a, b) => {
            go(a, vocab, 2, out);
            out.push_str(" <-> ");
            go(b, vocab, 2, out);
        }
        Formula::Forall(v, g) => {
            out.push_str("forall ");
            out.push_str(v.name());
            out.push_str(". ");
            go(g, vocab, 0, out);
        }
        Formula::Exists(v, g) => {
            out.push_str("exists ");
            out.push_str(v.name());
            out.push_str(". ");
            go(g, vocab, 0, out);
        }
        Formula::CountExists(cmp, k, v, g) => {
            out.push_str(&format!("exists[{cmp}{k}] "));
            out.push_str(v.name());
            out.push_str(". ");
            go(g, vocab, 0, out);
        }
    }
    if needs_parens {
        out.push(')');
    }
}

pub fn format_formula(f: &Formula, vocab: &Vocabulary) -> String {
    let mut s = String::new();
    go(f, vocab, 0, &mut s);
    s
}

/// Canonical text form; `parse_problem(format_problem(p))` returns `p` and
/// printing is idempotent on its own output.
pub fn format_problem(p: &Problem) -> String {
    let mut out = String::new();
    for id in p.vocab.ids() {
        out.push_str(&format!(
            "predicate {}/{}\n",
            p.vocab.name(id),
            p.vocab.arity(id)
        ));
    }
    if let Some(lin) = p.axioms.linear {
        out.push_str(&format!("axiom linear({})\n", p.vocab.name(lin)));
        if p.axioms.pred {
            out.push_str(&format!("axiom pred({})\n", p.vocab.name(lin)));
        }
        if p.axioms.pred2 {
            out.push_str(&format!("axiom pred2({})\n", p.vocab.name(lin)));
        }
    }
    for id in p.vocab.ids() {
        if !p.weights.is_default(id) {
            let (w, wbar) = p.weights.get(id);
            let fmt_val = |v: &WeightVal| match v {
                WeightVal::Rat(r) => r.to_string(),
                WeightVal::Sym(_) => "symbolic".to_string(),
            };
            out.push_str(&format!(
                "weight {} = {}, {}\n",
                p.vocab.name(id),
                fmt_val(&w),
                fmt_val(&wbar)
            ));
        }
    }
    for s in &p.sentences {
        out.push_str(&format!("sentence {}\n", format_formula(s, &p.vocab)));
    }
    for c in &p.constraints {
        out.push_str(&format!(
            "constraint |{}| {} {}\n",
            p.vocab.name(c.pred),
            c.cmp,
            c.bound
        ));
    }
    if let Some(m) = p.param_m {
        out.push_str(&format!("param m = {m}\n"));
    }
    out.push_str(&format!("n = {}\n", p.domain_size));
    out
}
