use crate::logic::{format_formula, Formula, Var, Vocabulary, Weights};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum QKind {
    Forall,
    Exists,
}

/// A prenex conjunct: quantifier prefix over a quantifier-free matrix.
#[derive(Debug, Clone)]
pub(crate) struct Prenex {
    pub prefix: Vec<(QKind, Var)>,
    pub matrix: Formula,
}

impl Prenex {
    fn bound(&self) -> Vec<Var> {
        self.prefix.iter().map(|(_, v)| *v).collect()
    }

    /// Free variables of the whole prenex formula.
    fn free_outer(&self) -> Vec<Var> {
        let bound = self.bound();
        self.matrix
            .free_vars()
            .into_iter()
            .filter(|v| !bound.contains(v))
            .collect()
    }
}

fn nnf(f: &Formula, positive: bool, vocab: &Vocabulary) -> Result<Formula> {
    Ok(match f {
        Formula::Atom { .. } | Formula::Equality(..) => {
            if positive {
                f.clone()
            } else {
                f.clone().not()
            }
        }
        Formula::Not(g) => nnf(g, !positive, vocab)?,
        Formula::And(a, b) => {
            if positive {
                nnf(a, true, vocab)?.and(nnf(b, true, vocab)?)
            } else {
                nnf(a, false, vocab)?.or(nnf(b, false, vocab)?)
            }
        }
        Formula::Or(a, b) => {
            if positive {
                nnf(a, true, vocab)?.or(nnf(b, true, vocab)?)
            } else {
                nnf(a, false, vocab)?.and(nnf(b, false, vocab)?)
            }
        }
        Formula::Implies(a, b) => {
            if positive {
                nnf(a, false, vocab)?.or(nnf(b, true, vocab)?)
            } else {
                nnf(a, true, vocab)?.and(nnf(b, false, vocab)?)
            }
        }
        Formula::Iff(a, b) => {
            if positive {
                // (¬a ∨ b) ∧ (¬b ∨ a)
                nnf(a, false, vocab)?
                    .or(nnf(b, true, vocab)?)
                    .and(nnf(b, false, vocab)?.or(nnf(a, true, vocab)?))
            } else {
                // (a ∧ ¬b) ∨ (¬a ∧ b)
                nnf(a, true, vocab)?
                    .and(nnf(b, false, vocab)?)
                    .or(nnf(a, false, vocab)?.and(nnf(b, true, vocab)?))
            }
        }
        Formula::Forall(v, g) => {
            if positive {
                Formula::forall(*v, nnf(g, true, vocab)?)
            } else {
                Formula::exists(*v, nnf(g, false, vocab)?)
            }
        }
        Formula::Exists(v, g) => {
            if positive {
                Formula::exists(*v, nnf(g, true, vocab)?)
            } else {
                Formula::forall(*v, nnf(g, false, vocab)?)
            }
        }
        Formula::CountExists(..) => {
            return Err(Error::OutOfScope(format!(
                "counting quantifier survives reduction in `{}`",
                format_formula(f, vocab)
            )))
        }
    })
}

fn is_forall_exists_shaped(prefix: &[(QKind, Var)]) -> bool {
    let mut seen_exists = false;
    for (q, _) in prefix {
        match q {
            QKind::Exists => seen_exists = true,
            QKind::Forall if seen_exists => return false,
            QKind::Forall => {}
        }
    }
    true
}

/// Candidate injective renamings of a prefix into the canonical pair, the
/// identity first so output stays stable when no renaming is needed.
fn renamings(prefix: &[(QKind, Var)]) -> Vec<Vec<(Var, Var)>> {
    match prefix {
        [] => vec![vec![]],
        [(_, u)] => vec![vec![(*u, *u)], vec![(*u, u.other())]],
        [(_, u), (_, v)] => vec![
            vec![(*u, *u), (*v, *v)],
            vec![(*u, *v), (*v, *u)],
        ],
        _ => unreachable!("prefix never exceeds two variables"),
    }
}

fn apply_renaming(pf: &Prenex, renaming: &[(Var, Var)]) -> Prenex {
    let is_swap = renaming.len() == 2 && renaming[0].0 != renaming[0].1;
    let is_single_change = renaming.len() == 1 && renaming[0].0 != renaming[0].1;
    let mut matrix = pf.matrix.clone();
    if is_swap {
        matrix = swap_xy(&matrix);
    } else if is_single_change {
        matrix = matrix.substitute(renaming[0].0, renaming[0].1);
    }
    let prefix = pf
        .prefix
        .iter()
        .map(|(q, v)| {
            let new = renaming
                .iter()
                .find(|(from, _)| from == v)
                .map(|(_, to)| *to)
                .unwrap_or(*v);
            (*q, new)
        })
        .collect();
    Prenex { prefix, matrix }
}

fn swap_xy(f: &Formula) -> Formula {
    match f {
        Formula::Atom { pred, args } => Formula::Atom {
            pred: *pred,
            args: match args {
                crate::logic::Args::One(a) => crate::logic::Args::One(a.other()),
                crate::logic::Args::Two(a, b) => crate::logic::Args::Two(a.other(), b.other()),
            },
        },
        Formula::Equality(a, b) => Formula::Equality(a.other(), b.other()),
        Formula::Not(g) => swap_xy(g).not(),
        Formula::And(a, b) => swap_xy(a).and(swap_xy(b)),
        Formula::Or(a, b) => swap_xy(a).or(swap_xy(b)),
        Formula::Implies(a, b) => swap_xy(a).implies(swap_xy(b)),
        Formula::Iff(a, b) => swap_xy(a).iff(swap_xy(b)),
        Formula::Forall(v, g) => Formula::forall(v.other(), swap_xy(g)),
        Formula::Exists(v, g) => Formula::exists(v.other(), swap_xy(g)),
        Formula::CountExists(c, k, v, g) => {
            Formula::count_exists(*c, *k, v.other(), swap_xy(g))
        }
    }
}

fn merge(
    a: Prenex,
    b: Prenex,
    combine: impl Fn(Formula, Formula) -> Formula,
    vocab: &Vocabulary,
) -> Result<Prenex> {
    if a.prefix.len() + b.prefix.len() > 2 {
        return Err(prenex_error(&a, &b, vocab));
    }
    let free_a = a.free_outer();
    let free_b = b.free_outer();
    for ra in renamings(&a.prefix) {
        for rb in renamings(&b.prefix) {
            let a2 = apply_renaming(&a, &ra);
            let b2 = apply_renaming(&b, &rb);
            let bound_a = a2.bound();
            let bound_b = b2.bound();
            let disjoint = bound_a.iter().all(|v| !bound_b.contains(v));
            let no_capture = bound_a.iter().all(|v| !free_a.contains(v) && !free_b.contains(v))
                && bound_b.iter().all(|v| !free_a.contains(v) && !free_b.contains(v));
            if disjoint && no_capture {
                let prefix = if is_forall_exists_shaped(&a2.prefix)
                    && is_forall_exists_shaped(&b2.prefix)
                {
                    // universals first keeps the result skolemizable
                    let mut merged: Vec<(QKind, Var)> = Vec::new();
                    for side in [&a2.prefix, &b2.prefix] {
                        merged.extend(side.iter().filter(|(q, _)| *q == QKind::Forall));
                    }
                    for side in [&a2.prefix, &b2.prefix] {
                        merged.extend(side.iter().filter(|(q, _)| *q == QKind::Exists));
                    }
                    merged
                } else {
                    let mut merged = a2.prefix.clone();
                    merged.extend(b2.prefix.iter().copied());
                    merged
                };
                return Ok(Prenex {
                    prefix,
                    matrix: combine(a2.matrix, b2.matrix),
                });
            }
        }
    }
    Err(prenex_error(&a, &b, vocab))
}

fn prenex_error(a: &Prenex, b: &Prenex, vocab: &Vocabulary) -> Error {
    Error::OutOfScope(format!(
        "cannot combine `{}` and `{}` into a two-variable prenex form",
        format_formula(&a.matrix, vocab),
        format_formula(&b.matrix, vocab)
    ))
}

fn prenex_of(f: &Formula, vocab: &Vocabulary) -> Result<Prenex> {
    match f {
        Formula::Forall(v, g) => prepend(QKind::Forall, *v, prenex_of(g, vocab)?),
        Formula::Exists(v, g) => prepend(QKind::Exists, *v, prenex_of(g, vocab)?),
        Formula::And(a, b) => merge(
            prenex_of(a, vocab)?,
            prenex_of(b, vocab)?,
            Formula::and,
            vocab,
        ),
        Formula::Or(a, b) => merge(
            prenex_of(a, vocab)?,
            prenex_of(b, vocab)?,
            Formula::or,
            vocab,
        ),
        // NNF leaves negation only on literals
        _ => Ok(Prenex {
            prefix: vec![],
            matrix: f.clone(),
        }),
    }
}

fn prepend(q: QKind, v: Var, pf: Prenex) -> Result<Prenex> {
    if !pf.free_outer().contains(&v) {
        return Ok(pf); // vacuous quantifier on a nonempty domain
    }
    debug_assert!(!pf.bound().contains(&v));
    let mut prefix = vec![(q, v)];
    prefix.extend(pf.prefix);
    Ok(Prenex {
        prefix,
        matrix: pf.matrix,
    })
}

/// Canonical prefix naming: outermost variable becomes x, the inner one y.
fn canonical(mut pf: Prenex) -> Prenex {
    match pf.prefix[..] {
        [] => pf,
        [(q, v)] => {
            if v == Var::Y {
                pf.matrix = pf.matrix.substitute(Var::Y, Var::X);
            }
            Prenex {
                prefix: vec![(q, Var::X)],
                matrix: pf.matrix,
            }
        }
        [(q1, v1), (q2, _)] => {
            if v1 == Var::Y {
                pf.matrix = swap_xy(&pf.matrix);
            }
            Prenex {
                prefix: vec![(q1, Var::X), (q2, Var::Y)],
                matrix: pf.matrix,
            }
        }
        _ => unreachable!(),
    }
}

/// NNF + prenexing of one sentence, split into independently quantified
/// conjuncts (a conjunction of prenex sentences is handled sentence-wise
/// rather than forced into one prefix).
pub(crate) fn to_prenex_parts(f: &Formula, vocab: &Vocabulary) -> Result<Vec<Prenex>> {
    let in_nnf = nnf(f, true, vocab)?;
    let mut parts = Vec::new();
    for part in super::split_conjuncts_nnf(in_nnf) {
        let pf = prenex_of(&part, vocab)?;
        debug_assert!(pf.free_outer().is_empty(), "sentences are closed");
        parts.push(canonical(pf));
    }
    Ok(parts)
}

/// Eliminates an existential block by the weighted skolemization rule,
/// producing a quantifier-free conjunct of the global matrix. Fresh Skolem
/// predicates are named S1, S2, ... and weighted (1, -1).
pub(crate) fn skolemize_part(
    pf: Prenex,
    vocab: &mut Vocabulary,
    weights: &mut Weights,
    counter: &mut usize,
) -> Result<Formula> {
    let fresh = |vocab: &mut Vocabulary, weights: &mut Weights, counter: &mut usize| {
        let id = loop {
            let name = format!("S{counter}");
            *counter += 1;
            if vocab.lookup(&name).is_none() {
                break vocab.declare(&name, 1).expect("unary");
            }
        };
        super::set_skolem_weights(weights, id);
        id
    };
    match pf.prefix[..] {
        [] | [(QKind::Forall, _)] | [(QKind::Forall, _), (QKind::Forall, _)] => Ok(pf.matrix),
        [(QKind::Forall, _), (QKind::Exists, _)] => {
            let s = fresh(vocab, weights, counter);
            Ok(pf.matrix.not().or(Formula::atom1(s, Var::X)))
        }
        [(QKind::Exists, _)] => {
            // one fresh every-element witness marker: net weight is zero
            // unless some element satisfies the matrix
            let s = fresh(vocab, weights, counter);
            Ok(pf.matrix.not().or(Formula::atom1(s, Var::Y)))
        }
        _ => Err(Error::OutOfScope(
            "prenex prefixes with an existential before a universal are not supported".to_string(),
        )),
    }
}

/// Converts a sentence to an equivalent prenex normal form with an NNF
/// matrix, as a single formula. Fails when the sentence does not fit a
/// two-variable prefix (conjunctions of sentences are normalized through the
/// full pipeline instead, which splits them first).
pub fn to_prenex_nnf(f: &Formula, vocab: &Vocabulary) -> Result<Formula> {
    let in_nnf = nnf(f, true, vocab)?;
    let pf = canonical(prenex_of(&in_nnf, vocab)?);
    let mut out = pf.matrix;
    for (q, v) in pf.prefix.into_iter().rev() {
        out = match q {
            QKind::Forall => Formula::forall(v, out),
            QKind::Exists => Formula::exists(v, out),
        };
    }
    Ok(out)
}

/// Skolemization for weighted counting on a prenex sentence: existential
/// blocks are replaced by clauses over fresh unary predicates with weights
/// (1, -1); the result is universally quantified and has the same weighted
/// count for every domain size.
pub fn skolemize_wfomc(
    f: &Formula,
    vocab: &mut Vocabulary,
    weights: &mut Weights,
) -> Result<Formula> {
    let mut prefix = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::Forall(v, g) => {
                prefix.push((QKind::Forall, *v));
                cur = g;
            }
            Formula::Exists(v, g) => {
                prefix.push((QKind::Exists, *v));
                cur = g;
            }
            _ => break,
        }
    }
    if cur.has_quantifier() {
        return Err(Error::Invalid(
            "skolemization requires a prenex input".to_string(),
        ));
    }
    let pf = Prenex {
        prefix,
        matrix: cur.clone(),
    };
    let mut counter = 1usize;
    let matrix = skolemize_part(pf, vocab, weights, &mut counter)?;
    Ok(Formula::forall(
        Var::X,
        Formula::forall(Var::Y, matrix),
    ))
}
