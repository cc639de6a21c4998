//! Normalization of problems to universally quantified form: prenexing,
//! skolemization that preserves the weighted count, reduction of the
//! supported exactly-one counting pattern to a cardinality constraint,
//! expansion of the predecessor axiom theories, and the MLN reduction.

mod axioms;
mod mln_reduce;
mod prenex;

pub use axioms::AXIOM_PREDICATES;
pub use mln_reduce::{mln_to_wfomc, MlnInput};
pub use prenex::{skolemize_wfomc, to_prenex_nnf};

use num::traits::One;

use crate::algebra::Rational;
use crate::logic::{
    BoundExpr, CardinalityConstraint, Comparator, Formula, PredId, Problem, Var, Vocabulary,
    Weights, WeightVal,
};
use crate::{Error, Result};

/// A cardinality constraint with its bound evaluated at the problem's n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedConstraint {
    pub pred: PredId,
    pub cmp: Comparator,
    pub bound: usize,
}

/// A problem reduced to a single quantifier-free matrix under an implicit
/// universal closure, plus resolved constraints and engine flags.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    pub vocab: Vocabulary,
    /// Quantifier-free over the canonical variables; implicitly forall x, y.
    pub matrix: Formula,
    pub constraints: Vec<ResolvedConstraint>,
    pub linear: Option<PredId>,
    pub weights: Weights,
    /// Exact multiplier applied to the final count (1, or 1/2 after the
    /// predecessor-of-predecessor expansion's color symmetry).
    pub correction: Rational,
    pub domain_size: usize,
}

impl NormalizedProblem {
    /// Re-packages the normalized matrix as an ordinary problem so the
    /// brute-force oracle can count it independently.
    pub fn to_problem(&self) -> Problem {
        Problem {
            vocab: self.vocab.clone(),
            sentences: vec![Formula::forall(
                Var::X,
                Formula::forall(Var::Y, self.matrix.clone()),
            )],
            constraints: self
                .constraints
                .iter()
                .map(|c| CardinalityConstraint {
                    pred: c.pred,
                    cmp: c.cmp,
                    bound: BoundExpr::constant(c.bound as i64),
                })
                .collect(),
            axioms: crate::logic::Axioms {
                linear: self.linear,
                pred: false,
                pred2: false,
            },
            weights: self.weights.clone(),
            domain_size: self.domain_size,
            param_m: None,
        }
    }
}

/// Splits a sentence into independently quantifiable conjuncts:
/// top-level conjunctions, and universal quantifiers distributed over them.
pub(crate) fn split_conjuncts_nnf(f: Formula) -> Vec<Formula> {
    split_sentence(f)
}

fn split_sentence(f: Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = split_sentence(*a);
            out.extend(split_sentence(*b));
            out
        }
        Formula::Forall(v, body) => split_sentence(*body)
            .into_iter()
            .map(|part| {
                if part.free_vars().contains(&v) {
                    Formula::forall(v, part)
                } else {
                    part // vacuous on a nonempty domain
                }
            })
            .collect(),
        other => vec![other],
    }
}

/// Replaces the supported exactly-one counting pattern
/// `forall v1 exists[=1] v2. P(v1,v2)` by a plain existential plus the
/// cardinality constraint `|P| = n`. Any other counting quantifier is out of
/// scope and reported with the offending subformula.
pub fn reduce_exactly_one(
    f: &Formula,
    vocab: &Vocabulary,
) -> Result<(Formula, Vec<CardinalityConstraint>)> {
    if let Formula::Forall(v1, body) = f {
        if let Formula::CountExists(Comparator::Eq, 1, v2, inner) = body.as_ref() {
            if let Formula::Atom { pred, args } = inner.as_ref() {
                if let crate::logic::Args::Two(a, b) = args {
                    let have = [*a, *b];
                    if v1 != v2 && have.contains(v1) && have.contains(v2) && a != b {
                        let reduced = Formula::forall(
                            *v1,
                            Formula::exists(*v2, inner.as_ref().clone()),
                        );
                        let constraint = CardinalityConstraint {
                            pred: *pred,
                            cmp: Comparator::Eq,
                            bound: BoundExpr {
                                n_coeff: 1,
                                m_coeff: 0,
                                constant: 0,
                            },
                        };
                        return Ok((reduced, vec![constraint]));
                    }
                }
            }
        }
    }
    if let Some(sub) = find_counting(f) {
        return Err(Error::OutOfScope(format!(
            "unsupported counting quantifier in `{}`; only the paired pattern \
             `forall v exists[=1] u. P(v,u)` is reducible",
            crate::logic::format_formula(sub, vocab)
        )));
    }
    Ok((f.clone(), Vec::new()))
}

fn find_counting(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::CountExists(..) => Some(f),
        Formula::Atom { .. } | Formula::Equality(..) => None,
        Formula::Not(g) => find_counting(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            find_counting(a).or_else(|| find_counting(b))
        }
        Formula::Forall(_, g) | Formula::Exists(_, g) => find_counting(g),
    }
}

/// Expands declared axiom theories and normalizes the whole problem to a
/// quantifier-free matrix: split, reduce counting quantifiers, prenex,
/// skolemize, conjoin. The returned problem carries every Skolem predicate
/// with weights (1, -1) and the correction factor.
pub fn normalize(p: &Problem) -> Result<NormalizedProblem> {
    let mut vocab = p.vocab.clone();
    let mut weights = p.weights.clone();
    let mut sentences = p.sentences.clone();
    let mut constraints = p.constraints.clone();
    let mut correction = Rational::one();

    axioms::expand_into(
        p,
        &mut vocab,
        &mut sentences,
        &mut constraints,
        &mut correction,
    )?;

    // surface split so counting patterns sit at sentence level
    let mut parts = Vec::new();
    for s in sentences {
        parts.extend(split_sentence(s));
    }

    let mut reduced = Vec::new();
    for part in parts {
        let (f, extra) = reduce_exactly_one(&part, &vocab)?;
        for c in extra {
            if !constraints.contains(&c) {
                constraints.push(c);
            }
        }
        reduced.push(f);
    }

    let mut matrix_parts = Vec::new();
    let mut skolem_counter = 1usize;
    for f in reduced {
        let pf = prenex::to_prenex_parts(&f, &vocab)?;
        for part in pf {
            let m = prenex::skolemize_part(
                part,
                &mut vocab,
                &mut weights,
                &mut skolem_counter,
            )?;
            matrix_parts.push(m);
        }
    }

    let matrix = if matrix_parts.is_empty() {
        // empty theory: a tautology over the built-in equality
        Formula::Equality(Var::X, Var::X)
    } else {
        Formula::conjoin(matrix_parts)
    };

    let resolved = constraints
        .iter()
        .map(|c| {
            Ok(ResolvedConstraint {
                pred: c.pred,
                cmp: c.cmp,
                bound: c.bound.eval(p.domain_size, p.param_m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(NormalizedProblem {
        vocab,
        matrix,
        constraints: resolved,
        linear: p.axioms.linear,
        weights,
        correction,
        domain_size: p.domain_size,
    })
}

/// Renders the normalized problem for `--dump-normalized`.
pub fn describe(np: &NormalizedProblem) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "matrix (implicitly forall x forall y):\n  {}\n",
        crate::logic::format_formula(&np.matrix, &np.vocab)
    ));
    if let Some(lin) = np.linear {
        out.push_str(&format!("linear order on {}\n", np.vocab.name(lin)));
    }
    for c in &np.constraints {
        out.push_str(&format!(
            "constraint |{}| {} {}\n",
            np.vocab.name(c.pred),
            c.cmp,
            c.bound
        ));
    }
    for id in np.vocab.ids() {
        if !np.weights.is_default(id) {
            let (w, wbar) = np.weights.get(id);
            out.push_str(&format!(
                "weight {} = {}, {}\n",
                np.vocab.name(id),
                w,
                wbar
            ));
        }
    }
    out.push_str(&format!("correction = {}\n", np.correction));
    out.push_str(&format!("n = {}\n", np.domain_size));
    out
}

pub(crate) fn set_skolem_weights(weights: &mut Weights, id: PredId) {
    weights.set(
        id,
        WeightVal::Rat(Rational::one()),
        WeightVal::Rat(-Rational::one()),
    );
}
