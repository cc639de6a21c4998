use crate::algebra::{rat, Rational};
use crate::logic::{
    BoundExpr, CardinalityConstraint, Comparator, Formula, Problem, Var, Vocabulary,
};
use crate::{Error, Result};

/// Predicate names reserved by the predecessor axiom expansions.
pub const AXIOM_PREDICATES: &[&str] = &["Perm", "Pred", "Perm2", "Inv", "Red", "Blue", "Pred2"];

/// Conjoins the predecessor axiom theories onto the sentence list.
///
/// The `pred` axiom adds the permutation encoding of the immediate
/// predecessor (a fixed-point-free bijection whose left-to-right edges are
/// exactly the n-1 predecessor pairs). The `pred2` axiom additionally adds
/// the two-cycle permutation with the red/blue coloring that forces exactly
/// two cycles; the two colorings of each model are compensated by a global
/// correction factor of 1/2.
pub(crate) fn expand_into(
    p: &Problem,
    vocab: &mut Vocabulary,
    sentences: &mut Vec<Formula>,
    constraints: &mut Vec<CardinalityConstraint>,
    correction: &mut Rational,
) -> Result<()> {
    if !p.axioms.pred && !p.axioms.pred2 {
        return Ok(());
    }
    let lin = p
        .axioms
        .linear
        .expect("parser enforces linear with predecessor axioms");
    if p.axioms.pred2 && p.domain_size < 4 {
        return Err(Error::Infeasible(format!(
            "the pred2 axiom needs a domain of size at least 4 (n = {})",
            p.domain_size
        )));
    }
    if p.domain_size < 2 {
        return Err(Error::Infeasible(format!(
            "the pred axiom needs a domain of size at least 2 (n = {})",
            p.domain_size
        )));
    }

    let declare = |vocab: &mut Vocabulary, name: &str, arity: u8| -> Result<_> {
        if vocab.lookup(name).is_some() {
            return Err(Error::Invalid(format!(
                "predicate name {name} is reserved by the predecessor axioms"
            )));
        }
        vocab.declare(name, arity)
    };

    let perm = declare(vocab, "Perm", 2)?;
    let pred = declare(vocab, "Pred", 2)?;

    let exactly_one_rows = |p: crate::logic::PredId| {
        Formula::forall(
            Var::X,
            Formula::count_exists(
                Comparator::Eq,
                1,
                Var::Y,
                Formula::atom2(p, Var::X, Var::Y),
            ),
        )
    };
    let exactly_one_cols = |p: crate::logic::PredId| {
        Formula::forall(
            Var::Y,
            Formula::count_exists(
                Comparator::Eq,
                1,
                Var::X,
                Formula::atom2(p, Var::X, Var::Y),
            ),
        )
    };
    let forall_xy = |f: Formula| Formula::forall(Var::X, Formula::forall(Var::Y, f));

    // fixed-point-free permutation with its left-to-right edges marked Pred
    sentences.push(Formula::forall(
        Var::X,
        Formula::atom2(perm, Var::X, Var::X).not(),
    ));
    sentences.push(exactly_one_rows(perm));
    sentences.push(exactly_one_cols(perm));
    sentences.push(forall_xy(
        Formula::atom2(pred, Var::X, Var::Y).implies(Formula::atom2(perm, Var::X, Var::Y)),
    ));
    sentences.push(forall_xy(
        Formula::atom2(pred, Var::X, Var::Y).implies(Formula::atom2(lin, Var::X, Var::Y)),
    ));
    constraints.push(CardinalityConstraint {
        pred,
        cmp: Comparator::Eq,
        bound: BoundExpr {
            n_coeff: 1,
            m_coeff: 0,
            constant: -1,
        },
    });

    if p.axioms.pred2 {
        let perm2 = declare(vocab, "Perm2", 2)?;
        let inv = declare(vocab, "Inv", 2)?;
        let red = declare(vocab, "Red", 1)?;
        let blue = declare(vocab, "Blue", 1)?;
        let pred2 = declare(vocab, "Pred2", 2)?;

        sentences.push(Formula::forall(
            Var::X,
            Formula::atom2(perm2, Var::X, Var::X).not(),
        ));
        sentences.push(exactly_one_rows(perm2));
        sentences.push(exactly_one_cols(perm2));
        // Inv marks the permutation edges that run right to left
        sentences.push(forall_xy(Formula::atom2(inv, Var::X, Var::Y).iff(
            Formula::atom2(lin, Var::Y, Var::X).and(Formula::atom2(perm2, Var::X, Var::Y)),
        )));
        constraints.push(CardinalityConstraint {
            pred: inv,
            cmp: Comparator::Eq,
            bound: BoundExpr::constant(2),
        });
        // two-coloring alternating along Pred, constant along Perm2
        sentences.push(Formula::forall(
            Var::X,
            Formula::atom1(red, Var::X).or(Formula::atom1(blue, Var::X)),
        ));
        sentences.push(Formula::forall(
            Var::X,
            Formula::atom1(red, Var::X).not().or(Formula::atom1(blue, Var::X).not()),
        ));
        let color_step = |a: crate::logic::PredId,
                          edge: crate::logic::PredId,
                          b: crate::logic::PredId| {
            forall_xy(
                Formula::atom1(a, Var::X)
                    .and(Formula::atom2(edge, Var::X, Var::Y))
                    .implies(Formula::atom1(b, Var::Y)),
            )
        };
        sentences.push(color_step(red, pred, blue));
        sentences.push(color_step(blue, pred, red));
        sentences.push(color_step(red, perm2, red));
        sentences.push(color_step(blue, perm2, blue));
        sentences.push(forall_xy(
            Formula::atom2(pred2, Var::X, Var::Y).implies(Formula::atom2(perm2, Var::X, Var::Y)),
        ));
        sentences.push(forall_xy(
            Formula::atom2(pred2, Var::X, Var::Y).implies(Formula::atom2(lin, Var::X, Var::Y)),
        ));
        constraints.push(CardinalityConstraint {
            pred: pred2,
            cmp: Comparator::Eq,
            bound: BoundExpr {
                n_coeff: 1,
                m_coeff: 0,
                constant: -2,
            },
        });

        *correction *= rat(1, 2);
    }

    Ok(())
}
