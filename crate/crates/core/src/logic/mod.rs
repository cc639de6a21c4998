//! Abstract syntax, parser and well-formedness checks for the input language:
//! two-variable first-order logic with counting quantifiers, cardinality
//! constraints, axiom declarations and predicate weights.

mod ast;
mod parser;
mod print;

pub use ast::{
    Args, Axioms, BoundExpr, CardinalityConstraint, Comparator, Formula, PredDecl, PredId,
    Problem, Var, Vocabulary, Weights, WeightVal,
};
pub use parser::{
    canonicalize, check_two_variable, parse_formula, parse_problem, parse_raw_formula, RawFormula,
    RawQuantKind, TwoVarViolation,
};
pub use print::{format_formula, format_problem};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::Error;

    #[test]
    fn parses_linear_order_example() {
        let p = parse_problem(
            "forall x forall y. (T(x) & Leq(x,y)) -> T(y); axiom linear(Leq); n=3",
        )
        .unwrap();
        assert_eq!(p.sentences.len(), 1);
        assert_eq!(p.domain_size, 3);
        let lin = p.axioms.linear.expect("linear axiom");
        assert_eq!(p.vocab.name(lin), "Leq");
        assert_eq!(p.vocab.arity(lin), 2);
    }

    #[test]
    fn parses_minimal_sentence() {
        let p = parse_problem("forall x. P(x); n=1").unwrap();
        assert_eq!(p.sentences.len(), 1);
        assert_eq!(p.vocab.len(), 1);
        assert_eq!(p.vocab.arity(PredId(0)), 1);
    }

    #[test]
    fn rejects_third_variable() {
        let err = parse_problem("forall x forall y forall z. R(x,y,z); n=2").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("third variable"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_arity_three_atom() {
        let err = parse_problem("forall x forall y. R(x,y,x); n=2").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("arity"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_arity_zero_predicate() {
        let err = parse_problem("predicate P/0; n=1").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("arity"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_pred_axiom_without_linear() {
        let err = parse_problem("axiom pred(Leq); n=3").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("requires axiom linear"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_weight_on_unknown_predicate() {
        let err = parse_problem("weight Q = 2, 1; n=1").unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("unknown predicate"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn two_variable_check_accepts_and_reports() {
        let ok = parse_raw_formula("forall x forall y. Fr(x,y)").unwrap();
        assert!(check_two_variable(&ok).is_ok());

        let counting = parse_raw_formula("forall x exists[=1] y. Perm(x,y)").unwrap();
        assert!(check_two_variable(&counting).is_ok());

        let bad =
            parse_raw_formula("forall x forall y forall z. (R(x,y) & R(y,z)) -> R(x,z)").unwrap();
        let v = check_two_variable(&bad).unwrap_err();
        assert_eq!(v.var, "z");
    }

    #[test]
    fn bound_variables_are_renamed_canonically() {
        let mut vocab = Vocabulary::new();
        let f = parse_formula("forall u exists v. R(u,v)", &mut vocab).unwrap();
        assert_eq!(
            f,
            Formula::forall(
                Var::X,
                Formula::exists(Var::Y, Formula::atom2(PredId(0), Var::X, Var::Y))
            )
        );
    }

    #[test]
    fn variable_reuse_within_scope() {
        // inner quantifier shadows x; both fit in two canonical names
        let mut vocab = Vocabulary::new();
        let f = parse_formula("forall x. (P(x) & exists x. Q(x))", &mut vocab).unwrap();
        match f {
            Formula::Forall(Var::X, body) => match *body {
                Formula::And(_, rhs) => match *rhs {
                    Formula::Exists(v, _) => assert_eq!(v, Var::Y),
                    other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weight_defaulting_and_parsing() {
        let p = parse_problem("forall x. P(x) | Q(x)\nweight P = 3/2, -1\nn = 2").unwrap();
        let pid = p.vocab.lookup("P").unwrap();
        let qid = p.vocab.lookup("Q").unwrap();
        assert_eq!(
            p.weights.get(pid),
            (WeightVal::Rat(rat(3, 2)), WeightVal::Rat(rat(-1, 1)))
        );
        assert_eq!(p.weights.get(qid), (WeightVal::one(), WeightVal::one()));
    }

    #[test]
    fn symbolic_weights_named_after_predicate() {
        let p = parse_problem("forall x. P(x)\nweight P = symbolic, 1\nn = 2").unwrap();
        let pid = p.vocab.lookup("P").unwrap();
        assert_eq!(
            p.weights.get(pid).0,
            WeightVal::Sym("w_P".to_string())
        );
    }

    #[test]
    fn constraint_bounds() {
        let p = parse_problem(
            "predicate E/2\nconstraint |E| = 2n+2m\nparam m = 3\nn = 5",
        )
        .unwrap();
        assert_eq!(p.constraints.len(), 1);
        assert_eq!(p.constraints[0].bound.eval(5, Some(3)).unwrap(), 16);

        let err = parse_problem("predicate P/1\nconstraint |P| = n-4\nn = 2").unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn rejects_nonunit_weight_on_order_predicate() {
        let err =
            parse_problem("axiom linear(Leq)\nweight Leq = 2, 1\nn = 2").unwrap_err();
        match err {
            Error::Invalid(msg) => assert!(msg.contains("weights (1, 1)"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn round_trip_canonical_text() {
        let src = "predicate Sm/1\nsentence forall x forall y. (Sm(x) & Fr(x,y)) -> Sm(y)\nsentence forall x exists y. Fr(x,y)\nweight Fr = 2, 1/3\nconstraint |Fr| >= 1\nn = 4\n";
        let p1 = parse_problem(src).unwrap();
        let canon = format_problem(&p1);
        let p2 = parse_problem(&canon).unwrap();
        assert_eq!(p1, p2);
        // printing is the identity on canonicalized text
        assert_eq!(format_problem(&p2), canon);
    }

    #[test]
    fn equality_atoms_parse() {
        let mut vocab = Vocabulary::new();
        let f = parse_formula("forall x forall y. x = y -> Fr(x,y)", &mut vocab).unwrap();
        let printed = format_formula(&f, &vocab);
        assert_eq!(printed, "forall x. forall y. x = y -> Fr(x,y)");
    }
}
