use num::traits::Zero;

use super::{normalize, NormalizedProblem};
use crate::algebra::Rational;
use crate::logic::{
    Axioms, CardinalityConstraint, Formula, Problem, Var, Vocabulary, WeightVal, Weights,
};
use crate::{Error, Result};

/// A Markov Logic Network prepared for the WFOMC reduction. Soft rule
/// weights are the multiplicative weights w(xi) = exp(w_i), given exactly.
#[derive(Debug, Clone)]
pub struct MlnInput {
    pub vocab: Vocabulary,
    /// (multiplicative weight, quantifier-free formula)
    pub soft: Vec<(Rational, Formula)>,
    /// Hard sentences (conjoined directly; closed under universal quantifiers).
    pub hard: Vec<Formula>,
    pub constraints: Vec<CardinalityConstraint>,
    pub axioms: Axioms,
    pub domain_size: usize,
    pub param_m: Option<i64>,
}

/// Reduces an MLN to a weighted counting problem: each soft rule (w, a)
/// becomes a fresh predicate xi with `forall vars: xi(vars) <-> a(vars)`,
/// w(xi) = w and wbar(xi) = 1; hard rules are conjoined as sentences. The
/// MLN distribution then satisfies Pr(q) = WFOMC(G and q) / WFOMC(G).
pub fn mln_to_wfomc(mln: &MlnInput) -> Result<NormalizedProblem> {
    let mut vocab = mln.vocab.clone();
    let mut weights = Weights::default();
    let mut sentences = Vec::new();

    let close = |f: Formula| {
        let mut out = f;
        for v in [Var::Y, Var::X] {
            if out.free_vars().contains(&v) {
                out = Formula::forall(v, out);
            }
        }
        out
    };

    for f in &mln.hard {
        sentences.push(close(f.clone()));
    }

    let mut xi_counter = 1usize;
    for (w, alpha) in &mln.soft {
        if alpha.has_quantifier() {
            return Err(Error::Invalid(
                "soft MLN formulas must be quantifier-free".to_string(),
            ));
        }
        if w <= &Rational::zero() {
            return Err(Error::Invalid(
                "soft MLN weights are multiplicative and must be positive".to_string(),
            ));
        }
        let free = alpha.free_vars();
        let xi = loop {
            let name = format!("Xi{xi_counter}");
            xi_counter += 1;
            if vocab.lookup(&name).is_none() {
                break vocab
                    .declare(&name, free.len().max(1) as u8)
                    .expect("arity 1 or 2");
            }
        };
        let head = match free[..] {
            [v] => Formula::atom1(xi, v),
            [a, b] => {
                // canonical argument order (x, y)
                let _ = (a, b);
                Formula::atom2(xi, Var::X, Var::Y)
            }
            _ => {
                return Err(Error::Invalid(
                    "soft MLN formulas must mention one or two variables".to_string(),
                ))
            }
        };
        weights.set(xi, WeightVal::Rat(w.clone()), WeightVal::one());
        sentences.push(close(head.iff(alpha.clone())));
    }

    let problem = Problem {
        vocab,
        sentences,
        constraints: mln.constraints.clone(),
        axioms: mln.axioms.clone(),
        weights,
        domain_size: mln.domain_size,
        param_m: mln.param_m,
    };
    normalize(&problem)
}
