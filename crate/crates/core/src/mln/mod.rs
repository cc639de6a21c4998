//! Markov Logic Network inference layer: the ring-graph smokers model (a
//! cycle over the ordered domain plus m random shortcut edges), the fully
//! random comparison model, and the smokers-distribution experiment.

use num::traits::Zero;

use crate::algebra::{decimal_string, rational_from_str, Rational};
use crate::engine::distribution_by_cardinality;
use crate::logic::{
    Axioms, BoundExpr, CardinalityConstraint, Comparator, Formula, Var, Vocabulary,
};
use crate::transform::{mln_to_wfomc, MlnInput};
use crate::{Error, Result};

/// An MLN instance of the smokers experiment family.
#[derive(Debug, Clone)]
pub struct MlnModel {
    pub kind: ModelKind,
    pub input: MlnInput,
    pub n: usize,
    pub m: usize,
    pub weight: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ring,
    Random,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ring => "ring",
            ModelKind::Random => "random",
        }
    }
}

fn check_edge_budget(n: usize, m: usize) -> Result<()> {
    let pairs = n * (n - 1) / 2;
    if pairs < n || m > pairs - n {
        return Err(Error::Infeasible(format!(
            "m = {m} extra edges infeasible: a cycle uses {n} of the {pairs} pairs"
        )));
    }
    Ok(())
}

fn smokers_soft_rule(vocab: &mut Vocabulary, w: &Rational) -> Result<(Rational, Formula)> {
    let sm = vocab.declare("Sm", 1)?;
    let e = vocab.lookup("E").expect("edge predicate declared");
    let alpha = Formula::atom1(sm, Var::X)
        .and(Formula::atom2(e, Var::X, Var::Y))
        .implies(Formula::atom1(sm, Var::Y));
    Ok((w.clone(), alpha))
}

/// The ring-graph MLN: hard sentences force a Hamiltonian cycle over the
/// linear order (through the permutation/predecessor encoding), copy it onto
/// the undirected edge relation, and fix |E| = 2n + 2m; one soft rule says
/// friends of smokers smoke.
pub fn build_ring_mln(n: usize, m: usize, w: &Rational) -> Result<MlnModel> {
    if n < 2 {
        return Err(Error::Infeasible("ring model needs n >= 2".to_string()));
    }
    check_edge_budget(n, m)?;
    let mut vocab = Vocabulary::new();
    let leq = vocab.declare("Leq", 2)?;
    let perm = vocab.declare("Perm", 2)?;
    let pred = vocab.declare("Pred", 2)?;
    let e = vocab.declare("E", 2)?;

    let x = Var::X;
    let y = Var::Y;
    let hard = vec![
        // fixed-point-free permutation, its left-to-right edges marked Pred
        Formula::forall(x, Formula::atom2(perm, x, x).not()),
        Formula::forall(
            x,
            Formula::count_exists(Comparator::Eq, 1, y, Formula::atom2(perm, x, y)),
        ),
        Formula::forall(
            y,
            Formula::count_exists(Comparator::Eq, 1, x, Formula::atom2(perm, x, y)),
        ),
        Formula::atom2(pred, x, y).implies(Formula::atom2(perm, x, y)),
        Formula::atom2(pred, x, y).implies(Formula::atom2(leq, x, y)),
        // the cycle is copied onto the undirected edge relation
        Formula::atom2(perm, x, y).implies(Formula::atom2(e, x, y)),
        Formula::atom2(e, x, y).implies(Formula::atom2(e, y, x)),
        // no loops
        Formula::forall(x, Formula::atom2(e, x, x).not()),
    ];
    let constraints = vec![
        CardinalityConstraint {
            pred,
            cmp: Comparator::Eq,
            bound: BoundExpr {
                n_coeff: 1,
                m_coeff: 0,
                constant: -1,
            },
        },
        CardinalityConstraint {
            pred: e,
            cmp: Comparator::Eq,
            bound: BoundExpr {
                n_coeff: 2,
                m_coeff: 2,
                constant: 0,
            },
        },
    ];
    let soft = vec![smokers_soft_rule(&mut vocab, w)?];
    Ok(MlnModel {
        kind: ModelKind::Ring,
        input: MlnInput {
            vocab,
            soft,
            hard,
            constraints,
            axioms: Axioms {
                linear: Some(leq),
                pred: false,
                pred2: false,
            },
            domain_size: n,
            param_m: Some(m as i64),
        },
        n,
        m,
        weight: w.clone(),
    })
}

/// The comparison MLN over a completely random undirected graph with the
/// same number of edges and the same soft rule.
pub fn build_random_mln(n: usize, m: usize, w: &Rational) -> Result<MlnModel> {
    if n < 2 {
        return Err(Error::Infeasible("random model needs n >= 2".to_string()));
    }
    check_edge_budget(n, m)?;
    let mut vocab = Vocabulary::new();
    let e = vocab.declare("E", 2)?;
    let x = Var::X;
    let hard = vec![
        Formula::atom2(e, x, Var::Y).implies(Formula::atom2(e, Var::Y, x)),
        Formula::forall(x, Formula::atom2(e, x, x).not()),
    ];
    let constraints = vec![CardinalityConstraint {
        pred: e,
        cmp: Comparator::Eq,
        bound: BoundExpr {
            n_coeff: 2,
            m_coeff: 2,
            constant: 0,
        },
    }];
    let soft = vec![smokers_soft_rule(&mut vocab, w)?];
    Ok(MlnModel {
        kind: ModelKind::Random,
        input: MlnInput {
            vocab,
            soft,
            hard,
            constraints,
            axioms: Axioms::default(),
            domain_size: n,
            param_m: Some(m as i64),
        },
        n,
        m,
        weight: w.clone(),
    })
}

/// Pr(|Sm| = k) for k = 0..n, exactly.
pub fn smokers_distribution(model: &MlnModel) -> Result<Vec<Rational>> {
    let np = mln_to_wfomc(&model.input)?;
    let sm = np.vocab.lookup("Sm").expect("smoker predicate");
    distribution_by_cardinality(&np, sm)
}

/// A soft-rule weight with the label it was requested under. Irrational
/// presets are rationalized to 20 significant decimal digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSpec {
    pub label: String,
    pub value: Rational,
}

impl WeightSpec {
    /// Accepts `ln2`, `e`, or an exact rational literal like `2` or `7/2`.
    pub fn parse(s: &str) -> Result<WeightSpec> {
        let value = match s {
            "ln2" => rational_from_str("69314718055994530942/100000000000000000000").unwrap(),
            "e" => rational_from_str("27182818284590452354/10000000000000000000").unwrap(),
            other => rational_from_str(other).ok_or_else(|| {
                Error::Invalid(format!(
                    "weight `{other}` is not a rational literal, `ln2` or `e`"
                ))
            })?,
        };
        if value <= Rational::zero() {
            return Err(Error::Invalid(format!(
                "soft weight `{s}` must be positive"
            )));
        }
        Ok(WeightSpec {
            label: s.to_string(),
            value,
        })
    }
}

/// One computed distribution of the experiment grid.
#[derive(Debug, Clone)]
pub struct DistributionRun {
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub weight: WeightSpec,
    pub probs: Vec<Rational>,
}

/// Runs the experiment grid: both models for every (m, w) pair.
pub fn smokers_experiment(
    n: usize,
    ms: &[usize],
    ws: &[WeightSpec],
) -> Result<Vec<DistributionRun>> {
    let mut out = Vec::new();
    for kind in [ModelKind::Ring, ModelKind::Random] {
        for &m in ms {
            for w in ws {
                let model = match kind {
                    ModelKind::Ring => build_ring_mln(n, m, &w.value)?,
                    ModelKind::Random => build_random_mln(n, m, &w.value)?,
                };
                let probs = smokers_distribution(&model)?;
                out.push(DistributionRun {
                    model: kind,
                    n,
                    m,
                    weight: w.clone(),
                    probs,
                });
            }
        }
    }
    Ok(out)
}

/// CSV rendering: model,n,m,w,k,prob_numerator,prob_denominator,prob_decimal.
pub fn runs_to_csv(runs: &[DistributionRun]) -> String {
    let mut out = String::from("model,n,m,w,k,prob_numerator,prob_denominator,prob_decimal\n");
    for run in runs {
        for (k, p) in run.probs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                run.model.name(),
                run.n,
                run.m,
                run.weight.label,
                k,
                p.numer(),
                p.denom(),
                decimal_string(p, 12),
            ));
        }
    }
    out
}

/// JSON mirror of the CSV with exact weight metadata per run.
pub fn runs_to_json(runs: &[DistributionRun]) -> String {
    let mut out = String::from("[\n");
    for (i, run) in runs.iter().enumerate() {
        out.push_str(&format!(
            "  {{\"model\": \"{}\", \"n\": {}, \"m\": {}, \"w\": \"{}\", \"w_exact\": \"{}\", \"rows\": [",
            run.model.name(),
            run.n,
            run.m,
            run.weight.label,
            run.weight.value,
        ));
        for (k, p) in run.probs.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!(
                "{{\"k\": {k}, \"prob_numerator\": \"{}\", \"prob_denominator\": \"{}\", \"prob_decimal\": \"{}\"}}",
                p.numer(),
                p.denom(),
                decimal_string(p, 12),
            ));
        }
        out.push_str("]}");
        out.push_str(if i + 1 < runs.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}
