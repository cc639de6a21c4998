//! The counting core: the incremental dynamic program over partitioning
//! vectors, the closed-form sum as an independent route for the unordered
//! case, the n! multiplication for the linear order axiom, and cardinality
//! enforcement by symbolic-weight coefficient extraction.

mod closed;
mod incremental;

pub use closed::closed_form_wfomc;
pub use incremental::{incremental_tables, incremental_wfomc, CellTable, PruneInfo, TableStats};

use std::sync::Arc;

use num::traits::{One, Zero};

use crate::algebra::{factorial, Rational, RingElem, VarSet, MAX_VARS};
use crate::kernel::{compute_params, enumerate_valid_cells, CellParams, CellSpace, EngineWeights};
use crate::logic::{Comparator, PredId, WeightVal};
use crate::transform::NormalizedProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Incremental,
    ClosedForm,
    Auto,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "incremental" => Ok(Method::Incremental),
            "closed-form" => Ok(Method::ClosedForm),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Invalid(format!(
                "unknown method `{other}`; use incremental, closed-form or auto"
            ))),
        }
    }
}

/// Everything the run produced, with the intermediate factors kept exact so
/// callers can report them.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Final exact result after n!, correction and cardinality enforcement.
    pub value: RingElem,
    /// Plain sum over the final table: the count for one fixed ordering when
    /// a linear order is declared, before any constraint extraction.
    pub dp_sum: RingElem,
    pub correction: Rational,
    pub method_used: &'static str,
    pub cell_count: usize,
    pub stats: TableStats,
}

/// The per-problem symbolic variable universe: one variable per constrained
/// predicate (plus an optional distribution predicate), then the declared
/// symbolic weight names.
pub struct VarPlan {
    pub vars: Arc<VarSet>,
    /// Predicate id -> index of its cardinality variable.
    pub card_var: Vec<Option<usize>>,
    /// Symbolic weight name -> variable index resolves via VarSet.
    pub dist_pred: Option<PredId>,
}

fn build_var_plan(np: &NormalizedProblem, dist: Option<PredId>) -> Result<VarPlan> {
    let n = np.domain_size;
    let mut card_preds: Vec<PredId> = Vec::new();
    for c in &np.constraints {
        if Some(c.pred) == np.linear {
            return Err(Error::OutOfScope(
                "cardinality constraints on the linear order predicate are not supported"
                    .to_string(),
            ));
        }
        if !card_preds.contains(&c.pred) {
            card_preds.push(c.pred);
        }
    }
    if let Some(q) = dist {
        if card_preds.contains(&q) {
            return Err(Error::Invalid(format!(
                "distribution predicate {} already carries a cardinality constraint",
                np.vocab.name(q)
            )));
        }
        if Some(q) == np.linear {
            return Err(Error::Invalid(
                "cannot take a distribution over the order predicate".to_string(),
            ));
        }
        card_preds.push(q);
    }
    card_preds.sort_by(|a, b| np.vocab.name(*a).cmp(np.vocab.name(*b)));

    let mut names = Vec::new();
    let mut caps = Vec::new();
    let mut card_var = vec![None; np.vocab.len()];
    for p in &card_preds {
        let g = np.vocab.ground_atoms(*p, n);
        // monomials above every equality/upper bound are dead weight
        let mut cap = g;
        for c in np.constraints.iter().filter(|c| c.pred == *p) {
            match c.cmp {
                Comparator::Eq | Comparator::Le => cap = cap.min(c.bound),
                Comparator::Ge => {}
            }
        }
        card_var[p.0] = Some(names.len());
        names.push(format!("card({})", np.vocab.name(*p)));
        caps.push(Some(cap.min(u16::MAX as usize) as u16));
    }

    let mut sym_names: Vec<String> = Vec::new();
    for id in np.vocab.ids() {
        let (w, wbar) = np.weights.get(id);
        for v in [w, wbar] {
            if let WeightVal::Sym(s) = v {
                if !sym_names.contains(&s) {
                    sym_names.push(s);
                }
            }
        }
    }
    sym_names.sort();
    for s in sym_names {
        names.push(s);
        caps.push(None);
    }

    if names.len() > MAX_VARS {
        return Err(Error::Infeasible(format!(
            "{} symbolic variables exceed the supported maximum of {MAX_VARS}",
            names.len()
        )));
    }
    Ok(VarPlan {
        vars: VarSet::with_caps(names, caps),
        card_var,
        dist_pred: dist,
    })
}

fn build_engine_weights(np: &NormalizedProblem, plan: &VarPlan) -> EngineWeights {
    let mut pos = Vec::with_capacity(np.vocab.len());
    let mut neg = Vec::with_capacity(np.vocab.len());
    for id in np.vocab.ids() {
        if let Some(var) = plan.card_var[id.0] {
            // constrained predicates run with w := x_P, wbar := 1; the true
            // weights re-enter during coefficient extraction
            pos.push(RingElem::var(&plan.vars, var));
            neg.push(RingElem::one());
            continue;
        }
        let (w, wbar) = np.weights.get(id);
        let to_elem = |v: WeightVal| match v {
            WeightVal::Rat(r) => RingElem::Rat(r),
            WeightVal::Sym(s) => {
                let idx = plan.vars.index_of(&s).expect("symbolic weight variable");
                RingElem::var(&plan.vars, idx)
            }
        };
        pos.push(to_elem(w));
        neg.push(to_elem(wbar));
    }
    EngineWeights {
        pos,
        neg,
        vars: plan.vars.clone(),
    }
}

fn true_weight(np: &NormalizedProblem, plan: &VarPlan, pred: PredId) -> (RingElem, RingElem) {
    let (w, wbar) = np.weights.get(pred);
    let to_elem = |v: WeightVal| match v {
        WeightVal::Rat(r) => RingElem::Rat(r),
        WeightVal::Sym(s) => {
            let idx = plan.vars.index_of(&s).expect("symbolic weight variable");
            RingElem::var(&plan.vars, idx)
        }
    };
    (to_elem(w), to_elem(wbar))
}

/// Admissible degree set of a constrained predicate: the intersection of all
/// its constraints within 0..=G.
fn admissible_degrees(np: &NormalizedProblem, pred: PredId) -> Vec<usize> {
    let g = np.vocab.ground_atoms(pred, np.domain_size);
    (0..=g)
        .filter(|d| {
            np.constraints
                .iter()
                .filter(|c| c.pred == pred)
                .all(|c| match c.cmp {
                    Comparator::Le => *d <= c.bound,
                    Comparator::Eq => *d == c.bound,
                    Comparator::Ge => *d >= c.bound,
                })
        })
        .collect()
}

/// Folds the cardinality constraints into a symbolic result: for each
/// constrained predicate, keep the admissible-degree coefficients and
/// re-weight them by the true weights, w^d * wbar^(G-d).
pub fn enforce_cardinality(
    value: RingElem,
    np: &NormalizedProblem,
    plan: &VarPlan,
    skip: Option<PredId>,
) -> RingElem {
    let mut out = value;
    let mut preds: Vec<PredId> = np
        .constraints
        .iter()
        .map(|c| c.pred)
        .filter(|p| Some(*p) != skip)
        .collect();
    preds.sort();
    preds.dedup();
    for pred in preds {
        let var = plan.card_var[pred.0].expect("constrained predicate has a variable");
        let g = np.vocab.ground_atoms(pred, np.domain_size);
        let (w_true, wbar_true) = true_weight(np, plan, pred);
        let mut acc = RingElem::zero();
        for d in admissible_degrees(np, pred) {
            let coeff = out.coeff_of(var, d as u16);
            if coeff.is_zero() {
                continue;
            }
            let term = &(&coeff * &w_true.pow(d as u64)) * &wbar_true.pow((g - d) as u64);
            acc += &term;
        }
        out = acc.normalized();
    }
    out
}

fn prune_info(np: &NormalizedProblem, plan: &VarPlan) -> PruneInfo {
    let mut mins = vec![0usize; plan.vars.len()];
    let mut arity = vec![1u8; plan.vars.len()];
    for (pid, var) in plan.card_var.iter().enumerate() {
        if let Some(v) = *var {
            arity[v] = np.vocab.arity(PredId(pid));
            for c in np.constraints.iter().filter(|c| c.pred.0 == pid) {
                match c.cmp {
                    Comparator::Eq | Comparator::Ge => mins[v] = mins[v].max(c.bound),
                    Comparator::Le => {}
                }
            }
        }
    }
    PruneInfo {
        min_required: mins,
        arity,
        n: np.domain_size,
    }
}

/// Solves a normalized problem end to end: builds cells and parameters
/// (ordered iff a linear order is declared), runs the counting core,
/// multiplies by n! for the linear order, applies the correction factor and
/// enforces every cardinality constraint exactly.
pub fn solve(np: &NormalizedProblem, method: Method) -> Result<Solution> {
    solve_with(np, method, None)
}

fn solve_with(np: &NormalizedProblem, method: Method, dist: Option<PredId>) -> Result<Solution> {
    let n = np.domain_size;
    if n == 0 {
        // empty world satisfies every universal sentence; constraints require bound 0
        let ok = np.constraints.iter().all(|c| match c.cmp {
            Comparator::Le => true,
            Comparator::Eq | Comparator::Ge => c.bound == 0,
        });
        let v = if ok { RingElem::one() } else { RingElem::zero() };
        return Ok(Solution {
            value: v.clone(),
            dp_sum: v,
            correction: Rational::one(),
            method_used: "degenerate",
            cell_count: 0,
            stats: TableStats::default(),
        });
    }

    let plan = build_var_plan(np, dist)?;
    let weights = build_engine_weights(np, &plan);
    let space = enumerate_valid_cells(&np.matrix, &np.vocab, np.linear)?;
    let params = compute_params(&np.matrix, &np.vocab, &space, &weights, np.linear);

    let resolved = match method {
        Method::Auto => {
            if np.linear.is_some() {
                Method::Incremental
            } else {
                Method::ClosedForm
            }
        }
        m => m,
    };

    let (dp_sum, stats, used) = match resolved {
        Method::Incremental => {
            let prune = prune_info(np, &plan);
            let (sum, stats) = incremental_wfomc(&params, n, Some(&prune));
            (sum, stats, "incremental")
        }
        Method::ClosedForm => {
            if params.ordered {
                return Err(Error::OutOfScope(
                    "the closed form applies only without the linear order axiom".to_string(),
                ));
            }
            let sum = closed_form_wfomc(&params, n);
            (sum, TableStats::default(), "closed-form")
        }
        Method::Auto => unreachable!(),
    };

    let mut value = dp_sum.clone();
    if np.linear.is_some() {
        value = &value * &RingElem::Rat(Rational::from_integer(factorial(n)));
    }
    value = &value * &RingElem::Rat(np.correction.clone());
    value = enforce_cardinality(value, np, &plan, dist);

    Ok(Solution {
        value: value.normalized(),
        dp_sum,
        correction: np.correction.clone(),
        method_used: used,
        cell_count: space.len(),
        stats,
    })
}

/// Applies the pipeline tail to a table sum: n! for the linear order, the
/// correction factor, then cardinality enforcement.
pub fn finalize_sum(np: &NormalizedProblem, dp_sum: RingElem) -> Result<RingElem> {
    let plan = build_var_plan(np, None)?;
    let mut value = dp_sum;
    if np.linear.is_some() {
        value = &value * &RingElem::Rat(Rational::from_integer(factorial(np.domain_size)));
    }
    value = &value * &RingElem::Rat(np.correction.clone());
    Ok(enforce_cardinality(value, np, &plan, None).normalized())
}

/// Cell space and parameters for diagnostics (`--dump-cells`).
pub fn cells_dump(np: &NormalizedProblem) -> Result<(CellSpace, CellParams)> {
    let plan = build_var_plan(np, None)?;
    let weights = build_engine_weights(np, &plan);
    let space = enumerate_valid_cells(&np.matrix, &np.vocab, np.linear)?;
    let params = compute_params(&np.matrix, &np.vocab, &space, &weights, np.linear);
    Ok((space, params))
}

/// Computes Pr(|Q| = k) for every k in one run by giving Q a symbolic weight
/// and normalizing the extracted coefficients; the result sums to exactly 1.
pub fn distribution_by_cardinality(
    np: &NormalizedProblem,
    q: PredId,
) -> Result<Vec<Rational>> {
    let g = np.vocab.ground_atoms(q, np.domain_size);
    let sol = solve_with(np, Method::Auto, Some(q))?;
    let plan = build_var_plan(np, Some(q))?;
    let var = plan.card_var[q.0].expect("distribution variable");
    let (w_true, wbar_true) = true_weight(np, &plan, q);
    let (w_true, wbar_true) = match (w_true.as_rational(), wbar_true.as_rational()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Invalid(
                "distribution extraction needs rational weights on the query predicate"
                    .to_string(),
            ))
        }
    };

    let mut numerators = Vec::with_capacity(g + 1);
    for d in 0..=g {
        let coeff = sol.value.coeff_of(var, d as u16);
        let c = coeff.as_rational().ok_or_else(|| {
            Error::Invalid(
                "distribution extraction left symbolic weights unresolved".to_string(),
            )
        })?;
        let mut term = c;
        for _ in 0..d {
            term *= &w_true;
        }
        for _ in 0..(g - d) {
            term *= &wbar_true;
        }
        numerators.push(term);
    }
    let z: Rational = numerators.iter().fold(Rational::zero(), |a, b| a + b);
    if z.is_zero() {
        return Err(Error::Unsatisfiable(
            "the theory has weighted count zero".to_string(),
        ));
    }
    Ok(numerators.into_iter().map(|v| v / &z).collect())
}

/// End-to-end count of a parsed problem.
pub fn wfomc(problem: &crate::logic::Problem, method: Method) -> Result<Solution> {
    let np = crate::transform::normalize(problem)?;
    solve(&np, method)
}
