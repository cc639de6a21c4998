//! Independent brute-force ground model counters used as correctness oracles
//! for the transformation pipeline and the counting engine. Enumeration is
//! exhaustive over the Herbrand base with constraint-driven pruning; counting
//! quantifiers are checked natively (no reliance on any reduction).

use std::collections::BTreeMap;

use num::traits::{One, Zero};

use crate::algebra::Rational;
use crate::logic::{Args, Comparator, Formula, PredId, Problem, Var, WeightVal};
use crate::{Error, Result};

/// Hard cap on the Herbrand base size for exhaustive enumeration.
pub const ATOM_CAP: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct OAtom {
    pred: PredId,
    a: usize,
    b: Option<usize>,
}

#[derive(Debug, Clone)]
enum GExpr {
    True,
    False,
    Atom(usize),
    Not(Box<GExpr>),
    And(Vec<GExpr>),
    Or(Vec<GExpr>),
    Count {
        cmp: Comparator,
        k: u32,
        children: Vec<GExpr>,
    },
}

impl GExpr {
    fn and(parts: Vec<GExpr>) -> GExpr {
        if parts.iter().any(|p| matches!(p, GExpr::False)) {
            return GExpr::False;
        }
        let parts: Vec<GExpr> = parts
            .into_iter()
            .filter(|p| !matches!(p, GExpr::True))
            .collect();
        match parts.len() {
            0 => GExpr::True,
            1 => parts.into_iter().next().unwrap(),
            _ => GExpr::And(parts),
        }
    }

    fn or(parts: Vec<GExpr>) -> GExpr {
        if parts.iter().any(|p| matches!(p, GExpr::True)) {
            return GExpr::True;
        }
        let parts: Vec<GExpr> = parts
            .into_iter()
            .filter(|p| !matches!(p, GExpr::False))
            .collect();
        match parts.len() {
            0 => GExpr::False,
            1 => parts.into_iter().next().unwrap(),
            _ => GExpr::Or(parts),
        }
    }

    fn negate(self) -> GExpr {
        match self {
            GExpr::True => GExpr::False,
            GExpr::False => GExpr::True,
            GExpr::Not(g) => *g,
            g => GExpr::Not(Box::new(g)),
        }
    }

    /// Three-valued evaluation under a partial assignment.
    fn eval3(&self, assign: &[Option<bool>]) -> Option<bool> {
        match self {
            GExpr::True => Some(true),
            GExpr::False => Some(false),
            GExpr::Atom(i) => assign[*i],
            GExpr::Not(g) => g.eval3(assign).map(|b| !b),
            GExpr::And(parts) => {
                let mut all_true = true;
                for p in parts {
                    match p.eval3(assign) {
                        Some(false) => return Some(false),
                        Some(true) => {}
                        None => all_true = false,
                    }
                }
                if all_true {
                    Some(true)
                } else {
                    None
                }
            }
            GExpr::Or(parts) => {
                let mut all_false = true;
                for p in parts {
                    match p.eval3(assign) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => all_false = false,
                    }
                }
                if all_false {
                    Some(false)
                } else {
                    None
                }
            }
            GExpr::Count { cmp, k, children } => {
                let mut t = 0u32;
                let mut u = 0u32;
                for c in children {
                    match c.eval3(assign) {
                        Some(true) => t += 1,
                        Some(false) => {}
                        None => u += 1,
                    }
                }
                let k = *k;
                match cmp {
                    Comparator::Le => {
                        if t > k {
                            Some(false)
                        } else if t + u <= k {
                            Some(true)
                        } else {
                            None
                        }
                    }
                    Comparator::Ge => {
                        if t >= k {
                            Some(true)
                        } else if t + u < k {
                            Some(false)
                        } else {
                            None
                        }
                    }
                    Comparator::Eq => {
                        if t > k || t + u < k {
                            Some(false)
                        } else if u == 0 {
                            Some(t == k)
                        } else {
                            None
                        }
                    }
                }
            }
        }
    }

    fn atoms(&self, out: &mut Vec<usize>) {
        match self {
            GExpr::True | GExpr::False => {}
            GExpr::Atom(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            GExpr::Not(g) => g.atoms(out),
            GExpr::And(ps) | GExpr::Or(ps) => {
                for p in ps {
                    p.atoms(out);
                }
            }
            GExpr::Count { children, .. } => {
                for c in children {
                    c.atoms(out);
                }
            }
        }
    }
}

struct Grounder<'a> {
    problem: &'a Problem,
    atoms: Vec<OAtom>,
}

impl<'a> Grounder<'a> {
    fn atom_index(&self, pred: PredId, a: usize, b: Option<usize>) -> usize {
        self.atoms
            .iter()
            .position(|t| t.pred == pred && t.a == a && t.b == b)
            .expect("ground atom in Herbrand base")
    }

    fn ground(&self, f: &Formula, ex: usize, ey: usize) -> GExpr {
        let n = self.problem.domain_size;
        let elem = |v: Var| match v {
            Var::X => ex,
            Var::Y => ey,
        };
        match f {
            Formula::Atom { pred, args } => {
                let idx = match args {
                    Args::One(v) => self.atom_index(*pred, elem(*v), None),
                    Args::Two(u, v) => self.atom_index(*pred, elem(*u), Some(elem(*v))),
                };
                GExpr::Atom(idx)
            }
            Formula::Equality(u, v) => {
                if elem(*u) == elem(*v) {
                    GExpr::True
                } else {
                    GExpr::False
                }
            }
            Formula::Not(g) => self.ground(g, ex, ey).negate(),
            Formula::And(a, b) => GExpr::and(vec![self.ground(a, ex, ey), self.ground(b, ex, ey)]),
            Formula::Or(a, b) => GExpr::or(vec![self.ground(a, ex, ey), self.ground(b, ex, ey)]),
            Formula::Implies(a, b) => GExpr::or(vec![
                self.ground(a, ex, ey).negate(),
                self.ground(b, ex, ey),
            ]),
            Formula::Iff(a, b) => {
                let ga = self.ground(a, ex, ey);
                let gb = self.ground(b, ex, ey);
                GExpr::or(vec![
                    GExpr::and(vec![ga.clone(), gb.clone()]),
                    GExpr::and(vec![ga.negate(), gb.negate()]),
                ])
            }
            Formula::Forall(v, g) => GExpr::and(
                (0..n)
                    .map(|e| match v {
                        Var::X => self.ground(g, e, ey),
                        Var::Y => self.ground(g, ex, e),
                    })
                    .collect(),
            ),
            Formula::Exists(v, g) => GExpr::or(
                (0..n)
                    .map(|e| match v {
                        Var::X => self.ground(g, e, ey),
                        Var::Y => self.ground(g, ex, e),
                    })
                    .collect(),
            ),
            Formula::CountExists(cmp, k, v, g) => GExpr::Count {
                cmp: *cmp,
                k: *k,
                children: (0..n)
                    .map(|e| match v {
                        Var::X => self.ground(g, e, ey),
                        Var::Y => self.ground(g, ex, e),
                    })
                    .collect(),
            },
        }
    }
}

struct CardCheck {
    pred: PredId,
    cmp: Comparator,
    bound: usize,
    total_atoms: usize,
}

struct Dfs {
    atoms: Vec<OAtom>,
    constraints: Vec<GExpr>,
    touching: Vec<Vec<usize>>,
    weights: Vec<Option<(Rational, Rational)>>,
    cards: Vec<CardCheck>,
    // per-predicate (true_count, assigned_count)
    pred_counts: Vec<(usize, usize)>,
    assign: Vec<Option<bool>>,
    satisfied: Vec<bool>,
    by_ordering: bool,
    linear: Option<PredId>,
    total: Rational,
    per_ordering: BTreeMap<Vec<usize>, Rational>,
    n: usize,
}

impl Dfs {
    fn run(&mut self, depth: usize, weight: Rational) {
        if depth == self.atoms.len() {
            self.leaf(weight);
            return;
        }
        for val in [true, false] {
            self.assign[depth] = Some(val);
            let atom = self.atoms[depth];
            let pid = atom.pred.0;
            self.pred_counts[pid].1 += 1;
            if val {
                self.pred_counts[pid].0 += 1;
            }

            if self.card_feasible(pid) {
                let mut newly = Vec::new();
                let mut pruned = false;
                for idx in 0..self.touching[depth].len() {
                    let ci = self.touching[depth][idx];
                    if self.satisfied[ci] {
                        continue;
                    }
                    match self.constraints[ci].eval3(&self.assign) {
                        Some(false) => {
                            pruned = true;
                            break;
                        }
                        Some(true) => {
                            self.satisfied[ci] = true;
                            newly.push(ci);
                        }
                        None => {}
                    }
                }
                if !pruned {
                    let w = match &self.weights[depth] {
                        Some((wp, wn)) => &weight * if val { wp } else { wn },
                        None => weight.clone(),
                    };
                    self.run(depth + 1, w);
                }
                for ci in newly {
                    self.satisfied[ci] = false;
                }
            }

            if val {
                self.pred_counts[pid].0 -= 1;
            }
            self.pred_counts[pid].1 -= 1;
            self.assign[depth] = None;
        }
    }

    fn card_feasible(&self, pid: usize) -> bool {
        for c in &self.cards {
            if c.pred.0 != pid {
                continue;
            }
            let (t, a) = self.pred_counts[pid];
            let remaining = c.total_atoms - a;
            match c.cmp {
                Comparator::Le | Comparator::Eq if t > c.bound => return false,
                _ => {}
            }
            match c.cmp {
                Comparator::Ge | Comparator::Eq if t + remaining < c.bound => return false,
                _ => {}
            }
        }
        true
    }

    fn leaf(&mut self, weight: Rational) {
        for c in &self.cards {
            let t = self.pred_counts[c.pred.0].0;
            let ok = match c.cmp {
                Comparator::Le => t <= c.bound,
                Comparator::Eq => t == c.bound,
                Comparator::Ge => t >= c.bound,
            };
            if !ok {
                return;
            }
        }
        debug_assert!(self
            .constraints
            .iter()
            .all(|c| c.eval3(&self.assign) == Some(true)));
        self.total += &weight;
        if self.by_ordering {
            if let Some(lin) = self.linear {
                let mut key = vec![0usize; self.n];
                for (i, atom) in self.atoms.iter().enumerate() {
                    if atom.pred == lin && self.assign[i] == Some(true) {
                        if let Some(b) = atom.b {
                            if atom.a != b {
                                key[b] += 1; // number of strict predecessors
                            }
                        }
                    }
                }
                *self
                    .per_ordering
                    .entry(key)
                    .or_insert_with(Rational::zero) += &weight;
            }
        }
    }

}

fn build_and_run(p: &Problem, by_ordering: bool) -> Result<Dfs> {
    let n = p.domain_size;
    let vocab = &p.vocab;

    let mut atoms = Vec::new();
    for pred in vocab.ids() {
        match vocab.arity(pred) {
            1 => (0..n).for_each(|a| atoms.push(OAtom { pred, a, b: None })),
            _ => {
                for a in 0..n {
                    for b in 0..n {
                        atoms.push(OAtom { pred, a, b: Some(b) });
                    }
                }
            }
        }
    }
    if atoms.len() > ATOM_CAP {
        return Err(Error::Infeasible(format!(
            "Herbrand base has {} atoms; the brute-force oracle refuses inputs above {ATOM_CAP}",
            atoms.len()
        )));
    }

    for pred in vocab.ids() {
        if let (WeightVal::Sym(_), _) | (_, WeightVal::Sym(_)) = p.weights.get(pred) {
            return Err(Error::OutOfScope(
                "the brute-force oracle requires rational weights".to_string(),
            ));
        }
    }

    if p.axioms.pred || p.axioms.pred2 {
        return Err(Error::OutOfScope(
            "expand predecessor axioms before calling the oracle".to_string(),
        ));
    }

    let grounder = Grounder {
        problem: p,
        atoms: atoms.clone(),
    };

    let mut constraints = Vec::new();
    for s in &p.sentences {
        match grounder.ground(s, 0, 0) {
            GExpr::False => {
                constraints.push(GExpr::False);
            }
            GExpr::True => {}
            g => constraints.push(g),
        }
    }
    if let Some(lin) = p.axioms.linear {
        let at = |a: usize, b: usize| GExpr::Atom(grounder.atom_index(lin, a, Some(b)));
        for a in 0..n {
            constraints.push(at(a, a)); // reflexive
            for b in 0..n {
                if a < b {
                    constraints.push(GExpr::or(vec![at(a, b), at(b, a)])); // total
                    constraints.push(GExpr::or(vec![at(a, b).negate(), at(b, a).negate()]));
                    // antisymmetric
                }
                for c in 0..n {
                    if a != b && b != c && a != c {
                        constraints.push(GExpr::or(vec![
                            at(a, b).negate(),
                            at(b, c).negate(),
                            at(a, c),
                        ])); // transitive
                    }
                }
            }
        }
    }

    let mut touching = vec![Vec::new(); atoms.len()];
    for (ci, c) in constraints.iter().enumerate() {
        let mut used = Vec::new();
        c.atoms(&mut used);
        for a in used {
            touching[a].push(ci);
        }
    }
    let weights: Vec<Option<(Rational, Rational)>> = atoms
        .iter()
        .map(|a| {
            let (wp, wn) = p.weights.get(a.pred);
            match (wp, wn) {
                (WeightVal::Rat(x), WeightVal::Rat(y)) => {
                    if x.is_one() && y.is_one() {
                        None
                    } else {
                        Some((x, y))
                    }
                }
                _ => unreachable!("checked above"),
            }
        })
        .collect();

    let cards: Vec<CardCheck> = p
        .constraints
        .iter()
        .map(|c| {
            Ok(CardCheck {
                pred: c.pred,
                cmp: c.cmp,
                bound: c.bound.eval(n, p.param_m)?,
                total_atoms: vocab.ground_atoms(c.pred, n),
            })
        })
        .collect::<Result<_>>()?;

    let num_constraints = constraints.len();
    let num_atoms = atoms.len();
    let mut dfs = Dfs {
        atoms,
        constraints,
        touching,
        weights,
        cards,
        pred_counts: vec![(0, 0); vocab.len()],
        assign: vec![None; num_atoms],
        satisfied: vec![false; num_constraints],
        by_ordering,
        linear: p.axioms.linear,
        total: Rational::zero(),
        per_ordering: BTreeMap::new(),
        n,
    };

    // constraints already false after grounding mean zero straight away
    if dfs.constraints.iter().any(|c| matches!(c, GExpr::False)) {
        return Ok(dfs);
    }
    dfs.run(0, Rational::one());
    Ok(dfs)
}

/// Exact WFOMC by exhaustive enumeration of all possible worlds. Checks
/// sentences (with native counting-quantifier satisfaction), cardinality
/// constraints and, when declared, the four linear order axioms on the
/// designated predicate.
pub fn brute_force_wfomc(p: &Problem) -> Result<Rational> {
    Ok(build_and_run(p, false)?.total)
}

/// Like [`brute_force_wfomc`] but tallies the weight per domain ordering
/// (keyed by each element's number of strict predecessors). Requires the
/// linear order axiom.
pub fn brute_force_by_ordering(p: &Problem) -> Result<BTreeMap<Vec<usize>, Rational>> {
    if p.axioms.linear.is_none() {
        return Err(Error::Invalid(
            "per-ordering tally requires the linear order axiom".to_string(),
        ));
    }
    Ok(build_and_run(p, true)?.per_ordering)
}

fn rational_pow(r: &Rational, e: usize) -> Rational {
    let mut acc = Rational::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * base.clone();
        }
    }
    acc
}

fn choose_iter(pool: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(pool: &[usize], k: usize, start: usize, current: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if current.len() == k {
            f(current);
            return;
        }
        let needed = k - current.len();
        for i in start..=pool.len().saturating_sub(needed) {
            current.push(pool[i]);
            rec(pool, k, i + 1, current, f);
            current.pop();
        }
    }
    if k == 0 {
        f(&[]);
        return;
    }
    rec(pool, k, 0, &mut Vec::new(), f);
}

fn smokers_distribution(
    n: usize,
    w: &Rational,
    graphs: &mut dyn FnMut(&mut dyn FnMut(&[(usize, usize)])),
) -> Vec<Rational> {
    let mut per_k = vec![Rational::zero(); n + 1];
    graphs(&mut |edges: &[(usize, usize)]| {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        for sm_mask in 0u32..(1u32 << n) {
            let sm = |i: usize| sm_mask >> i & 1 == 1;
            let mut satisfied = 0usize;
            for x in 0..n {
                for y in 0..n {
                    // Sm(x) & E(x,y) -> Sm(y)
                    if !(sm(x) && adj[x][y] && !sm(y)) {
                        satisfied += 1;
                    }
                }
            }
            let k = (0..n).filter(|&i| sm(i)).count();
            per_k[k] += rational_pow(w, satisfied);
        }
    });
    let total: Rational = per_k.iter().fold(Rational::zero(), |a, b| a + b);
    assert!(!total.is_zero());
    per_k.into_iter().map(|v| v / &total).collect()
}

/// Distribution of the number of smokers in the ring model: a Hamiltonian
/// cycle on one fixed ordering plus exactly m extra non-cycle edges (the
/// ordering count cancels in the normalized distribution), with each world
/// weighted by w^(number of satisfied groundings of the smokers rule).
pub fn smokers_oracle(n: usize, m: usize, w: &Rational) -> Result<Vec<Rational>> {
    if n < 3 {
        return Err(Error::Infeasible(
            "smokers oracle requires n >= 3 for a simple cycle".to_string(),
        ));
    }
    let max_extra = n * (n - 1) / 2 - n;
    if m > max_extra {
        return Err(Error::Infeasible(format!(
            "{m} extra edges exceed the {max_extra} available non-cycle pairs"
        )));
    }
    let cycle: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            (i.min(j), i.max(j))
        })
        .collect();
    let mut non_cycle = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if !cycle.contains(&(a, b)) {
                non_cycle.push((a, b));
            }
        }
    }
    let idx: Vec<usize> = (0..non_cycle.len()).collect();
    Ok(smokers_distribution(n, w, &mut |emit| {
        choose_iter(&idx, m, &mut |sel| {
            let mut edges = cycle.clone();
            edges.extend(sel.iter().map(|&i| non_cycle[i]));
            emit(&edges);
        });
    }))
}

/// Distribution of the number of smokers over all undirected graphs with
/// exactly n + m edges (the completely random comparison model).
pub fn smokers_random_oracle(n: usize, m: usize, w: &Rational) -> Result<Vec<Rational>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    if n + m > pairs.len() {
        return Err(Error::Infeasible(format!(
            "{} edges exceed the {} available pairs",
            n + m,
            pairs.len()
        )));
    }
    let idx: Vec<usize> = (0..pairs.len()).collect();
    Ok(smokers_distribution(n, w, &mut |emit| {
        choose_iter(&idx, n + m, &mut |sel| {
            let edges: Vec<(usize, usize)> = sel.iter().map(|&i| pairs[i]).collect();
            emit(&edges);
        });
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};
    use crate::logic::parse_problem;

    #[test]
    fn unary_sentence_squares_weight() {
        // forall x P(x) at n=2 with w(P)=a: a^2
        let p = parse_problem("forall x. P(x)\nweight P = 3, 1\nn = 2").unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(9));
    }

    #[test]
    fn empty_theory_counts_all_worlds() {
        let p = parse_problem("predicate P/1\nn = 2").unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(4));
    }

    #[test]
    fn head_tail_with_linear_order() {
        let p = parse_problem(
            "forall x forall y. (T(x) & Leq(x,y)) -> T(y)\naxiom linear(Leq)\nn = 3",
        )
        .unwrap();
        // (n+1) monotone labelings per ordering, n! orderings
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(24));
    }

    #[test]
    fn per_ordering_counts_are_symmetric() {
        let p = parse_problem(
            "forall x forall y. (T(x) & Leq(x,y)) -> T(y)\naxiom linear(Leq)\nn = 3",
        )
        .unwrap();
        let tallies = brute_force_by_ordering(&p).unwrap();
        assert_eq!(tallies.len(), 6);
        for v in tallies.values() {
            assert_eq!(*v, rat_int(4));
        }
    }

    #[test]
    fn native_exactly_one_counting() {
        // Perm is a permutation without fixed points; n=2 has exactly 1 per
        // ordering-free world count... both elements must map to each other.
        let p = parse_problem(
            "forall x. !Perm(x,x)\nforall x exists[=1] y. Perm(x,y)\nforall y exists[=1] x. Perm(x,y)\nn = 2",
        )
        .unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(1));
    }

    #[test]
    fn predecessor_theory_has_factorial_models() {
        // full theory with counting quantifiers, checked natively at n=2
        let p = parse_problem(
            "forall x. !Perm(x,x)
forall x exists[=1] y. Perm(x,y)
forall y exists[=1] x. Perm(x,y)
forall x forall y. Pred(x,y) -> Perm(x,y)
forall x forall y. Pred(x,y) -> Leq(x,y)
constraint |Pred| = n-1
axiom linear(Leq)
n = 2",
        )
        .unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(2));
    }

    #[test]
    fn skolem_negative_weights() {
        // forall x exists y Fr(x,y) skolemized: each row nonempty nets 3*3
        let p = parse_problem(
            "forall x forall y. !Fr(x,y) | S1(x)\nweight S1 = 1, -1\nn = 2",
        )
        .unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(9));
    }

    #[test]
    fn cardinality_constraint_counts_subsets() {
        let p = parse_problem("predicate P/1\nconstraint |P| = 1\nn = 4").unwrap();
        assert_eq!(brute_force_wfomc(&p).unwrap(), rat_int(4));
    }

    #[test]
    fn refuses_oversized_inputs() {
        let p = parse_problem("predicate E/2\npredicate F/2\nn = 4").unwrap();
        let err = brute_force_wfomc(&p).unwrap_err();
        match err {
            Error::Infeasible(msg) => assert!(msg.contains("32"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn smokers_oracle_uniform_when_weight_one() {
        let d = smokers_oracle(5, 2, &rat_int(1)).unwrap();
        for (k, p) in d.iter().enumerate() {
            let binom = crate::algebra::multinomial(&[k as u64, (5 - k) as u64]);
            assert_eq!(*p, Rational::new(binom, 32.into()));
        }
    }

    #[test]
    fn smokers_oracle_is_symmetric() {
        let d = smokers_oracle(5, 2, &rat(2, 1)).unwrap();
        let total: Rational = d.iter().fold(Rational::zero(), |a, b| a + b);
        assert_eq!(total, Rational::one());
        for k in 0..=5 {
            assert_eq!(d[k], d[5 - k]);
        }
    }

    #[test]
    fn smokers_oracle_rejects_infeasible_m() {
        assert!(smokers_oracle(4, 3, &rat_int(2)).is_err());
    }

    #[test]
    fn random_graph_oracle_binomial_at_weight_one() {
        let d = smokers_random_oracle(4, 0, &rat_int(1)).unwrap();
        assert_eq!(d[0], rat(1, 16));
        assert_eq!(d[2], rat(6, 16));
    }
}
