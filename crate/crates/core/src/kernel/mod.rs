//! Cell machinery: enumeration of valid cells, exact ground weighted model
//! counting over one or two constants, and the per-cell parameters (the `w`
//! vector and `r` matrix) that drive the counting engine.

use std::collections::BTreeMap;

use crate::algebra::{Mono, Poly, Rational, RingElem, VarSet, MAX_VARS};
use crate::logic::{Args, Formula, PredId, Var, Vocabulary};
use crate::{Error, Result};

use std::sync::Arc;

/// One of the two ground constants used for parameter computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Const {
    A,
    B,
}

/// A ground atom over the two-constant universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomKey {
    pub pred: PredId,
    pub a: Const,
    pub b: Option<Const>,
}

/// A single-variable atom: `P(x)` for unary P, `P(x,x)` for binary P.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellAtom {
    Unary(PredId),
    Diag(PredId),
}

impl CellAtom {
    pub fn pred(self) -> PredId {
        match self {
            CellAtom::Unary(p) | CellAtom::Diag(p) => p,
        }
    }

    fn key(self, c: Const) -> AtomKey {
        match self {
            CellAtom::Unary(p) => AtomKey {
                pred: p,
                a: c,
                b: None,
            },
            CellAtom::Diag(p) => AtomKey {
                pred: p,
                a: c,
                b: Some(c),
            },
        }
    }
}

/// A maximally consistent polarity assignment over the single-variable atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub polarity: Vec<bool>,
}

/// All valid cells of a matrix, in the canonical (lexicographic) order.
#[derive(Debug, Clone)]
pub struct CellSpace {
    pub atoms: Vec<CellAtom>,
    pub cells: Vec<Cell>,
}

impl CellSpace {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Human-readable cell description, e.g. `Sm(x) & !Fr(x,x)`.
    pub fn describe(&self, idx: usize, vocab: &Vocabulary) -> String {
        let cell = &self.cells[idx];
        let mut parts = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            let neg = if cell.polarity[i] { "" } else { "!" };
            let body = match atom {
                CellAtom::Unary(p) => format!("{}(x)", vocab.name(*p)),
                CellAtom::Diag(p) => format!("{}(x,x)", vocab.name(*p)),
            };
            parts.push(format!("{neg}{body}"));
        }
        parts.join(" & ")
    }
}

/// Positive and negative weight per predicate, already substituted for the
/// engine run (symbolic variables in place of constrained weights).
#[derive(Debug, Clone)]
pub struct EngineWeights {
    pub pos: Vec<RingElem>,
    pub neg: Vec<RingElem>,
    pub vars: Arc<VarSet>,
}

impl EngineWeights {
    pub fn unit(vocab: &Vocabulary, vars: Arc<VarSet>) -> Self {
        EngineWeights {
            pos: vec![RingElem::one(); vocab.len()],
            neg: vec![RingElem::one(); vocab.len()],
            vars,
        }
    }

    fn weight(&self, pred: PredId, polarity: bool) -> &RingElem {
        if polarity {
            &self.pos[pred.0]
        } else {
            &self.neg[pred.0]
        }
    }
}

fn const_of(v: Var, cx: Const, cy: Const) -> Const {
    match v {
        Var::X => cx,
        Var::Y => cy,
    }
}

/// Evaluates a quantifier-free formula at ground constants. Equality is the
/// interpreted built-in: true iff both arguments denote the same constant.
pub fn eval_ground(
    f: &Formula,
    cx: Const,
    cy: Const,
    lookup: &impl Fn(AtomKey) -> bool,
) -> bool {
    match f {
        Formula::Atom { pred, args } => {
            let key = match args {
                Args::One(v) => AtomKey {
                    pred: *pred,
                    a: const_of(*v, cx, cy),
                    b: None,
                },
                Args::Two(u, v) => AtomKey {
                    pred: *pred,
                    a: const_of(*u, cx, cy),
                    b: Some(const_of(*v, cx, cy)),
                },
            };
            lookup(key)
        }
        Formula::Equality(u, v) => const_of(*u, cx, cy) == const_of(*v, cx, cy),
        Formula::Not(g) => !eval_ground(g, cx, cy, lookup),
        Formula::And(a, b) => eval_ground(a, cx, cy, lookup) && eval_ground(b, cx, cy, lookup),
        Formula::Or(a, b) => eval_ground(a, cx, cy, lookup) || eval_ground(b, cx, cy, lookup),
        Formula::Implies(a, b) => !eval_ground(a, cx, cy, lookup) || eval_ground(b, cx, cy, lookup),
        Formula::Iff(a, b) => eval_ground(a, cx, cy, lookup) == eval_ground(b, cx, cy, lookup),
        _ => unreachable!("matrix must be quantifier-free"),
    }
}

/// Canonical single-variable atom list: unary predicates by name, then
/// reflexive binary atoms by name.
pub fn cell_atoms(vocab: &Vocabulary) -> Vec<CellAtom> {
    let mut unary: Vec<PredId> = vocab.ids().filter(|p| vocab.arity(*p) == 1).collect();
    let mut binary: Vec<PredId> = vocab.ids().filter(|p| vocab.arity(*p) == 2).collect();
    unary.sort_by(|a, b| vocab.name(*a).cmp(vocab.name(*b)));
    binary.sort_by(|a, b| vocab.name(*a).cmp(vocab.name(*b)));
    unary
        .into_iter()
        .map(CellAtom::Unary)
        .chain(binary.into_iter().map(CellAtom::Diag))
        .collect()
}

/// Enumerates all valid cells: maximally consistent single-variable literal
/// sets that satisfy `matrix(x,x)`, and contain the order predicate's
/// reflexive atom positively when a linear order is declared.
pub fn enumerate_valid_cells(
    matrix: &Formula,
    vocab: &Vocabulary,
    linear: Option<PredId>,
) -> Result<CellSpace> {
    if matrix.has_quantifier() {
        return Err(Error::Invalid(
            "cell construction requires a quantifier-free matrix".to_string(),
        ));
    }
    let atoms = cell_atoms(vocab);
    if atoms.len() > 20 {
        return Err(Error::Infeasible(format!(
            "{} single-variable atoms exceed the supported cell space",
            atoms.len()
        )));
    }
    let k = atoms.len();
    let mut cells = Vec::new();
    for mask in 0u32..(1u32 << k) {
        // bit (k-1-i) holds atom i so that mask order is lexicographic order
        let polarity: Vec<bool> = (0..k).map(|i| mask >> (k - 1 - i) & 1 == 1).collect();
        if let Some(lin) = linear {
            let idx = atoms
                .iter()
                .position(|a| matches!(a, CellAtom::Diag(p) if *p == lin))
                .expect("order predicate is binary");
            if !polarity[idx] {
                continue;
            }
        }
        let lookup = |key: AtomKey| {
            let i = atoms
                .iter()
                .position(|a| a.key(Const::A) == key)
                .expect("single-variable atom");
            polarity[i]
        };
        if eval_ground(matrix, Const::A, Const::A, &lookup) {
            cells.push(Cell { polarity });
        }
    }
    Ok(CellSpace { atoms, cells })
}

/// Full ground-atom universe of the vocabulary over one or two constants,
/// in a stable order.
pub fn atom_universe(vocab: &Vocabulary, consts: &[Const]) -> Vec<AtomKey> {
    let mut out = Vec::new();
    for pred in vocab.ids() {
        match vocab.arity(pred) {
            1 => {
                for &c in consts {
                    out.push(AtomKey {
                        pred,
                        a: c,
                        b: None,
                    });
                }
            }
            _ => {
                for &c1 in consts {
                    for &c2 in consts {
                        out.push(AtomKey {
                            pred,
                            a: c1,
                            b: Some(c2),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Exact WMC of a conjunction of ground formulas by exhaustive enumeration
/// over the atoms not fixed by `fixed`. Fixed atoms contribute weight one;
/// their weights are accounted for where they were fixed.
pub fn wmc_ground(
    vocab: &Vocabulary,
    weights: &EngineWeights,
    conjuncts: &[(&Formula, Const, Const)],
    fixed: &BTreeMap<AtomKey, bool>,
) -> RingElem {
    let universe = atom_universe(
        vocab,
        if conjuncts.iter().any(|(_, cx, cy)| *cx != *cy || *cx == Const::B)
            || fixed.keys().any(|k| k.a == Const::B || k.b == Some(Const::B))
        {
            &[Const::A, Const::B]
        } else {
            &[Const::A]
        },
    );
    let free: Vec<AtomKey> = universe
        .iter()
        .copied()
        .filter(|k| !fixed.contains_key(k))
        .collect();

    // weights are rationals or single-variable powers, so each satisfying
    // assignment contributes one monomial; accumulate (coefficient, monomial)
    let as_mono = |re: &RingElem| -> Option<(Rational, Mono)> {
        match re {
            RingElem::Rat(r) => Some((r.clone(), [0u16; MAX_VARS])),
            RingElem::Poly(p) => {
                let mut it = p.terms();
                let (m, c) = it.next()?;
                if it.next().is_some() {
                    return None;
                }
                Some((c.clone(), *m))
            }
        }
    };
    let mono_weights: Option<Vec<[(Rational, Mono); 2]>> = free
        .iter()
        .map(|k| {
            let pos = as_mono(weights.weight(k.pred, true))?;
            let neg = as_mono(weights.weight(k.pred, false))?;
            Some([pos, neg])
        })
        .collect();

    let mut assignment: BTreeMap<AtomKey, bool> = fixed.clone();
    let mut acc_poly = Poly::zero(weights.vars.clone());
    let mut acc_general = RingElem::zero();

    let nfree = free.len();
    assert!(nfree <= 26, "ground atom universe too large");
    for mask in 0u64..(1u64 << nfree) {
        for (i, k) in free.iter().enumerate() {
            assignment.insert(*k, mask >> i & 1 == 1);
        }
        let lookup = |key: AtomKey| *assignment.get(&key).expect("atom in universe");
        if !conjuncts
            .iter()
            .all(|(f, cx, cy)| eval_ground(f, *cx, *cy, &lookup))
        {
            continue;
        }
        match &mono_weights {
            Some(tab) => {
                let mut coeff = Rational::from_integer(1.into());
                let mut mono = [0u16; MAX_VARS];
                for (i, _) in free.iter().enumerate() {
                    let (c, m) = &tab[i][if mask >> i & 1 == 1 { 0 } else { 1 }];
                    coeff *= c;
                    for l in 0..MAX_VARS {
                        mono[l] += m[l];
                    }
                }
                acc_poly.add_term(mono, coeff);
            }
            None => {
                let mut w = RingElem::one();
                for (i, k) in free.iter().enumerate() {
                    w = &w * weights.weight(k.pred, mask >> i & 1 == 1);
                }
                acc_general += &w;
            }
        }
    }
    if mono_weights.is_some() {
        RingElem::Poly(acc_poly).normalized()
    } else {
        acc_general
    }
}

/// Parameters for the counting engine: w vector and r matrix over the valid
/// cells. In the ordered variant, `r[i][j]` is indexed with i the cell of the
/// NEW (greater) element A and j the cell of an OLD element B, conditioned on
/// `B <= A` and `!(A <= B)`.
#[derive(Debug, Clone)]
pub struct CellParams {
    pub w: Vec<RingElem>,
    pub r: Vec<Vec<RingElem>>,
    pub ordered: bool,
}

impl CellParams {
    pub fn num_cells(&self) -> usize {
        self.w.len()
    }
}

/// WMC of `matrix(A,A)` conditioned on the cell, with the cell literal
/// weights folded in once.
pub fn compute_w(
    matrix: &Formula,
    vocab: &Vocabulary,
    space: &CellSpace,
    cell_idx: usize,
    weights: &EngineWeights,
) -> RingElem {
    let cell = &space.cells[cell_idx];
    let mut fixed = BTreeMap::new();
    let mut lit_weight = RingElem::one();
    for (i, atom) in space.atoms.iter().enumerate() {
        fixed.insert(atom.key(Const::A), cell.polarity[i]);
        lit_weight = &lit_weight * weights.weight(atom.pred(), cell.polarity[i]);
    }
    let residual = wmc_ground(vocab, weights, &[(matrix, Const::A, Const::A)], &fixed);
    &lit_weight * &residual
}

/// WMC of `matrix(A,B) & matrix(B,A)` conditioned on cell i at A and cell j
/// at B, with cell-atom weights set to one. With `ordered`, additionally
/// conditioned on `B <= A` and `!(A <= B)` (A is the new element).
pub fn compute_r(
    matrix: &Formula,
    vocab: &Vocabulary,
    space: &CellSpace,
    cell_i: usize,
    cell_j: usize,
    weights: &EngineWeights,
    ordered: Option<PredId>,
) -> RingElem {
    let mut fixed = BTreeMap::new();
    for (idx, c) in [(cell_i, Const::A), (cell_j, Const::B)] {
        let cell = &space.cells[idx];
        for (i, atom) in space.atoms.iter().enumerate() {
            fixed.insert(atom.key(c), cell.polarity[i]);
        }
    }
    if let Some(lin) = ordered {
        fixed.insert(
            AtomKey {
                pred: lin,
                a: Const::B,
                b: Some(Const::A),
            },
            true,
        );
        fixed.insert(
            AtomKey {
                pred: lin,
                a: Const::A,
                b: Some(Const::B),
            },
            false,
        );
    }
    wmc_ground(
        vocab,
        weights,
        &[(matrix, Const::A, Const::B), (matrix, Const::B, Const::A)],
        &fixed,
    )
}

/// Computes the full parameter set for a matrix.
pub fn compute_params(
    matrix: &Formula,
    vocab: &Vocabulary,
    space: &CellSpace,
    weights: &EngineWeights,
    ordered: Option<PredId>,
) -> CellParams {
    let p = space.len();
    let w: Vec<RingElem> = (0..p)
        .map(|k| compute_w(matrix, vocab, space, k, weights))
        .collect();
    let r: Vec<Vec<RingElem>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| compute_r(matrix, vocab, space, i, j, weights, ordered))
                .collect()
        })
        .collect();
    CellParams {
        w,
        r,
        ordered: ordered.is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat_int, VarSet};
    use crate::logic::{parse_formula, Vocabulary};

    fn unit_weights(vocab: &Vocabulary) -> EngineWeights {
        EngineWeights::unit(vocab, VarSet::new(vec![]))
    }

    #[test]
    fn four_cells_for_smokers_matrix() {
        let mut vocab = Vocabulary::new();
        let matrix = parse_formula("(Sm(x) & Fr(x,y)) -> Sm(y)", &mut vocab).unwrap();
        let space = enumerate_valid_cells(&matrix, &vocab, None).unwrap();
        assert_eq!(space.len(), 4);
    }

    #[test]
    fn invalid_cells_are_dropped() {
        let mut vocab = Vocabulary::new();
        let matrix = parse_formula("F(x,y) & (G(x) | H(x))", &mut vocab).unwrap();
        let space = enumerate_valid_cells(&matrix, &vocab, None).unwrap();
        // F(x,x) must hold and at least one of G(x), H(x): 3 of 8 survive
        assert_eq!(space.len(), 3);
        for (i, _) in space.cells.iter().enumerate() {
            let desc = space.describe(i, &vocab);
            assert!(!desc.contains("!G(x) & !H(x)"), "{desc}");
        }
    }

    #[test]
    fn three_cells_with_linear_order() {
        let (vocab, space, _) = three_way_setup();
        assert_eq!(space.len(), 3);
        let leq = vocab.lookup("Leq").unwrap();
        let leq_idx = space
            .atoms
            .iter()
            .position(|a| matches!(a, CellAtom::Diag(p) if *p == leq))
            .unwrap();
        for c in &space.cells {
            assert!(c.polarity[leq_idx], "every valid cell contains x <= x");
        }
    }

    fn three_way_setup() -> (Vocabulary, CellSpace, Formula) {
        let mut vocab = Vocabulary::new();
        let matrix = parse_formula(
            "(!H(x) | !T(x)) & ((H(y) & Leq(x,y)) -> H(x)) & ((T(x) & Leq(x,y)) -> T(y))",
            &mut vocab,
        )
        .unwrap();
        let leq = vocab.lookup("Leq").unwrap();
        let space = enumerate_valid_cells(&matrix, &vocab, Some(leq)).unwrap();
        (vocab, space, matrix)
    }

    /// Index of the cell with the given polarities for (H, T).
    fn cell_idx(space: &CellSpace, vocab: &Vocabulary, h: bool, t: bool) -> usize {
        let h_id = vocab.lookup("H").unwrap();
        let t_id = vocab.lookup("T").unwrap();
        let hi = space
            .atoms
            .iter()
            .position(|a| matches!(a, CellAtom::Unary(p) if *p == h_id))
            .unwrap();
        let ti = space
            .atoms
            .iter()
            .position(|a| matches!(a, CellAtom::Unary(p) if *p == t_id))
            .unwrap();
        space
            .cells
            .iter()
            .position(|c| c.polarity[hi] == h && c.polarity[ti] == t)
            .unwrap()
    }

    #[test]
    fn three_way_split_ordered_r_matrix() {
        let (vocab, space, matrix) = three_way_setup();
        let leq = vocab.lookup("Leq").unwrap();
        let weights = unit_weights(&vocab);
        let params = compute_params(&matrix, &vocab, &space, &weights, Some(leq));

        let head = cell_idx(&space, &vocab, true, false);
        let tail = cell_idx(&space, &vocab, false, true);
        let mid = cell_idx(&space, &vocab, false, false);

        // expected values with rows = new element's cell, cols = old element's cell
        let expect = [
            ((head, head), 1),
            ((head, tail), 0),
            ((head, mid), 0),
            ((tail, head), 1),
            ((tail, tail), 1),
            ((tail, mid), 1),
            ((mid, head), 1),
            ((mid, tail), 0),
            ((mid, mid), 1),
        ];
        for ((i, j), v) in expect {
            assert_eq!(
                params.r[i][j],
                RingElem::from_int(v),
                "r[{i}][{j}] for (new, old) = ({}, {})",
                space.describe(i, &vocab),
                space.describe(j, &vocab),
            );
        }
        for wk in &params.w {
            assert_eq!(*wk, RingElem::one());
        }
    }

    #[test]
    fn unordered_r_is_symmetric() {
        let mut vocab = Vocabulary::new();
        let matrix = parse_formula(
            "((Sm(x) & Fr(x,y)) -> Sm(y)) & (Fr(x,y) -> Fr(y,x))",
            &mut vocab,
        )
        .unwrap();
        let space = enumerate_valid_cells(&matrix, &vocab, None).unwrap();
        let weights = unit_weights(&vocab);
        let params = compute_params(&matrix, &vocab, &space, &weights, None);
        for i in 0..space.len() {
            for j in 0..space.len() {
                assert_eq!(params.r[i][j], params.r[j][i]);
            }
        }
    }

    #[test]
    fn tautology_sums_both_polarities() {
        // P(A) | !P(A) with w(P)=a, wbar(P)=b gives a + b
        let mut vocab = Vocabulary::new();
        let f = parse_formula("P(x) | !P(x)", &mut vocab).unwrap();
        let vars = VarSet::new(vec!["a".into(), "b".into()]);
        let mut weights = EngineWeights::unit(&vocab, vars.clone());
        weights.pos[0] = RingElem::var(&vars, 0);
        weights.neg[0] = RingElem::var(&vars, 1);
        let got = wmc_ground(&vocab, &weights, &[(&f, Const::A, Const::A)], &BTreeMap::new());
        let expect = &RingElem::var(&vars, 0) + &RingElem::var(&vars, 1);
        assert_eq!(got, expect);
    }

    #[test]
    fn single_positive_atom_counts_one_model() {
        let mut vocab = Vocabulary::new();
        let f = parse_formula("P(x)", &mut vocab).unwrap();
        let weights = unit_weights(&vocab);
        let got = wmc_ground(&vocab, &weights, &[(&f, Const::A, Const::A)], &BTreeMap::new());
        assert_eq!(got, RingElem::one());
    }

    #[test]
    fn ordered_wmc_partitions_strict_order_cases() {
        // For each cell pair: ordered (B<A) + ordered (A<B) equals the
        // unordered WMC restricted to exactly one direction of the order.
        let (vocab, space, matrix) = three_way_setup();
        let leq = vocab.lookup("Leq").unwrap();
        let weights = unit_weights(&vocab);
        for i in 0..space.len() {
            for j in 0..space.len() {
                let mut fixed = BTreeMap::new();
                for (idx, c) in [(i, Const::A), (j, Const::B)] {
                    for (ai, atom) in space.atoms.iter().enumerate() {
                        fixed.insert(atom.key(c), space.cells[idx].polarity[ai]);
                    }
                }
                let conj = [(&matrix, Const::A, Const::B), (&matrix, Const::B, Const::A)];

                let mut with_b_lt_a = fixed.clone();
                with_b_lt_a.insert(AtomKey { pred: leq, a: Const::B, b: Some(Const::A) }, true);
                with_b_lt_a.insert(AtomKey { pred: leq, a: Const::A, b: Some(Const::B) }, false);
                let r1 = wmc_ground(&vocab, &weights, &conj, &with_b_lt_a);

                let mut with_a_lt_b = fixed.clone();
                with_a_lt_b.insert(AtomKey { pred: leq, a: Const::A, b: Some(Const::B) }, true);
                with_a_lt_b.insert(AtomKey { pred: leq, a: Const::B, b: Some(Const::A) }, false);
                let r2 = wmc_ground(&vocab, &weights, &conj, &with_a_lt_b);

                // unordered count over the two exactly-one-direction assignments
                let both = &r1 + &r2;

                let xor = parse_xor(&vocab, leq);
                let mut conj2: Vec<(&Formula, Const, Const)> = conj.to_vec();
                conj2.push((&xor, Const::A, Const::B));
                let unordered_xor = wmc_ground(&vocab, &weights, &conj2, &fixed);
                assert_eq!(both, unordered_xor, "cells ({i},{j})");
            }
        }
    }

    fn parse_xor(vocab: &Vocabulary, leq: PredId) -> Formula {
        // exactly one of A<=B, B<=A
        let ab = Formula::atom2(leq, Var::X, Var::Y);
        let ba = Formula::atom2(leq, Var::Y, Var::X);
        ab.clone().or(ba.clone()).and(ab.and(ba).not())
    }

    #[test]
    fn weight_folding_in_w() {
        let mut vocab = Vocabulary::new();
        let matrix = parse_formula("P(x,x) | !P(x,x)", &mut vocab).unwrap();
        let space = enumerate_valid_cells(&matrix, &vocab, None).unwrap();
        let vars = VarSet::new(vec![]);
        let mut weights = EngineWeights::unit(&vocab, vars);
        weights.pos[0] = RingElem::from_int(3);
        let space_pos = space
            .cells
            .iter()
            .position(|c| c.polarity[0])
            .unwrap();
        let w = compute_w(&matrix, &vocab, &space, space_pos, &weights);
        assert_eq!(w, RingElem::Rat(rat_int(3)));
    }
}
