use crate::algebra::{binom2, multinomial, Rational, RingElem};
use crate::kernel::CellParams;

/// Enumerates all p-vectors of weight n in lexicographic order.
fn compositions(n: usize, p: usize, f: &mut impl FnMut(&[u64])) {
    fn rec(rest: usize, idx: usize, current: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if idx + 1 == current.len() {
            current[idx] = rest as u64;
            f(current);
            return;
        }
        for v in 0..=rest {
            current[idx] = v as u64;
            rec(rest - v, idx + 1, current, f);
        }
    }
    if p == 0 {
        return;
    }
    rec(n, 0, &mut vec![0u64; p], f);
}

/// The closed-form sum over p-vectors for unordered parameters:
/// sum_k multinomial(k) * prod_{i<j} r_ij^(k_i k_j) * prod_i r_ii^C(k_i,2) w_i^k_i.
pub fn closed_form_wfomc(params: &CellParams, n: usize) -> RingElem {
    assert!(!params.ordered, "closed form requires unordered parameters");
    if n == 0 {
        return RingElem::one();
    }
    let p = params.num_cells();
    let mut sum = RingElem::zero();
    compositions(n, p, &mut |k| {
        let term = closed_form_term(params, k);
        sum += &term;
    });
    sum.normalized()
}

/// A single term of the closed-form sum (the level-n table entry shape).
pub(crate) fn closed_form_term(params: &CellParams, k: &[u64]) -> RingElem {
    let p = params.num_cells();
    let mut term = RingElem::Rat(Rational::from_integer(multinomial(k)));
    for i in 0..p {
        if k[i] == 0 {
            continue;
        }
        term = &term * &params.w[i].pow(k[i]);
        term = &term * &params.r[i][i].pow(binom2(k[i]));
        for j in (i + 1)..p {
            if k[j] > 0 {
                term = &term * &params.r[i][j].pow(k[i] * k[j]);
            }
        }
        if term.is_zero() {
            return term;
        }
    }
    term
}
