use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};
use std::sync::Arc;

use num::traits::{One, Signed, Zero};

use super::{rational_from_str, Rational};

/// Upper bound on symbolic variables per problem. Exponent vectors are dense
/// fixed-width arrays so monomial compare/copy stays cheap.
pub const MAX_VARS: usize = 12;

/// Dense exponent vector; unused lanes stay zero. Array order is the
/// lexicographic order on exponent vectors.
pub type Mono = [u16; MAX_VARS];

const ZERO_MONO: Mono = [0; MAX_VARS];

/// The symbolic-variable universe of one problem, with optional per-variable
/// degree caps. A monomial exceeding a cap can never contribute to the final
/// coefficient extraction, so capped multiplication drops it eagerly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    caps: Vec<Option<u16>>,
}

impl VarSet {
    pub fn new(names: Vec<String>) -> Arc<Self> {
        let caps = vec![None; names.len()];
        Self::with_caps(names, caps)
    }

    pub fn with_caps(names: Vec<String>, caps: Vec<Option<u16>>) -> Arc<Self> {
        assert!(names.len() <= MAX_VARS, "too many symbolic variables");
        assert_eq!(names.len(), caps.len());
        Arc::new(VarSet { names, caps })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn cap(&self, i: usize) -> Option<u16> {
        self.caps[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn within_caps(&self, m: &Mono) -> bool {
        self.caps
            .iter()
            .enumerate()
            .all(|(i, c)| c.map_or(true, |cap| m[i] <= cap))
    }
}

fn mono_add(a: &Mono, b: &Mono) -> Mono {
    let mut out = ZERO_MONO;
    for i in 0..MAX_VARS {
        let s = a[i] as u32 + b[i] as u32;
        debug_assert!(s <= u16::MAX as u32, "monomial exponent overflow");
        out[i] = s as u16;
    }
    out
}

/// Multivariate polynomial with exact rational coefficients, normalized:
/// no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    vars: Arc<VarSet>,
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub fn zero(vars: Arc<VarSet>) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<VarSet>, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ZERO_MONO, c);
        }
        Poly { vars, terms }
    }

    pub fn var(vars: Arc<VarSet>, idx: usize) -> Self {
        assert!(idx < vars.len());
        let mut m = ZERO_MONO;
        m[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(m, Rational::one());
        Poly { vars, terms }
    }

    pub fn from_terms(vars: Arc<VarSet>, it: impl IntoIterator<Item = (Mono, Rational)>) -> Self {
        let mut p = Poly::zero(vars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&ZERO_MONO))
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.get(&ZERO_MONO).cloned();
        }
        None
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() || !self.vars.within_caps(&m) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_vars(&self, other: &Poly) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert!(self.same_vars(other), "polynomials over different variables");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert!(self.same_vars(other), "polynomials over different variables");
        let mut out = Poly::zero(self.vars.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = mono_add(m1, m2);
                if !self.vars.within_caps(&m) {
                    continue;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.vars.clone());
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (*m, -v)).collect(),
        }
    }

    pub fn pow(&self, e: u64) -> Poly {
        let mut acc = Poly::constant(self.vars.clone(), Rational::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Coefficient of `var^degree`, with that variable eliminated from the
    /// returned polynomial.
    pub fn coeff_of(&self, var: usize, degree: u16) -> Poly {
        let mut out = Poly::zero(self.vars.clone());
        for (m, c) in &self.terms {
            if m[var] == degree {
                let mut m2 = *m;
                m2[var] = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    pub fn max_degree(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    /// Drops terms rejected by the predicate. Used for reachability pruning.
    pub fn retain(&mut self, mut keep: impl FnMut(&Mono) -> bool) {
        self.terms.retain(|m, _| keep(m));
    }

    /// Substitutes rational values for every variable.
    pub fn eval(&self, values: &[Rational]) -> Rational {
        assert_eq!(values.len(), self.vars.len());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, v) in values.iter().enumerate() {
                for _ in 0..m[i] {
                    term *= v;
                }
            }
            acc += term;
        }
        acc
    }
}

/// One exact number: a rational, or a polynomial over the problem's symbolic
/// variables with rational coefficients.
#[derive(Debug, Clone)]
pub enum RingElem {
    Rat(Rational),
    Poly(Poly),
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        RingElem::Rat(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        RingElem::Rat(Rational::from_integer(n.into()))
    }

    pub fn var(vars: &Arc<VarSet>, idx: usize) -> Self {
        RingElem::Poly(Poly::var(vars.clone(), idx))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingElem::Rat(r) => r.is_zero(),
            RingElem::Poly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            RingElem::Rat(r) => r.is_one(),
            RingElem::Poly(p) => p.constant_value().map_or(false, |c| c.is_one()),
        }
    }

    /// Demotes constant polynomials to plain rationals.
    pub fn normalized(self) -> Self {
        match self {
            RingElem::Poly(p) => match p.constant_value() {
                Some(c) => RingElem::Rat(c),
                None => RingElem::Poly(p),
            },
            r => r,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            RingElem::Rat(r) => Some(r.clone()),
            RingElem::Poly(p) => p.constant_value(),
        }
    }

    fn promote(&self, vars: &Arc<VarSet>) -> Poly {
        match self {
            RingElem::Rat(r) => Poly::constant(vars.clone(), r.clone()),
            RingElem::Poly(p) => p.clone(),
        }
    }

    pub fn pow(&self, e: u64) -> RingElem {
        match self {
            RingElem::Rat(r) => {
                if e == 0 {
                    RingElem::one() // 0^0 = 1 by convention
                } else {
                    let mut acc = Rational::one();
                    let mut base = r.clone();
                    let mut e = e;
                    while e > 0 {
                        if e & 1 == 1 {
                            acc *= &base;
                        }
                        e >>= 1;
                        if e > 0 {
                            base = base.clone() * base;
                        }
                    }
                    RingElem::Rat(acc)
                }
            }
            RingElem::Poly(p) => RingElem::Poly(p.pow(e)).normalized(),
        }
    }

    /// Coefficient of `var^degree` with the variable eliminated.
    /// Rationals are treated as degree-0 polynomials.
    pub fn coeff_of(&self, var: usize, degree: u16) -> RingElem {
        match self {
            RingElem::Rat(r) => {
                if degree == 0 {
                    RingElem::Rat(r.clone())
                } else {
                    RingElem::zero()
                }
            }
            RingElem::Poly(p) => RingElem::Poly(p.coeff_of(var, degree)).normalized(),
        }
    }

    pub fn max_degree(&self, var: usize) -> u16 {
        match self {
            RingElem::Rat(_) => 0,
            RingElem::Poly(p) => p.max_degree(var),
        }
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        match self {
            RingElem::Rat(r) => r.clone(),
            RingElem::Poly(p) => p.eval(values),
        }
    }

    /// Parses the `Display` format back, resolving variable names in `vars`.
    pub fn parse_in(s: &str, vars: &Arc<VarSet>) -> Option<RingElem> {
        let s = s.trim();
        let mut acc = RingElem::zero();
        // split on top-level " + " / " - "
        let mut rest = s;
        let mut sign = Rational::one();
        loop {
            let (term, next) = match rest.find(" + ").map(|i| (i, 1)).into_iter().chain(
                rest.find(" - ").map(|i| (i, -1)),
            ).min_by_key(|(i, _)| *i) {
                Some((i, sgn)) => (&rest[..i], Some((&rest[i + 3..], sgn))),
                None => (rest, None),
            };
            let mut coeff = sign.clone();
            let mut mono = ZERO_MONO;
            for factor in term.split('*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return None;
                }
                if let Some(r) = rational_from_str(factor) {
                    coeff *= r;
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (n.trim(), e.trim().parse::<u16>().ok()?),
                    None => (factor, 1),
                };
                let idx = vars.index_of(name)?;
                mono[idx] = mono[idx].checked_add(exp)?;
            }
            let term_elem = if mono == ZERO_MONO {
                RingElem::Rat(coeff)
            } else {
                RingElem::Poly(Poly::from_terms(vars.clone(), [(mono, coeff)]))
            };
            acc = &acc + &term_elem;
            match next {
                Some((n, sgn)) => {
                    rest = n;
                    sign = if sgn < 0 {
                        -Rational::one()
                    } else {
                        Rational::one()
                    };
                }
                None => break,
            }
        }
        Some(acc.normalized())
    }
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RingElem::Rat(a), RingElem::Rat(b)) => a == b,
            (RingElem::Poly(a), RingElem::Poly(b)) => {
                match (a.constant_value(), b.constant_value()) {
                    (Some(x), Some(y)) => x == y,
                    (None, None) => a.same_vars(b) && a.terms == b.terms,
                    _ => false,
                }
            }
            (RingElem::Rat(a), RingElem::Poly(b)) | (RingElem::Poly(b), RingElem::Rat(a)) => {
                b.constant_value().map_or(false, |c| &c == a)
            }
        }
    }
}

impl Eq for RingElem {}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        match (self, rhs) {
            (RingElem::Rat(a), RingElem::Rat(b)) => RingElem::Rat(a + b),
            (RingElem::Poly(p), other) | (other, RingElem::Poly(p)) => {
                RingElem::Poly(p.add(&other.promote(p.vars()))).normalized()
            }
        }
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        self + &(-rhs)
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        match self {
            RingElem::Rat(r) => RingElem::Rat(-r),
            RingElem::Poly(p) => RingElem::Poly(p.neg()),
        }
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        match (self, rhs) {
            (RingElem::Rat(a), RingElem::Rat(b)) => RingElem::Rat(a * b),
            (RingElem::Poly(p), RingElem::Rat(r)) | (RingElem::Rat(r), RingElem::Poly(p)) => {
                RingElem::Poly(p.scale(r)).normalized()
            }
            (RingElem::Poly(a), RingElem::Poly(b)) => RingElem::Poly(a.mul(b)).normalized(),
        }
    }
}

impl AddAssign<&RingElem> for RingElem {
    fn add_assign(&mut self, rhs: &RingElem) {
        // In-place add for the hot accumulate path; avoids cloning self.
        match (&mut *self, rhs) {
            (RingElem::Rat(a), RingElem::Rat(b)) => *a += b,
            (RingElem::Poly(p), RingElem::Rat(b)) => {
                p.add_term(ZERO_MONO, b.clone());
            }
            (RingElem::Poly(p), RingElem::Poly(q)) => {
                assert!(p.same_vars(q));
                for (m, c) in &q.terms {
                    p.add_term(*m, c.clone());
                }
            }
            (slot @ RingElem::Rat(_), RingElem::Poly(_)) => {
                let sum = &*slot + rhs;
                *slot = sum;
            }
        }
    }
}

impl MulAssign<&RingElem> for RingElem {
    fn mul_assign(&mut self, rhs: &RingElem) {
        let prod = &*self * rhs;
        *self = prod;
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElem::Rat(r) => write!(f, "{r}"),
            RingElem::Poly(p) => {
                if p.is_zero() {
                    return write!(f, "0");
                }
                let mut first = true;
                // highest monomial first
                for (m, c) in p.terms.iter().rev() {
                    let c_print = if first {
                        c.clone()
                    } else if c.is_negative() {
                        write!(f, " - ")?;
                        -c
                    } else {
                        write!(f, " + ")?;
                        c.clone()
                    };
                    first = false;
                    let mut parts: Vec<String> = Vec::new();
                    if !c_print.is_one() || *m == ZERO_MONO {
                        parts.push(c_print.to_string());
                    }
                    for i in 0..p.vars.len() {
                        match m[i] {
                            0 => {}
                            1 => parts.push(p.vars.name(i).to_string()),
                            e => parts.push(format!("{}^{}", p.vars.name(i), e)),
                        }
                    }
                    write!(f, "{}", parts.join("*"))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};

    fn xy() -> Arc<VarSet> {
        VarSet::new(vec!["x".into(), "y".into()])
    }

    fn x_of(vs: &Arc<VarSet>) -> RingElem {
        RingElem::var(vs, 0)
    }

    #[test]
    fn poly_coeff_extraction() {
        let vs = xy();
        let x = x_of(&vs);
        // 3x^2 + 2x + 1
        let p = &(&(&RingElem::from_int(3) * &x.pow(2)) + &(&RingElem::from_int(2) * &x))
            + &RingElem::one();
        assert_eq!(p.coeff_of(0, 2), RingElem::from_int(3));
        assert_eq!(p.coeff_of(0, 1), RingElem::from_int(2));
        assert_eq!(p.coeff_of(0, 0), RingElem::one());
        assert_eq!(p.coeff_of(0, 3), RingElem::zero());
        // rationals behave as degree-0 polynomials
        let five = RingElem::from_int(5);
        assert_eq!(five.coeff_of(0, 0), RingElem::from_int(5));
        assert_eq!(five.coeff_of(0, 1), RingElem::zero());
    }

    #[test]
    fn binomial_expansion_coefficient() {
        let vs = xy();
        let x = x_of(&vs);
        // (1+x)^4: coefficient of x^2 is 6
        let p = (&RingElem::one() + &x).pow(4);
        assert_eq!(p.coeff_of(0, 2), RingElem::from_int(6));
    }

    #[test]
    fn zero_pow_zero_is_one() {
        assert_eq!(RingElem::zero().pow(0), RingElem::one());
    }

    #[test]
    fn caps_truncate_products() {
        let vs = VarSet::with_caps(vec!["x".into()], vec![Some(2)]);
        let x = RingElem::var(&vs, 0);
        let p = (&RingElem::one() + &x).pow(5);
        // degrees above 2 dropped
        assert_eq!(p.max_degree(0), 2);
        assert_eq!(p.coeff_of(0, 2), RingElem::from_int(10));
        assert_eq!(p.coeff_of(0, 1), RingElem::from_int(5));
    }

    #[test]
    fn display_and_parse_round_trip() {
        let vs = xy();
        let x = RingElem::var(&vs, 0);
        let y = RingElem::var(&vs, 1);
        let p = &(&(&RingElem::from_int(3) * &x.pow(2)) * &y) + &(&x - &RingElem::from_int(5));
        let s = p.to_string();
        let back = RingElem::parse_in(&s, &vs).unwrap();
        assert_eq!(back, p);
        let r = RingElem::Rat(rat(-7, 3));
        assert_eq!(RingElem::parse_in(&r.to_string(), &vs).unwrap(), r);
    }

    #[test]
    fn constant_poly_equals_rational() {
        let vs = xy();
        let x = RingElem::var(&vs, 0);
        let p = &(&x + &RingElem::one()) - &x;
        assert_eq!(p, RingElem::one());
        assert_eq!(p.normalized(), RingElem::Rat(rat_int(1)));
    }
}
